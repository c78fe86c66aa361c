# %% [markdown]
# # When does majority voting help?
#
# Majority voting over several classifiers beats each member only when their
# mistakes are independent. Here each simulated juror is right with
# probability p. With probability rho the whole jury copies one shared draw.
# Otherwise each juror draws on their own.

# %%
from marketlabel.ensemble import JuryModel, bag, independence_report, jury_accuracy_exact, simulate_jury

for n in (1, 3, 5, 9, 15, 25):
    print(n, f"{jury_accuracy_exact(JuryModel(n, 0.6)):.4f}")

# %% [markdown]
# Three classes make ties possible even with an odd jury. A unique plurality
# wins. Otherwise a tie between negative and positive resolves to neutral,
# and any other tie is broken at random from a seeded stream.

# %%
import numpy as np

gold_arr = np.random.default_rng(1).integers(-1, 2, 10_000)
gold = {f"item-{i:06d}": int(v) for i, v in enumerate(gold_arr)}

for rho in (0.0, 0.25, 0.5, 0.8, 1.0):
    jury = simulate_jury(gold, JuryModel(5, 0.6, rho=rho), seed=2)
    rep = independence_report(jury, gold, seed=3)
    print(
        f"rho={rho:.2f}  individual={rep.mean_individual_accuracy:.3f}  "
        f"bagged={rep.bagged.accuracy:.3f}  kappa={rep.mean_kappa:.3f}  "
        f"kappa|gold={rep.mean_conditional_kappa:.3f}"
    )

# %% [markdown]
# Raw kappa stays well above zero even for independent jurors, because two
# accurate jurors agree by tracking the truth. Kappa computed inside each gold
# class removes that shared component and recovers rho.
#
# Bagging real predictions works the same way.

# %%
jury = simulate_jury(gold, JuryModel(3, 0.55), seed=4)
bagged = bag(jury, seed=5)
print(bagged.model, sum(bagged.labels[i] == g for i, g in gold.items()) / len(gold))
