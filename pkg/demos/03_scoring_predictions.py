# %% [markdown]
# # Scoring a classifier against market labels
#
# A classifier's predictions arrive as one label per headline id. Scores are
# weighted by class support, so weighted recall always equals accuracy.

# %%
import numpy as np

from marketlabel import generate_synthetic_corpus, label_corpus
from marketlabel.ingest import PredictionSet
from marketlabel.labeler import gold_labels
from marketlabel.metrics import evaluate, format_table

corpus = generate_synthetic_corpus(5, 2000, 1000, seed=1)
labeled, _ = label_corpus(corpus.headlines, corpus.prices)
gold = gold_labels(labeled)
rng = np.random.default_rng(0)


def noisy_copy(name, keep):
    """A stand-in model that matches the gold label with probability ``keep``."""
    labels = {i: g if rng.random() < keep else int(rng.integers(-1, 2)) for i, g in gold.items()}
    return PredictionSet(name, labels)


models = [
    PredictionSet("Random", {i: int(rng.integers(-1, 2)) for i in gold}),
    PredictionSet("Always neutral", {i: 0 for i in gold}),
    noisy_copy("Weak model", 0.2),
    noisy_copy("Decent model", 0.5),
]

# %%
reports = []
for m in models:
    cm, rep = evaluate(gold, m)
    reports.append(rep)
print(format_table(reports))

# %% [markdown]
# A constant prediction gets zero precision on the classes it never predicts.
# The report lists those zero-division cases instead of hiding them.

# %%
cm, rep = evaluate(gold, models[1])
print(cm.counts)
print(rep.zero_division)
