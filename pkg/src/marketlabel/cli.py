"""Command line entry point: ``marketlabel <subcommand>``.

Exit codes: 0 success, 2 invalid arguments or configuration, 3 data error,
4 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import ensemble, ingest, labeler, metrics, signal_backtest
from .config import RunConfig
from .errors import DataError, ValidationError

log = logging.getLogger("marketlabel")

EXIT_OK, EXIT_VALIDATION, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4


class Run:
    """Resolved configuration plus an output directory that every write goes through."""

    def __init__(self, cfg: RunConfig, stdout=None):
        self.cfg = cfg
        self.out = Path(cfg.out)
        self.stdout = stdout or sys.stdout
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        p = (self.out / name).resolve()
        if self.out.resolve() not in p.parents:
            raise ValidationError(f"refusing to write outside {self.out}: {name}")
        p.parent.mkdir(parents=True, exist_ok=True)
        self.written.append(p)
        return p

    def say(self, text: str = "") -> None:
        print(text, file=self.stdout)


def _need(value, what):
    if not value:
        raise ValidationError(f"missing {what}")
    return value


def _write_json(path, obj):
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _shares_line(shares):
    return ", ".join(f"{ingest.LABEL_NAMES[k]} {v:.1%}" for k, v in shares.items())


# ------------------------------------------------------------------- subcommands

def cmd_gen_data(run: Run):
    c = run.cfg
    corpus = ingest.generate_synthetic_corpus(c.n_tickers, c.n_days, c.n_headlines, c.seed, c.window_len)
    hp, pp = run.path("headlines.jsonl"), run.path("prices.csv")
    ingest.write_headlines(corpus.headlines, hp)
    ingest.write_prices(corpus.prices, pp)
    run.say(f"wrote {len(corpus.headlines)} headlines to {hp}")
    run.say(f"wrote {len(corpus.prices)} price series to {pp}")
    return hp, pp


def _load_inputs(run: Run):
    c = run.cfg
    headlines = ingest.parse_headlines(_need(c.headlines, "headlines file (--headlines)"))
    prices = ingest.parse_prices(_need(c.prices, "prices file (--prices)"))
    if c.tagger:
        headlines = labeler.apply_tagger(headlines, labeler.LookupTagger.from_file(c.tagger))
    return headlines, prices


def cmd_label(run: Run, headlines=None, prices=None):
    if headlines is None:
        headlines, prices = _load_inputs(run)
    labeled, report = labeler.label_corpus(headlines, prices, run.cfg.label_config())
    labeler.write_labeled_corpus(labeled, run.path("labeled.jsonl"))
    labeler.write_report(report, run.path("label_report.json"))
    run.say(f"labeled {report.n_labeled} of {report.n_headlines} headlines ({report.n_unlabelable} unlabelable)")
    run.say(f"global labels:     {_shares_line(report.global_shares)}")
    run.say(f"per-ticker labels: {_shares_line(report.ticker_shares)}")
    return labeled, report


def _basket(run: Run, prices):
    members = run.cfg.basket or sorted(prices)
    return signal_backtest.basket_returns(prices, members)


def cmd_signal(run: Run, labeled=None, prices=None):
    c = run.cfg
    if labeled is None:
        labeled = labeler.read_labeled_corpus(_need(getattr(run, "labeled", None), "labeled corpus (--labeled)"))
        prices = ingest.parse_prices(c.prices) if c.prices else None
    calendar = _basket(run, prices).dates if prices else None
    sig = signal_backtest.build_signal(labeled, calendar)
    signal_backtest.write_signal(sig, run.path("signal.csv"))
    run.say(f"signal over {len(sig)} days")
    return sig


def cmd_backtest(run: Run, sig=None, prices=None):
    c = run.cfg
    if sig is None:
        sig = signal_backtest.read_signal(_need(getattr(run, "signal", None), "signal file (--signal)"))
        prices = ingest.parse_prices(_need(c.prices, "prices file (--prices)"))
    basket = _basket(run, prices)
    result = signal_backtest.run_backtest(sig, basket, c.mode, c.stream("random-benchmark"))
    signal_backtest.write_trackrecord(result, run.path("trackrecord.csv"))
    _write_json(
        run.path("backtest_summary.json"),
        {
            "mode": result.mode,
            "basket": list(basket.members),
            "n_days": len(result.dates) - 1,
            "summary": {k: vars(v) for k, v in result.summary.items()},
        },
    )
    run.say(signal_backtest.NOTICE)
    run.say(signal_backtest.format_summary(result))
    return result


def _gold(run: Run, labeled=None):
    if labeled is None:
        labeled = labeler.read_labeled_corpus(_need(getattr(run, "labeled", None), "labeled corpus (--labeled)"))
    return labeler.gold_labels(labeled)


def _read_predictions(run: Run):
    paths = _need(run.cfg.predictions, "prediction file(s)")
    model = getattr(run, "model", None)
    if model and len(paths) > 1:
        raise ValidationError("--model applies to a single predictions file")
    return [ingest.parse_predictions(p, model) for p in paths]


def cmd_eval(run: Run, labeled=None):
    gold = _gold(run, labeled)
    records = []
    for pred in _read_predictions(run):
        cm, rep = metrics.evaluate(gold, pred, run.cfg.allow_partial)
        if cm.n_missing:
            run.say(f"{pred.model}: scored {cm.total} of {len(gold)} headlines ({cm.n_missing} without prediction)")
        records.append(metrics.EvaluationRecord(rep, cm))
    metrics.write_reports(records, run.path("eval_report.jsonl"))
    run.say(metrics.format_table(r.report for r in records))
    return records


def cmd_bag(run: Run, labeled=None):
    preds = _read_predictions(run)
    bagged = ensemble.bag(preds, run.cfg.stream("tie-break"))
    ingest.write_predictions(bagged, run.path("bagged.csv"))
    run.say(f"bagged {len(preds)} prediction sets over {len(bagged)} headlines")
    if labeled is not None or getattr(run, "labeled", None):
        gold = _gold(run, labeled)
        rep = ensemble.independence_report(preds, gold, run.cfg.stream("tie-break"))
        rows = rep.individual + [rep.bagged]
        run.say(metrics.format_table(rows))
        run.say(f"bagging delta (F-score vs best member): {rep.bagging_delta:+.4f}"
                + ("  [no-improvement]" if rep.no_improvement else ""))
        run.say(f"mean pairwise kappa (descriptive diagnostic): {rep.mean_kappa:.3f}, "
                f"within gold class {rep.mean_conditional_kappa:.3f}")
        _write_json(run.path("bag_report.json"), rep.to_dict())
        return bagged, rep
    return bagged, None


def cmd_simulate(run: Run):
    a = run.sim
    model = ensemble.JuryModel(a["n"], a["accuracy"], tuple(a["error_split"]), a["rho"])
    gold_arr = np.random.default_rng(run.cfg.stream("simulate-gold")).integers(-1, 2, size=a["items"])
    gold = {f"item-{i:06d}": int(v) for i, v in enumerate(gold_arr)}
    preds = ensemble.simulate_jury(gold, model, run.cfg.stream("simulate-votes"))
    rep = ensemble.independence_report(preds, gold, run.cfg.stream("tie-break"))
    gold_counts = {lab: int(np.sum(gold_arr == lab)) for lab in ingest.LABELS}
    exact = ensemble.jury_accuracy(model, gold_label=gold_counts, seed=run.cfg.stream("simulate-mc"))
    out = {
        "model": {"n": model.n, "accuracy": model.accuracy, "error_split": list(model.error_split),
                  "rho": model.rho, "items": a["items"]},
        "jury_accuracy_exact": exact,
        "bagged_accuracy": rep.bagged.accuracy,
        "mean_individual_accuracy": rep.mean_individual_accuracy,
        "diagnostics": rep.to_dict(),
        "note": "agreement and kappa are descriptive diagnostics, not a formal independence test",
    }
    _write_json(run.path("simulate_report.json"), out)
    run.say(f"exact jury accuracy      {exact:.4f}")
    run.say(f"empirical bagged accuracy {rep.bagged.accuracy:.4f}")
    run.say(f"mean individual accuracy  {rep.mean_individual_accuracy:.4f}")
    run.say(f"mean pairwise kappa       {rep.mean_kappa:.4f}")
    run.say(f"kappa within gold class   {rep.mean_conditional_kappa:.4f}")
    return out


def _digest(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


STAGES = ("gen-data", "label", "signal", "backtest", "eval", "bag")


def cmd_pipeline(run: Run):
    """gen-data (when no input files) -> label -> signal -> backtest -> eval/bag."""
    c = run.cfg
    stage = "gen-data"
    try:
        if not (c.headlines and c.prices):
            hp, pp = cmd_gen_data(run)
            c.headlines, c.prices = str(hp), str(pp)
        stage = "label"
        headlines, prices = _load_inputs(run)
        labeled, _ = cmd_label(run, headlines, prices)
        stage = "signal"
        sig = cmd_signal(run, labeled, prices)
        stage = "backtest"
        cmd_backtest(run, sig, prices)
        if c.predictions:
            stage = "eval"
            cmd_eval(run, labeled)
            if len(c.predictions) > 1:
                stage = "bag"
                cmd_bag(run, labeled)
    except (DataError, ValidationError, FileNotFoundError) as exc:
        exc.args = (f"stage {stage}: {exc}",)
        raise

    out_root = run.out.resolve()
    files = sorted({p for p in run.written})
    manifest = {
        "seed": c.seed,
        "config": {k: v for k, v in c.to_dict().items() if k not in ("out", "headlines", "prices", "predictions")},
        "files": [
            {"path": p.relative_to(out_root).as_posix(), "sha256": _digest(p), "bytes": p.stat().st_size}
            for p in files
        ],
    }
    mp = run.path("manifest.json")
    _write_json(mp, manifest)
    run.say(f"manifest: {mp}")
    return manifest


# ------------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="run seed (default 0)")
    common.add_argument("--out", help="output directory (default ./out)")
    common.add_argument("-v", "--verbose", action="store_true")

    label_opts = argparse.ArgumentParser(add_help=False)
    label_opts.add_argument("--window-len", type=int, dest="window_len")
    label_opts.add_argument("--q-low", type=float, dest="q_low")
    label_opts.add_argument("--q-high", type=float, dest="q_high")
    label_opts.add_argument("--min-history", type=int, dest="min_history")

    bt_opts = argparse.ArgumentParser(add_help=False)
    bt_opts.add_argument("--basket", help="comma-separated basket tickers (default: all)")
    bt_opts.add_argument("--mode", choices=signal_backtest.MODES)

    p = argparse.ArgumentParser(prog="marketlabel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-data", parents=[common], help="write a synthetic headlines + prices corpus")
    s.add_argument("--tickers", type=int, dest="n_tickers")
    s.add_argument("--days", type=int, dest="n_days")
    s.add_argument("--headlines", type=int, dest="n_headlines")
    s.add_argument("--window-len", type=int, dest="window_len")

    s = sub.add_parser("label", parents=[common, label_opts], help="label headlines from price reactions")
    s.add_argument("--headlines")
    s.add_argument("--prices")
    s.add_argument("--tagger", help="JSON keyword -> tickers table for untagged headlines")

    s = sub.add_parser("signal", parents=[common, bt_opts], help="daily sentiment score from a labeled corpus")
    s.add_argument("--labeled", required=False)
    s.add_argument("--prices", help="prices file whose basket calendar anchors the days")

    s = sub.add_parser("backtest", parents=[common, bt_opts], help="label-validity backtest")
    s.add_argument("--signal")
    s.add_argument("--prices")

    s = sub.add_parser("eval", parents=[common], help="score prediction files against gold labels")
    s.add_argument("--labeled")
    s.add_argument("--predictions", nargs="+")
    s.add_argument("--model", help="model name for a single predictions file")
    s.add_argument("--allow-partial", action="store_true", default=None, dest="allow_partial")

    s = sub.add_parser("bag", parents=[common], help="majority-vote several prediction files")
    s.add_argument("--inputs", nargs="+", dest="predictions")
    s.add_argument("--labeled", help="gold labels for the comparison table")

    s = sub.add_parser("simulate", parents=[common], help="synthetic jury: exact vs empirical accuracy")
    s.add_argument("--n", type=int, default=5)
    s.add_argument("--accuracy", type=float, default=0.6)
    s.add_argument("--rho", type=float, default=0.0)
    s.add_argument("--items", type=int, default=10_000)
    s.add_argument("--error-split", type=float, nargs=2, default=(0.5, 0.5))

    s = sub.add_parser("pipeline", parents=[common, label_opts, bt_opts], help="run every stage and write a manifest")
    s.add_argument("--headlines")
    s.add_argument("--prices")
    s.add_argument("--predictions", nargs="+")
    s.add_argument("--tagger")
    return p


_CFG_KEYS = (
    "seed", "out", "window_len", "q_low", "q_high", "min_history", "mode", "basket",
    "headlines", "prices", "predictions", "tagger", "allow_partial", "n_tickers", "n_days", "n_headlines",
)


def resolve(args: argparse.Namespace, stdout=None) -> Run:
    cfg = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    changes = {k: getattr(args, k, None) for k in _CFG_KEYS}
    if isinstance(changes.get("basket"), str):
        changes["basket"] = [t.strip().upper() for t in changes["basket"].split(",") if t.strip()]
    cfg = cfg.replace(**changes)
    cfg.validate()
    run = Run(cfg, stdout)
    for extra in ("labeled", "signal", "model"):
        if getattr(args, extra, None):
            setattr(run, extra, getattr(args, extra))
    if args.command == "simulate":
        run.sim = {"n": args.n, "accuracy": args.accuracy, "rho": args.rho,
                   "items": args.items, "error_split": args.error_split}
        if args.items < 1:
            raise ValidationError("--items must be positive")
    return run


COMMANDS = {
    "gen-data": cmd_gen_data,
    "label": cmd_label,
    "signal": cmd_signal,
    "backtest": cmd_backtest,
    "eval": cmd_eval,
    "bag": cmd_bag,
    "simulate": cmd_simulate,
    "pipeline": cmd_pipeline,
}


def main(argv=None, stdout=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        run = resolve(args, stdout)
        COMMANDS[args.command](run)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
