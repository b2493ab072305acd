"""``impactlearn`` command line.

Subcommands: simulate, train, evaluate, compare, learning-curve, impact.
Failures print one JSON line ``{"error": "<module>.<Name>", "message": ...}``
on stderr and exit 1 (2 for usage errors).

Any option can also come from ``--config FILE``, an INI file whose ``[run]``
section uses the option's long name with underscores
(``learning_rate = 0.05``). Command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import tempfile
from pathlib import Path

from . import __version__, errors, metrics, pipeline
from .dataset import Schema, file_sha256
from .growth import GrowthParams, simulate
from .model import impact_scores
from .rng import derive_seed
from .trainer import TrainConfig

# output destinations, plus the model path (recorded by content hash instead),
# stay out of embedded configs so reruns into other directories are byte-identical
OUTPUT_OPTIONS = {"out", "model_out", "history_out", "report_out", "roc_out", "table_out", "config", "model"}


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise errors.UsageError(message)


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _add_data(p):
    g = p.add_argument_group("data")
    g.add_argument("--data", required=True, help="input CSV")
    g.add_argument("--schema", required=True, help="schema INI file")
    g.add_argument("--split", type=float, default=0.7, help="train fraction (default 0.7)")
    g.add_argument("--seed", type=int, default=0, help="root seed for every random stage")
    g.add_argument("--impute", choices=("mean", "median"), default="mean")
    g.add_argument("--scaler", choices=("minmax", "standard"), default="standard")
    g.add_argument("--task", choices=("classification", "regression"), default="classification")


def _add_training(p):
    g = p.add_argument_group("impact learning training")
    g.add_argument("--method", choices=("gd", "lstsq"), default="gd")
    g.add_argument("--learning-rate", type=float, default=0.01)
    g.add_argument("--epochs", type=int, default=1000)
    g.add_argument("--learn-r", action="store_true", help="optimize r instead of freezing it")
    g.add_argument("--l2", type=float, default=0.0)
    g.add_argument("--patience", type=int, default=0, help="early-stop patience (0 = off)")
    g.add_argument("--validation-fraction", type=float, default=0.0)
    g.add_argument("--degree", type=int, default=1)
    g.add_argument("--threshold", type=float, default=0.5)
    g.add_argument("--no-gauge-scaling", action="store_true",
                   help="use the raw learning rate for every parameter")
    g.add_argument("--knn-k", type=_ints, default=[3, 5, 7], help="KNN neighbour counts to sweep")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="impactlearn", description="Impact learning: fit, evaluate and compare.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    p = sub.add_parser("simulate", help="integrate a growth ODE and write a trajectory CSV")
    p.add_argument("--kind", choices=("malthusian", "logistic", "competition"), default="logistic")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--w", type=float, default=0.0, help="cross-impact weight (competition)")
    p.add_argument("--w-y", type=float, default=0.0, help="self-impact weight (competition)")
    p.add_argument("--x0", type=float, help="initial competitor population (coupled mode)")
    p.add_argument("--x-r", type=float, default=1.0)
    p.add_argument("--x-k", type=float, default=1.0)
    p.add_argument("--x-csv", help="CSV with an 'x' column of steps+1 exogenous samples")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit a model; write model JSON (+ loss history CSV)")
    _add_data(p)
    _add_training(p)
    p.add_argument("--algorithm", choices=pipeline.ALGORITHMS, default="impact")
    p.add_argument("--model-out", required=True)
    p.add_argument("--history-out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a saved model on the held-out split")
    _add_data(p)
    p.add_argument("--model", required=True, help="model JSON written by train")
    p.add_argument("--regression-on", choices=("score", "label"), default="score")
    p.add_argument("--report-out", required=True)
    p.add_argument("--roc-out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="rank impact learning against baselines")
    _add_data(p)
    _add_training(p)
    p.add_argument("--baselines", default="logistic,knn,gaussian_nb,bernoulli_nb,linear")
    p.add_argument("--regression-on", choices=("score", "label"), default="score")
    p.add_argument("--report-out", required=True)
    p.add_argument("--table-out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("learning-curve", help="cross-validated learning curve on the training split")
    _add_data(p)
    _add_training(p)
    p.add_argument("--algorithm", choices=pipeline.ALGORITHMS, default="impact")
    p.add_argument("--fractions", type=_floats, default=[0.1, 0.325, 0.55, 0.775, 1.0])
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_learning_curve)

    p = sub.add_parser("impact", help="per-feature impact scores of a saved impact model")
    _add_data(p)
    p.add_argument("--model", required=True)
    p.add_argument("--rows", choices=("train", "test"), default="train")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_impact)

    for action in sub.choices.values():
        action.add_argument("--config", help="INI file with a [run] section of option defaults")
    return parser


def run_config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in OUTPUT_OPTIONS and k != "func"}
    return json.loads(json.dumps(cfg))


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.learning_rate, epochs=args.epochs, learn_r=args.learn_r,
        init_seed=derive_seed(args.seed, "train"), l2=args.l2, early_stop_patience=args.patience,
        validation_fraction=args.validation_fraction, degree=args.degree, threshold=args.threshold,
        gauge_scaled_steps=not args.no_gauge_scaling)


def _prepare(args):
    return pipeline.prepare(args.data, Schema.load(args.schema), train_fraction=args.split, seed=args.seed,
                            impute_strategy=args.impute, scaler_kind=args.scaler)


def cmd_simulate(args):
    x_traj = None
    if args.x_csv:
        import csv
        with open(args.x_csv, newline="", encoding="utf-8") as fh:
            x_traj = [float(row["x"]) for row in csv.DictReader(fh)]
    params = GrowthParams(args.r, args.k, args.y0, args.w, args.w_y, x_traj, args.x0, args.x_r, args.x_k)
    write_atomic(args.out, simulate(params, args.kind, args.dt, args.steps).to_csv())


def cmd_train(args):
    prep = _prepare(args)
    model, history, info = pipeline.fit_algorithm(
        args.algorithm, prep.train, cfg=_train_config(args), method=args.method, seed=args.seed,
        knn_ks=args.knn_k)
    bundle = pipeline.ModelBundle(
        args.algorithm, model, args.task, prep.scaler, prep.impute_strategy, prep.fill_values,
        prep.train.feature_names, prep.train.target_name,
        {"training": info, "config": run_config(args), "input_sha256": prep.input_sha256})
    write_atomic(args.model_out, dump_json(bundle.to_dict()))
    if args.history_out and history is not None:
        write_atomic(args.history_out, history.to_csv())


def _load_bundle(path) -> pipeline.ModelBundle:
    path = Path(path)
    if not path.is_file():
        raise errors.MissingFile(f"model file not found: {path}")
    return pipeline.ModelBundle.from_dict(json.loads(path.read_text(encoding="utf-8")))


def cmd_evaluate(args):
    bundle = _load_bundle(args.model)
    _, _, test = pipeline.split_raw(args.data, Schema.load(args.schema), args.split, args.seed)
    report = pipeline.evaluate(bundle, bundle.preprocess(test), args.regression_on)
    report.metadata.update({
        "model_kind": bundle.kind, "task": bundle.task, "test_rows": test.n,
        "training": bundle.extra.get("training", {}),
        "config": run_config(args), "input_sha256": file_sha256(args.data),
        "model_sha256": file_sha256(args.model),
    })
    write_atomic(args.report_out, dump_json(report.to_dict()))
    if args.roc_out and report.roc is not None:
        write_atomic(args.roc_out, report.roc.to_csv())


def cmd_compare(args):
    prep = _prepare(args)
    algos = ["impact"] + [a.strip() for a in args.baselines.split(",") if a.strip()]
    for a in algos:
        if a not in pipeline.ALGORITHMS:
            raise errors.UsageError(f"unknown baseline {a!r}; choose from {list(pipeline.ALGORITHMS)}")
    rows = pipeline.compare(prep, algos, cfg=_train_config(args), method=args.method, seed=args.seed,
                            regression_on=args.regression_on, knn_ks=args.knn_k,
                            target_name=prep.train.target_name)
    table = pipeline.format_table(rows)
    out = {"ranking": rows, "metadata": {
        "rank_by": "accuracy", "averaging": "positive class (label 1)",
        "knn_selection": f"k swept over {list(args.knn_k)} by 5-fold CV accuracy on the training split; "
                         "no reference neighbour count is known",
        "config": run_config(args), "input_sha256": prep.input_sha256,
        "train_rows": prep.train.n, "test_rows": prep.test.n}}
    write_atomic(args.report_out, dump_json(out))
    if args.table_out:
        write_atomic(args.table_out, table)
    sys.stdout.write(table)


def cmd_learning_curve(args):
    prep = _prepare(args)
    cfg = _train_config(args)

    def fit_fn(ds):
        model, _, _ = pipeline.fit_algorithm(args.algorithm, ds, cfg=cfg, method=args.method, seed=args.seed,
                                             knn_ks=args.knn_k)
        bundle = pipeline.ModelBundle(args.algorithm, model, args.task, prep.scaler, prep.impute_strategy,
                                      prep.fill_values, ds.feature_names, ds.target_name)
        return bundle.labels if args.task == "classification" else bundle.scores

    curve = metrics.learning_curve(fit_fn, prep.train, args.fractions, args.folds,
                                   derive_seed(args.seed, "learning-curve"), args.task)
    write_atomic(args.out, metrics.curve_to_csv(curve))


def cmd_impact(args):
    bundle = _load_bundle(args.model)
    if bundle.kind != "impact":
        raise errors.UsageError(f"impact scores need an impact model, got {bundle.kind!r}")
    _, train, test = pipeline.split_raw(args.data, Schema.load(args.schema), args.split, args.seed)
    ds = bundle.preprocess(train if args.rows == "train" else test)
    scores = impact_scores(bundle.model, ds)
    out = {
        "features": [{"index": s.feature, "name": s.name, "aggregate": s.aggregate} for s in scores],
        "metadata": {"rows": args.rows, "n": ds.n, "config": run_config(args),
                     "input_sha256": file_sha256(args.data), "model_sha256": file_sha256(args.model)},
    }
    write_atomic(args.out, dump_json(out))


def _apply_config_file(parser, argv):
    """Parse ``argv`` with defaults taken from ``--config``'s [run] section."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    subparsers = parser._subparsers._group_actions[0].choices
    command = next((tok for tok in argv if tok in subparsers), None)
    if known.config is None or command is None:
        return parser.parse_args(argv)
    path = Path(known.config)
    if not path.is_file():
        raise errors.MissingFile(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    cp.read(path, encoding="utf-8")
    sub = subparsers[command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in (cp.items("run") if cp.has_section("run") else []):
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None:
            raise errors.UsageError(f"config key {key!r} is not an option of {command}")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = cp.getboolean("run", key)
        else:
            defaults[dest] = action.type(raw) if action.type else raw
        action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config_file(parser, argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise errors.UsageError("a subcommand is required")
        args.func(args)
    except errors.UsageError as exc:
        sys.stderr.write(json.dumps({"error": exc.code, "message": str(exc)}) + "\n")
        return 2
    except errors.ImpactLearnError as exc:
        sys.stderr.write(json.dumps({"error": exc.code, "message": str(exc)}) + "\n")
        return 1
    except (OSError, ValueError) as exc:
        sys.stderr.write(json.dumps({"error": f"io.{type(exc).__name__}", "message": str(exc)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
