"""Command line entry point: ``abcboost train|predict|eval``."""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from .boost import METHODS, BoostConfig, ConfigError, train
from .data import DataFormatError, load_dataset
from .model import ModelFormatError, evaluate, load_model, predict, save_model

LOG_HEADER = ["iter", "train_loss", "test_errors", "base_class", "candidates", "trees_trained"]

log = logging.getLogger("abcboost")


def _set_threads(n):
    if n is None:
        env = os.environ.get("ABCBOOST_THREADS")
        n = int(env) if env else None
    if n is None:
        return
    if n < 1:
        raise ConfigError("--threads must be positive")
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _common_args(p):
    # accepted after the subcommand too; SUPPRESS keeps a global value intact
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                   help="cap on worker threads (env ABCBOOST_THREADS)")
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)


def _data_args(p):
    _common_args(p)
    p.add_argument("--format", choices=["csv", "libsvm"], default="csv")
    p.add_argument("--skip-header", action="store_true", help="skip the first CSV line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="abcboost", description=__doc__)
    parser.add_argument("--threads", type=int, default=None,
                        help="cap on worker threads (env ABCBOOST_THREADS)")
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a model")
    t.add_argument("--train", required=True, help="training data file")
    t.add_argument("--test", help="test data file; logs test errors per iteration")
    t.add_argument("--method", choices=METHODS, default="abcrobustlogit")
    t.add_argument("-J", type=int, default=20, help="leaves per tree")
    t.add_argument("-v", dest="nu", type=float, default=0.1, help="shrinkage")
    t.add_argument("-M", type=int, default=100, help="boosting iterations")
    t.add_argument("-s", type=int, default=2, help="base classes searched per search iteration")
    t.add_argument("-g", type=int, default=10, help="gap between base-class searches")
    t.add_argument("-w", type=int, default=0, help="warm-up iterations")
    t.add_argument("--max-bins", type=int, default=256)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--model", default="model.json", help="output model path")
    t.add_argument("--log", help="per-iteration CSV log path")
    _data_args(t)

    pr = sub.add_parser("predict", help="predict labels and probabilities")
    pr.add_argument("--model", required=True)
    pr.add_argument("--input", required=True)
    pr.add_argument("--output", help="CSV output path (default stdout)")
    pr.add_argument("--unlabeled", action="store_true",
                    help="input rows carry no label column")
    _data_args(pr)

    ev = sub.add_parser("eval", help="report test errors and log-loss")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True, help="labeled data file")
    _data_args(ev)
    return parser


def _fmt_label(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def write_log(records, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(LOG_HEADER)
        for r in records:
            out.writerow([
                r.m,
                repr(float(r.train_loss)),
                "" if r.test_errors is None else r.test_errors,
                "" if r.base_class is None else r.base_class,
                ";".join(str(c) for c in r.candidates),
                r.trees_trained,
            ])


def run_train(args) -> int:
    config = BoostConfig(method=args.method, J=args.J, nu=args.nu, M=args.M, s=args.s,
                         g=args.g, w=args.w, max_bins=args.max_bins, seed=args.seed)
    config.validate()
    data = load_dataset(args.train, args.format, skip_header=args.skip_header)
    test = None
    if args.test:
        test = load_dataset(args.test, args.format, skip_header=args.skip_header,
                            classes=data.classes, n_features=data.n_features)
    model = train(config, data, test=test)
    save_model(model, args.model)
    if args.log:
        write_log(model.records, args.log)
    if model.diagnostic:
        log.warning(model.diagnostic)
    last = model.records[-1] if model.records else None
    if last is not None:
        msg = f"trained {model.M} iterations, {sum(r.trees_trained for r in model.records)} trees, train loss {last.train_loss:.6g}"
        if last.test_errors is not None:
            msg += f", test errors {last.test_errors}"
        log.info(msg)
    return 0


def _has_rows(path) -> bool:
    with open(path) as fh:
        return any(line.strip() for line in fh)


def run_predict(args) -> int:
    model = load_model(args.model)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        if not _has_rows(args.input):
            return 0
        data = load_dataset(args.input, args.format, skip_header=args.skip_header,
                            n_features=model.n_features, has_label=not args.unlabeled)
        _, proba, labels = predict(model, data.features)
        writer = csv.writer(out, lineterminator="\n")
        for k, row in zip(labels, proba):
            writer.writerow([_fmt_label(model.classes[k])] + [repr(float(v)) for v in row])
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def run_eval(args) -> int:
    model = load_model(args.model)
    data = load_dataset(args.data, args.format, skip_header=args.skip_header,
                        classes=model.classes, n_features=model.n_features)
    report = evaluate(model, data)
    print(f"test samples:    {report.n_test}")
    print(f"misclassified:   {report.errors}")
    print(f"error rate:      {report.error_rate:.6f}")
    print(f"test log-loss:   {report.logloss:.6f}")
    print(report.summary())
    return 0


COMMANDS = {"train": run_train, "predict": run_predict, "eval": run_eval}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s", stream=sys.stderr)
    try:
        _set_threads(args.threads)
        return COMMANDS[args.command](args)
    except (ConfigError, DataFormatError, ModelFormatError, OSError, ValueError) as exc:
        print(f"abcboost: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
