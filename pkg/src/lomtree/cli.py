"""Command line entry point: ``lomtree {train,predict,eval,sweep}``.

Exit codes: 0 success, 2 input error, 3 numeric divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from . import modelio
from .data import load_file, split_dataset
from .errors import LomtreeError, MalformedRecord, ModelFormatError, NonFiniteUpdate, TooFewExamples
from .runner import (ALGOS, DEFAULT_STEPS, DEFAULT_SWAP_RESISTANCES, DEFAULT_T_MULTIPLIERS,
                     MAX_PASSES, build_grid, evaluate, labels_of, make_model, sweep,
                     train_passes)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DIVERGED = 3


def _float_list(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _str_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_training_flags(p):
    p.add_argument("--algo", choices=ALGOS, default="lomtree")
    p.add_argument("--data", required=True)
    p.add_argument("--step", type=float, default=0.5)
    p.add_argument("--passes", type=int, default=1)
    p.add_argument("--max_nodes", type=int, default=None,
                   help="max non-leaf nodes T (lomtree; default k-1)")
    p.add_argument("--swap_resistance", type=float, default=4.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no_shuffle", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lomtree", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and write it to --model")
    _add_training_flags(p)
    p.add_argument("--model", required=True)

    p = sub.add_parser("predict", help="print one predicted label per input line")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)

    p = sub.add_parser("eval", help="report test error, interval, depth, entropy, timing")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("sweep", help="grid search on a validation split")
    _add_training_flags(p)
    p.set_defaults(passes=MAX_PASSES)
    p.add_argument("--grid-steps", type=_float_list, default=list(DEFAULT_STEPS))
    p.add_argument("--grid-T", type=_str_list,
                   default=[f"{m}k-1" for m in DEFAULT_T_MULTIPLIERS])
    p.add_argument("--grid-rs", type=_float_list, default=list(DEFAULT_SWAP_RESISTANCES))
    p.add_argument("--model", default=None, help="write the winning model here")
    p.add_argument("--json", action="store_true")
    return parser


def cmd_train(args, out=None) -> int:
    out = out or sys.stdout
    train = load_file(args.data)
    if not train:
        raise TooFewExamples(f"{args.data} holds no examples")
    model = make_model(args.algo, labels_of(train), step=args.step,
                       max_internal=args.max_nodes, swap_resistance=args.swap_resistance,
                       seed=args.seed)
    shuffle = None if args.no_shuffle else args.seed
    train_passes(model, train, args.passes, shuffle, on_pass=lambda s: print(s.line(), file=out))
    modelio.save(model, args.model)
    return EXIT_OK


def cmd_predict(args, out=None) -> int:
    out = out or sys.stdout
    model = modelio.load(args.model)
    for ex in load_file(args.data):
        print(model.predict(ex.features), file=out)
    return EXIT_OK


def cmd_eval(args, out=None) -> int:
    out = out or sys.stdout
    model = modelio.load(args.model)
    data = load_file(args.data)
    if not data:
        raise TooFewExamples(f"{args.data} holds no examples")
    report = evaluate(model, data, repetitions=args.repetitions)
    if args.json:
        print(json.dumps(asdict(report)), file=out)
    else:
        print("\n".join(report.lines()), file=out)
    return EXIT_OK


def cmd_sweep(args, out=None) -> int:
    out = out or sys.stdout
    examples = load_file(args.data)
    train, validation, test = split_dataset(examples, args.seed)
    if not validation:
        raise TooFewExamples("validation split is empty")
    labels = labels_of(train)
    grid = build_grid(args.algo, len(labels), args.grid_steps, args.grid_T, args.grid_rs)
    shuffle = None if args.no_shuffle else args.seed
    ranked = sweep(grid, train, validation, passes=args.passes, seed=args.seed,
                   shuffle_seed=shuffle)
    best = ranked[0]
    if best.diverged:
        raise NonFiniteUpdate("every grid point diverged")

    p = best.point
    model = make_model(p.algo, labels, step=p.step, max_internal=p.max_internal,
                       swap_resistance=p.swap_resistance or 4.0, seed=args.seed)
    train_passes(model, train, best.passes, shuffle)
    test_report = evaluate(model, test) if test else None
    if args.model:
        modelio.save(model, args.model)

    if args.json:
        record = {
            "ranked": [{**asdict(r.point), "validation_error": r.validation_error,
                        "passes": r.passes, "diverged": r.diverged} for r in ranked],
            "best": {**asdict(p), "passes": best.passes},
            "test": asdict(test_report) if test_report else None,
        }
        print(json.dumps(record), file=out)
        return EXIT_OK

    print(f"{'rank':>4} {'step':>6} {'T':>6} {'R_S':>6} {'passes':>6} {'val_error':>10}", file=out)
    for rank, r in enumerate(ranked, 1):
        q = r.point
        err = "diverged" if r.diverged else f"{r.validation_error:.6f}"
        print(f"{rank:>4} {q.step:>6g} {q.max_internal or '-':>6} "
              f"{q.swap_resistance or '-':>6} {r.passes:>6} {err:>10}", file=out)
    print(f"best algo={p.algo} step={p.step:g} T={p.max_internal} R_S={p.swap_resistance} "
          f"passes={best.passes} validation_error={best.validation_error:.6f}", file=out)
    if test_report:
        print(f"test_error={test_report.test_error:.6f} ci_low={test_report.ci_low:.6f} "
              f"ci_high={test_report.ci_high:.6f}", file=out)
    return EXIT_OK


COMMANDS = {"train": cmd_train, "predict": cmd_predict, "eval": cmd_eval, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NonFiniteUpdate as err:
        print(f"error: diverged: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    except (MalformedRecord, ModelFormatError, TooFewExamples, OSError, LomtreeError,
            ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
