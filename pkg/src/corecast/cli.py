"""Command-line entry points for every pipeline stage.

Exit codes: 0 success, 1 usage error (bad flags, malformed pattern),
2 data error (missing/incompatible files, library calibration), 3 numeric
error (solver non-convergence, non-finite training loss).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import dataset as ds
from . import geometry
from .cycle import STATEPOINT_TIMES, simulate_cycle, trace_to_csv
from .errors import (CalibrationError, ConvergenceFailure, CorecastError,
                     DomainError, NoFissionSource, NumericalError,
                     ValidationError)
from .evaluation import evaluate_physical, export_plots
from .library import default_library, load_library
from .neuralnet import Checkpoint, load_checkpoint, save_checkpoint
from .service import PredictionService, serve_forever
from .training import (TrainConfig, run_name, sweep, train, write_run_logs,
                       write_sweep_summary)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _library_from(path):
    return load_library(path) if path else default_library()


def _reference_cycles(args, library):
    if getattr(args, "ref_cycles", None):
        return ds.load_reference_cycles(args.ref_cycles)
    return ds.reference_cycles(library)


# -- subcommand handlers --------------------------------------------------------

def cmd_gen_data(args) -> int:
    summary = ds.generate_dataset(args.count, args.seed, args.workers,
                                  args.out, args.library)
    print(json.dumps(summary))
    return EXIT_OK


def cmd_ref_cycles(args) -> int:
    library = _library_from(args.library)
    ref = ds.reference_cycles(library)
    ds.save_reference_cycles(ref, args.out)
    print(json.dumps({"reference_cycle_efpd": ref.tolist()}))
    return EXIT_OK


def cmd_train(args) -> int:
    library = _library_from(args.library)
    table = ds.load_dataset(args.data)
    ref = _reference_cycles(args, library)
    prep = ds.prepare(table, ref, fraction=args.split, seed=args.seed)
    config = TrainConfig(nh1=args.nh1, nh2=args.nh2, dropout=args.dropout,
                         batch_size=args.batch_size, epochs=args.epochs,
                         lr=args.lr, seed=args.seed, run_index=args.run_index)
    result = train(config, prep.x_train, prep.y_train, prep.x_test, prep.y_test)

    metadata = {
        "run_name": run_name(config),
        "seed": args.seed,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "lr": args.lr,
        "split_fraction": args.split,
        "split_seed": args.seed,
        "data_rows": len(table),
        "data_file": os.path.basename(args.data),
        "best_epoch": result.best_epoch,
        "best_val_mse": result.best_val_mse,
        "final_train_mse": result.final_train_mse,
        "final_val_mse": result.final_val_mse,
    }
    ckpt = Checkpoint(model=result.best_model,
                      feature_scaler=prep.feature_scaler,
                      label_scaler=prep.label_scaler,
                      ref_cycles=prep.ref_cycles,
                      label_times=STATEPOINT_TIMES[ds.label_indices()],
                      label_indices=ds.label_indices(),
                      metadata=metadata)
    save_checkpoint(ckpt, args.out)
    if args.log:
        write_run_logs([result.log], args.log)
    print(json.dumps({"run_name": metadata["run_name"],
                      "best_epoch": result.best_epoch,
                      "best_val_mse": result.best_val_mse,
                      "final_train_mse": result.final_train_mse}))
    return EXIT_OK


def _parse_grid(spec: str) -> dict:
    """Grid spec: 'nh1=32,64;nh2=64;dropout=0.05,0.1'."""
    grid = {}
    for part in spec.split(";"):
        if not part.strip():
            continue
        if "=" not in part:
            raise UsageError(f"grid segment {part!r} is not name=v1,v2,...")
        name, values = part.split("=", 1)
        name = name.strip()
        if name not in ("nh1", "nh2", "dropout"):
            raise UsageError(f"unknown grid dimension {name!r}")
        try:
            conv = float if name == "dropout" else int
            grid[name] = [conv(v) for v in values.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"grid segment {part!r}: {exc}") from exc
    return grid


def cmd_sweep(args) -> int:
    library = _library_from(args.library)
    table = ds.load_dataset(args.data)
    ref = _reference_cycles(args, library)
    prep = ds.prepare(table, ref, fraction=args.split, seed=args.seed)
    grid = _parse_grid(args.grid) if args.grid else {}
    base = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                       seed=args.seed)
    rows, logs = sweep(prep.x_train, prep.y_train, prep.x_test, prep.y_test,
                       nh1_list=grid.get("nh1"), nh2_list=grid.get("nh2"),
                       dropout_list=grid.get("dropout"), base=base,
                       workers=args.workers)
    os.makedirs(args.out_dir, exist_ok=True)
    write_run_logs(logs, os.path.join(args.out_dir, "runlogs.csv"))
    write_sweep_summary(rows, os.path.join(args.out_dir, "summary.csv"))
    flagged = [r.run_name for r in rows if r.flagged]
    print(json.dumps({"runs": len(rows), "flagged": flagged}))
    return EXIT_OK


def cmd_eval(args) -> int:
    ckpt = load_checkpoint(args.model)
    table = ds.load_dataset(args.data)
    features = ds.build_features(table.octants, ckpt.ref_cycles)
    labels = ds.build_labels(table.rho, table.cycle)
    if args.rows == "test":
        meta = ckpt.metadata
        if meta.get("data_rows") != len(table):
            raise ValidationError(
                "dataset row count differs from the training run; "
                "use --rows all for a foreign dataset")
        _, te = ds.split_indices(len(table), meta["split_fraction"],
                                 meta["split_seed"])
        features, labels = features[te], labels[te]
    y_true = labels
    x_std = ckpt.feature_scaler.apply(features)
    y_pred = ckpt.label_scaler.invert(ckpt.model.predict(x_std))
    report = evaluate_physical(y_true, y_pred)
    report.save(args.report)
    if args.plots:
        export_plots(args.plots, y_true, y_pred, ckpt.label_times)
    print(json.dumps({
        "n_samples": report.n_samples,
        "cycle_mean_relative_error_pct": report.cycle_mean_relative_error_pct,
        "cycle_mean_absolute_error_efpd": report.cycle_mean_absolute_error_efpd,
        "pearson_cycle": report.pearson_cycle,
        "reactivity_mean_absolute_error": report.reactivity_mean_absolute_error,
    }))
    return EXIT_OK


def cmd_predict(args) -> int:
    ckpt = load_checkpoint(args.model)
    pattern = geometry.parse_pattern_string(args.pattern)
    service = PredictionService(ckpt)
    response = service.predict(list(pattern.octant))
    print(json.dumps(response, indent=1))
    return EXIT_OK


def cmd_simulate(args) -> int:
    library = _library_from(args.library)
    pattern = geometry.parse_pattern_string(args.pattern)
    trace = simulate_cycle(pattern, library)
    trace_to_csv(trace, args.out, include_power=args.powers)
    print(json.dumps({
        "cycle_length_efpd":
            None if trace.censored else trace.cycle_length,
        "censored": trace.censored,
        "rho_max": trace.rho_max,
        "statepoints": len(trace.times),
    }))
    return EXIT_OK


def cmd_eda(args) -> int:
    table = ds.load_dataset(args.data)
    report = ds.eda_report(table)
    with open(args.report, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1)
        fh.write("\n")
    print(json.dumps({"samples": report["samples"],
                      "pearson": report["pearson"]}))
    return EXIT_OK


def cmd_serve(args) -> int:
    ckpt = load_checkpoint(args.model)
    library = _library_from(args.library)
    serve_forever(PredictionService(ckpt, library), host=args.host,
                  port=args.port)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="corecast",
                     description="PWR loading-pattern workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="simulate random patterns into a dataset CSV")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--library")
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("ref-cycles", help="uniform-core reference cycle lengths")
    p.add_argument("--out", required=True)
    p.add_argument("--library")
    p.set_defaults(func=cmd_ref_cycles)

    p = sub.add_parser("train", help="train the surrogate on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--nh1", type=int, default=64)
    p.add_argument("--nh2", type=int, default=64)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--run-index", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--log")
    p.add_argument("--library")
    p.add_argument("--ref-cycles")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="hyperparameter grid sweep")
    p.add_argument("--data", required=True)
    p.add_argument("--grid", help="e.g. 'nh1=32,64,128;nh2=32,64,128;dropout=0.05,0.1'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", type=float, default=0.8)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--library")
    p.add_argument("--ref-cycles")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("eval", help="metrics of a checkpoint against a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--plots")
    p.add_argument("--rows", choices=("test", "all"), default="test")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="surrogate prediction for one pattern")
    p.add_argument("--model", required=True)
    p.add_argument("--pattern", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="oracle cycle simulation for one pattern")
    p.add_argument("--pattern", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--powers", action="store_true")
    p.add_argument("--library")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("eda", help="dataset statistics and correlations")
    p.add_argument("--data", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_eda)

    p = sub.add_parser("serve", help="HTTP prediction service")
    p.add_argument("--model", required=True)
    p.add_argument("--port", type=int, default=8421)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--library")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (UsageError, ValidationError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError, CalibrationError, DomainError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceFailure, NumericalError, NoFissionSource) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except CorecastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
