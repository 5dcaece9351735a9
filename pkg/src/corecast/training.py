"""Mini-batch training loop, per-batch loss logging, hyperparameter sweep.

A run is named ``run-{index}-{nh1}-{nh2}-{dropout}``; its training loss is
logged once per batch against a global batch counter, and the validation
loss once per epoch (always evaluated in infer mode, i.e. without
dropout). The checkpoint of the best-validation epoch is kept alongside
the final model.
"""

from __future__ import annotations

import csv
import itertools
import multiprocessing
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NumericalError, ValidationError
from .neuralnet import ADAM_DEFAULTS, AdamState, MlpModel, adam_step, mse, mse_gradient

DEFAULT_GRID = {"nh1": (32, 64, 128), "nh2": (32, 64, 128),
                "dropout": (0.05, 0.1)}
OVERFIT_GAP_FACTOR = 2.0


@dataclass(frozen=True)
class TrainConfig:
    nh1: int = 64
    nh2: int = 64
    dropout: float = 0.1
    batch_size: int = 32
    epochs: int = 200
    lr: float = ADAM_DEFAULTS["lr"]
    beta1: float = ADAM_DEFAULTS["beta1"]
    beta2: float = ADAM_DEFAULTS["beta2"]
    eps: float = ADAM_DEFAULTS["eps"]
    seed: int = 0
    run_index: int = 1
    output_activation: str = "identity"

    def __post_init__(self):
        if self.nh1 < 1 or self.nh2 < 1:
            raise ValidationError("hidden layers need at least one neuron")
        if not 0.0 <= self.dropout < 1.0:
            raise ValidationError("dropout must be in [0, 1)")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be positive")


def run_name(config: TrainConfig) -> str:
    return (f"run-{config.run_index}-{config.nh1}-{config.nh2}-"
            f"{config.dropout:g}")


def series_name(config: TrainConfig, split: str) -> str:
    base = run_name(config)
    return f"{base} (val)" if split == "val" else base


@dataclass
class RunLog:
    run_name: str
    entries: list = field(default_factory=list)   # (split, batch index, mse)

    def add(self, split: str, x: int, value: float) -> None:
        self.entries.append((split, x, value))

    def series(self, split: str) -> list:
        return [(x, v) for s, x, v in self.entries if s == split]


@dataclass
class TrainResult:
    model: MlpModel            # final-epoch parameters
    best_model: MlpModel       # parameters of the best-validation epoch
    best_epoch: int
    best_val_mse: float
    final_train_mse: float     # full train set, infer mode
    final_val_mse: float
    log: RunLog
    config: TrainConfig


def train(config: TrainConfig, x_train, y_train, x_val, y_val) -> TrainResult:
    """Adam-on-minibatches training of the standardized regression task."""
    x_train = np.asarray(x_train, dtype=float)
    y_train = np.asarray(y_train, dtype=float)
    x_val = np.asarray(x_val, dtype=float)
    y_val = np.asarray(y_val, dtype=float)
    if len(x_val) == 0:
        raise ValidationError("validation set must not be empty")

    init_ss, shuffle_ss, dropout_ss = np.random.SeedSequence(config.seed).spawn(3)
    model = MlpModel.initialize(
        config.nh1, config.nh2, dropout=config.dropout,
        seed=init_ss, n_in=x_train.shape[1], n_out=y_train.shape[1],
        output_activation=config.output_activation)
    shuffle_rng = np.random.default_rng(shuffle_ss)
    dropout_rng = np.random.default_rng(dropout_ss)

    state = AdamState(model.parameters(), lr=config.lr, beta1=config.beta1,
                      beta2=config.beta2, eps=config.eps)
    log = RunLog(run_name(config))
    n = len(x_train)
    batch_counter = 0
    best_val = np.inf
    best_model = model.clone()
    best_epoch = 0

    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            xb, yb = x_train[idx], y_train[idx]
            out, cache = model.forward(xb, mode="train", rng=dropout_rng)
            loss = mse(out, yb)
            batch_counter += 1
            log.add("train", batch_counter, loss)
            if not np.isfinite(loss):
                err = NumericalError(
                    f"non-finite loss at epoch {epoch}, batch {batch_counter}")
                err.run_log = log
                raise err
            grads = model.backward(cache, mse_gradient(out, yb))
            model.set_parameters(adam_step(state, model.parameters(), grads))

        val_mse = mse(model.predict(x_val), y_val)
        log.add("val", batch_counter, val_mse)
        if val_mse < best_val:
            best_val = val_mse
            best_model = model.clone()
            best_epoch = epoch

    final_train = mse(model.predict(x_train), y_train)
    final_val = mse(model.predict(x_val), y_val)
    return TrainResult(model=model, best_model=best_model,
                       best_epoch=best_epoch, best_val_mse=float(best_val),
                       final_train_mse=float(final_train),
                       final_val_mse=float(final_val), log=log, config=config)


# -- sweep ---------------------------------------------------------------------

@dataclass
class SweepRow:
    run_name: str
    final_train_mse: float
    best_val_mse: float
    gap: float
    flagged: bool
    error: str = ""


def sweep_configs(nh1_list=None, nh2_list=None, dropout_list=None,
                  base: TrainConfig | None = None) -> list:
    """Every grid combination, run_index counting from 1."""
    base = base or TrainConfig()
    nh1s = tuple(nh1_list or DEFAULT_GRID["nh1"])
    nh2s = tuple(nh2_list or DEFAULT_GRID["nh2"])
    deltas = tuple(dropout_list or DEFAULT_GRID["dropout"])
    configs = []
    for alpha, (nh1, nh2, delta) in enumerate(
            itertools.product(nh1s, nh2s, deltas), start=1):
        configs.append(replace(base, nh1=int(nh1), nh2=int(nh2),
                               dropout=float(delta), run_index=alpha))
    return configs


def _sweep_job(args):
    config, data = args
    try:
        result = train(config, *data)
        row = SweepRow(
            run_name=run_name(config),
            final_train_mse=result.final_train_mse,
            best_val_mse=result.best_val_mse,
            gap=result.final_val_mse - result.final_train_mse,
            flagged=(result.final_val_mse - result.final_train_mse)
                    > OVERFIT_GAP_FACTOR * result.final_train_mse,
        )
        return row, result.log
    except NumericalError as err:
        row = SweepRow(run_name=run_name(config), final_train_mse=float("nan"),
                       best_val_mse=float("nan"), gap=float("nan"),
                       flagged=True, error=str(err))
        return row, getattr(err, "run_log", RunLog(run_name(config)))


def sweep(x_train, y_train, x_val, y_val, nh1_list=None, nh2_list=None,
          dropout_list=None, base: TrainConfig | None = None,
          workers: int = 1) -> tuple:
    """Train every grid point; returns (summary rows, run logs)."""
    configs = sweep_configs(nh1_list, nh2_list, dropout_list, base)
    if not configs:
        raise ValidationError("sweep grid is empty")
    data = (x_train, y_train, x_val, y_val)
    jobs = [(c, data) for c in configs]
    if workers > 1:
        with multiprocessing.Pool(workers) as pool:
            outcomes = pool.map(_sweep_job, jobs)
    else:
        outcomes = [_sweep_job(j) for j in jobs]
    rows = [o[0] for o in outcomes]
    logs = [o[1] for o in outcomes]
    return rows, logs


def write_run_logs(logs, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run_name", "split", "x", "mse"])
        for log in logs:
            for split, x, value in log.entries:
                writer.writerow([log.run_name, split, x, f"{value:.10g}"])


def write_sweep_summary(rows, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run_name", "final_train_mse", "best_val_mse",
                         "gap", "flagged"])
        for r in rows:
            writer.writerow([r.run_name, f"{r.final_train_mse:.10g}",
                             f"{r.best_val_mse:.10g}", f"{r.gap:.10g}",
                             str(r.flagged).lower()])
