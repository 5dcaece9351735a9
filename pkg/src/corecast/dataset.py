"""Dataset pipeline: traces to training matrices.

A sample is one loading pattern with its 70-point reactivity trace and the
interpolated cycle length. The stored file keeps raw octant ids and the
full trace so the feature transform (type id -> reference cycle length)
stays re-runnable; feature/label matrices are derived on demand.

Label layout is fixed at 38 columns:

    [rho_max, rho_1, rho_2, rho_3, rho_4, rho_6, rho_8, ..., rho_68, cycle]

i.e. the cycle maximum, the three earliest at-power points, every second
statepoint from 4 to 68, and the cycle length. ``label_indices`` is the
single source of truth for which statepoints appear.
"""

from __future__ import annotations

import csv
import json
import multiprocessing
from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import CalibrationError, ValidationError

N_TRACE = 70
N_FEATURES = geometry.N_SLOTS
N_LABELS = 38

REJECTION_LIMIT = 0.20


def label_indices() -> list:
    """Statepoint indices of the 36 trajectory labels, in label order."""
    return [1, 2, 3] + list(range(4, 69, 2))


def label_names() -> list:
    return (["rho_max"] + [f"rho_{i:03d}" for i in label_indices()]
            + ["cycle_efpd"])


def cycle_length_from_trace(times, rho) -> float | None:
    """Linear interpolation of the first downward rho = 0 crossing.

    Returns 0.0 for a trace that starts at or below zero, None when the
    trace never crosses (a censored cycle).
    """
    times = np.asarray(times, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if times.shape != rho.shape:
        raise ValidationError(
            f"times and trace lengths differ: {times.shape} vs {rho.shape}")
    if rho[0] <= 0.0:
        return 0.0
    for i in range(len(rho) - 1):
        if rho[i] > 0.0 >= rho[i + 1]:
            return float(times[i] + rho[i] * (times[i + 1] - times[i])
                         / (rho[i] - rho[i + 1]))
    return None


@dataclass
class DatasetTable:
    """In-memory dataset: one row per accepted sample."""

    octants: np.ndarray   # (n, 32) int
    rho: np.ndarray       # (n, 70)
    cycle: np.ndarray     # (n,)

    def __len__(self) -> int:
        return len(self.cycle)


def build_features(octants: np.ndarray, ref_cycles) -> np.ndarray:
    """Replace each type id with its reference cycle length."""
    ref = np.asarray(ref_cycles, dtype=float)
    if ref.shape != (geometry.N_TYPES,):
        raise ValidationError(f"need {geometry.N_TYPES} reference cycles")
    return ref[np.asarray(octants, dtype=int) - 1]


def transform_features(octant, ref_cycles) -> np.ndarray:
    """Single-pattern feature row."""
    vals = geometry.validate_octant(octant)
    return build_features(np.asarray(vals)[None, :], ref_cycles)[0]


def build_labels(rho: np.ndarray, cycle: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=float)
    if rho.shape[1] != N_TRACE:
        raise ValidationError(f"trace must have {N_TRACE} points")
    cols = [rho.max(axis=1)[:, None], rho[:, label_indices()],
            np.asarray(cycle, dtype=float)[:, None]]
    out = np.hstack(cols)
    assert out.shape[1] == N_LABELS
    return out


# -- standardization --------------------------------------------------------

class Scaler:
    """Per-column standardization to mean 0, standard deviation 1."""

    def __init__(self, mean: np.ndarray, std: np.ndarray):
        self.mean = np.asarray(mean, dtype=float)
        self.std = np.asarray(std, dtype=float)

    @classmethod
    def fit(cls, matrix: np.ndarray) -> "Scaler":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] < 2:
            raise ValidationError("scaler needs a 2D matrix with >= 2 rows")
        mean = matrix.mean(axis=0)
        std = matrix.std(axis=0)
        flat = np.nonzero(std == 0.0)[0]
        if flat.size:
            raise ValidationError(f"constant column(s) {flat.tolist()} cannot "
                                  "be standardized")
        return cls(mean, std)

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        return (np.asarray(matrix, dtype=float) - self.mean) / self.std

    def invert(self, matrix: np.ndarray) -> np.ndarray:
        return np.asarray(matrix, dtype=float) * self.std + self.mean

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "Scaler":
        return cls(doc["mean"], doc["std"])


def split_indices(n: int, fraction: float = 0.8, seed: int = 0):
    """Deterministic shuffled split into (train, test) index arrays."""
    if n < 1:
        raise ValidationError("cannot split an empty dataset")
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(n * fraction)
    return np.sort(order[:n_train]), np.sort(order[n_train:])


@dataclass
class PreparedData:
    """Standardized matrices plus the scalers that produced them."""

    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray
    feature_scaler: Scaler
    label_scaler: Scaler
    train_idx: np.ndarray
    test_idx: np.ndarray
    ref_cycles: np.ndarray


def prepare(table: DatasetTable, ref_cycles, fraction: float = 0.8,
            seed: int = 0) -> PreparedData:
    """Split, then fit scalers on the training rows only."""
    features = build_features(table.octants, ref_cycles)
    labels = build_labels(table.rho, table.cycle)
    tr, te = split_indices(len(table), fraction, seed)
    fs = Scaler.fit(features[tr])
    ls = Scaler.fit(labels[tr])
    return PreparedData(
        x_train=fs.apply(features[tr]), y_train=ls.apply(labels[tr]),
        x_test=fs.apply(features[te]), y_test=ls.apply(labels[te]),
        feature_scaler=fs, label_scaler=ls, train_idx=tr, test_idx=te,
        ref_cycles=np.asarray(ref_cycles, dtype=float))


# -- reference cycles --------------------------------------------------------

def reference_cycles(library=None) -> np.ndarray:
    """Cycle length of the uniform core for every fuel type 1..9.

    A subcritical-at-start uniform core maps to 0; a censored one means the
    library cannot support the feature transform at all.
    """
    from .cycle import simulate_cycle

    ref = np.empty(geometry.N_TYPES)
    for t in range(1, geometry.N_TYPES + 1):
        pattern = geometry.make_pattern([t] * geometry.N_SLOTS)
        trace = simulate_cycle(pattern, library)
        if trace.censored:
            raise CalibrationError(
                f"uniform type-{t} core never goes subcritical; "
                "recalibrate the assembly library")
        ref[t - 1] = trace.cycle_length
    return ref


def save_reference_cycles(ref: np.ndarray, path: str) -> None:
    doc = {"v": 1, "reference_cycle_efpd":
           {str(t + 1): float(ref[t]) for t in range(len(ref))}}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_reference_cycles(path: str) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    table = doc["reference_cycle_efpd"]
    return np.array([float(table[str(t)]) for t in range(1, geometry.N_TYPES + 1)])


# -- exploratory statistics ---------------------------------------------------

def eda_report(table: DatasetTable) -> dict:
    """Basic statistics and the pairwise correlations of the key columns."""
    from .evaluation import pearson

    cols = {
        "rho_0": table.rho[:, 0],
        "rho_max": table.rho.max(axis=1),
        "rho_69": table.rho[:, 69],
        "cycle_length": table.cycle,
    }
    stats = {name: {"mean": float(v.mean()), "std": float(v.std()),
                    "min": float(v.min()), "max": float(v.max())}
             for name, v in cols.items()}
    names = list(cols)
    corr = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            corr[f"{a}~{b}"] = pearson(cols[a], cols[b])
    argmax = table.rho.argmax(axis=1)
    counts = np.bincount(argmax, minlength=N_TRACE)
    return {
        "v": 1,
        "samples": len(table),
        "statistics": stats,
        "pearson": corr,
        "rho_max_statepoint": {
            "modal_index": int(counts.argmax()),
            "index_counts": {str(i): int(c) for i, c in enumerate(counts) if c},
        },
    }


# -- generation ----------------------------------------------------------------

def _sample_seed(master_seed: int, index: int, attempt: int) -> int:
    ss = np.random.SeedSequence(entropy=(int(master_seed), int(index), int(attempt)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


_worker_library = None


def _init_worker(library_path):
    global _worker_library
    from .library import default_library, load_library
    _worker_library = (load_library(library_path) if library_path
                       else default_library())


def _simulate_index(args) -> tuple:
    master_seed, index = args
    from .cycle import simulate_cycle

    attempt = 0
    while True:
        pattern = geometry.random_pattern(_sample_seed(master_seed, index, attempt))
        trace = simulate_cycle(pattern, _worker_library)
        if not trace.censored:
            return index, pattern.octant, trace.rho, trace.cycle_length, attempt
        attempt += 1
        if attempt > 50:
            raise CalibrationError(
                f"sample {index}: 50 consecutive censored draws")


def generate_dataset(n: int, master_seed: int, workers: int, out_path: str,
                     library_path: str | None = None) -> dict:
    """Simulate n accepted samples and write the dataset CSV.

    Censored draws are rejected and redrawn with a per-(sample, attempt)
    seed, so the output file is byte-identical for any worker count. The
    run aborts when more than 20% of all draws get rejected.
    """
    if n < 1:
        raise ValidationError("need at least one sample")
    jobs = [(master_seed, i) for i in range(n)]
    if workers > 1:
        with multiprocessing.Pool(workers, initializer=_init_worker,
                                  initargs=(library_path,)) as pool:
            results = pool.map(_simulate_index, jobs, chunksize=8)
    else:
        _init_worker(library_path)
        results = [_simulate_index(job) for job in jobs]

    results.sort(key=lambda r: r[0])
    rejections = sum(r[4] for r in results)
    total_draws = n + rejections
    rate = rejections / total_draws
    if rate > REJECTION_LIMIT:
        raise CalibrationError(
            f"rejection rate {rate:.1%} exceeds {REJECTION_LIMIT:.0%}; "
            "recalibrate the assembly library")

    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_csv_header())
        for index, octant, rho, length, _ in results:
            row = [str(index)]
            row += [str(t) for t in octant]
            row += [f"{v:.10g}" for v in rho]
            row.append(f"{length:.10g}")
            writer.writerow(row)
    return {"samples": n, "rejections": rejections, "rejection_rate": rate}


def _csv_header() -> list:
    return (["id"] + [f"a{i:02d}" for i in range(N_FEATURES)]
            + [f"rho_{i:03d}" for i in range(N_TRACE)] + ["cycle_efpd"])


def load_dataset(path: str) -> DatasetTable:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _csv_header():
            raise ValidationError(f"unexpected dataset header in {path}")
        octants, rhos, cycles = [], [], []
        for row in reader:
            octants.append([int(v) for v in row[1:1 + N_FEATURES]])
            rhos.append([float(v) for v in row[1 + N_FEATURES:1 + N_FEATURES + N_TRACE]])
            cycles.append(float(row[-1]))
    if not cycles:
        raise ValidationError(f"dataset {path} is empty")
    return DatasetTable(octants=np.array(octants, dtype=int),
                        rho=np.array(rhos), cycle=np.array(cycles))
