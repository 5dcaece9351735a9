"""Prediction-quality metrics against oracle ground truth.

All metrics are computed in physical units: standardized network outputs
are inverse-scaled before anything is compared. Relative reactivity error
skips label points whose true magnitude is below 0.005 (the end-of-cycle
zero crossing makes percent errors meaningless there); absolute error is
always reported over every point.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .dataset import N_LABELS, label_names
from .errors import DomainError, ValidationError

RHO_RELATIVE_FLOOR = 0.005


def pearson(x, y) -> float:
    """Sample Pearson correlation with (n-1) normalization."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValidationError("pearson needs two equal-length 1D arrays, n >= 2")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = math.sqrt(float(dx @ dx))
    sy = math.sqrt(float(dy @ dy))
    if sx == 0.0 or sy == 0.0:
        raise DomainError("pearson undefined for zero-variance input")
    return float(dx @ dy / (sx * sy))


@dataclass
class EvalReport:
    n_samples: int
    reactivity_mean_relative_error_pct: float
    reactivity_mean_absolute_error: float
    cycle_mean_relative_error_pct: float
    cycle_mean_absolute_error_efpd: float
    pearson_cycle: float
    real_fit: tuple             # (mu, sigma) of true cycle lengths
    predicted_fit: tuple
    per_label: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "v": 1,
            "n_samples": self.n_samples,
            "reactivity": {
                "mean_relative_error_pct": self.reactivity_mean_relative_error_pct,
                "mean_absolute_error": self.reactivity_mean_absolute_error,
            },
            "cycle_length": {
                "mean_relative_error_pct": self.cycle_mean_relative_error_pct,
                "mean_absolute_error_efpd": self.cycle_mean_absolute_error_efpd,
                "pearson": self.pearson_cycle,
                "real_fit": {"mu": self.real_fit[0], "sigma": self.real_fit[1]},
                "predicted_fit": {"mu": self.predicted_fit[0],
                                  "sigma": self.predicted_fit[1]},
            },
            "per_label": self.per_label,
        }

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")


def evaluate(model, label_scaler, x_test_std, y_test_std) -> EvalReport:
    """Metrics for a trained model on a standardized test set."""
    y_true = label_scaler.invert(np.asarray(y_test_std, dtype=float))
    y_pred = label_scaler.invert(model.predict(x_test_std))
    return evaluate_physical(y_true, y_pred)


def evaluate_physical(y_true: np.ndarray, y_pred: np.ndarray) -> EvalReport:
    """Metrics on matrices already in physical units."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.shape[1] != N_LABELS:
        raise ValidationError(f"expected (n, {N_LABELS}) matrices")
    if len(y_true) == 0:
        raise ValidationError("empty test set")

    rho_true = y_true[:, :-1]
    rho_pred = y_pred[:, :-1]
    abs_err = np.abs(rho_pred - rho_true)
    significant = np.abs(rho_true) >= RHO_RELATIVE_FLOOR
    if significant.any():
        rel = abs_err[significant] / np.abs(rho_true[significant])
        rho_rel_pct = float(rel.mean() * 100.0)
    else:
        rho_rel_pct = float("nan")

    cycle_true = y_true[:, -1]
    cycle_pred = y_pred[:, -1]
    cycle_abs = np.abs(cycle_pred - cycle_true)
    nonzero = cycle_true > 0
    cycle_rel_pct = float((cycle_abs[nonzero] / cycle_true[nonzero]).mean() * 100.0)

    names = label_names()
    per_label = []
    for j, name in enumerate(names):
        col_true = y_true[:, j]
        col_err = np.abs(y_pred[:, j] - col_true)
        ok = np.abs(col_true) >= (RHO_RELATIVE_FLOOR if j < N_LABELS - 1 else 1e-12)
        entry = {"label": name, "mae": float(col_err.mean()),
                 "mean_relative_error_pct":
                     float((col_err[ok] / np.abs(col_true[ok])).mean() * 100.0)
                     if ok.any() else None}
        per_label.append(entry)

    return EvalReport(
        n_samples=len(y_true),
        reactivity_mean_relative_error_pct=rho_rel_pct,
        reactivity_mean_absolute_error=float(abs_err.mean()),
        cycle_mean_relative_error_pct=cycle_rel_pct,
        cycle_mean_absolute_error_efpd=float(cycle_abs.mean()),
        pearson_cycle=pearson(cycle_true, cycle_pred),
        real_fit=(float(cycle_true.mean()), float(cycle_true.std())),
        predicted_fit=(float(cycle_pred.mean()), float(cycle_pred.std())),
        per_label=per_label,
    )


# -- plot data -------------------------------------------------------------------

def shared_histogram_edges(real: np.ndarray, predicted: np.ndarray) -> np.ndarray:
    """Freedman-Diaconis bin edges over the pooled values."""
    pooled = np.concatenate([real, predicted])
    q75, q25 = np.percentile(pooled, [75, 25])
    iqr = q75 - q25
    if iqr <= 0:
        width = max(pooled.std(), 1e-9)
    else:
        width = 2.0 * iqr / len(pooled) ** (1.0 / 3.0)
    lo, hi = pooled.min(), pooled.max()
    nbins = max(int(math.ceil((hi - lo) / width)), 1)
    return np.linspace(lo, hi, nbins + 1)


def export_plots(out_dir: str, y_true: np.ndarray, y_pred: np.ndarray,
                 label_times: np.ndarray) -> dict:
    """Write the plot-data CSVs; returns the file paths."""
    os.makedirs(out_dir, exist_ok=True)
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    names = label_names()
    paths = {}

    # reactivity distribution per trajectory label point
    path = os.path.join(out_dir, "reactivity_by_statepoint.csv")
    qs = (5, 25, 50, 75, 95)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "time_efpd", "real_mean", "real_std",
                         "pred_mean", "pred_std"]
                        + [f"real_p{q}" for q in qs] + [f"pred_p{q}" for q in qs])
        for j in range(1, N_LABELS - 1):       # trajectory points only
            rt, rp = y_true[:, j], y_pred[:, j]
            writer.writerow(
                [names[j], f"{label_times[j - 1]:.10g}",
                 f"{rt.mean():.10g}", f"{rt.std():.10g}",
                 f"{rp.mean():.10g}", f"{rp.std():.10g}"]
                + [f"{np.percentile(rt, q):.10g}" for q in qs]
                + [f"{np.percentile(rp, q):.10g}" for q in qs])
    paths["reactivity_by_statepoint"] = path

    # cycle-length scatter
    path = os.path.join(out_dir, "cycle_scatter.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["real_efpd", "predicted_efpd"])
        for rt, rp in zip(y_true[:, -1], y_pred[:, -1]):
            writer.writerow([f"{rt:.10g}", f"{rp:.10g}"])
    paths["cycle_scatter"] = path

    # shared-edge histograms with normal fits
    real, pred = y_true[:, -1], y_pred[:, -1]
    edges = shared_histogram_edges(real, pred)
    real_counts, _ = np.histogram(real, bins=edges)
    pred_counts, _ = np.histogram(pred, bins=edges)
    path = os.path.join(out_dir, "cycle_histogram.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "real_count", "predicted_count"])
        for i in range(len(edges) - 1):
            writer.writerow([f"{edges[i]:.10g}", f"{edges[i + 1]:.10g}",
                             int(real_counts[i]), int(pred_counts[i])])
    paths["cycle_histogram"] = path

    fit_path = os.path.join(out_dir, "cycle_histogram_fit.json")
    with open(fit_path, "w", encoding="utf-8") as fh:
        json.dump({"real": {"mu": float(real.mean()), "sigma": float(real.std())},
                   "predicted": {"mu": float(pred.mean()),
                                 "sigma": float(pred.std())}}, fh, indent=1)
        fh.write("\n")
    paths["cycle_histogram_fit"] = fit_path
    return paths
