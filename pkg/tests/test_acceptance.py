"""Acceptance suite: each top-level requirement at its stated tolerance.

Every test prints one [PASS]/[FAIL] line (visible with -s or -rP). The
desk-scale fixtures generate a 2,000-pattern dataset and train the
production 32-64-64-38 configuration once per session; the quality,
distribution, and timing criteria all read from them.
"""

import os
import time

import numpy as np
import pytest

from corecast import dataset as ds
from corecast.cli import main as cli_main
from corecast.cycle import STATEPOINT_TIMES, simulate_cycle
from corecast.evaluation import evaluate
from corecast.geometry import random_pattern
from corecast.library import default_library
from corecast.neuralnet import (MlpModel, glorot_bound, glorot_init,
                                load_checkpoint, mse, mse_gradient)
from corecast.service import PredictionService
from corecast.solver import MaterialField, solve_eigenvalue
from corecast.training import TrainConfig, sweep, train
from oracles import (dense_two_group_k, finite_difference_gradients,
                     max_relative_error)
from test_solver import UNIFORM, random_grid

GEN_SECONDS_LIMIT = 30 * 60
TRAIN_SECONDS_LIMIT = 10 * 60
DESK_SAMPLES = 2000
DESK_SEED = 20240


def check(name: str, ok: bool, detail: str = ""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" ({detail})"
    print(line, flush=True)
    assert ok, line


# -- desk-scale fixtures -----------------------------------------------------

@pytest.fixture(scope="session")
def desk_dataset(tmp_path_factory):
    path = tmp_path_factory.mktemp("desk") / "desk.csv"
    workers = min(8, os.cpu_count() or 1)
    t0 = time.time()
    summary = ds.generate_dataset(DESK_SAMPLES, DESK_SEED, workers, str(path))
    elapsed = time.time() - t0
    return {"path": path, "seconds": elapsed, "summary": summary,
            "workers": workers}


@pytest.fixture(scope="session")
def desk_model(desk_dataset):
    table = ds.load_dataset(str(desk_dataset["path"]))
    ref = ds.reference_cycles()
    prep = ds.prepare(table, ref, fraction=0.8, seed=DESK_SEED)
    config = TrainConfig(nh1=64, nh2=64, dropout=0.1, batch_size=32,
                         epochs=200, seed=DESK_SEED)
    t0 = time.time()
    result = train(config, prep.x_train, prep.y_train, prep.x_test,
                   prep.y_test)
    elapsed = time.time() - t0
    return {"result": result, "prep": prep, "seconds": elapsed,
            "table": table}


# -- criteria -------------------------------------------------------------------

def test_eigensolver_against_dense_oracle():
    rng = np.random.default_rng(2718)
    t0 = time.time()
    worst = 0.0
    for _ in range(50):
        nr, nc = rng.integers(2, 7, size=2)
        cells = random_grid(rng, int(nr), int(nc))
        field = MaterialField.from_constants_grid(cells, pitch=21.5)
        k = solve_eigenvalue(field).k_eff
        k_ref = dense_two_group_k(cells, 21.5)
        worst = max(worst, abs(k - k_ref) / k_ref)
    elapsed = time.time() - t0

    field = MaterialField.from_uniform((4, 4), UNIFORM)
    k_refl = solve_eigenvalue(field, boundary="reflective").k_eff
    analytic_err = abs(k_refl - 0.025 / 0.026)

    check("eigensolver matches dense oracle on 50 grids to 1e-8",
          worst < 1e-8, f"worst rel err {worst:.2e}")
    check("infinite-medium analytic case to 1e-10",
          analytic_err < 1e-10, f"err {analytic_err:.2e}")
    check("eigensolver criterion runtime < 5 s", elapsed < 5.0,
          f"{elapsed:.2f} s")


def test_gradients_against_finite_differences():
    rng = np.random.default_rng(314)
    t0 = time.time()
    worst = 0.0
    for _ in range(20):
        nh1, nh2 = (int(v) for v in rng.integers(3, 9, size=2))
        model = MlpModel.initialize(nh1, nh2, dropout=0.0,
                                    seed=int(rng.integers(1e9)),
                                    n_in=5, n_out=4)
        x = rng.normal(size=(4, 5))
        t = rng.normal(size=(4, 4))
        out, cache = model.forward(x)
        grads = model.backward(cache, mse_gradient(out, t))

        def loss():
            return mse(model.predict(x), t)

        fd = finite_difference_gradients(loss, model.parameters(), h=1e-6)
        worst = max(worst, max_relative_error(grads, fd))
    elapsed = time.time() - t0
    check("backprop matches central differences on 20 architectures to 1e-5",
          worst < 1e-5, f"worst rel err {worst:.2e}")
    check("gradient criterion runtime < 30 s", elapsed < 30.0,
          f"{elapsed:.1f} s")


def test_glorot_bound_and_variance():
    bound = glorot_bound(32, 64)
    check("glorot bound for (32, 64) is exactly 0.25", bound == 0.25,
          f"bound {bound!r}")
    rng = np.random.default_rng(99)
    samples = np.concatenate(
        [glorot_init(32, 64, rng).ravel() for _ in range(50)])
    assert samples.size >= 100_000
    target = 2.0 / 96.0
    rel = abs(samples.var() - target) / target
    check("glorot empirical variance within 5% of 2/(n_in+n_out)",
          rel < 0.05, f"rel dev {rel:.3%}")


def test_cycle_length_interpolation_exact():
    got = ds.cycle_length_from_trace([100.0, 110.0], [0.01, -0.01])
    check("symmetric crossing case returns 105.0", got == 105.0, f"got {got}")

    rng = np.random.default_rng(555)
    worst = 0.0
    for _ in range(500):
        times = np.sort(rng.uniform(0.0, 613.0, size=20))
        seg = int(rng.integers(0, 19))
        t_star = rng.uniform(times[seg] + 1e-9, times[seg + 1] - 1e-9)
        slope = -rng.uniform(1e-4, 0.1)
        rho = slope * (times - t_star)
        got = ds.cycle_length_from_trace(times, rho)
        worst = max(worst, abs(got - t_star))
    check("interpolation exact (<= 1e-12 relative) on piecewise-linear traces",
          worst < 1e-12 * 613.0, f"worst abs err {worst:.2e}")


def test_desk_scale_end_to_end(desk_dataset, desk_model):
    gen_s = desk_dataset["seconds"]
    scale = max(1.0, 8.0 / desk_dataset["workers"])
    check(f"generation of {DESK_SAMPLES} patterns within budget "
          f"({desk_dataset['workers']} workers)",
          gen_s <= GEN_SECONDS_LIMIT * scale, f"{gen_s:.0f} s")
    check("training within 10 min", desk_model["seconds"] <= TRAIN_SECONDS_LIMIT,
          f"{desk_model['seconds']:.0f} s")

    prep = desk_model["prep"]
    result = desk_model["result"]
    report = evaluate(result.best_model, prep.label_scaler,
                      prep.x_test, prep.y_test)
    check("cycle-length mean relative error <= 2.0%",
          report.cycle_mean_relative_error_pct <= 2.0,
          f"{report.cycle_mean_relative_error_pct:.3f}%")
    check("cycle-length MAE <= 8 EFPD",
          report.cycle_mean_absolute_error_efpd <= 8.0,
          f"{report.cycle_mean_absolute_error_efpd:.2f} EFPD")
    check("cycle-length Pearson >= 0.95", report.pearson_cycle >= 0.95,
          f"{report.pearson_cycle:.4f}")
    check("mean absolute reactivity error <= 0.005",
          report.reactivity_mean_absolute_error <= 0.005,
          f"{report.reactivity_mean_absolute_error:.5f}")


def test_distribution_match(desk_model):
    prep = desk_model["prep"]
    result = desk_model["result"]
    report = evaluate(result.best_model, prep.label_scaler,
                      prep.x_test, prep.y_test)
    mu_real, sigma_real = report.real_fit
    mu_pred, sigma_pred = report.predicted_fit
    mu_dev = abs(mu_pred - mu_real) / mu_real
    sigma_dev = abs(sigma_pred - sigma_real) / sigma_real
    check("predicted cycle-length mu within 2% of real", mu_dev <= 0.02,
          f"dev {mu_dev:.3%}")
    check("predicted cycle-length sigma within 15% of real", sigma_dev <= 0.15,
          f"dev {sigma_dev:.3%}")


def test_sweep_artifact_shape(desk_model):
    prep = desk_model["prep"]
    base = TrainConfig(epochs=30, batch_size=32, seed=7)
    rows, logs = sweep(prep.x_train, prep.y_train, prep.x_test, prep.y_test,
                       base=base)
    check("default grid trains 18 runs", len(rows) == 18, f"{len(rows)} runs")

    n_batches = int(np.ceil(len(prep.x_train) / 32)) * 30
    expected_names = [f"run-{i + 1}-{a}-{b}-{d:g}"
                      for i, (a, b, d) in enumerate(
                          (a, b, d)
                          for a in (32, 64, 128)
                          for b in (32, 64, 128)
                          for d in (0.05, 0.1))]
    ok_names = [r.run_name for r in rows] == expected_names
    check("run names match run-alpha-NH1-NH2-delta", ok_names)

    series_ok = True
    for log in logs:
        train_series = log.series("train")
        val_series = log.series("val")
        if len(train_series) != n_batches or len(val_series) != 30:
            series_ok = False
            break
    check("every run logs a train point per batch and a val point per epoch",
          series_ok, f"expected {n_batches} train / 30 val entries")

    flag_ok = all(r.flagged == (r.gap > 2.0 * r.final_train_mse) for r in rows)
    check("summary flags any run with gap > 2x final train MSE", flag_ok)


def test_generation_deterministic_across_workers(tmp_path):
    a, b = tmp_path / "w1.csv", tmp_path / "w2.csv"
    ds.generate_dataset(4, master_seed=909, workers=1, out_path=str(a))
    ds.generate_dataset(4, master_seed=909, workers=2, out_path=str(b))
    same = a.read_bytes() == b.read_bytes()
    check("gen-data output byte-identical for 1 vs 2 workers", same)


def test_training_bitwise_reproducible(tiny_pipeline, tmp_path):
    out1, out2 = tmp_path / "m1.json", tmp_path / "m2.json"
    argv = ["train", "--data", str(tiny_pipeline["data"]), "--nh1", "8",
            "--nh2", "8", "--dropout", "0.1", "--epochs", "4", "--seed", "5"]
    assert cli_main(argv + ["--out", str(out1)]) == 0
    assert cli_main(argv + ["--out", str(out2)]) == 0
    same = out1.read_bytes() == out2.read_bytes()
    check("train output bitwise-identical for a fixed seed", same)
    ck1 = load_checkpoint(str(out1))
    ck2 = load_checkpoint(str(out2))
    weights_equal = all(np.array_equal(a, b) for a, b in
                        zip(ck1.model.parameters(), ck2.model.parameters()))
    check("reloaded weights bitwise-equal across runs", weights_equal)


def test_surrogate_speedup(tiny_pipeline):
    ckpt = load_checkpoint(str(tiny_pipeline["model"]))
    service = PredictionService(ckpt)
    pattern = list(random_pattern(4).octant)
    service.predict(pattern)

    t0 = time.perf_counter()
    oracle_runs = 2
    for _ in range(oracle_runs):
        simulate_cycle(random_pattern(4), default_library())
    oracle_s = (time.perf_counter() - t0) / oracle_runs

    n = 300
    t0 = time.perf_counter()
    for _ in range(n):
        service.predict(pattern)
    predict_s = (time.perf_counter() - t0) / n
    ratio = oracle_s / predict_s
    check("surrogate inference >= 100x faster than the oracle", ratio >= 100.0,
          f"{ratio:.0f}x ({predict_s * 1e3:.3f} ms vs {oracle_s:.2f} s)")
    check("service inference compute <= 1 ms", predict_s <= 1e-3,
          f"{predict_s * 1e3:.3f} ms")


def test_statepoint_indexing_consistency():
    # rho_69 exists and sits at t = 613 EFPD, matching the trace schedule
    check("statepoint schedule provides rho_0..rho_69 with t69 = 613",
          len(STATEPOINT_TIMES) == 70 and STATEPOINT_TIMES[-1] == 613.0)
