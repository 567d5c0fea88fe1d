"""Exit criteria. Each test records one PASS/FAIL line in the terminal summary."""

import io
import json
import time
import warnings
from contextlib import redirect_stderr, redirect_stdout

import numpy as np
import pytest

from helpers import (AC1_TRUTH, ac1_spec, brute_force_ey1I, dataset_rows, normal_equations,
                     random_binary_dataset, random_discretized_spec, record)
from organic_effects import (Dataset, bootstrap_effects, estimate_effects, fit_discrete_laws,
                             fit_outcome_model, fit_shift_model, identify_effects,
                             identify_ey1I, least_squares, plugin_ey1I, simulate_observed)
from organic_effects.cli import run
from organic_effects.errors import IdentificationGap, TooManyFailures
from organic_effects.io import dumps_json, save_spec
from organic_effects.model import ESTIMANDS

C1_N, C1_SEED, C1_BOOT = 50_000, 42, 200
C3_SPECS, C3_N, C3_BOOT = 10, 100_000, 100
C6_DATASETS, C6_N, C6_B, C6_ALPHA = 200, 2000, 400, 0.05


def _cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = run([str(v) for v in argv])
    assert code == 0, err.getvalue()
    return out.getvalue()


def criterion1(tmp_path):
    spec_path, data_path = tmp_path / "ac1.json", tmp_path / "ac1.csv"
    save_spec(ac1_spec(), spec_path)
    start = time.perf_counter()
    _cli(["simulate", "--spec", spec_path, "--n", C1_N, "--seed", C1_SEED, "--out", data_path])
    out = _cli(["estimate", "--data", data_path, "--bootstrap", C1_BOOT, "--seed", C1_SEED])
    return out, time.perf_counter() - start


def criterion3(tmp_path):
    rng = np.random.default_rng(3)
    outputs = []
    start = time.perf_counter()
    for i in range(C3_SPECS):
        spec = random_discretized_spec(rng, k=i % 2)
        spec_path, data_path = tmp_path / f"s{i}.json", tmp_path / f"s{i}.csv"
        save_spec(spec, spec_path)
        _cli(["simulate", "--spec", spec_path, "--n", C3_N, "--seed", 1000 + i,
              "--out", data_path])
        ident = _cli(["identify", "--data", data_path, "--bootstrap", C3_BOOT, "--seed", i])
        oracle = _cli(["oracle", "--spec", spec_path, "--n", C3_N, "--seed", 2000 + i])
        outputs.append((ident, oracle))
    return outputs, time.perf_counter() - start


def criterion6(n_jobs=1):
    start = time.perf_counter()
    intervals = []
    for i in range(C6_DATASETS):
        d = simulate_observed(ac1_spec(), C6_N, 60_000 + i)
        s = bootstrap_effects(d, b=C6_B, alpha=C6_ALPHA, seed=i, n_jobs=n_jobs)
        intervals.append({"point": s.point.to_dict(), **s.to_dict(), "replicates_ok": len(s.replicates)})
    return dumps_json(intervals), time.perf_counter() - start


@pytest.fixture(scope="module")
def c1(tmp_path_factory):
    return criterion1(tmp_path_factory.mktemp("c1"))


@pytest.fixture(scope="module")
def c3(tmp_path_factory):
    return criterion3(tmp_path_factory.mktemp("c3"))


@pytest.fixture(scope="module")
def c6():
    return criterion6()


def test_c1_end_to_end_recovery(c1):
    out, seconds = c1
    payload = json.loads(out)
    z = {name: abs(payload[name] - AC1_TRUTH[name]) / payload["bootstrap"]["se"][name]
         for name in ESTIMANDS}
    ok = max(z.values()) <= 3.0 and seconds < 10.0
    record("C1", ok, f"simulate+estimate n={C1_N}: max |est-truth|/se = {max(z.values()):.2f} "
                     f"(tol 3), {seconds:.1f} s (budget 10 s)")
    assert ok, z


def test_c2_exact_engine_vs_brute_force():
    rng = np.random.default_rng(2)
    datasets = []
    while len(datasets) < 100:
        d = random_binary_dataset(rng, int(rng.integers(8, 65)), int(rng.integers(0, 2)), 1)
        expected = brute_force_ey1I(dataset_rows(d))
        if expected is not None:
            datasets.append((d, expected))
    start = time.perf_counter()
    values = [identify_ey1I(fit_discrete_laws(d)) for d, _ in datasets]
    seconds = time.perf_counter() - start
    err = max(abs(v - e) for v, (_, e) in zip(values, datasets))
    ok = err <= 1e-12 and seconds < 1.0
    record("C2", ok, f"100 binary datasets: max |exact - brute force| = {err:.2e} (tol 1e-12), "
                     f"{seconds:.2f} s (budget 1 s)")
    assert ok


def test_c3_discrete_vs_oracle(c3):
    outputs, seconds = c3
    zs = []
    for ident, oracle in outputs:
        est, truth = json.loads(ident), json.loads(oracle)
        combined = np.hypot(est["bootstrap"]["se"]["ey1I"], truth["se"]["ey1I"])
        zs.append(abs(est["ey1I"] - truth["ey1I"]) / combined)
    ok = max(zs) <= 3.0 and seconds < 60.0
    record("C3", ok, f"{C3_SPECS} discretized specs n={C3_N}: max z = {max(zs):.2f} (tol 3), "
                     f"{seconds:.1f} s (budget 60 s)")
    assert ok, zs


def test_c4_zero_shift_reduction():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        k, p = int(rng.integers(0, 3)), int(rng.integers(0, 3))
        n = int(rng.integers(40, 200))
        d = Dataset(a=np.r_[0, 1, rng.integers(0, 2, n - 2)], c=rng.normal(size=(n, k)),
                    l=rng.normal(size=(n, p)), m=rng.normal(size=n),
                    y=rng.normal(size=n) * rng.uniform(0.1, 10))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            shift = fit_shift_model(d).with_zero_shift()
            outcome = fit_outcome_model(d)
        treated = d.arm(1)
        # reference: f_theta evaluated row by row at the unshifted mediator
        rows = []
        for i in range(treated.n):
            value = 0.0
            for theta, feature in zip(outcome.theta, outcome.features):
                term = theta
                for factor in feature:
                    term *= treated.m[i] if factor == "m" else (
                        treated.l if factor[0] == "l" else treated.c)[i, int(factor[1:]) - 1]
                value += term
            rows.append(value)
        worst = max(worst, abs(plugin_ey1I(d, shift, outcome) - np.mean(rows)))
    ok = worst <= 1e-12
    record("C4", ok, f"100 random datasets: max |plugin - treated mean f(M,L,C)| = {worst:.2e} "
                     f"(tol 1e-12)")
    assert ok


def test_c5_least_squares_gradient_and_oracle():
    rng = np.random.default_rng(5)
    worst_grad = worst_coef = 0.0
    for _ in range(100):
        cols = int(rng.integers(1, 10))
        rows = int(rng.integers(2 * cols + 5, 400))
        x = rng.normal(size=(rows, cols)) * rng.uniform(0.1, 10)
        y = x @ rng.normal(size=cols) + rng.normal(size=rows)
        coef, _, ok = least_squares(x, y)
        assert ok
        grad = np.max(np.abs(x.T @ (y - x @ coef))) / (np.linalg.norm(x) * np.linalg.norm(y))
        oracle = normal_equations(x, y)
        worst_grad = max(worst_grad, grad)
        worst_coef = max(worst_coef, np.linalg.norm(coef - oracle) / np.linalg.norm(oracle))
    ok = worst_grad <= 1e-6 and worst_coef <= 1e-8
    record("C5", ok, f"100 designs: max relative |X^T r| = {worst_grad:.2e} (tol 1e-6), "
                     f"max relative coef error vs normal equations = {worst_coef:.2e} (tol 1e-8)")
    assert ok


def test_c6_bootstrap_coverage(c6):
    text, seconds = c6
    results = json.loads(text)
    covered = [r["ci_lower"]["organic_direct"] <= 2.0 <= r["ci_upper"]["organic_direct"]
               for r in results]
    coverage = float(np.mean(covered))
    ok = 0.90 <= coverage <= 0.99 and seconds < 300
    record("C6", ok, f"{C6_DATASETS} datasets n={C6_N} b={C6_B}: coverage of direct = "
                     f"{coverage:.3f} (target [0.90, 0.99]), {seconds:.0f} s (budget 300 s)")
    assert ok


def test_c7_determinism(c1, c3, c6, tmp_path_factory):
    again1, _ = criterion1(tmp_path_factory.mktemp("c1_again"))
    again3, _ = criterion3(tmp_path_factory.mktemp("c3_again"))
    again6, _ = criterion6(n_jobs=2)
    same = {"C1": again1 == c1[0], "C3": again3 == c3[0], "C6": again6 == c6[0]}
    ok = all(same.values())
    record("C7", ok, "byte-identical JSON on rerun: " + ", ".join(
        f"{k}={'yes' if v else 'NO'}" for k, v in same.items()) + " (C6 rerun with 2 threads)")
    assert ok


def test_c8_decomposition_identity():
    rng = np.random.default_rng(8)
    worst, produced, refused = 0.0, 0, 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for i in range(1000):
            k, p = int(rng.integers(0, 3)), int(rng.integers(0, 3))
            if i % 2:
                k, p = min(k, 1), 1
            # enough records per arm for the default outcome features plus one
            per_arm = 3 + 2 * k + 2 * p
            n = int(rng.integers(2 * per_arm, 80))
            scale = rng.uniform(0.01, 100)
            a = np.r_[np.tile([0, 1], per_arm), rng.integers(0, 2, n - 2 * per_arm)]
            if i % 2:
                d = random_binary_dataset(rng, n, k, p, y_scale=scale).replace(a=a)
            else:
                d = Dataset(a=a, c=rng.normal(size=(n, k)),
                            l=rng.normal(size=(n, p)), m=rng.normal(size=n) * scale,
                            y=rng.normal(size=n) * scale + rng.normal() * scale)
            estimates = [estimate_effects(d)]
            if i % 2:
                try:
                    estimates.append(identify_effects(d))
                except IdentificationGap:
                    pass
            if i % 50 == 0:
                try:
                    s = bootstrap_effects(d, b=20, seed=i)
                except TooManyFailures:
                    refused += 1  # tiny samples lose an arm under resampling
                    continue
                reps = s.replicates
                estimates.append(s.point)
                worst = max(worst, float(np.max(np.abs(reps[:, 3] + reps[:, 4] - (reps[:, 1] - reps[:, 0])))))
                produced += len(reps)
            for e in estimates:
                worst = max(worst, abs(e.organic_direct + e.organic_indirect - (e.ey1 - e.ey0)))
            produced += len(estimates)
    ok = worst < 1e-10
    record("C8", ok, f"{produced} estimates from 1000 fuzzed datasets: max |direct + indirect - "
                     f"(ey1 - ey0)| = {worst:.2e} (tol 1e-10); {refused} tiny bootstraps refused")
    assert ok
