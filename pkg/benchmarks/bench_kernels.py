"""Time the compiled kernels against the numpy fallback.

Run from the repository root::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best wall time per call for both backends and the
speedup of the compiled one.  Inputs are fixed-seed, so repeated runs are
comparable.  End-to-end rows swap the backend used by the estimators.
"""

import argparse
import timeit

import numpy as np

from organic_effects import ScmSpec, bootstrap_effects, simulate_observed
from organic_effects import _backend


def _kernel_cases(rng):
    x = rng.normal(size=(50_000, 12))
    y = rng.normal(size=50_000)

    n, nc, nl, nm = 200_000, 4, 8, 16
    ic, il, im = (rng.integers(0, s, n).astype(np.intp) for s in (nc, nl, nm))
    a = rng.integers(0, 2, n).astype(np.int8)
    yy = rng.normal(size=n)
    w = rng.integers(0, 3, n).astype(np.float64)

    f_c = rng.dirichlet(np.ones(40))
    f_lc = rng.dirichlet(np.ones(30), size=40)
    f_mlc = rng.dirichlet(np.ones(30), size=(40, 30))
    y_mean = rng.normal(size=(40, 30, 30))

    return [
        ("qr_project 50000x12", lambda k: k.qr_project(x, y)),
        ("tabulate_cells n=200000", lambda k: k.tabulate_cells(ic, il, im, a, yy, w, nc, nl, nm)),
        ("weighted_cell_sum 40x30x30", lambda k: k.weighted_cell_sum(f_c, f_lc, f_mlc, y_mean)),
    ]


def _end_to_end_cases():
    spec = ScmSpec(k=1, p=1, l_a=[1.0], b1=1.0, b3=[1.0], ga=1.0, gm=1.0)
    cont = simulate_observed(spec, 2000, 1)
    disc = simulate_observed(spec.replace(discretize=True), 20_000, 2)
    return [
        ("bootstrap parametric n=2000 b=100",
         lambda k: bootstrap_effects(cont, b=100, seed=0)),
        ("bootstrap discrete n=20000 b=100",
         lambda k: bootstrap_effects(disc, b=100, seed=0, estimator="discrete")),
    ]


def _use(kernels):
    # estimators resolve _backend.kernels at call time
    _backend.kernels = kernels


def _best(fn, kernels, repeat):
    _use(kernels)
    fn(kernels)
    return min(timeit.repeat(lambda: fn(kernels), number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    names = _backend.available()
    if "compiled" not in names:
        print("compiled backend not built; only the fallback is timed")
    backends = {name: _backend.load(name) for name in names}
    original = _backend.kernels

    cases = _kernel_cases(np.random.default_rng(0)) + _end_to_end_cases()
    print(f"{'case':36s} {'python ms':>10s} {'compiled ms':>12s} {'speedup':>8s}")
    try:
        for label, fn in cases:
            times = {name: _best(fn, k, args.repeat) * 1e3 for name, k in backends.items()}
            py, comp = times["python"], times.get("compiled")
            if comp is None:
                print(f"{label:36s} {py:10.2f} {'-':>12s} {'-':>8s}")
            else:
                print(f"{label:36s} {py:10.2f} {comp:12.2f} {py / comp:7.2f}x")
    finally:
        _use(original)


if __name__ == "__main__":
    main()
