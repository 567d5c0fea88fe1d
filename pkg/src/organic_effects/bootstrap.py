"""Nonparametric (record-level) bootstrap for the effect estimates."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .discrete import CellCodes, identify_effects, identify_effects_weighted
from .errors import DegenerateDesign, EmptyArm, IdentificationGap, TooManyFailures
from .model import ESTIMANDS, Dataset, EffectEstimates
from .parametric import estimate_effects

MAX_FAILURE_FRACTION = 0.10
# errors a resample may legitimately hit; anything else propagates
_REPLICATE_ERRORS = (DegenerateDesign, EmptyArm, IdentificationGap)


@dataclass(frozen=True, eq=False)
class BootstrapSummary:
    point: EffectEstimates
    b: int
    alpha: float
    seed: int
    se: dict
    ci_lower: dict
    ci_upper: dict
    failures: int
    failure_causes: tuple
    replicates: np.ndarray  # (b - failures, 5), rows in replicate-index order
    estimator: str = "parametric"

    def to_dict(self) -> dict:
        return {
            "estimator": self.estimator,
            "b": self.b,
            "alpha": self.alpha,
            "seed": self.seed,
            "failures": self.failures,
            "failure_causes": [f"{r}: {cause}" for r, cause in self.failure_causes],
            "se": dict(self.se),
            "ci_lower": dict(self.ci_lower),
            "ci_upper": dict(self.ci_upper),
        }


def replicate_rng(seed: int, r: int) -> np.random.Generator:
    """Independent stream for replicate ``r``, a pure function of ``(seed, r)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, r])))


def percentile_interval(replicates: np.ndarray, alpha: float):
    lo = np.quantile(replicates, alpha / 2, axis=0, method="linear")
    hi = np.quantile(replicates, 1 - alpha / 2, axis=0, method="linear")
    return lo, hi


def bootstrap_effects(dataset: Dataset, features=None, b: int = 1000, alpha: float = 0.05,
                      seed: int = 0, *, estimator: str = "parametric", n_jobs: int = 1,
                      shift_mode: str = "joint", strict: bool = False,
                      smoothing: float = 0.0) -> BootstrapSummary:
    """Bootstrap standard errors and percentile intervals for every estimand.

    Replicate ``r`` resamples ``n`` records with replacement using
    :func:`replicate_rng`, so results do not depend on ``n_jobs``.
    Replicates that lose an arm, hit a degenerate design or an
    identification gap are skipped; more than 10% skipped raises
    :class:`TooManyFailures`.

    Parameters
    ----------
    estimator : {"parametric", "discrete"}
        Which pipeline is re-run on each resample.
    """
    if b < 2:
        raise ValueError("need b >= 2 bootstrap replicates")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    n = dataset.n

    if estimator == "parametric":
        point = estimate_effects(dataset, features, shift_mode=shift_mode, strict=strict)

        def one(r):
            idx = replicate_rng(seed, r).integers(0, n, n)
            return estimate_effects(dataset.take(idx), features, shift_mode=shift_mode,
                                    strict=strict, warn=False)
    elif estimator == "discrete":
        point = identify_effects(dataset, smoothing)
        codes = CellCodes.of(dataset)

        def one(r):
            idx = replicate_rng(seed, r).integers(0, n, n)
            weights = np.bincount(idx, minlength=n).astype(np.float64)
            return identify_effects_weighted(codes, dataset, weights, smoothing)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")

    def guarded(r):
        try:
            return one(r).as_array()
        except _REPLICATE_ERRORS as exc:
            return f"{type(exc).__name__}: {exc}"

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(guarded, range(b)))
    else:
        results = [guarded(r) for r in range(b)]

    causes = tuple((r, res) for r, res in enumerate(results) if isinstance(res, str))
    if len(causes) > MAX_FAILURE_FRACTION * b:
        raise TooManyFailures(
            f"{len(causes)} of {b} bootstrap replicates failed (first: {causes[0][1]})", causes)
    reps = np.array([res for res in results if not isinstance(res, str)]).reshape(-1, len(ESTIMANDS))
    se = reps.std(axis=0, ddof=1)
    lo, hi = percentile_interval(reps, alpha)
    return BootstrapSummary(
        point=point, b=b, alpha=alpha, seed=seed,
        se=dict(zip(ESTIMANDS, se.tolist())),
        ci_lower=dict(zip(ESTIMANDS, lo.tolist())),
        ci_upper=dict(zip(ESTIMANDS, hi.tolist())),
        failures=len(causes), failure_causes=causes, replicates=reps, estimator=estimator,
    )
