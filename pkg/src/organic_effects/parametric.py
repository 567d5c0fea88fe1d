"""Parametric plug-in estimation of E(Y_1^I).

Two regressions are fit by least squares:

* the mediator model ``m ~ 1 + a + c + l + a*c + a*l + c*l`` over both arms,
  whose treatment terms give the mediator shift
  ``shift(c, l) = beta1 + beta4 . c + beta5 . l``;
* an outcome model ``E[Y | m, l, c, A=1] = f_theta(m, l, c)`` over the treated.

The plug-in estimate is the treated-arm average of
``f_theta(m - shift(c, l), l, c)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from . import _backend
from .errors import (DegenerateDesign, DimensionMismatch, EmptyArm,
                     HeteroscedasticityWarning, RankDeficiencyWarning)
from .model import (Dataset, EffectEstimates, OutcomeModelFit, ShiftModelFit,
                    arm_means, check_features, default_features, feature_label,
                    feature_matrix)

RANK_RTOL = 1e-10
VARIANCE_RATIO_BOUNDS = (0.5, 2.0)


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    entries: np.ndarray
    column_labels: tuple

    def __post_init__(self):
        x = np.array(self.entries, dtype=np.float64, ndmin=2)
        x.setflags(write=False)
        object.__setattr__(self, "entries", x)
        object.__setattr__(self, "column_labels", tuple(self.column_labels))
        if x.shape[1] < 1:
            raise DimensionMismatch("design matrix needs at least one column")
        if len(self.column_labels) != x.shape[1]:
            raise DimensionMismatch(
                f"{len(self.column_labels)} labels for {x.shape[1]} columns")
        if len(set(self.column_labels)) != len(self.column_labels):
            raise ValueError("column labels must be unique")
        if not np.all(np.isfinite(x)):
            raise ValueError("design matrix entries must be finite")

    @property
    def rows(self):
        return self.entries.shape[0]

    @property
    def cols(self):
        return self.entries.shape[1]


class LeastSquares(NamedTuple):
    coefficients: np.ndarray
    residual_sd: float
    rank_ok: bool


def least_squares(x, y) -> LeastSquares:
    """Ordinary least squares through a thin QR factorization.

    The rank is read off the singular values of ``R`` (equal to those of
    ``x``); values below ``1e-10`` times the largest count as zero.  When
    the rank falls short, the minimum-norm solution ``R^+ Q^T y`` is
    returned with ``rank_ok=False``.

    Parameters
    ----------
    x : DesignMatrix or array_like, shape (rows, cols)
    y : array_like, shape (rows,)
    """
    x = x.entries if isinstance(x, DesignMatrix) else np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"design {x.shape} incompatible with response {y.shape}")
    rows, cols = x.shape
    if cols < 1:
        raise DimensionMismatch("design matrix needs at least one column")
    if rows < cols:
        raise DegenerateDesign(f"{rows} rows < {cols} columns")

    r, qty = _backend.kernels.qr_project(x, y)
    u, s, vt = np.linalg.svd(r)
    rank = int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0
    if rank == cols:
        coef = solve_triangular(r, qty)
    else:
        coef = vt[:rank].T @ ((u[:, :rank].T @ qty) / s[:rank])
    resid = y - x @ coef
    dof = rows - cols
    sd = float(np.sqrt(resid @ resid / dof)) if dof > 0 else 0.0
    return LeastSquares(coef, sd, rank == cols)


def _rank_check(fit: LeastSquares, what: str, strict: bool, warn: bool):
    if fit.rank_ok:
        return
    if strict:
        raise DegenerateDesign(f"{what}: design matrix is rank deficient")
    if warn:
        warnings.warn(f"{what}: rank-deficient design, using minimum-norm solution",
                      RankDeficiencyWarning, stacklevel=3)


def shift_design(dataset: Dataset) -> DesignMatrix:
    """Columns ``[1, a, c.., l.., a*c.., a*l.., c_i*l_j..]`` with ``j`` varying fastest."""
    a = dataset.a.astype(np.float64)[:, None]
    c, l = dataset.c, dataset.l
    cl = (c[:, :, None] * l[:, None, :]).reshape(dataset.n, -1)
    k, p = dataset.k, dataset.p
    labels = (["1", "a"] + [f"c{i+1}" for i in range(k)] + [f"l{j+1}" for j in range(p)]
              + [f"a*c{i+1}" for i in range(k)] + [f"a*l{j+1}" for j in range(p)]
              + [f"c{i+1}*l{j+1}" for i in range(k) for j in range(p)])
    x = np.hstack([np.ones_like(a), a, c, l, a * c, a * l, cl])
    return DesignMatrix(x, labels)


def _arm_design(dataset: Dataset) -> np.ndarray:
    c, l = dataset.c, dataset.l
    cl = (c[:, :, None] * l[:, None, :]).reshape(dataset.n, -1)
    return np.hstack([np.ones((dataset.n, 1)), c, l, cl])


def fit_shift_model(dataset: Dataset, mode: str = "joint", strict: bool = False,
                    warn: bool = True) -> ShiftModelFit:
    """Fit the mediator regression and expose its treatment shift.

    ``mode="joint"`` fits the full-interaction regression on all records.
    ``mode="stratified"`` fits ``m ~ 1 + c + l`` separately per arm and
    reads the treatment terms off the coefficient differences; it is only
    offered without ``c*l`` terms (``k*p == 0``), where it is the same
    model with per-arm residual variances.

    A warning is emitted when the per-arm residual variances differ by
    more than a factor of two, since the shift model needs the mediator
    noise to be distributed alike in both arms.
    """
    dataset.require_arms()
    k, p = dataset.k, dataset.p
    treated = dataset.a == 1
    if mode == "joint":
        x = shift_design(dataset)
        if dataset.n <= x.cols:
            raise DegenerateDesign(
                f"shift model needs n > {x.cols} records, got {dataset.n}")
        fit = least_squares(x, dataset.m)
        _rank_check(fit, "shift model", strict, warn)
        b = fit.coefficients
        resid = dataset.m - x.entries @ b
        beta = dict(beta0=b[0], beta1=b[1], beta2=b[2:2 + k], beta3=b[2 + k:2 + k + p],
                    beta4=b[2 + k + p:2 + 2 * k + p], beta5=b[2 + 2 * k + p:2 + 2 * k + 2 * p],
                    beta6=b[2 + 2 * k + 2 * p:])
        sd, rank_ok = fit.residual_sd, fit.rank_ok
    elif mode == "stratified":
        if k * p:
            raise ValueError("stratified shift model requires k == 0 or p == 0")
        fits = {}
        resid = np.empty(dataset.n)
        for arm in (0, 1):
            mask = treated if arm else ~treated
            x = _arm_design(dataset.take(np.flatnonzero(mask)))
            fits[arm] = least_squares(x, dataset.m[mask])
            _rank_check(fits[arm], f"shift model (arm {arm})", strict, warn)
            resid[mask] = dataset.m[mask] - x @ fits[arm].coefficients
        b0, b1 = fits[0].coefficients, fits[1].coefficients
        d = b1 - b0
        beta = dict(beta0=b0[0], beta1=d[0], beta2=b0[1:1 + k], beta3=b0[1 + k:1 + k + p],
                    beta4=d[1:1 + k], beta5=d[1 + k:1 + k + p], beta6=np.zeros(0))
        dof = dataset.n - 2 * (1 + k + p)
        sd = float(np.sqrt(resid @ resid / dof)) if dof > 0 else 0.0
        rank_ok = fits[0].rank_ok and fits[1].rank_ok
    else:
        raise ValueError(f"unknown shift model mode {mode!r}")

    arm_sd = tuple(float(np.sqrt(np.mean(resid[dataset.a == arm] ** 2))) for arm in (0, 1))
    if warn and arm_sd[0] > 0 and arm_sd[1] > 0:
        ratio = (arm_sd[1] / arm_sd[0]) ** 2
        lo, hi = VARIANCE_RATIO_BOUNDS
        if not lo <= ratio <= hi:
            warnings.warn(
                f"mediator residual variance ratio treated/control = {ratio:.3g} "
                f"outside [{lo}, {hi}]", HeteroscedasticityWarning, stacklevel=2)
    return ShiftModelFit(**beta, residual_sd=sd, rank_ok=rank_ok, arm_residual_sd=arm_sd)


def fit_outcome_model(dataset: Dataset, features=None, strict: bool = False,
                      warn: bool = True) -> OutcomeModelFit:
    """Least-squares fit of ``y`` on ``features(m, l, c)`` among treated records."""
    if features is None:
        features = default_features(dataset.k, dataset.p)
    check_features(features, dataset.k, dataset.p)
    treated = dataset.arm(1)
    if treated.n == 0:
        raise EmptyArm("no records with a=1")
    if treated.n < len(features) + 1:
        raise DegenerateDesign(
            f"outcome model needs at least {len(features) + 1} treated records, got {treated.n}")
    x = DesignMatrix(feature_matrix(features, treated.m, treated.l, treated.c),
                     [feature_label(f) for f in features])
    fit = least_squares(x, treated.y)
    _rank_check(fit, "outcome model", strict, warn)
    return OutcomeModelFit(features, fit.coefficients, fit.residual_sd, fit.rank_ok)


def plugin_ey1I(dataset: Dataset, shift: ShiftModelFit, outcome: OutcomeModelFit) -> float:
    """Treated-arm mean of ``f_theta(m - shift(c, l), l, c)``."""
    treated = dataset.arm(1)
    if treated.n == 0:
        raise EmptyArm("no records with a=1")
    if shift.k != dataset.k or shift.p != dataset.p:
        raise DimensionMismatch("shift model dimensions differ from the dataset")
    m = treated.m - shift.shift(treated.c, treated.l)
    return float(np.mean(outcome.predict(m, treated.l, treated.c)))


def estimate_effects(dataset: Dataset, features=None, *, shift_mode: str = "joint",
                     strict: bool = False, warn: bool = True) -> EffectEstimates:
    """Arm means for E(Y_0), E(Y_1) and the plug-in estimate of E(Y_1^I)."""
    dataset.require_arms()
    shift = fit_shift_model(dataset, mode=shift_mode, strict=strict, warn=warn)
    outcome = fit_outcome_model(dataset, features, strict=strict, warn=warn)
    ey0, ey1 = arm_means(dataset)
    return EffectEstimates(ey0=ey0, ey1=ey1, ey1I=plugin_ey1I(dataset, shift, outcome))
