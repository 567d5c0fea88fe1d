"""Exact identification of E(Y_1^I) for finitely supported (C, L, M).

The identified mean is the finite sum

    sum_{c, l, m}  E[Y | m, l, c, A=1] * f(m | l, c, A=0) * f(l | c, A=1) * f(c)

with every factor replaced by its empirical frequency.  ``f(c)`` pools
both arms.  Cells are grouped by exact value equality, so continuous
columns must be binned first (see :func:`organic_effects.io.bin_dataset`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import IdentificationGap
from .model import Dataset, EffectEstimates, arm_means

MAX_CELLS = 20_000_000


def _factorize_rows(block):
    n, width = block.shape
    if width == 0:
        return np.zeros((1, 0)), np.zeros(n, dtype=np.int64)
    support, codes = np.unique(block, axis=0, return_inverse=True)
    return support, codes.reshape(-1).astype(np.int64)


@dataclass(frozen=True)
class CellCodes:
    """Integer cell codes of a dataset, reusable across bootstrap reweightings."""

    support_c: np.ndarray
    support_l: np.ndarray
    support_m: np.ndarray
    ic: np.ndarray
    il: np.ndarray
    im: np.ndarray

    @classmethod
    def of(cls, dataset: Dataset) -> "CellCodes":
        support_c, ic = _factorize_rows(dataset.c)
        support_l, il = _factorize_rows(dataset.l)
        support_m, im = np.unique(dataset.m, return_inverse=True)
        cells = len(support_c) * len(support_l) * len(support_m)
        if cells > MAX_CELLS:
            raise ValueError(
                f"{cells} (c, l, m) cells; bin continuous columns before exact identification")
        return cls(support_c, support_l, support_m, ic, il, im.reshape(-1).astype(np.int64))


@dataclass(frozen=True, eq=False)
class DiscreteLaw:
    """Empirical frequency tables over the observed supports.

    Tables are dense: ``f_l_given_c[ci, li]`` and ``f_m_given_lc[ci, li, mi]``
    index into ``support_c``, ``support_l`` and ``support_m`` (each sorted).
    Conditioning cells without data hold zeros.  ``y_mean`` is NaN in cells
    without treated records.
    """

    support_c: np.ndarray
    support_l: np.ndarray
    support_m: np.ndarray
    f_c: np.ndarray
    f_l_given_c: np.ndarray
    f_m_given_lc: np.ndarray
    y_mean: np.ndarray

    def weights(self) -> np.ndarray:
        """Product weight of every (c, l, m) cell in the identification sum."""
        return (self.f_c[:, None] * self.f_l_given_c)[:, :, None] * self.f_m_given_lc

    def l_given(self, c) -> tuple:
        ci = self._index(self.support_c, c)
        probs = self.f_l_given_c[ci]
        keep = probs > 0
        return [tuple(v) for v in self.support_l[keep]], probs[keep]

    def m_given(self, l, c) -> tuple:
        ci = self._index(self.support_c, c)
        li = self._index(self.support_l, l)
        probs = self.f_m_given_lc[ci, li]
        keep = probs > 0
        return self.support_m[keep].tolist(), probs[keep]

    def y_at(self, m, l, c) -> float:
        ci = self._index(self.support_c, c)
        li = self._index(self.support_l, l)
        mi = int(np.flatnonzero(self.support_m == m)[0])
        return float(self.y_mean[ci, li, mi])

    @staticmethod
    def _index(support, value):
        value = np.asarray(value, dtype=np.float64).reshape(-1)
        hits = np.flatnonzero(np.all(support == value, axis=1))
        if not len(hits):
            raise KeyError(tuple(value))
        return int(hits[0])


def _cell_text(law_or_codes, ci=None, li=None, mi=None):
    parts = []
    if mi is not None:
        parts.append(f"m={law_or_codes.support_m[mi]:g}")
    if li is not None:
        parts.append("l=" + _vec(law_or_codes.support_l[li]))
    if ci is not None:
        parts.append("c=" + _vec(law_or_codes.support_c[ci]))
    return "(" + ", ".join(parts) + ")"


def _vec(v):
    if len(v) == 1:
        return f"{v[0]:g}"
    return "[" + ", ".join(f"{x:g}" for x in v) + "]"


def _normalize(counts, alpha):
    counts = counts + alpha
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        probs = np.where(total > 0, counts / total, 0.0)
    return probs, total[..., 0]


def law_from_codes(codes: CellCodes, dataset: Dataset, weights=None,
                   smoothing: float = 0.0) -> DiscreteLaw:
    """Build the frequency tables from precomputed cell codes.

    ``weights`` are per-record frequency weights (bootstrap multiplicities);
    ``smoothing`` adds a pseudo-count to every cell of the three probability
    tables.  Raises :class:`IdentificationGap` naming the first cell, in
    canonical order, that carries positive weight but lacks the data to
    estimate its factor.
    """
    if smoothing < 0:
        raise ValueError("smoothing must be nonnegative")
    nc, nl, nm = len(codes.support_c), len(codes.support_l), len(codes.support_m)
    w = np.ones(dataset.n) if weights is None else np.asarray(weights, dtype=np.float64)
    n_c, n_lc1, n_mlc0, n_mlc1, ysum1 = _backend.kernels.tabulate_cells(
        codes.ic, codes.il, codes.im, dataset.a.astype(np.int64), dataset.y, w, nc, nl, nm)

    f_c, _ = _normalize(n_c, smoothing)
    f_lc, treated_c = _normalize(n_lc1, smoothing)
    gap = np.flatnonzero((f_c > 0) & (treated_c == 0))
    if len(gap):
        cell = _cell_text(codes, ci=gap[0])
        raise IdentificationGap(f"no treated record with c {cell}", cell)

    f_mlc, control_lc = _normalize(n_mlc0, smoothing)
    reach = f_c[:, None] * f_lc
    gap = np.argwhere((reach > 0) & (control_lc == 0))
    if len(gap):
        ci, li = gap[0]
        cell = _cell_text(codes, ci=ci, li=li)
        raise IdentificationGap(f"no control record for cell {cell}", cell)

    with np.errstate(invalid="ignore", divide="ignore"):
        y_mean = np.where(n_mlc1 > 0, ysum1 / n_mlc1, np.nan)
    weight = reach[:, :, None] * f_mlc
    gap = np.argwhere((weight > 0) & (n_mlc1 == 0))
    if len(gap):
        ci, li, mi = gap[0]
        cell = _cell_text(codes, ci=ci, li=li, mi=mi)
        raise IdentificationGap(f"no treated record for cell {cell}", cell)

    arrays = dict(support_c=codes.support_c, support_l=codes.support_l,
                  support_m=codes.support_m, f_c=f_c, f_l_given_c=f_lc,
                  f_m_given_lc=f_mlc, y_mean=y_mean)
    for arr in arrays.values():
        arr.setflags(write=False)
    return DiscreteLaw(**arrays)


def fit_discrete_laws(dataset: Dataset, smoothing: float = 0.0) -> DiscreteLaw:
    """Empirical f(c), f(l | c, A=1), f(m | l, c, A=0) and E[Y | m, l, c, A=1]."""
    dataset.require_arms()
    return law_from_codes(CellCodes.of(dataset), dataset, smoothing=smoothing)


def identify_ey1I(law: DiscreteLaw) -> float:
    """Exact identification sum, accumulated over sorted supports."""
    return float(_backend.kernels.weighted_cell_sum(
        law.f_c, law.f_l_given_c, law.f_m_given_lc, law.y_mean))


def identify_effects(dataset: Dataset, smoothing: float = 0.0) -> EffectEstimates:
    dataset.require_arms()
    ey0, ey1 = arm_means(dataset)
    return EffectEstimates(ey0=ey0, ey1=ey1,
                           ey1I=identify_ey1I(fit_discrete_laws(dataset, smoothing)))


def identify_effects_weighted(codes: CellCodes, dataset: Dataset, weights,
                              smoothing: float = 0.0) -> EffectEstimates:
    """:func:`identify_effects` on the dataset reweighted by record multiplicities."""
    ey0, ey1 = arm_means(dataset, weights)
    law = law_from_codes(codes, dataset, weights, smoothing)
    return EffectEstimates(ey0=ey0, ey1=ey1, ey1I=identify_ey1I(law))
