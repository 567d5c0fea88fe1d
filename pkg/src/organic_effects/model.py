"""Core data types: observational records, datasets, fitted models, estimates.

A :class:`Dataset` stores its records column-wise as read-only numpy arrays::

    a : (n,)   treatment indicator, int8
    c : (n, k) pre-treatment covariates
    l : (n, p) post-treatment common causes of mediator and outcome
    m : (n,)   mediator
    y : (n,)   outcome

``k`` or ``p`` may be zero, in which case the matching array has no columns.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyArm

ESTIMANDS = ("ey0", "ey1", "ey1I", "organic_direct", "organic_indirect")


def _frozen(arr, ndim, dtype=np.float64):
    out = np.array(arr, dtype=dtype, copy=True, ndmin=ndim)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ObservedRecord:
    a: int
    c: tuple
    l: tuple
    m: float
    y: float


@dataclass(frozen=True, eq=False)
class Dataset:
    a: np.ndarray
    c: np.ndarray
    l: np.ndarray
    m: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a)
        if a.ndim != 1:
            raise DimensionMismatch(f"a must be one-dimensional, got shape {a.shape}")
        n = a.shape[0]
        # non-integral treatment values survive as-is so validation can report them
        a_int = a.astype(np.int8) if np.all(np.isin(a, (0, 1))) else a.astype(np.float64)
        object.__setattr__(self, "a", _frozen(a_int, 1, a_int.dtype))
        for name in ("c", "l"):
            arr = np.asarray(self.__dict__[name], dtype=np.float64)
            if arr.ndim == 1 and arr.shape[0] == n and n > 0:
                arr = arr.reshape(n, 1)
            elif arr.size == 0:
                arr = arr.reshape(n, arr.shape[-1] if arr.ndim == 2 else 0)
            if arr.ndim != 2 or arr.shape[0] != n:
                raise DimensionMismatch(f"{name} has shape {arr.shape}, expected ({n}, *)")
            object.__setattr__(self, name, _frozen(arr, 2))
        for name in ("m", "y"):
            arr = np.asarray(self.__dict__[name], dtype=np.float64)
            if arr.shape != (n,):
                raise DimensionMismatch(f"{name} has shape {arr.shape}, expected ({n},)")
            object.__setattr__(self, name, _frozen(arr, 1))

    @classmethod
    def from_records(cls, records: Iterable[ObservedRecord], k=None, p=None) -> "Dataset":
        records = list(records)
        if k is None:
            k = len(records[0].c) if records else 0
        if p is None:
            p = len(records[0].l) if records else 0
        for i, rec in enumerate(records):
            if len(rec.c) != k or len(rec.l) != p:
                raise DimensionMismatch(
                    f"record {i} has dims (k={len(rec.c)}, p={len(rec.l)}), expected (k={k}, p={p})"
                )
        n = len(records)
        return cls(
            a=np.array([r.a for r in records]),
            c=np.array([r.c for r in records], dtype=np.float64).reshape(n, k),
            l=np.array([r.l for r in records], dtype=np.float64).reshape(n, p),
            m=np.array([r.m for r in records], dtype=np.float64),
            y=np.array([r.y for r in records], dtype=np.float64),
        )

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def k(self) -> int:
        return self.c.shape[1]

    @property
    def p(self) -> int:
        return self.l.shape[1]

    def __len__(self):
        return self.n

    def __getitem__(self, i) -> ObservedRecord:
        return ObservedRecord(
            a=int(self.a[i]),
            c=tuple(float(v) for v in self.c[i]),
            l=tuple(float(v) for v in self.l[i]),
            m=float(self.m[i]),
            y=float(self.y[i]),
        )

    def __iter__(self) -> Iterator[ObservedRecord]:
        return (self[i] for i in range(self.n))

    @property
    def records(self) -> list:
        return list(self)

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(a=self.a[idx], c=self.c[idx], l=self.l[idx], m=self.m[idx], y=self.y[idx])

    def arm(self, a: int) -> "Dataset":
        return self.take(np.flatnonzero(self.a == a))

    def require_arms(self):
        for arm in (0, 1):
            if not np.any(self.a == arm):
                raise EmptyArm(f"no records with a={arm}")

    def column(self, name: str) -> np.ndarray:
        """Return a column by its CSV name (``a``, ``c1``.., ``l1``.., ``m``, ``y``)."""
        if name in ("a", "m", "y"):
            return getattr(self, name)
        match = re.fullmatch(r"([cl])([1-9][0-9]*)", name)
        if match:
            block = getattr(self, match.group(1))
            j = int(match.group(2)) - 1
            if j < block.shape[1]:
                return block[:, j]
        raise KeyError(name)

    def column_names(self) -> list:
        return (["a"] + [f"c{i + 1}" for i in range(self.k)]
                + [f"l{j + 1}" for j in range(self.p)] + ["m", "y"])

    def replace(self, **columns) -> "Dataset":
        base = dict(a=self.a, c=self.c, l=self.l, m=self.m, y=self.y)
        base.update(columns)
        return Dataset(**base)


class Violation(NamedTuple):
    index: int | None
    field: str
    message: str

    def __str__(self):
        where = "dataset" if self.index is None else f"record {self.index}"
        return f"{where}: {self.field}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_dataset(dataset: Dataset, require_both_arms: bool = True) -> ValidationReport:
    """Report every invariant violation of ``dataset``.

    Checks non-emptiness, binary treatment, finiteness of every value and,
    unless ``require_both_arms`` is false, that both arms are present.
    Never raises; callers decide what to do with the report.
    """
    out = []
    if dataset.n == 0:
        out.append(Violation(None, "n", "dataset is empty"))
    bad_a = np.flatnonzero(~np.isin(dataset.a, (0, 1)))
    for i in bad_a:
        out.append(Violation(int(i), "a", f"treatment must be binary 0/1, got {dataset.a[i]!r}"))
    for name in ("c", "l"):
        block = getattr(dataset, name)
        rows, cols = np.nonzero(~np.isfinite(block))
        for i, j in zip(rows, cols):
            out.append(Violation(int(i), f"{name}{j + 1}", f"non-finite value {block[i, j]!r}"))
    for name in ("m", "y"):
        col = getattr(dataset, name)
        for i in np.flatnonzero(~np.isfinite(col)):
            out.append(Violation(int(i), name, f"non-finite value {col[i]!r}"))
    if require_both_arms and dataset.n:
        for arm in (0, 1):
            if not np.any(dataset.a == arm):
                out.append(Violation(None, "a", f"arm {arm} absent"))
    out.sort(key=lambda v: (-1 if v.index is None else v.index))
    return ValidationReport(tuple(out))


def validate_records(records: Sequence[ObservedRecord], k: int, p: int) -> ValidationReport:
    """Like :func:`validate_dataset` but for loose records that may disagree on dimensions."""
    out = [Violation(i, "c" if len(r.c) != k else "l",
                     f"dimension mismatch: got (k={len(r.c)}, p={len(r.l)}), expected (k={k}, p={p})")
           for i, r in enumerate(records) if len(r.c) != k or len(r.l) != p]
    if out:
        return ValidationReport(tuple(out))
    return validate_dataset(Dataset.from_records(records, k, p))


@dataclass(frozen=True, eq=False)
class ShiftModelFit:
    """Mediator regression ``m ~ 1 + a + c + l + a*c + a*l + c*l``.

    ``beta6[i, j]`` multiplies ``c_i * l_j``.  The treatment-induced mediator
    shift at covariates ``(c, l)`` is ``beta1 + beta4 . c + beta5 . l``.
    """

    beta0: float
    beta1: float
    beta2: np.ndarray
    beta3: np.ndarray
    beta4: np.ndarray
    beta5: np.ndarray
    beta6: np.ndarray
    residual_sd: float
    rank_ok: bool = True
    arm_residual_sd: tuple = (float("nan"), float("nan"))

    def __post_init__(self):
        for name in ("beta2", "beta3", "beta4", "beta5"):
            object.__setattr__(self, name, _frozen(self.__dict__[name], 1))
        beta6 = np.asarray(self.beta6, dtype=np.float64).reshape(len(self.beta2), len(self.beta3))
        object.__setattr__(self, "beta6", _frozen(beta6, 2))
        if len(self.beta4) != len(self.beta2) or len(self.beta5) != len(self.beta3):
            raise DimensionMismatch("beta4/beta5 must match beta2/beta3 in length")
        if self.residual_sd < 0:
            raise ValueError("residual_sd must be nonnegative")

    @property
    def k(self):
        return len(self.beta2)

    @property
    def p(self):
        return len(self.beta3)

    def shift(self, c, l) -> np.ndarray:
        """Mediator shift at rows of ``c`` (n, k) and ``l`` (n, p); 1-d inputs are one point."""
        c = np.asarray(c, dtype=np.float64)
        l = np.asarray(l, dtype=np.float64)
        if c.ndim == 1:
            c = c[None, :]
        if l.ndim == 1:
            l = l[None, :]
        return self.beta1 + c @ self.beta4 + l @ self.beta5

    def with_zero_shift(self) -> "ShiftModelFit":
        return ShiftModelFit(self.beta0, 0.0, self.beta2, self.beta3, np.zeros(self.k),
                             np.zeros(self.p), self.beta6, self.residual_sd, self.rank_ok,
                             self.arm_residual_sd)


# Outcome-model features are tuples of factor names; () is the constant.
_FACTOR = re.compile(r"m|[cl][1-9][0-9]*")


def feature_label(feature: tuple) -> str:
    return "*".join(feature) if feature else "1"


def parse_feature(text: str) -> tuple:
    text = text.strip()
    if text == "1":
        return ()
    factors = tuple(f.strip() for f in text.split("*"))
    for f in factors:
        if not _FACTOR.fullmatch(f):
            raise ValueError(f"unknown factor {f!r} in feature {text!r}")
    return factors


def parse_features(text: str) -> tuple:
    """Parse ``"1,m,l1,m*l1"`` into a feature spec."""
    return tuple(parse_feature(t) for t in text.split(",") if t.strip())


def default_features(k: int, p: int) -> tuple:
    """``[1, m, l.., c.., m*l.., m*c..]``."""
    ls = [f"l{j + 1}" for j in range(p)]
    cs = [f"c{i + 1}" for i in range(k)]
    return (((), ("m",)) + tuple((v,) for v in ls) + tuple((v,) for v in cs)
            + tuple(("m", v) for v in ls) + tuple(("m", v) for v in cs))


def check_features(features, k: int, p: int):
    labels = [feature_label(f) for f in features]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate features in {labels}")
    for f in features:
        for factor in f:
            if factor != "m":
                j = int(factor[1:])
                if j > (k if factor[0] == "c" else p):
                    raise DimensionMismatch(f"feature {feature_label(f)} refers to missing column {factor}")


def feature_matrix(features, m, l, c) -> np.ndarray:
    """Evaluate each feature at rows of ``(m, l, c)``; returns ``(n, len(features))``."""
    m = np.asarray(m, dtype=np.float64)
    out = np.ones((m.shape[0], len(features)))
    for col, f in enumerate(features):
        for factor in f:
            if factor == "m":
                out[:, col] *= m
            elif factor[0] == "l":
                out[:, col] *= l[:, int(factor[1:]) - 1]
            else:
                out[:, col] *= c[:, int(factor[1:]) - 1]
    return out


@dataclass(frozen=True, eq=False)
class OutcomeModelFit:
    """Treated-arm outcome regression ``E[Y | m, l, c, A=1] = sum_j theta_j * feature_j``."""

    features: tuple
    theta: np.ndarray
    residual_sd: float = float("nan")
    rank_ok: bool = True

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(tuple(f) for f in self.features))
        object.__setattr__(self, "theta", _frozen(self.theta, 1))
        if len(self.theta) != len(self.features):
            raise DimensionMismatch("theta and feature spec differ in length")
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("theta must be finite")

    @property
    def labels(self):
        return [feature_label(f) for f in self.features]

    def predict(self, m, l, c) -> np.ndarray:
        return feature_matrix(self.features, m, l, c) @ self.theta


@dataclass(frozen=True)
class EffectEstimates:
    """Mean potential outcomes and the organic effect decomposition.

    Only the three means are passed in; the effects are always derived
    here, so ``organic_direct == ey1I - ey0`` and
    ``organic_indirect == ey1 - ey1I`` hold exactly.
    """

    ey0: float
    ey1: float
    ey1I: float
    organic_direct: float = field(init=False)
    organic_indirect: float = field(init=False)

    def __post_init__(self):
        for name in ("ey0", "ey1", "ey1I"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "organic_direct", self.ey1I - self.ey0)
        object.__setattr__(self, "organic_indirect", self.ey1 - self.ey1I)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in ESTIMANDS}

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in ESTIMANDS])


def arm_means(dataset: Dataset, weights=None) -> tuple:
    """(mean y among a=0, mean y among a=1), optionally frequency-weighted."""
    dataset.require_arms()
    out = []
    for arm in (0, 1):
        mask = dataset.a == arm
        if weights is None:
            out.append(float(np.mean(dataset.y[mask])))
        else:
            w = weights[mask]
            if w.sum() == 0:
                raise EmptyArm(f"no records with a={arm}")
            out.append(float(np.dot(w, dataset.y[mask]) / w.sum()))
    return tuple(out)
