"""Structural causal model simulator with counterfactual ground truth.

Graph: ``C -> {L, M, Y}``, ``A -> {L, M, Y}``, ``L -> {M, Y}``, ``M -> Y``,
with ``A`` randomized.  Structural equations (all noise Gaussian)::

    C   = c_mean + c_sd * e_C
    L_a = l_intercept + a * l_a + l_c @ C + l_sd * e_L
    M   = b0 + b1 a + b2.C + b3.L + b4.(a C) + b5.(a L) + sum_ij b6_ij C_i L_j + m_sd * e_M
    Y   = g0 + ga a + gm M + gl.L + gc.C + gam a M + M (gml.L) + M (gmc.C) + y_sd * e_Y

Within a unit the two treatment worlds share ``e_L``, ``e_M`` and ``e_Y``.
The mediator under treatment plus an organic intervention, ``M_1^I``, is the
``a=0`` mediator equation evaluated at ``(C, L_1)`` with a fresh noise draw,
so ``M_1^I | L_1, C`` has the law of ``M_0 | L_0, C``; ``Y_1^I`` is the
``a=1`` outcome equation at ``(C, L_1, M_1^I)`` with the unit's ``e_Y``.

With ``discretize=True`` each of ``C``, ``L`` and ``M`` is thresholded to
{0, 1} as soon as it is generated and downstream equations see the binary
values, so the graph holds over the discrete variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .errors import SpecError
from .model import Dataset, EffectEstimates


def _vec(value, size, name):
    arr = np.zeros(size) if value is None else np.asarray(value, dtype=np.float64).reshape(-1)
    if arr.shape != (size,):
        raise SpecError(f"{name} must have length {size}, got {arr.size}")
    return arr


def _mat(value, shape, name):
    arr = np.zeros(shape) if value is None else np.asarray(value, dtype=np.float64)
    if arr.size == 0 and 0 in shape:
        arr = arr.reshape(shape)
    if arr.shape != shape:
        raise SpecError(f"{name} must have shape {shape}, got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ScmSpec:
    k: int = 1
    p: int = 1
    treat_prob: float = 0.5
    c_mean: np.ndarray = None
    c_sd: np.ndarray = None
    l_intercept: np.ndarray = None
    l_a: np.ndarray = None
    l_c: np.ndarray = None      # (p, k)
    l_sd: np.ndarray = None
    b0: float = 0.0
    b1: float = 0.0
    b2: np.ndarray = None
    b3: np.ndarray = None
    b4: np.ndarray = None
    b5: np.ndarray = None
    b6: np.ndarray = None       # (k, p)
    m_sd: float = 1.0
    g0: float = 0.0
    ga: float = 0.0
    gm: float = 0.0
    gl: np.ndarray = None
    gc: np.ndarray = None
    gam: float = 0.0
    gml: np.ndarray = None
    gmc: np.ndarray = None
    y_sd: float = 1.0
    discretize: bool = False
    threshold: float = 0.0

    def __post_init__(self):
        k, p = int(self.k), int(self.p)
        if k < 0 or p < 0:
            raise SpecError("k and p must be nonnegative")
        set_ = lambda name, v: object.__setattr__(self, name, v)
        set_("k", k)
        set_("p", p)
        for name, size in [("c_mean", k), ("l_intercept", p), ("l_a", p), ("b2", k),
                           ("b3", p), ("b4", k), ("b5", p), ("gl", p), ("gc", k),
                           ("gml", p), ("gmc", k)]:
            set_(name, _vec(getattr(self, name), size, name))
        for name, size in [("c_sd", k), ("l_sd", p)]:
            value = getattr(self, name)
            set_(name, np.ones(size) if value is None else _vec(value, size, name))
        set_("l_c", _mat(self.l_c, (p, k), "l_c"))
        set_("b6", _mat(self.b6, (k, p), "b6"))
        for name in ("treat_prob", "b0", "b1", "m_sd", "g0", "ga", "gm", "gam", "y_sd", "threshold"):
            set_(name, float(getattr(self, name)))
        set_("discretize", bool(self.discretize))

        if not 0 < self.treat_prob < 1:
            raise SpecError("treat_prob must lie strictly between 0 and 1")
        if min(self.m_sd, self.y_sd, *self.c_sd, *self.l_sd, 0.0) < 0:
            raise SpecError("noise standard deviations must be nonnegative")
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, (float, np.ndarray)) and not np.all(np.isfinite(value)):
                raise SpecError(f"{f.name} must be finite")
        for arr in (getattr(self, f.name) for f in fields(self)):
            if isinstance(arr, np.ndarray):
                arr.setflags(write=False)

    @classmethod
    def from_dict(cls, data: dict) -> "ScmSpec":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise SpecError(f"unknown spec fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = value.tolist() if isinstance(value, np.ndarray) else value
        return out

    def replace(self, **changes) -> "ScmSpec":
        data = self.to_dict()
        data.update(changes)
        return ScmSpec.from_dict(data)

    # structural equations, vectorized over units

    def _binary(self, x):
        return (x > self.threshold).astype(np.float64) if self.discretize else x

    def post_treatment(self, a, c, noise):
        return self._binary(self.l_intercept + a * self.l_a + c @ self.l_c.T + noise * self.l_sd)

    def mediator(self, a, c, l, noise):
        mean = (self.b0 + self.b1 * a + c @ self.b2 + l @ self.b3
                + a * (c @ self.b4) + a * (l @ self.b5)
                + np.einsum("ni,ij,nj->n", c, self.b6, l))
        return self._binary(mean + self.m_sd * noise)

    def outcome(self, a, c, l, m, noise):
        return (self.g0 + self.ga * a + self.gm * m + l @ self.gl + c @ self.gc
                + self.gam * a * m + m * (l @ self.gml) + m * (c @ self.gmc)
                + self.y_sd * noise)

    @property
    def has_interactions(self) -> bool:
        return bool(np.any(self.b4) or np.any(self.b5) or np.any(self.b6)
                    or self.gam or np.any(self.gml) or np.any(self.gmc))


@dataclass(frozen=True)
class CounterfactualDraw:
    a: int
    c: tuple
    l0: tuple
    l1: tuple
    m0: float
    m1: float
    m1I: float
    y0: float
    y1: float
    y1I: float

    @property
    def observed(self) -> tuple:
        """``(l, m, y)`` under the assigned treatment."""
        if self.a == 1:
            return self.l1, self.m1, self.y1
        return self.l0, self.m0, self.y0


@dataclass(frozen=True, eq=False)
class CounterfactualDraws:
    """Column-wise potential outcomes of ``n`` simulated units."""

    a: np.ndarray
    c: np.ndarray
    l0: np.ndarray
    l1: np.ndarray
    m0: np.ndarray
    m1: np.ndarray
    m1I: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    y1I: np.ndarray

    def __len__(self):
        return self.a.shape[0]

    def __getitem__(self, i) -> CounterfactualDraw:
        return CounterfactualDraw(
            a=int(self.a[i]), c=tuple(self.c[i].tolist()),
            l0=tuple(self.l0[i].tolist()), l1=tuple(self.l1[i].tolist()),
            m0=float(self.m0[i]), m1=float(self.m1[i]), m1I=float(self.m1I[i]),
            y0=float(self.y0[i]), y1=float(self.y1[i]), y1I=float(self.y1I[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def observed(self) -> Dataset:
        treated = self.a == 1
        return Dataset(
            a=self.a,
            c=self.c,
            l=np.where(treated[:, None], self.l1, self.l0),
            m=np.where(treated, self.m1, self.m0),
            y=np.where(treated, self.y1, self.y0),
        )


def draw_counterfactuals(spec: ScmSpec, n: int, seed: int) -> CounterfactualDraws:
    """Draw ``n`` i.i.d. units with all potential outcomes; pure function of the inputs."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    e_c = rng.standard_normal((n, spec.k))
    e_l = rng.standard_normal((n, spec.p))
    e_m = rng.standard_normal(n)
    e_mI = rng.standard_normal(n)
    e_y = rng.standard_normal(n)
    u = rng.random(n)

    c = spec._binary(spec.c_mean + spec.c_sd * e_c)
    l0 = spec.post_treatment(0.0, c, e_l)
    l1 = spec.post_treatment(1.0, c, e_l)
    m0 = spec.mediator(0.0, c, l0, e_m)
    m1 = spec.mediator(1.0, c, l1, e_m)
    m1I = spec.mediator(0.0, c, l1, e_mI)
    y0 = spec.outcome(0.0, c, l0, m0, e_y)
    y1 = spec.outcome(1.0, c, l1, m1, e_y)
    y1I = spec.outcome(1.0, c, l1, m1I, e_y)
    a = (u < spec.treat_prob).astype(np.int8)
    return CounterfactualDraws(a=a, c=c, l0=l0, l1=l1, m0=m0, m1=m1, m1I=m1I,
                               y0=y0, y1=y1, y1I=y1I)


def simulate_observed(spec: ScmSpec, n: int, seed: int) -> Dataset:
    """Observed records ``(A, C, L, M, Y)`` under randomized treatment and consistency."""
    return draw_counterfactuals(spec, n, seed).observed()


@dataclass(frozen=True)
class OracleEffects:
    estimates: EffectEstimates
    se: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {**self.estimates.to_dict(), "se": dict(self.se)}


def oracle_effects(spec: ScmSpec, n: int, seed: int) -> OracleEffects:
    """Monte Carlo means of ``Y_0``, ``Y_1``, ``Y_1^I`` with standard errors ``sd / sqrt(n)``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    d = draw_counterfactuals(spec, n, seed)
    est = EffectEstimates(ey0=np.mean(d.y0), ey1=np.mean(d.y1), ey1I=np.mean(d.y1I))
    root_n = np.sqrt(n)
    se = {
        "ey0": np.std(d.y0, ddof=1) / root_n,
        "ey1": np.std(d.y1, ddof=1) / root_n,
        "ey1I": np.std(d.y1I, ddof=1) / root_n,
        "organic_direct": np.std(d.y1I - d.y0, ddof=1) / root_n,
        "organic_indirect": np.std(d.y1 - d.y1I, ddof=1) / root_n,
    }
    return OracleEffects(est, {key: float(v) for key, v in se.items()})


@dataclass(frozen=True)
class Unsupported:
    reason: str

    def to_dict(self) -> dict:
        return {"unsupported": self.reason}


def closed_form_effects(spec: ScmSpec):
    """Exact means for the linear-Gaussian family without interaction terms.

    Returns :class:`Unsupported` for discretized specs or any nonzero
    interaction coefficient.
    """
    if spec.discretize:
        return Unsupported("discretized specs have no linear closed form")
    if spec.has_interactions:
        return Unsupported("interaction terms present (b4, b5, b6, gam, gml or gmc nonzero)")
    ec = spec.c_mean
    el = {a: spec.l_intercept + a * spec.l_a + spec.l_c @ ec for a in (0, 1)}
    base_m = spec.b0 + spec.b2 @ ec
    em0 = base_m + spec.b3 @ el[0]
    em1I = base_m + spec.b3 @ el[1]
    em1 = em1I + spec.b1

    def ey(a, em, el_a):
        return spec.g0 + spec.ga * a + spec.gm * em + spec.gl @ el_a + spec.gc @ ec

    return EffectEstimates(ey0=ey(0, em0, el[0]), ey1=ey(1, em1, el[1]), ey1I=ey(1, em1I, el[1]))
