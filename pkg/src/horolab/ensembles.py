"""Point ensembles on expanding horospheres and their empirical statistics.

Three ensembles are built for a totally positive denominator y and exponent
alpha: the full rational points (one per residue mod y), the primitive
points (invertible residues only), and continuous horosphere samples drawn
uniformly from the fundamental cell of the integer lattice.  Observable
values are collected into empirical distributions; the module also provides
the exact convex-combination identity between the three counting measures
and the discrepancy operator along the diagonal unit flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .groups import GroupElement, a_alpha, u, unit_action_on_parameter
from .lattices import Observable
from .nfq import (
    FieldContext,
    RingElement,
    ideal_of,
    is_coprime,
    residue_representatives,
    totient,
)

__all__ = [
    "ParameterSet",
    "EmpiricalDistribution",
    "DiscrepancyReport",
    "rational_parameters",
    "primitive_parameters",
    "nonprimitive_parameters",
    "realize",
    "realize_continuous",
    "horosphere_sample",
    "evaluate_ensemble",
    "convex_combination_check",
    "discrepancy_DK",
    "ks_distance",
]


@dataclass(frozen=True)
class ParameterSet:
    """The parameters indexing one ensemble, before realization."""

    ctx: FieldContext
    y: RingElement
    alpha: float
    kind: str  # "rational" | "primitive" | "non-primitive" | "horosphere"
    residues: tuple[RingElement, ...] = ()
    samples: Optional[np.ndarray] = None  # (M, d) for horosphere kind
    seed: Optional[int] = None

    def __len__(self) -> int:
        if self.kind == "horosphere":
            return len(self.samples)
        return len(self.residues)

    def realized(self):
        """Yield the GroupElement for each parameter, in order."""
        if self.kind == "horosphere":
            for t in self.samples:
                yield realize_continuous(t, self.y, self.alpha, self.ctx)
        else:
            for j in self.residues:
                yield realize(j, self.y, self.alpha, self.ctx)


def rational_parameters(y: RingElement, alpha: float, ctx: FieldContext) -> ParameterSet:
    """All |N(y)| residues mod y."""
    return ParameterSet(ctx, y, alpha, "rational", tuple(residue_representatives(y)))


def primitive_parameters(y: RingElement, alpha: float, ctx: FieldContext) -> ParameterSet:
    """The phi(y) invertible residues mod y."""
    if abs(y.norm()) == 1:
        return ParameterSet(ctx, y, alpha, "primitive", (ctx.zero(),))
    res = tuple(j for j in residue_representatives(y) if is_coprime(j, y))
    assert len(res) == totient(ideal_of(y), ctx)
    return ParameterSet(ctx, y, alpha, "primitive", res)


def nonprimitive_parameters(
    y: RingElement, alpha: float, ctx: FieldContext
) -> ParameterSet:
    res = tuple(j for j in residue_representatives(y) if not is_coprime(j, y))
    return ParameterSet(ctx, y, alpha, "non-primitive", res)


def realize(
    j: RingElement, y: RingElement, alpha: float, ctx: FieldContext
) -> GroupElement:
    """The coset representative u(sigma(j)/sigma(y)) * a_alpha(y)."""
    t = np.asarray(j.embed()) / np.asarray(y.embed())
    return u(t) @ a_alpha(y, alpha, ctx)


def realize_continuous(
    t: np.ndarray, y: RingElement, alpha: float, ctx: FieldContext
) -> GroupElement:
    return u(t) @ a_alpha(y, alpha, ctx)


def fundamental_cell_basis(ctx: FieldContext) -> np.ndarray:
    """Rows spanning the fundamental parallelepiped of the integer lattice."""
    if ctx.degree == 1:
        return np.eye(1)
    return np.array([[1.0, 1.0], list(ctx.sigma_omega)])


def horosphere_sample(
    y: RingElement, alpha: float, M: int, seed: int, ctx: FieldContext
) -> ParameterSet:
    """M points u(t) a_alpha(y) with t uniform in the fundamental cell."""
    if M < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    coords = rng.random((M, ctx.degree))
    samples = coords @ fundamental_cell_basis(ctx)
    return ParameterSet(ctx, y, alpha, "horosphere", samples=samples, seed=seed)


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted observable values from one ensemble."""

    observable: str
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.sort(np.asarray(self.values, float)))

    @property
    def count(self) -> int:
        return len(self.values)

    def mean(self) -> float:
        return float(self.values.mean())

    def stderr(self) -> float:
        return float(self.values.std(ddof=1) / math.sqrt(len(self.values)))


def evaluate_ensemble(
    ps: ParameterSet, obs: Observable
) -> EmpiricalDistribution:
    vals = np.array([obs(g, ps.ctx) for g in ps.realized()])
    return EmpiricalDistribution(obs.name, vals)


def convex_combination_check(
    y: RingElement, alpha: float, obs: Observable, ctx: FieldContext
) -> float:
    """Residual of mean_rational = (phi/N) mean_prim + ((N-phi)/N) mean_nonprim.

    A finite counting identity: every residue is evaluated once and the same
    float values feed both sides, so the residual is pure roundoff.
    """
    n = abs(y.norm())
    values = {}
    for j in residue_representatives(y):
        values[j.coords] = obs(realize(j, y, alpha, ctx), ctx)
    prim = [values[j.coords] for j in residue_representatives(y) if is_coprime(j, y)]
    nonprim = [values[j.coords] for j in residue_representatives(y) if not is_coprime(j, y)]
    phi = len(prim)
    mean_rat = sum(values.values()) / n
    mean_prim = sum(prim) / phi
    rhs = (phi / n) * mean_prim
    if nonprim:
        rhs += ((n - phi) / n) * (sum(nonprim) / (n - phi))
    scale = max(abs(mean_rat), 1.0)
    return abs(mean_rat - rhs) / scale


@dataclass(frozen=True)
class DiscrepancyReport:
    """RMS of the unit-flow discrepancy operator over an ensemble."""

    Ks: tuple[int, ...]
    rms: tuple[float, ...]
    reference_mean: float
    reference_stderr: float


def discrepancy_DK(
    obs: Observable,
    pts: ParameterSet,
    Ks: Sequence[int],
    ctx: FieldContext,
    E_ref: float,
    reference_stderr: float = 0.0,
) -> DiscrepancyReport:
    """Ensemble RMS of D_K f = (1/K) sum_k f(. a(eps)^k) - E_ref for each K.

    The unit action is computed exactly on the residue parameters (no float
    drift along the orbit); each orbit point is then realized and evaluated.
    """
    Ks = tuple(int(K) for K in Ks)
    if any(K < 1 for K in Ks):
        raise ValueError("K must be >= 1")
    if ctx.degree == 1:
        raise ValueError("the discrepancy operator needs a nontrivial unit group")
    if pts.kind == "horosphere":
        raise ValueError("discrepancy is defined on residue-parameter ensembles")
    maxK = max(Ks)
    cache: dict[tuple[int, int], float] = {}
    dks = {K: [] for K in Ks}
    for j in pts.residues:
        orbit_vals = []
        jk = ideal_of(pts.y).reduce(j)
        for k in range(maxK):
            if k > 0:
                jk = unit_action_on_parameter(jk, pts.y, 1, ctx)
            key = jk.coords
            if key not in cache:
                cache[key] = obs(realize(jk, pts.y, pts.alpha, ctx), ctx)
            orbit_vals.append(cache[key])
        csum = np.cumsum(orbit_vals)
        for K in Ks:
            dks[K].append(csum[K - 1] / K - E_ref)
    rms = tuple(float(np.sqrt(np.mean(np.square(dks[K])))) for K in Ks)
    return DiscrepancyReport(Ks, rms, E_ref, reference_stderr)


def ks_distance(A: EmpiricalDistribution, B: EmpiricalDistribution) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (right-continuous CDFs)."""
    if A.observable != B.observable:
        raise ValueError(
            f"observable mismatch: {A.observable!r} vs {B.observable!r}"
        )
    xs = np.concatenate([A.values, B.values])
    cdf_a = np.searchsorted(A.values, xs, side="right") / A.count
    cdf_b = np.searchsorted(B.values, xs, side="right") / B.count
    return float(np.abs(cdf_a - cdf_b).max())
