"""Invariant observables on cosets, via shortest vectors of module lattices.

A coset Gamma*g is realized as the rank-2d Z-lattice spanned by the images
of {e1, e1*w, e2, e2*w} under g, interleaved by place in R^{2d}.  Shortest
vectors are found by LLL reduction followed by exact enumeration inside the
radius certified by the reduced basis.  For the degree-1 case the classical
fundamental-domain reduction on the modular surface is provided as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .groups import GroupElement
from .nfq import FieldContext

__all__ = [
    "ZLattice",
    "Observable",
    "ReducedPoint",
    "olattice",
    "shortest_vector",
    "brute_shortest",
    "reduce_sl2z",
    "evaluate",
    "make_observable",
]

LLL_DELTA = 0.99
# a_alpha(y) stretches entries like N(y)^(2 alpha / d); double precision is
# comfortable below this input scale.
NORM_GUARD = 10 ** 8
ALPHA_GUARD = 0.75


@dataclass(frozen=True)
class ZLattice:
    """Row-basis lattice in R^{2d}; |det| is Delta for d=2 and 1 for d=1."""

    basis: np.ndarray
    d: int

    def det(self) -> float:
        return float(abs(np.linalg.det(self.basis)))

    def place_lengths(self, coeffs: np.ndarray) -> np.ndarray:
        """Per-place Euclidean lengths of the lattice vector coeffs @ basis."""
        vec = coeffs @ self.basis
        pairs = vec.reshape(self.d, 2)
        return np.linalg.norm(pairs, axis=1)


def olattice(g: GroupElement, ctx: FieldContext) -> ZLattice:
    """The module lattice o^2 * g as a 2d x 2d row basis."""
    d = ctx.degree
    if g.d != d:
        raise ValueError("group element degree does not match field degree")
    if d == 1:
        basis_elems = [(1.0,)]
    else:
        basis_elems = [(1.0, 1.0), ctx.sigma_omega]
    n = 2 * d
    B = np.zeros((n, n))
    row = 0
    for slot in range(2):  # e1 then e2
        for emb in basis_elems:
            for i in range(d):
                pq = np.zeros(2)
                pq[slot] = emb[i]
                B[row, 2 * i : 2 * i + 2] = pq @ g.blocks[i]
            row += 1
    return ZLattice(B, d)


def _gram_schmidt(B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = B.shape[0]
    Bs = B.astype(float).copy()
    mu = np.eye(n)
    for i in range(n):
        for j in range(i):
            denom = Bs[j] @ Bs[j]
            mu[i, j] = (B[i] @ Bs[j]) / denom
            Bs[i] = Bs[i] - mu[i, j] * Bs[j]
    return Bs, mu


def lll_reduce(B: np.ndarray, delta: float = LLL_DELTA) -> tuple[np.ndarray, np.ndarray]:
    """LLL-reduce the rows of B; returns (reduced basis, unimodular U) with
    reduced = U @ B."""
    n = B.shape[0]
    B = B.astype(float).copy()
    U = np.eye(n, dtype=np.int64)
    Bs, mu = _gram_schmidt(B)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q != 0:
                B[k] -= q * B[j]
                U[k] -= q * U[j]
                Bs, mu = _gram_schmidt(B)
        lhs = Bs[k] @ Bs[k]
        rhs = (delta - mu[k, k - 1] ** 2) * (Bs[k - 1] @ Bs[k - 1])
        if lhs >= rhs:
            k += 1
        else:
            B[[k - 1, k]] = B[[k, k - 1]]
            U[[k - 1, k]] = U[[k, k - 1]]
            Bs, mu = _gram_schmidt(B)
            k = max(k - 1, 1)
    return B, U


def _enumerate_within(B: np.ndarray, radius2: float):
    """Yield (coeffs, vector) for all nonzero integer combinations of the rows
    of B with squared Euclidean length <= radius2 (one of +-x per pair).

    Standard enumeration on the Gram-Schmidt triangularization.
    """
    n = B.shape[0]
    Bs, mu = _gram_schmidt(B)
    c = np.array([Bs[i] @ Bs[i] for i in range(n)])
    x = np.zeros(n, dtype=np.int64)
    # depth-first from the last coordinate
    def rec(i: int, partial_center: np.ndarray, budget: float):
        # budget = remaining squared radius at levels <= i
        # center for x[i]: -sum_{j>i} x[j] mu[j, i]
        center = -partial_center[i]
        half = math.sqrt(budget / c[i]) if c[i] > 0 else 0.0
        lo = math.ceil(center - half - 1e-12)
        hi = math.floor(center + half + 1e-12)
        for xi in range(lo, hi + 1):
            x[i] = xi
            used = c[i] * (xi - center) ** 2
            if used > budget + 1e-12:
                continue
            if i == 0:
                if np.any(x):
                    coeffs = x.copy()
                    yield coeffs, coeffs @ B
            else:
                new_center = partial_center.copy()
                for j in range(i):
                    new_center[j] += xi * mu[i, j]
                yield from rec(i - 1, new_center, budget - used)
        x[i] = 0

    yield from rec(n - 1, np.zeros(n), radius2)


def _canonical_sign(coeffs: np.ndarray) -> tuple[int, ...]:
    for ci in coeffs:
        if ci != 0:
            return tuple(coeffs if ci > 0 else -coeffs)
    return tuple(coeffs)


def shortest_vector(
    L: ZLattice, norm: str = "euclidean"
) -> tuple[float, tuple[int, ...]]:
    """Shortest nonzero vector length and its coefficient vector.

    norm = "euclidean" minimizes the R^{2d} length; norm = "sup" minimizes
    the maximum per-place Euclidean length.  Ties break by lexicographic
    coefficient order after sign canonicalization.
    """
    B = L.basis
    if abs(np.linalg.det(B)) < 1e-12:
        raise ValueError("degenerate lattice basis")
    red, U = lll_reduce(B)

    if norm == "euclidean":
        length = lambda coeffs: float(np.linalg.norm(coeffs @ B))
        radius2 = float(red[0] @ red[0]) * (1 + 1e-9)
    elif norm == "sup":
        length = lambda coeffs: float(L.place_lengths(coeffs).max())
        best0 = min(length(Ui) for Ui in U)
        radius2 = L.d * best0 ** 2 * (1 + 1e-9)
    else:
        raise ValueError(f"unknown norm {norm!r}")

    best = None
    for coeffs, _vec in _enumerate_within(red, radius2):
        full = coeffs @ U  # back to the original basis
        key = (length(full), _canonical_sign(full))
        if best is None or key < best:
            best = key
    assert best is not None, "enumeration radius must contain the LLL vector"
    return best[0], best[1]


def brute_shortest(
    L: ZLattice, box: int = 5, norm: str = "euclidean"
) -> tuple[float, tuple[int, ...]]:
    """Independent oracle: exhaustive search over the coefficient box."""
    n = L.basis.shape[0]
    rng = np.arange(-box, box + 1)
    grids = np.meshgrid(*([rng] * n), indexing="ij")
    coeffs = np.stack([g.ravel() for g in grids], axis=1)
    coeffs = coeffs[np.any(coeffs != 0, axis=1)]
    vecs = coeffs @ L.basis
    if norm == "euclidean":
        lengths = np.linalg.norm(vecs, axis=1)
    else:
        pairs = vecs.reshape(len(vecs), L.d, 2)
        lengths = np.linalg.norm(pairs, axis=2).max(axis=1)
    best = None
    for ln, cf in zip(lengths, coeffs):
        key = (float(ln), _canonical_sign(cf))
        if best is None or key < best:
            best = key
    return best[0], best[1]


@dataclass(frozen=True)
class ReducedPoint:
    """Point of the unit tangent bundle over the standard fundamental domain."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        assert abs(self.x) <= 0.5 + 1e-9
        assert self.x * self.x + self.y * self.y >= 1 - 1e-9


def reduce_sl2z(g: np.ndarray) -> ReducedPoint:
    """Translate/invert reduction of a single unimodular 2x2 matrix."""
    g = np.asarray(g, dtype=float)
    if abs(np.linalg.det(g) - 1.0) > 1e-9:
        raise ValueError("matrix is not unimodular")
    # base point of the coset: act on i by the inverse-transpose convention
    # z = (a i + b) / (c i + d)
    z = complex(g[0, 0] * 1j + g[0, 1]) / complex(g[1, 0] * 1j + g[1, 1])
    acc = np.eye(2)
    for _ in range(10_000):
        shift = math.floor(z.real + 0.5)
        if shift != 0:
            z -= shift
            acc = np.array([[1.0, -shift], [0.0, 1.0]]) @ acc
        if abs(z) < 1 - 1e-12:
            z = -1 / z
            acc = np.array([[0.0, -1.0], [1.0, 0.0]]) @ acc
        else:
            break
    else:
        raise RuntimeError("fundamental-domain reduction did not terminate")
    gr = acc @ g
    # Iwasawa: gr = n(x) a(sqrt(y)) k(theta); extract the SO(2) angle
    zz = complex(gr[0, 0] * 1j + gr[0, 1]) / complex(gr[1, 0] * 1j + gr[1, 1])
    yy = zz.imag
    sy = math.sqrt(yy)
    n_a = np.array([[sy, zz.real / sy], [0.0, 1.0 / sy]])
    k = np.linalg.inv(n_a) @ gr
    theta = math.atan2(k[1, 0], k[0, 0])
    return ReducedPoint(zz.real, yy, theta)


@dataclass(frozen=True)
class Observable:
    """Named Gamma-invariant scalar function of the realized coset."""

    name: str
    fn: Callable[[GroupElement, FieldContext], float]

    def __call__(self, g: GroupElement, ctx: FieldContext) -> float:
        return self.fn(g, ctx)


def _alpha1(g: GroupElement, ctx: FieldContext) -> float:
    return shortest_vector(olattice(g, ctx), "euclidean")[0]


def _alpha1_sup(g: GroupElement, ctx: FieldContext) -> float:
    return shortest_vector(olattice(g, ctx), "sup")[0]


def make_observable(name: str) -> Observable:
    """Observable registry: alpha1, alpha1_sup, gauss_<r>, and for the
    degree-1 case im_reduced and cusp_<T>."""
    if name == "alpha1":
        return Observable(name, _alpha1)
    if name == "alpha1_sup":
        return Observable(name, _alpha1_sup)
    if name.startswith("gauss_"):
        r = float(name.split("_", 1)[1])
        return Observable(
            name, lambda g, ctx, r=r: math.exp(-_alpha1(g, ctx) ** 2 / r ** 2)
        )
    if name == "im_reduced":
        return Observable(name, lambda g, ctx: reduce_sl2z(g.blocks[0]).y)
    if name.startswith("cusp_"):
        T = float(name.split("_", 1)[1])
        return Observable(
            name,
            lambda g, ctx, T=T: 1.0 if reduce_sl2z(g.blocks[0]).y > T else 0.0,
        )
    raise ValueError(f"unknown observable {name!r}")


def evaluate(obs: Observable, g: GroupElement, ctx: FieldContext) -> float:
    return obs(g, ctx)
