"""Elements of SL2(R)^d and their exact twins over the field.

Provides the one-parameter families u, v, a, the diagonal flow a_alpha, the
explicit duality matrix linking upper and lower unipotent cosets, the
Cartan-basis bookkeeping coming from the unit group, and the unit action on
residue parameters.  Identity checks come in pairs: exact over the field,
and floating point on the realized matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nfq import FieldContext, RingElement, inverse_mod, is_coprime, ideal_of

__all__ = [
    "GroupElement",
    "ExactMatrix",
    "CartanVector",
    "u",
    "v",
    "a",
    "a_alpha",
    "duality_gamma",
    "duality_residual",
    "unit_decompose",
    "unit_action_on_parameter",
]

DET_TOL = 1e-9


@dataclass(frozen=True)
class GroupElement:
    """A d-tuple of real 2x2 unimodular matrices, stored as a (d, 2, 2) array."""

    blocks: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "blocks", np.asarray(self.blocks, dtype=float))
        if self.blocks.ndim != 3 or self.blocks.shape[1:] != (2, 2):
            raise ValueError("expected shape (d, 2, 2)")
        dets = np.linalg.det(self.blocks)
        if not np.allclose(dets, 1.0, atol=DET_TOL):
            raise ValueError(f"determinants {dets} are not 1 within {DET_TOL}")

    @property
    def d(self) -> int:
        return self.blocks.shape[0]

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.blocks @ other.blocks)

    def inv(self) -> "GroupElement":
        b = self.blocks
        out = np.empty_like(b)
        out[:, 0, 0] = b[:, 1, 1]
        out[:, 1, 1] = b[:, 0, 0]
        out[:, 0, 1] = -b[:, 0, 1]
        out[:, 1, 0] = -b[:, 1, 0]
        return GroupElement(out)

    def max_entry_distance(self, other: "GroupElement") -> float:
        """Max entry error normalized by the largest entry magnitude."""
        scale = max(np.abs(self.blocks).max(), np.abs(other.blocks).max(), 1.0)
        return float(np.abs(self.blocks - other.blocks).max() / scale)

    @classmethod
    def identity(cls, d: int) -> "GroupElement":
        return cls(np.broadcast_to(np.eye(2), (d, 2, 2)).copy())

    def tolist(self) -> list:
        return self.blocks.tolist()


def u(t) -> GroupElement:
    """Upper unipotent u_t; t is a d-vector."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    blocks = np.broadcast_to(np.eye(2), (t.size, 2, 2)).copy()
    blocks[:, 0, 1] = t
    return GroupElement(blocks)


def v(s) -> GroupElement:
    """Lower unipotent v_s; s is a d-vector."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    blocks = np.broadcast_to(np.eye(2), (s.size, 2, 2)).copy()
    blocks[:, 1, 0] = s
    return GroupElement(blocks)


def a(y) -> GroupElement:
    """Diagonal element with per-place blocks diag(y_i^-1, y_i)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y == 0):
        raise ValueError("diagonal entries must be nonzero")
    blocks = np.zeros((y.size, 2, 2))
    blocks[:, 0, 0] = 1.0 / y
    blocks[:, 1, 1] = y
    return GroupElement(blocks)


def a_alpha(y: RingElement, alpha: float, ctx: FieldContext) -> GroupElement:
    """a(y^alpha): place-i block diag((sigma_i y)^-alpha, (sigma_i y)^alpha)."""
    emb = np.asarray(y.embed())
    if np.any(emb <= 0):
        raise ValueError("a_alpha requires a totally positive element")
    return a(emb ** alpha)


@dataclass(frozen=True)
class ExactMatrix:
    """2x2 matrix with exact integral entries of the field."""

    entries: tuple[tuple[RingElement, RingElement], tuple[RingElement, RingElement]]

    def det(self) -> RingElement:
        (m00, m01), (m10, m11) = self.entries
        return m00 * m11 - m01 * m10

    def embed(self) -> GroupElement:
        ctx = self.entries[0][0].ctx
        d = ctx.degree
        blocks = np.empty((d, 2, 2))
        for i in range(2):
            for j in range(2):
                blocks[:, i, j] = self.entries[i][j].embed()
        return GroupElement(blocks)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        A, B = self.entries, other.entries
        rows = []
        for i in range(2):
            rows.append(
                tuple(A[i][0] * B[0][j] + A[i][1] * B[1][j] for j in range(2))
            )
        return ExactMatrix((rows[0], rows[1]))

    def is_integral(self) -> bool:
        # entries are RingElements by construction; kept for interface clarity
        return True

    def __str__(self) -> str:
        (m00, m01), (m10, m11) = self.entries
        return f"[[{m00}, {m01}], [{m10}, {m11}]]"


def duality_gamma(j: RingElement, y: RingElement, ctx: FieldContext) -> ExactMatrix:
    """The integral matrix carrying u_{j/y} a(y) to v_{j^x / y}.

    gamma = [[y, -j], [j^x, (1 - j*j^x)/y]] with j^x the inverse of j mod y.
    All entries are integral and det(gamma) = 1 exactly.
    """
    if y.is_zero():
        raise ValueError("zero denominator")
    if not is_coprime(j, y):
        raise ValueError(f"{j} and {y} are not coprime")
    if abs(y.norm()) == 1:
        one = ctx.one()
        z = ctx.zero()
        return ExactMatrix(((one, z), (z, one)))
    jx = inverse_mod(j, y)
    w = (ctx.one() - j * jx).exact_div(y)
    if w is None:
        raise AssertionError("(1 - j*j^x)/y must be integral; internal inconsistency")
    gamma = ExactMatrix(((y, -j), (jx, w)))
    det = gamma.det()
    assert det == ctx.one(), f"det gamma = {det} != 1"
    return gamma


def duality_residual(j: RingElement, y: RingElement, ctx: FieldContext) -> float:
    """Normalized float residual of gamma * u(j/y) * a(y) - v(j^x/y)."""
    gamma = duality_gamma(j, y, ctx)
    ye = np.asarray(y.embed())
    je = np.asarray(j.embed())
    if abs(y.norm()) == 1:
        jx_e = np.zeros_like(ye)
    else:
        jx_e = np.asarray(inverse_mod(j, y).embed())
    lhs = gamma.embed() @ u(je / ye) @ a(ye)
    rhs = v(jx_e / ye)
    return lhs.max_entry_distance(rhs)


@dataclass(frozen=True)
class CartanVector:
    """Coordinates over the unit-log Cartan basis {H_1, ..., H_{d-1}, H_d}.

    H_i is the log of the embedded diag(eps_i^-1, eps_i) for the totally
    positive generator eps_i; H_d is the diagonal embedding of diag(-1, 1).
    """

    coeffs: tuple[float, ...]

    def exp(self, ctx: FieldContext) -> GroupElement:
        d = ctx.degree
        if len(self.coeffs) != d:
            raise ValueError("coefficient count must match the field degree")
        log_entries = np.full(d, float(self.coeffs[-1]))
        if d == 2:
            log_eps = np.log(np.asarray(ctx.eps_tp.embed()))
            log_entries = log_entries + self.coeffs[0] * log_eps
        return a(np.exp(log_entries))


def unit_decompose(
    k: int, alpha: float, ctx: FieldContext
) -> tuple[ExactMatrix, GroupElement]:
    """Split a_alpha(eps_tp^k) = gamma * g with gamma in Gamma and g bounded.

    alpha*k*H_1 = m*H_1 + f with m = round(alpha*k); gamma is the embedded
    diag(eps_tp^-m, eps_tp^m) and g = exp(f*H_1) stays in a fixed compact
    cell independent of k.
    """
    if ctx.degree != 2:
        raise ValueError("unit decomposition needs a nontrivial unit group")
    m = round(alpha * k)
    f = alpha * k - m
    eps = ctx.eps_tp
    gamma = ExactMatrix(((eps ** (-m), ctx.zero()), (ctx.zero(), eps ** m)))
    g = CartanVector((f, 0.0)).exp(ctx)
    return gamma, g


def unit_action_on_parameter(
    j: RingElement, y: RingElement, k: int, ctx: FieldContext
) -> RingElement:
    """The residue eps_tp^{-2k} * j reduced mod y*o.

    This is the parameter-level form of right multiplication by the diagonal
    unit flow; it permutes residues and preserves coprimality with y.
    """
    if ctx.degree == 1:
        return ideal_of(y).reduce(j)
    e = ctx.eps_tp ** (-2 * k)
    return ideal_of(y).reduce(e * j)
