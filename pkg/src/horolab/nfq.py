"""Exact arithmetic in the ring of integers of a real quadratic field (or Q).

Elements are stored as integer coordinates over the integral basis {1, w},
where w = (1+sqrt(D))/2 if D = 1 mod 4 and w = sqrt(D) otherwise.  All ideal
and totient logic is exact; floating point only enters through the real
embeddings, which are used for unit balancing and nothing else.

The degenerate degree-1 case (the rationals) is handled by the same types
with the w-coordinate pinned to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

__all__ = [
    "FieldContext",
    "RingElement",
    "IdealHNF",
    "PrimeIdealFactor",
    "UnitPower",
    "NotInvertibleError",
    "make_field",
    "rational_field",
    "ideal_of",
    "ideal_sum",
    "factor_ideal",
    "totient",
    "residue_representatives",
    "inverse_mod",
    "balance_unit",
    "totient_ratio_scan",
    "kronecker_symbol",
]

_UNIT_SEARCH_CAP = 10 ** 6


class NotInvertibleError(ValueError):
    """Raised when a residue has no inverse modulo the given element."""


def _is_squarefree(n: int) -> bool:
    if n % 4 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 2
    return True


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a/n) via the standard quadratic reciprocity recursion."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    a %= n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


class FieldContext:
    """A real quadratic field Q(sqrt(D)) with its integer ring, or Q itself.

    Attributes
    ----------
    degree : 1 for Q, 2 for a real quadratic field.
    D : the squarefree radicand (None when degree is 1).
    disc : field discriminant (D if D = 1 mod 4, else 4D; 1 for Q).
    omega_trace, omega_norm_neg : integers t, n with w^2 = t*w + n.
    sigma_omega : the images of w under the two real embeddings.
    eps0 : fundamental unit (smallest unit > 1 under the first embedding).
    eps_tp : generator of the totally positive units modulo torsion.
    """

    def __init__(self, D: Optional[int]):
        if D is None:
            self.degree = 1
            self.D = None
            self.disc = 1
            self.omega_trace = 0
            self.omega_norm_neg = 0
            self.sigma_omega = (0.0,)
            self.eps0 = RingElement(self, 1, 0)
            self.eps_tp = RingElement(self, 1, 0)
            return
        if D <= 1 or not _is_squarefree(D):
            raise ValueError(f"D must be a squarefree integer > 1, got {D}")
        self.degree = 2
        self.D = D
        if D % 4 == 1:
            self.disc = D
            self.omega_trace = 1
            self.omega_norm_neg = (D - 1) // 4
        else:
            self.disc = 4 * D
            self.omega_trace = 0
            self.omega_norm_neg = D
        sq = math.sqrt(D)
        if D % 4 == 1:
            self.sigma_omega = ((1 + sq) / 2, (1 - sq) / 2)
        else:
            self.sigma_omega = (sq, -sq)
        self.eps0 = self._find_fundamental_unit()
        if self.eps0.is_totally_positive():
            self.eps_tp = self.eps0
        else:
            self.eps_tp = self.eps0 * self.eps0
        self.log_eps_tp = math.log(self.eps_tp.embed()[0])

    def one(self) -> "RingElement":
        return RingElement(self, 1, 0)

    def zero(self) -> "RingElement":
        return RingElement(self, 0, 0)

    def element(self, a: int, b: int = 0) -> "RingElement":
        return RingElement(self, a, b)

    def covolume(self) -> float:
        """Covolume of the embedded integer lattice; equals sqrt(disc)."""
        if self.degree == 1:
            return 1.0
        return abs(self.sigma_omega[1] - self.sigma_omega[0])

    def _find_fundamental_unit(self) -> "RingElement":
        # Pell-style search: for each w-coefficient b solve N(a+bw) = +-1 for a
        # exactly via integer square roots; grow the box until a unit appears.
        t, n = self.omega_trace, self.omega_norm_neg
        bound = 64
        while bound <= _UNIT_SEARCH_CAP:
            best = None
            for b in range(1, bound + 1):
                # a^2 + t*a*b - n*b^2 = s  =>  a = (-t*b +- sqrt(t^2 b^2 + 4(n b^2 + s)))/2
                for s in (1, -1):
                    disc = t * t * b * b + 4 * (n * b * b + s)
                    if disc < 0:
                        continue
                    r = math.isqrt(disc)
                    if r * r != disc:
                        continue
                    for root in (r, -r):
                        num = -t * b + root
                        if num % 2 != 0:
                            continue
                        a = num // 2
                        cand = RingElement(self, a, b)
                        v = cand.embed()[0]
                        if v > 1 + 1e-12 and (best is None or v < best.embed()[0]):
                            best = cand
                if best is not None and b > 2 * best.coords[1] + 2:
                    break
            if best is not None:
                return best
            bound *= 16
        raise RuntimeError(
            f"no fundamental unit found for D={self.D} within coefficient bound {_UNIT_SEARCH_CAP}"
        )

    def __repr__(self) -> str:
        if self.degree == 1:
            return "FieldContext(Q)"
        return f"FieldContext(Q(sqrt({self.D})))"


@lru_cache(maxsize=None)
def make_field(D: int) -> FieldContext:
    """Field context for Q(sqrt(D)); D must be squarefree and > 1."""
    return FieldContext(D)


@lru_cache(maxsize=None)
def rational_field() -> FieldContext:
    """The degenerate degree-1 context for Q."""
    return FieldContext(None)


@dataclass(frozen=True)
class RingElement:
    """An integer a + b*w of the field, with exact integer coordinates."""

    ctx: FieldContext
    a: int
    b: int

    def __post_init__(self):
        if self.ctx.degree == 1 and self.b != 0:
            raise ValueError("degree-1 elements have no w-coordinate")

    @property
    def coords(self) -> tuple[int, int]:
        return (self.a, self.b)

    def __add__(self, other: "RingElement") -> "RingElement":
        return RingElement(self.ctx, self.a + other.a, self.b + other.b)

    def __sub__(self, other: "RingElement") -> "RingElement":
        return RingElement(self.ctx, self.a - other.a, self.b - other.b)

    def __neg__(self) -> "RingElement":
        return RingElement(self.ctx, -self.a, -self.b)

    def __mul__(self, other: "RingElement") -> "RingElement":
        t, n = self.ctx.omega_trace, self.ctx.omega_norm_neg
        a, b, c, d = self.a, self.b, other.a, other.b
        # (a+bw)(c+dw) with w^2 = t w + n
        return RingElement(self.ctx, a * c + b * d * n, a * d + b * c + b * d * t)

    def __pow__(self, k: int) -> "RingElement":
        if k < 0:
            return self.unit_inverse() ** (-k)
        out = self.ctx.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "RingElement":
        # w-bar = t - w
        t = self.ctx.omega_trace
        return RingElement(self.ctx, self.a + self.b * t, -self.b)

    def norm(self) -> int:
        if self.ctx.degree == 1:
            return self.a
        t, n = self.ctx.omega_trace, self.ctx.omega_norm_neg
        return self.a * self.a + t * self.a * self.b - n * self.b * self.b

    def trace(self) -> int:
        return 2 * self.a + self.ctx.omega_trace * self.b

    def unit_inverse(self) -> "RingElement":
        nrm = self.norm()
        if nrm == 1:
            return self.conj()
        if nrm == -1:
            return -self.conj()
        raise NotInvertibleError(f"{self} is not a unit of the integer ring")

    def exact_div(self, other: "RingElement") -> Optional["RingElement"]:
        """self / other if the quotient is integral, else None."""
        nrm = other.norm()
        if nrm == 0:
            raise ZeroDivisionError("division by zero element")
        if self.ctx.degree == 1:
            return None if self.a % other.a else self.ctx.element(self.a // other.a)
        num = self * other.conj()
        if num.a % nrm or num.b % nrm:
            return None
        return RingElement(self.ctx, num.a // nrm, num.b // nrm)

    def embed(self) -> tuple[float, ...]:
        """Images under the real embeddings, as a d-tuple of floats."""
        return tuple(self.a + self.b * w for w in self.ctx.sigma_omega)

    def is_totally_positive(self) -> bool:
        return all(v > 0 for v in self.embed())

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __str__(self) -> str:
        return f"{self.a}{self.b:+d}*w" if self.ctx.degree == 2 else str(self.a)

    def __repr__(self) -> str:
        return f"RingElement({self})"


class IdealHNF:
    """An integral ideal as a Z-lattice in Hermite normal form.

    For degree 2 the canonical basis is {a, b + c*w} with a, c > 0 and
    0 <= b < a; serialized as [[a, b], [0, c]].  The norm is a*c.  For
    degree 1 the data degenerates to a single positive integer a = c-free.
    """

    __slots__ = ("ctx", "a", "b", "c")

    def __init__(self, ctx: FieldContext, a: int, b: int = 0, c: int = 1):
        if a <= 0 or c <= 0:
            raise ValueError("HNF requires positive diagonal")
        self.ctx = ctx
        self.a = a
        self.c = c if ctx.degree == 2 else 1
        self.b = b % a if ctx.degree == 2 else 0

    @property
    def norm(self) -> int:
        return self.a * self.c

    def matrix(self) -> list[list[int]]:
        return [[self.a, self.b], [0, self.c]]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, IdealHNF)
            and self.ctx is other.ctx
            and (self.a, self.b, self.c) == (other.a, other.b, other.c)
        )

    def __hash__(self) -> int:
        return hash((id(self.ctx), self.a, self.b, self.c))

    def __repr__(self) -> str:
        return f"IdealHNF([[{self.a},{self.b}],[0,{self.c}]])"

    @classmethod
    def unit_ideal(cls, ctx: FieldContext) -> "IdealHNF":
        return cls(ctx, 1, 0, 1)

    @classmethod
    def from_elements(cls, ctx: FieldContext, gens: Iterable[RingElement]) -> "IdealHNF":
        """HNF of the Z-span of the given elements (not closed under w)."""
        vecs = [(g.a, g.b) for g in gens if not g.is_zero()]
        if not vecs:
            raise ValueError("zero lattice has no HNF")
        if ctx.degree == 1:
            a = 0
            for x, _ in vecs:
                a = math.gcd(a, x)
            return cls(ctx, a)
        # Bezout pass for the w-coordinate.
        c, bx = 0, 0
        for x, z in vecs:
            if z == 0:
                continue
            g, u, v = _ext_gcd(c, z)
            bx = u * bx + v * x
            c = g
        if c == 0:
            raise ValueError("lattice is not of full rank")
        a = 0
        for x, z in vecs:
            a = math.gcd(a, x - (z // c) * bx)
        if a == 0:
            raise ValueError("lattice is not of full rank")
        a = abs(a)
        return cls(ctx, a, bx % a, abs(c))

    @classmethod
    def from_module_generators(
        cls, ctx: FieldContext, gens: Iterable[RingElement]
    ) -> "IdealHNF":
        """HNF of the ideal (o-module) generated by the elements."""
        w = RingElement(ctx, 0, 1) if ctx.degree == 2 else ctx.one()
        full = []
        for g in gens:
            full.append(g)
            if ctx.degree == 2:
                full.append(g * w)
        return cls.from_elements(ctx, full)

    def generators(self) -> list[RingElement]:
        if self.ctx.degree == 1:
            return [self.ctx.element(self.a)]
        return [self.ctx.element(self.a), RingElement(self.ctx, self.b, self.c)]

    def contains(self, x: RingElement) -> bool:
        if self.ctx.degree == 1:
            return x.a % self.a == 0
        if x.b % self.c:
            return False
        return (x.a - (x.b // self.c) * self.b) % self.a == 0

    def contains_ideal(self, other: "IdealHNF") -> bool:
        return all(self.contains(g) for g in other.generators())

    def reduce(self, x: RingElement) -> RingElement:
        """Canonical representative of x modulo this lattice (the HNF box)."""
        if self.ctx.degree == 1:
            return self.ctx.element(x.a % self.a)
        z = x.b % self.c
        k = (x.b - z) // self.c
        return RingElement(self.ctx, (x.a - k * self.b) % self.a, z)

    def __mul__(self, other: "IdealHNF") -> "IdealHNF":
        prods = [g * h for g in self.generators() for h in other.generators()]
        return IdealHNF.from_module_generators(self.ctx, prods)

    def __pow__(self, k: int) -> "IdealHNF":
        out = IdealHNF.unit_ideal(self.ctx)
        for _ in range(k):
            out = out * self
        return out


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def ideal_of(y: RingElement) -> IdealHNF:
    """HNF of the principal ideal generated by y."""
    if y.is_zero():
        raise ValueError("zero element generates no HNF ideal")
    return IdealHNF.from_module_generators(y.ctx, [y])


def ideal_sum(i: IdealHNF, j: IdealHNF) -> IdealHNF:
    """HNF of I + J (lattice generated by the union of bases)."""
    return IdealHNF.from_elements(i.ctx, i.generators() + j.generators())


def is_coprime(j: RingElement, y: RingElement) -> bool:
    """(j) + (y) = o, with the convention that everything is coprime to a unit."""
    if abs(y.norm()) == 1:
        return True
    if j.is_zero():
        return False
    return ideal_sum(ideal_of(j), ideal_of(y)).norm == 1


@dataclass(frozen=True)
class PrimeIdealFactor:
    p: int
    residue_degree: int
    splitting: str  # "split" | "inert" | "ramified"
    exponent: int
    ideal: IdealHNF

    @property
    def prime_norm(self) -> int:
        return self.p ** self.residue_degree


def _sqrt_mod_prime(a: int, p: int) -> Optional[int]:
    """Tonelli-Shanks; returns r with r^2 = a mod p, or None."""
    a %= p
    if p == 2:
        return a
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t = t * c % p
        r = r * b % p
    return r


def _factor_int(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    d = 5
    while d * d <= n:
        for p in (d, d + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        d += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _primes_above(ctx: FieldContext, p: int) -> list[tuple[IdealHNF, int, str]]:
    """Prime ideals above p as (HNF, residue degree, splitting type)."""
    t, n = ctx.omega_trace, ctx.omega_norm_neg
    sym = kronecker_symbol(ctx.disc, p)
    if sym == -1:
        return [(ideal_of(ctx.element(p)), 2, "inert")]
    # Roots of w^2 - t w - n mod p give p-coordinates of the primes (p, w - r).
    if p == 2:
        roots = sorted({r for r in (0, 1) if (r * r - t * r - n) % 2 == 0})
    else:
        s = _sqrt_mod_prime((t * t + 4 * n) % p, p)
        assert s is not None, "split/ramified prime must have a root"
        inv2 = pow(2, p - 2, p)
        roots = sorted({(t + s) * inv2 % p, (t - s) * inv2 % p})
    kind = "ramified" if sym == 0 else "split"
    out = []
    for r in roots:
        frak_p = IdealHNF.from_module_generators(
            ctx, [ctx.element(p), RingElement(ctx, -r, 1)]
        )
        out.append((frak_p, 1, kind))
    return out


def factor_ideal(i: IdealHNF, ctx: FieldContext) -> list[PrimeIdealFactor]:
    """Prime factorization of a nonzero integral ideal; unit ideal gives []."""
    if i.norm == 1:
        return []
    out: list[PrimeIdealFactor] = []
    if ctx.degree == 1:
        for p, e in sorted(_factor_int(i.norm).items()):
            out.append(
                PrimeIdealFactor(p, 1, "split", e, IdealHNF(ctx, p))
            )
        return out
    for p in sorted(_factor_int(i.norm)):
        for frak_p, f, kind in _primes_above(ctx, p):
            nu = 0
            pk = frak_p
            while pk.contains_ideal(i):
                nu += 1
                pk = pk * frak_p
            if nu > 0:
                out.append(PrimeIdealFactor(p, f, kind, nu, frak_p))
    total = 1
    for fac in out:
        total *= fac.prime_norm ** fac.exponent
    assert total == i.norm, "prime factorization does not recompose the norm"
    return out


def totient(i: IdealHNF, ctx: FieldContext) -> int:
    """Number of invertible residues mod I, from the prime factorization."""
    phi = 1
    for fac in factor_ideal(i, ctx):
        q = fac.prime_norm
        phi *= (q - 1) * q ** (fac.exponent - 1)
    return phi


def residue_representatives(y: RingElement) -> list[RingElement]:
    """The |N(y)| canonical representatives of o / y*o, in HNF-box order."""
    if y.is_zero():
        raise ValueError("zero modulus")
    ideal = ideal_of(y)
    ctx = y.ctx
    if ctx.degree == 1:
        return [ctx.element(x) for x in range(ideal.a)]
    return [
        RingElement(ctx, x, z) for z in range(ideal.c) for x in range(ideal.a)
    ]


def inverse_mod(j: RingElement, y: RingElement) -> RingElement:
    """The residue j^x with j * j^x = 1 mod y*o, in the representative box."""
    ctx = j.ctx
    ideal = ideal_of(y)
    if ideal.norm == 1:
        return ctx.zero()
    if not is_coprime(j, y):
        raise NotInvertibleError(f"{j} is not invertible modulo {y}")
    phi = totient(ideal, ctx)
    # j^phi = 1 in (o/y)^x, so the inverse is j^(phi-1); square-and-multiply
    # with reduction into the HNF box at every step.
    out = ideal.reduce(ctx.one())
    base = ideal.reduce(j)
    k = phi - 1
    while k:
        if k & 1:
            out = ideal.reduce(out * base)
        base = ideal.reduce(base * base)
        k >>= 1
    check = ideal.reduce(out * j)
    assert check == ideal.reduce(ctx.one()), "inverse verification failed"
    return out


@dataclass(frozen=True)
class UnitPower:
    """The totally positive unit eps_tp^k with its exact value."""

    k: int
    value: RingElement

    def __post_init__(self):
        assert self.value.norm() == 1
        assert self.value.is_totally_positive()


def balance_unit(y: RingElement, ctx: FieldContext) -> UnitPower:
    """The unit power making the embeddings of eps^k * y as equal as possible.

    Minimizes max_i |log sigma_i(eps_tp^k y) - (1/d) log N(y)|; the balanced
    element has embedding-log spread at most 2*log(sigma_1(eps_tp)).
    """
    if not y.is_totally_positive():
        raise ValueError("balance_unit requires a totally positive element")
    if ctx.degree == 1:
        return UnitPower(0, ctx.one())
    v1, v2 = y.embed()
    s = (math.log(v1) - math.log(v2)) / 2
    L = ctx.log_eps_tp
    k0 = -s / L
    candidates = range(math.floor(k0) - 1, math.floor(k0) + 3)
    best = min(abs(s + k * L) for k in candidates)
    # exact ties (elements sitting symmetrically between two associates) land
    # here with only float noise separating them; resolve to the smaller k
    best_k = min(k for k in candidates if abs(s + k * L) <= best + 1e-9)
    return UnitPower(best_k, ctx.eps_tp ** best_k)


def balanced_representative(y: RingElement, ctx: FieldContext) -> RingElement:
    """The canonical balanced associate eps_tp^k * y."""
    return balance_unit(y, ctx).value * y


def enumerate_balanced(ctx: FieldContext, norm_bound: int) -> list[RingElement]:
    """All balanced, totally positive y with 2 <= N(y) <= norm_bound.

    One representative per associate class under eps_tp, sorted by norm
    then coordinates.
    """
    out = []
    if ctx.degree == 1:
        return [ctx.element(n) for n in range(2, norm_bound + 1)]
    w1, w2 = ctx.sigma_omega
    # Balanced elements have both embeddings below sqrt(N) * sqrt(eps_tp).
    cap = math.sqrt(norm_bound) * math.exp(ctx.log_eps_tp / 2) + 1e-9
    seen = set()
    zmax = math.floor(2 * cap / abs(w1 - w2)) + 1
    for z in range(-zmax, zmax + 1):
        # need 0 < a + z*w1 <= cap and 0 < a + z*w2 <= cap
        lo = math.floor(max(-z * w1, -z * w2)) + 1
        hi = math.ceil(min(cap - z * w1, cap - z * w2))
        for a in range(lo, hi + 1):
            y = RingElement(ctx, a, z)
            nrm = y.norm()
            if nrm < 2 or nrm > norm_bound:
                continue
            if not y.is_totally_positive():
                continue
            yb = balanced_representative(y, ctx)
            if yb.coords not in seen:
                seen.add(yb.coords)
                out.append(yb)
    out.sort(key=lambda e: (e.norm(), e.coords))
    return out


def totient_ratio_scan(
    ctx: FieldContext, norm_bound: int
) -> list[tuple[RingElement, int, int, float]]:
    """Rows (y, N(y), phi(y), N/(phi*(log log N)^d)) over balanced y."""
    if norm_bound < 16:
        raise ValueError("norm bound must be at least 16")
    rows = []
    d = ctx.degree
    for y in enumerate_balanced(ctx, norm_bound):
        nrm = y.norm()
        phi = totient(ideal_of(y), ctx)
        ll = math.log(math.log(nrm)) if nrm >= 3 else float("nan")
        ratio = nrm / (phi * ll ** d) if ll and ll > 0 else float("nan")
        rows.append((y, nrm, phi, ratio))
    return rows
