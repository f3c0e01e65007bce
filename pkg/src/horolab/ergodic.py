"""Exact mean-ergodic-theorem bookkeeping for hyperbolic toral automorphisms.

Test functions are trigonometric polynomials, so inner products reduce to
frequency matching and every correlation is computed exactly: the ergodic
average bound is verified against ground truth rather than Monte Carlo.

Composition convention: (f . T)(x) = f(Tx) relabels the frequency k to
T^t k (transpose).  A round-trip test pins this down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ToralAutomorphism",
    "TrigPolynomial",
    "compose",
    "correlation",
    "average_norm",
    "decay_envelope",
    "verify_vonneumann",
    "VonNeumannReport",
    "cat_map",
    "cosine",
]


@dataclass(frozen=True)
class ToralAutomorphism:
    """2x2 integer matrix with det +-1 and |trace| > 2 (hyperbolic)."""

    m: tuple[tuple[int, int], tuple[int, int]]

    def __post_init__(self):
        (a, b), (c, d) = self.m
        det = a * d - b * c
        if det not in (1, -1):
            raise ValueError(f"determinant must be +-1, got {det}")
        if abs(a + d) <= 2:
            raise ValueError("automorphism must be hyperbolic (|trace| > 2)")

    def transpose_apply(self, k: tuple[int, int]) -> tuple[int, int]:
        (a, b), (c, d) = self.m
        return (a * k[0] + c * k[1], b * k[0] + d * k[1])

    def transpose_apply_inv(self, k: tuple[int, int]) -> tuple[int, int]:
        (a, b), (c, d) = self.m
        det = a * d - b * c
        # inverse transpose, still integral since det = +-1
        return (det * (d * k[0] - c * k[1]), det * (-b * k[0] + a * k[1]))


def cat_map() -> ToralAutomorphism:
    return ToralAutomorphism(((2, 1), (1, 1)))


class TrigPolynomial:
    """Finite frequency-to-coefficient map with Hermitian symmetry.

    Represents sum_k c_k e^(2 pi i k.x) with c_{-k} = conj(c_k), so the
    function is real-valued; the mean is the coefficient at (0, 0).
    """

    def __init__(self, coeffs: dict[tuple[int, int], complex]):
        cleaned = {k: complex(c) for k, c in coeffs.items() if c != 0}
        for k, c in cleaned.items():
            mk = (-k[0], -k[1])
            if mk not in cleaned or abs(cleaned[mk] - c.conjugate()) > 1e-12:
                raise ValueError("coefficients must satisfy c(-k) = conj(c(k))")
        self.coeffs = cleaned

    @property
    def mean(self) -> complex:
        return self.coeffs.get((0, 0), 0j)

    def l1_norm(self) -> float:
        return sum(abs(c) for c in self.coeffs.values())

    def l2_norm_sq(self) -> float:
        return sum(abs(c) ** 2 for c in self.coeffs.values())

    def __eq__(self, other) -> bool:
        return isinstance(other, TrigPolynomial) and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"TrigPolynomial({self.coeffs})"


def cosine(k: tuple[int, int]) -> TrigPolynomial:
    """cos(2 pi k.x) as a trig polynomial."""
    return TrigPolynomial({k: 0.5, (-k[0], -k[1]): 0.5})


def compose(T: ToralAutomorphism, f: TrigPolynomial, k: int) -> TrigPolynomial:
    """f . T^k by exact frequency relabeling; coefficients unchanged."""
    out: dict[tuple[int, int], complex] = {}
    for freq, c in f.coeffs.items():
        g = freq
        if k >= 0:
            for _ in range(k):
                g = T.transpose_apply(g)
        else:
            for _ in range(-k):
                g = T.transpose_apply_inv(g)
        out[g] = out.get(g, 0j) + c
    return TrigPolynomial(out)


def inner(f: TrigPolynomial, g: TrigPolynomial) -> complex:
    """<f, g> on the torus, exact by orthonormality of characters."""
    return sum(c * g.coeffs[k].conjugate() for k, c in f.coeffs.items() if k in g.coeffs)


def correlation(
    T: ToralAutomorphism, f: TrigPolynomial, g: TrigPolynomial, k: int
) -> complex:
    """<f . T^k, g> - E_f E_g, exact."""
    return inner(compose(T, f, k), g) - f.mean * g.mean.conjugate()


def _autocorrelation_series(
    T: ToralAutomorphism, f: TrigPolynomial, max_lag: int
) -> list[complex]:
    """[corr(0), ..., corr(max_lag)], advancing each frequency one step per
    lag instead of recomposing from scratch (O(max_lag * #frequencies))."""
    mean_sq = f.mean * f.mean.conjugate()
    evolved = dict(f.coeffs)
    out = []
    for lag in range(max_lag + 1):
        if lag > 0:
            evolved = {T.transpose_apply(k): c for k, c in evolved.items()}
        inner_val = sum(
            c * f.coeffs[k].conjugate() for k, c in evolved.items() if k in f.coeffs
        )
        out.append(inner_val - mean_sq)
    return out


def average_norm(T: ToralAutomorphism, f: TrigPolynomial, K: int) -> float:
    """Exact ||(1/K) sum_{n<K} f.T^n - E_f||_2^2 via pairwise correlations."""
    if K < 1:
        raise ValueError("K must be >= 1")
    # sum over pairs (m, n) of corr(m - n), grouped by the lag j = m - n;
    # corr(-j) is the conjugate of corr(j), so negative lags fold into 2 Re
    series = _autocorrelation_series(T, f, K - 1)
    total = K * series[0].real
    for j in range(1, K):
        total += 2 * (K - j) * series[j].real
    return float(total / (K * K))


def decay_envelope(
    T: ToralAutomorphism, f: TrigPolynomial, max_lag: int
) -> np.ndarray:
    """Monotone envelope psi with |<f.T^k, f> - E_f^2| <= psi(|k|) S(f)^2.

    S is the coefficient l1-norm (a norm dominating the L2-norm of f);
    entries are exact correlations made non-increasing from the tail.
    """
    s2 = f.l1_norm() ** 2
    if s2 == 0:
        return np.zeros(max_lag + 1)
    series = _autocorrelation_series(T, f, max_lag)
    vals = np.array([abs(c) / s2 for c in series])
    return np.maximum.accumulate(vals[::-1])[::-1]


@dataclass(frozen=True)
class VonNeumannReport:
    Ks: tuple[int, ...]
    exact_norms: tuple[float, ...]
    envelopes: tuple[float, ...]
    ratios: tuple[float, ...]
    fitted_constant: float
    sigma: float

    @property
    def max_ratio(self) -> float:
        return max(self.ratios)

    def holds(self, tol: float = 1e-9) -> bool:
        return self.max_ratio <= 1 + tol


def verify_vonneumann(
    T: ToralAutomorphism,
    f: TrigPolynomial,
    Ks: list[int],
    sigma: float,
) -> VonNeumannReport:
    """Check the ergodic-average bound K^-sigma + psi(K^(1-sigma)).

    The constant is fitted at the first K; the report records the ratio of
    the exact averaged norm to the fitted envelope at every K.
    """
    if not Ks:
        raise ValueError("need at least one K")
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    Ks = sorted(int(K) for K in Ks)
    max_lag = max(Ks)
    psi = decay_envelope(T, f, max_lag)
    s2 = f.l1_norm() ** 2

    def envelope(K: int) -> float:
        lag = min(int(math.ceil(K ** (1 - sigma))), max_lag)
        return float((K ** (-sigma) + psi[lag]) * s2)

    norms = [average_norm(T, f, K) for K in Ks]
    env0 = envelope(Ks[0])
    C = norms[0] / env0 if env0 > 0 else 0.0
    envs = [envelope(K) for K in Ks]
    ratios = [
        (n / (C * e)) if C > 0 and e > 0 else 0.0 for n, e in zip(norms, envs)
    ]
    return VonNeumannReport(
        tuple(Ks), tuple(norms), tuple(envs), tuple(ratios), C, sigma
    )
