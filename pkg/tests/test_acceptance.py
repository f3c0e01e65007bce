"""Acceptance suite: one test per criterion, each ending in a PASS print.

Run with `pytest -v tests/test_acceptance.py` (add -s to see the PASS lines
inline).  Seeds are fixed; every tolerance is stated next to its assertion.
"""

import math
import time

import numpy as np
import pytest

from horolab.ensembles import (
    discrepancy_DK,
    evaluate_ensemble,
    horosphere_sample,
    ks_distance,
    nonprimitive_parameters,
    primitive_parameters,
    rational_parameters,
    realize,
)
from horolab.ergodic import average_norm, cat_map, cosine, verify_vonneumann
from horolab.groups import duality_gamma, duality_residual, unit_action_on_parameter
from horolab.lattices import make_observable
from horolab.nfq import (
    IdealHNF,
    balance_unit,
    enumerate_balanced,
    factor_ideal,
    ideal_of,
    ideal_sum,
    is_coprime,
    make_field,
    rational_field,
    residue_representatives,
    totient,
    totient_ratio_scan,
)

F5 = make_field(5)
F2 = make_field(2)
Q = rational_field()


def test_1_duality_identity():
    """Prop.-1.2 duality: integral gamma with exact det 1 and a realized
    residual < 1e-9, for every coprime pair over both quadratic fields."""
    t0 = time.time()
    pairs = 0
    worst = 0.0
    for ctx in (F5, F2):
        for y in enumerate_balanced(ctx, 200):
            for j in residue_representatives(y):
                if not is_coprime(j, y):
                    continue
                gamma = duality_gamma(j, y, ctx)  # integral entries by type;
                assert gamma.det() == ctx.one()  # det checked exactly
                res = duality_residual(j, y, ctx)
                worst = max(worst, res)
                pairs += 1
    elapsed = time.time() - t0
    assert worst < 1e-9, f"worst realized residual {worst}"
    assert elapsed < 60, f"runtime {elapsed:.1f}s exceeds 60s"
    print(
        f"\nACCEPTANCE 1 PASS: duality on {pairs} coprime pairs over Q(sqrt5) "
        f"and Q(sqrt2), worst residual {worst:.2e}, {elapsed:.1f}s"
    )


def _all_ideals(ctx, bound):
    """Every integral ideal with norm <= bound, via closure of the HNF box."""
    w = ctx.element(0, 1)
    for a in range(1, bound + 1):
        for c in range(1, bound // a + 1):
            for b in range(a):
                cand = IdealHNF(ctx, a, b, c)
                g1 = ctx.element(a, 0)
                g2 = ctx.element(b, c)
                if cand.contains(g1 * w) and cand.contains(g2 * w):
                    yield cand


def test_2_totient_oracle_equivalence():
    """totient(I) equals the brute-force invertible-residue count for every
    ideal of norm <= 500 in Q(sqrt5) and Q(sqrt2); zero mismatches."""
    t0 = time.time()
    checked = 0
    for ctx in (F5, F2):
        for I in _all_ideals(ctx, 500):
            if I.norm == 1:
                continue
            brute = 0
            for x in range(I.a):
                for z in range(I.c):
                    el = ctx.element(x, z)
                    if el.is_zero():
                        continue
                    if ideal_sum(ideal_of(el), I).norm == 1:
                        brute += 1
            assert totient(I, ctx) == brute, f"mismatch at {I!r}"
            checked += 1
    elapsed = time.time() - t0
    assert elapsed < 60, f"runtime {elapsed:.1f}s exceeds 60s"
    print(
        f"\nACCEPTANCE 2 PASS: totient formula matches brute force on "
        f"{checked} ideals (N <= 500, both fields), {elapsed:.1f}s"
    )


def test_3_totient_bounds_and_ratio():
    """N^0.6 < phi < N for N >= 30, and over the N <= 1e5 scan the ratio
    N/(phi (log log N)^2) peaks at a composite norm, below 10x the median."""
    rows = [
        (y, n, phi, r)
        for (y, n, phi, r) in totient_ratio_scan(F5, 10**5)
        if n >= 30
    ]
    for _, n, phi, _ in rows:
        assert n**0.6 < phi < n, f"bounds fail at N={n}, phi={phi}"
    ratios = np.array([r for *_, r in rows])
    med = float(np.median(ratios))
    top = max(rows, key=lambda row: row[3])
    y_max, n_max, _, r_max = top
    factors = factor_ideal(ideal_of(y_max), F5)
    multiplicity = sum(f.exponent for f in factors)
    assert multiplicity >= 2, f"argmax norm {n_max} is not composite"
    assert r_max < 10 * med, f"sup {r_max} vs median {med}"
    print(
        f"\nACCEPTANCE 3 PASS: bounds hold on {len(rows)} classes; empirical "
        f"sup ratio {r_max:.4f} at y={y_max} (N={n_max}, {multiplicity} prime "
        f"ideal factors), median {med:.4f}, sup/median {r_max / med:.2f}"
    )


def test_4_unit_balancing():
    """Balanced associates have embedding-log spread <= 2 log((3+sqrt5)/2)
    for every totally positive class with N(y) <= 1e4 in Q(sqrt5)."""
    bound = 2 * math.log((3 + math.sqrt(5)) / 2)  # = 1.9248...
    assert bound == pytest.approx(1.9248, abs=1e-4)
    violations = 0
    count = 0
    for y in enumerate_balanced(F5, 10**4):
        for m in (-2, -1, 0, 1, 2):
            shifted = F5.eps_tp**m * y
            balanced = balance_unit(shifted, F5).value * shifted
            v1, v2 = balanced.embed()
            if abs(math.log(v1) - math.log(v2)) > bound + 1e-9:
                violations += 1
            count += 1
    assert violations == 0
    print(
        f"\nACCEPTANCE 4 PASS: spread <= {bound:.4f} on {count} balancings "
        f"(all classes with N <= 1e4, unit shifts -2..2), zero violations"
    )


def test_5_sl2z_cusp_fractions():
    """For n = 10007 the primitive points u_(k/n) a_n hit the cusp region
    Im > T at the hyperbolic-area frequencies 3/(2 pi) and 3/(4 pi)."""
    t0 = time.time()
    n = 10007
    # area oracle: integral of dx dy / y^2 over {Im > T} is 1/T, total pi/3
    ys = np.linspace(2.0, 200.0, 400_000)
    area = np.trapezoid(1.0 / ys**2, ys) + 1.0 / 200.0
    assert area == pytest.approx(0.5, abs=1e-6)
    prim = primitive_parameters(Q.element(n), 0.5, Q)
    assert len(prim) == n - 1
    frac2 = evaluate_ensemble(prim, make_observable("cusp_2")).mean()
    frac4 = evaluate_ensemble(prim, make_observable("cusp_4")).mean()
    elapsed = time.time() - t0
    assert frac2 == pytest.approx(3 / (2 * math.pi), abs=0.02)
    assert frac4 == pytest.approx(3 / (4 * math.pi), abs=0.015)
    assert elapsed < 30, f"runtime {elapsed:.1f}s exceeds 30s"
    print(
        f"\nACCEPTANCE 5 PASS: n={n} cusp fractions {frac2:.4f} "
        f"(target {3 / (2 * math.pi):.4f} +- 0.02) and {frac4:.4f} "
        f"(target {3 / (4 * math.pi):.4f} +- 0.015), {elapsed:.1f}s"
    )


def test_6_hilbert_surface_ks():
    """KS distances of alpha1_sup between discrete ensembles and the
    horosphere reference shrink along inert primes 13, 37, 97 in Q(sqrt5)."""
    t0 = time.time()
    obs = make_observable("alpha1_sup")
    bounds = [0.10, 0.07, 0.05]
    ks_prim, ks_rat = [], []
    for i, p in enumerate((13, 37, 97)):
        y = F5.element(p)
        horo = evaluate_ensemble(horosphere_sample(y, 0.5, 10_000, 1000 + i, F5), obs)
        prim = evaluate_ensemble(primitive_parameters(y, 0.5, F5), obs)
        rat = evaluate_ensemble(rational_parameters(y, 0.5, F5), obs)
        ks_prim.append(ks_distance(prim, horo))
        ks_rat.append(ks_distance(rat, horo))
    elapsed = time.time() - t0
    for seq, label in ((ks_prim, "primitive"), (ks_rat, "rational")):
        for ks, bound in zip(seq, bounds):
            assert ks <= bound, f"{label}: KS {ks:.4f} exceeds {bound}"
        assert seq[0] >= seq[1] >= seq[2], f"{label}: KS not non-increasing {seq}"
    assert elapsed < 600, f"runtime {elapsed:.1f}s exceeds 10min"
    print(
        f"\nACCEPTANCE 6 PASS: KS primitive {[round(k, 4) for k in ks_prim]} "
        f"and rational {[round(k, 4) for k in ks_rat]} within [0.10, 0.07, "
        f"0.05], non-increasing, {elapsed:.0f}s"
    )


def test_7_exact_counting_identities():
    """Convex-combination residual < 1e-12, exact partition sizes, and
    unit-action invariance of the primitive observable multiset."""
    from horolab.ensembles import convex_combination_check

    obs = make_observable("alpha1_sup")
    cases = [(F5, (3, 0), 0.5), (F5, (2, 1), 0.25), (F5, (7, 0), 0.7), (Q, (12,), 0.5)]
    worst = 0.0
    for ctx, coords, alpha in cases:
        y = ctx.element(*coords)
        worst = max(worst, convex_combination_check(y, alpha, obs, ctx))
        n = abs(y.norm())
        prim = primitive_parameters(y, alpha, ctx)
        nonprim = nonprimitive_parameters(y, alpha, ctx)
        assert len(prim) == totient(ideal_of(y), ctx)
        assert len(prim) + len(nonprim) == n
    assert worst < 1e-12, f"convex residual {worst}"
    # unit action: exact permutation, invariant observable multiset
    y = F5.element(7)
    prim = primitive_parameters(y, 0.5, F5)
    orig = {j.coords for j in prim.residues}
    shifted = [unit_action_on_parameter(j, y, 1, F5) for j in prim.residues]
    assert {j.coords for j in shifted} == orig
    before = sorted(obs(realize(j, y, 0.5, F5), F5) for j in prim.residues)
    after = sorted(obs(realize(j, y, 0.5, F5), F5) for j in shifted)
    assert np.allclose(before, after, rtol=1e-6)
    print(
        f"\nACCEPTANCE 7 PASS: convex residual {worst:.2e} < 1e-12 on "
        f"{len(cases)} cells, partitions exact, unit action permutes the "
        f"{len(prim)} primitive parameters with an invariant value multiset"
    )


def test_8_effective_von_neumann():
    """average_norm(cat map, cos 2 pi x, K) = 1/(2K) to 1e-12 up to K=2^12,
    and the fitted sigma=0.9 envelope is never violated."""
    t0 = time.time()
    T = cat_map()
    f = cosine((1, 0))
    worst = 0.0
    for K in list(range(1, 65)) + [2**i for i in range(7, 13)]:
        worst = max(worst, abs(average_norm(T, f, K) - 1 / (2 * K)))
    assert worst < 1e-12, f"identity deviation {worst}"
    rep = verify_vonneumann(T, f, [2**i for i in range(2, 13)], 0.9)
    assert rep.holds(), f"envelope violated, max ratio {rep.max_ratio}"
    elapsed = time.time() - t0
    assert elapsed < 5, f"runtime {elapsed:.1f}s exceeds 5s"
    print(
        f"\nACCEPTANCE 8 PASS: exact 1/(2K) identity to {worst:.1e} for K up "
        f"to 4096; sigma=0.9 envelope max ratio {rep.max_ratio:.3f} <= 1, "
        f"{elapsed:.1f}s"
    )


def test_9_discrepancy_trend():
    """The primitive-ensemble RMS of D_K for gauss_1 at the inert prime 37
    (N = 1369) drops by at least 3x from K=1 to K=64."""
    t0 = time.time()
    obs = make_observable("gauss_1")
    y = F5.element(37)
    prim = primitive_parameters(y, 0.5, F5)
    M = max(10_000, 10 * len(prim))
    horo = evaluate_ensemble(horosphere_sample(y, 0.5, M, 4242, F5), obs)
    rep = discrepancy_DK(obs, prim, [1, 4, 16, 64], F5, horo.mean(), horo.stderr())
    ratio = rep.rms[0] / rep.rms[-1]
    elapsed = time.time() - t0
    assert ratio >= 3.0, f"D_K RMS only dropped {ratio:.2f}x"
    print(
        f"\nACCEPTANCE 9 PASS: D_K RMS {[round(r, 4) for r in rep.rms]} at "
        f"K={list(rep.Ks)}, drop K=1 -> K=64 is {ratio:.2f}x >= 3 "
        f"(E_ref stderr {rep.reference_stderr:.1e}), {elapsed:.0f}s"
    )
