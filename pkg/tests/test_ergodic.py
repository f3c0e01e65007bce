import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horolab.ergodic import (
    ToralAutomorphism,
    TrigPolynomial,
    average_norm,
    cat_map,
    compose,
    correlation,
    cosine,
    verify_vonneumann,
)

freq = st.tuples(
    st.integers(min_value=-5, max_value=5), st.integers(min_value=-5, max_value=5)
)


class TestToralAutomorphism:
    def test_cat_map_valid(self):
        T = cat_map()
        assert T.m == ((2, 1), (1, 1))

    def test_rejects_non_unimodular(self):
        with pytest.raises(ValueError):
            ToralAutomorphism(((2, 0), (0, 2)))

    def test_rejects_elliptic(self):
        with pytest.raises(ValueError):
            ToralAutomorphism(((0, -1), (1, 0)))

    def test_transpose_inverse(self):
        T = cat_map()
        for k in [(1, 0), (0, 1), (3, -2)]:
            assert T.transpose_apply_inv(T.transpose_apply(k)) == k


class TestTrigPolynomial:
    def test_hermitian_enforced(self):
        with pytest.raises(ValueError):
            TrigPolynomial({(1, 0): 1.0})
        with pytest.raises(ValueError):
            TrigPolynomial({(1, 0): 1j, (-1, 0): 1j})

    def test_mean_is_constant_coefficient(self):
        f = TrigPolynomial({(0, 0): 0.3, (1, 1): 0.5, (-1, -1): 0.5})
        assert f.mean == 0.3


class TestCompose:
    def test_k_zero(self):
        f = cosine((1, 0))
        assert compose(cat_map(), f, 0) == f

    def test_pinned_relabeling(self):
        # e_(1,0) maps to e_(2,1) under the transpose convention
        f = TrigPolynomial({(1, 0): 0.5, (-1, 0): 0.5})
        g = compose(cat_map(), f, 1)
        assert set(g.coeffs) == {(2, 1), (-2, -1)}

    @given(k1=freq, k2=freq, n=st.integers(min_value=-6, max_value=6))
    @settings(max_examples=60)
    def test_roundtrip(self, k1, k2, n):
        coeffs = {}
        for k in (k1, k2):
            if k == (0, 0):
                continue
            coeffs[k] = coeffs.get(k, 0) + 0.5
            mk = (-k[0], -k[1])
            coeffs[mk] = coeffs.get(mk, 0) + 0.5
        if not coeffs:
            return
        f = TrigPolynomial(coeffs)
        assert compose(cat_map(), compose(cat_map(), f, n), -n) == f

    def test_mean_preserved(self):
        f = TrigPolynomial({(0, 0): 0.7, (2, 1): 0.5, (-2, -1): 0.5})
        for k in range(-4, 5):
            assert compose(cat_map(), f, k).mean == f.mean


class TestCorrelation:
    def test_never_returns(self):
        f = cosine((1, 0))
        T = cat_map()
        for k in range(1, 65):
            assert correlation(T, f, f, k) == 0

    def test_k_zero_half(self):
        f = cosine((1, 0))
        assert correlation(cat_map(), f, f, 0) == 0.5

    def test_constant_function(self):
        f = TrigPolynomial({(0, 0): 3.0})
        g = cosine((1, 1))
        assert correlation(cat_map(), f, g, 5) == 0
        assert correlation(cat_map(), f, f, 2) == 0


class TestAverageNorm:
    def test_exact_identity(self):
        T = cat_map()
        f = cosine((1, 0))
        for K in [1, 2, 3, 7, 16, 100, 1024, 4096]:
            assert abs(average_norm(T, f, K) - 1 / (2 * K)) < 1e-12

    def test_k1_is_variance(self):
        f = TrigPolynomial({(0, 0): 1.0, (1, 2): 0.5, (-1, -2): 0.5})
        assert average_norm(cat_map(), f, 1) == pytest.approx(0.5, abs=1e-15)

    def test_constant_is_zero(self):
        f = TrigPolynomial({(0, 0): 2.0})
        assert average_norm(cat_map(), f, 10) == 0.0

    def test_k_zero_rejected(self):
        with pytest.raises(ValueError):
            average_norm(cat_map(), cosine((1, 0)), 0)

    def test_loglog_slope_minus_one(self):
        T = cat_map()
        f = cosine((1, 0))
        Ks = [2**i for i in range(4, 13)]
        norms = [average_norm(T, f, K) for K in Ks]
        slope = np.polyfit(np.log(Ks), np.log(norms), 1)[0]
        assert slope == pytest.approx(-1.0, abs=0.01)


class TestVerifyVonNeumann:
    def test_single_cosine_holds(self):
        rep = verify_vonneumann(cat_map(), cosine((1, 0)), [2**i for i in range(2, 13)], 0.9)
        assert rep.holds()
        assert rep.max_ratio <= 1 + 1e-9

    def test_two_cosines_holds(self):
        f = TrigPolynomial({(1, 0): 0.5, (-1, 0): 0.5, (0, 1): 0.5, (0, -1): 0.5})
        rep = verify_vonneumann(cat_map(), f, [2**i for i in range(4, 13)], 0.9)
        assert rep.holds()

    def test_invalid_sigma(self):
        with pytest.raises(ValueError):
            verify_vonneumann(cat_map(), cosine((1, 0)), [4], 1.0)

    def test_empty_ks(self):
        with pytest.raises(ValueError):
            verify_vonneumann(cat_map(), cosine((1, 0)), [], 0.9)

    def test_report_shape(self):
        rep = verify_vonneumann(cat_map(), cosine((1, 0)), [16, 4, 64], 0.5)
        assert rep.Ks == (4, 16, 64)
        assert len(rep.exact_norms) == len(rep.envelopes) == len(rep.ratios) == 3
        assert rep.ratios[0] == pytest.approx(1.0, abs=1e-12)
