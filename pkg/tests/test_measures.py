import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_sl
from qudit_balance.filtering import apply_site_matrix
from qudit_balance.measures import (
    MeasureShapeError,
    applicable_measures,
    concurrence2,
    tangle_terms,
    three_tangle,
    two_qudit_det,
)
from qudit_balance.state import from_tensor, from_terms, normalize

GHZ = normalize(from_terms(3, 2, [(1, [0, 0, 0]), (1, [1, 1, 1])]))
W = normalize(from_terms(3, 2, [(1, [0, 0, 1]), (1, [0, 1, 0]), (1, [1, 0, 0])]))


def hyperdeterminant(psi):
    """Cayley hyperdeterminant via the 2x2 slice formula (independent of tangle_terms)."""
    a, b = psi[0], psi[1]
    # Det(x a + y b) = c0 x^2 + c1 x y + c2 y^2; the hyperdeterminant is the discriminant
    c0 = np.linalg.det(a)
    c2 = np.linalg.det(b)
    c1 = a[0, 0] * b[1, 1] + b[0, 0] * a[1, 1] - a[0, 1] * b[1, 0] - b[0, 1] * a[1, 0]
    return c1**2 - 4 * c0 * c2


class TestValues:
    def test_ghz_tangle(self):
        assert abs(three_tangle(GHZ).value - 1) < 1e-12

    def test_w_tangle(self):
        assert three_tangle(W).value < 1e-10

    def test_bell_concurrence(self):
        bell = normalize(from_terms(2, 2, [(1, [0, 0]), (1, [1, 1])]))
        assert abs(concurrence2(bell).value - 1) < 1e-12

    def test_product_concurrence(self):
        assert concurrence2(from_terms(2, 2, [(1, [0, 1])])).value == 0

    def test_two_qutrit_normalized_det(self):
        s = normalize(from_terms(2, 3, [(1, [0, 0]), (1, [1, 1]), (1, [2, 2])]))
        m = two_qudit_det(s)
        assert abs(m.normalized - 1) < 1e-12
        assert abs(m.value - 3 ** -1.5) < 1e-12

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_tangle_matches_hyperdeterminant(self, seed):
        rng = np.random.default_rng(seed)
        psi = rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2))
        d1, d2, d3 = tangle_terms(psi)
        assert np.isclose(d1 - 2 * d2 + 4 * d3, hyperdeterminant(psi), rtol=1e-10, atol=1e-12)


class TestShapes:
    def test_wrong_shape(self):
        with pytest.raises(MeasureShapeError):
            three_tangle(from_terms(2, 2, [(1, [0, 0])]))
        with pytest.raises(MeasureShapeError):
            concurrence2(from_terms(2, 3, [(1, [0, 0])]))

    def test_applicable(self):
        assert [m.name for m in applicable_measures(GHZ)] == ["tau3"]
        bell = normalize(from_terms(2, 2, [(1, [0, 0]), (1, [1, 1])]))
        assert [m.name for m in applicable_measures(bell)] == ["concurrence", "two_qudit_det"]
        assert applicable_measures(from_terms(4, 2, [(1, [0, 0, 0, 0])])) == []

    def test_json(self):
        doc = three_tangle(GHZ).to_dict()
        assert set(doc) == {"measure", "value", "raw", "normalized"}


class TestInvariance:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_tangle_raw_is_sl_invariant(self, seed):
        rng = np.random.default_rng(seed)
        psi = rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2))
        before = three_tangle(from_tensor(psi)).raw
        for axis in range(3):
            psi = apply_site_matrix(psi, axis, random_sl(rng, 2))
        after = three_tangle(from_tensor(psi)).raw
        assert abs(after - before) <= 1e-8 * abs(before)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 4))
    def test_det_raw_is_sl_invariant(self, seed, d):
        rng = np.random.default_rng(seed)
        psi = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        before = two_qudit_det(from_tensor(psi)).raw
        for axis in range(2):
            psi = apply_site_matrix(psi, axis, random_sl(rng, d))
        after = two_qudit_det(from_tensor(psi)).raw
        assert abs(after - before) <= 1e-8 * abs(before)
