import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import balance_matrix, exhaustive_irreducible
from qudit_balance.balance import (
    BALANCED_REDUCIBLE,
    IRREDUCIBLY_BALANCED,
    PARTLY_BALANCED,
    PRODUCT,
    UNBALANCED,
    BalanceCertificate,
    BMatrix,
    EnumerationCapError,
    alternating_matrix,
    b_matrix,
    balanced_part,
    classify,
    compose_alternating,
    constraint_rows,
    construct_max_entangled,
    decompose_balanced,
    find_certificate,
    has_positive_solution,
    is_certificate,
    is_irreducible,
    kernel_dimension,
    symbol_counts,
    verify_roots_of_unity,
)
from qudit_balance.state import from_terms, is_stochastic, normalize

GHZ_B = BMatrix(np.array([[0, 1], [0, 1], [0, 1]]), 2)
QUTRIT_B = BMatrix(np.array([[0, 1, 2], [0, 1, 2]]), 3)
W_B = BMatrix(np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]]), 2)
# irreducible although 5 is not a multiple of d = 2
ODD_B = BMatrix(np.array([[0, 0, 1, 1, 1], [0, 1, 0, 1, 1], [0, 1, 1, 0, 1], [0, 1, 1, 1, 0]]), 2)


def state_from_columns(B, amps=None):
    amps = np.ones(B.L) if amps is None else amps
    return normalize(from_terms(B.q, B.d, list(zip(amps, B.columns()))))


@st.composite
def b_matrices(draw, max_q=3, max_d=3, max_L=7):
    q = draw(st.integers(1, max_q))
    d = draw(st.integers(2, max_d))
    L = draw(st.integers(1, min(max_L, d**q)))
    idx = draw(st.lists(st.integers(0, d**q - 1), min_size=L, max_size=L, unique=True))
    cols = [np.unravel_index(i, (d,) * q) for i in idx]
    return BMatrix(np.array(cols).T.reshape(q, L), d)


class TestBMatrix:
    def test_columns_follow_terms(self):
        s = from_terms(2, 3, [(1, [2, 0]), (1, [0, 1])])
        assert sorted(b_matrix(s).columns()) == [(0, 1), (2, 0)]

    def test_duplicate_columns_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            BMatrix(np.array([[0, 0], [1, 1]]), 2)

    def test_entry_out_of_range(self):
        with pytest.raises(ValueError, match="range"):
            BMatrix(np.array([[0, 2]]), 2)


class TestAlternating:
    def test_two_qutrit_matrices(self):
        assert alternating_matrix(QUTRIT_B, 0).entries.tolist() == [[-1, 1, 0], [-1, 1, 0]]
        assert alternating_matrix(QUTRIT_B, 1).entries.tolist() == [[0, -1, 1], [0, -1, 1]]

    def test_composition_telescopes(self):
        A = compose_alternating(alternating_matrix(QUTRIT_B, 0), alternating_matrix(QUTRIT_B, 1))
        assert (A.lo, A.hi) == (0, 2)
        assert A.entries.tolist() == [[-1, 0, 1], [-1, 0, 1]]

    def test_composition_needs_adjacent_pair(self):
        A = alternating_matrix(QUTRIT_B, 0)
        with pytest.raises(ValueError):
            compose_alternating(A, A)

    @settings(max_examples=80, deadline=None)
    @given(b_matrices())
    def test_constraint_rows_match_indicator_oracle(self, B):
        assert np.array_equal(np.array(constraint_rows(B)).reshape(-1, B.L), balance_matrix(B))


class TestCertificates:
    def test_ghz(self):
        assert find_certificate(GHZ_B).n == (1, 1)

    def test_two_qutrit(self):
        assert find_certificate(QUTRIT_B).n == (1, 1, 1)

    def test_w_has_none(self):
        assert find_certificate(W_B) is None
        assert not has_positive_solution(W_B)

    def test_weighted_certificate(self):
        assert find_certificate(ODD_B).n == (2, 1, 1, 1, 1)

    def test_certificate_type_validates(self):
        with pytest.raises(ValueError):
            BalanceCertificate((2, 4))
        with pytest.raises(ValueError):
            BalanceCertificate((1, 0))

    def test_lexicographic_tie_break(self):
        # two disjoint Bell blocks: every (a, a, b, b) balances; the minimum is all ones
        B = BMatrix(np.array([[0, 1, 0, 1], [0, 1, 1, 0]]), 2)
        assert find_certificate(B).n == (1, 1, 1, 1)

    @settings(max_examples=120, deadline=None)
    @given(b_matrices())
    def test_certificate_properties(self, B):
        cert = find_certificate(B)
        assert (cert is not None) == has_positive_solution(B)
        if cert is None:
            return
        counts = symbol_counts(B, cert.n)
        assert np.all(counts == counts[:, :1])
        assert np.gcd.reduce(cert.n) == 1
        # nothing with a smaller total in a small box
        total = sum(cert.n)
        for n in itertools.product(range(1, 4), repeat=B.L):
            if sum(n) < total:
                assert not is_certificate(B, n)


class TestRootsOfUnity:
    def test_ghz(self):
        assert verify_roots_of_unity(GHZ_B, (1, 1))
        assert not verify_roots_of_unity(GHZ_B, (1, 2))

    def test_needs_prime_d(self):
        with pytest.raises(ValueError, match="prime"):
            verify_roots_of_unity(BMatrix(np.array([[0, 1, 2, 3]]), 4), (1, 1, 1, 1))

    def test_bad_weights(self):
        with pytest.raises(ValueError):
            verify_roots_of_unity(GHZ_B, (1, 0))
        with pytest.raises(ValueError):
            verify_roots_of_unity(GHZ_B, (1,))


class TestIrreducibility:
    def test_examples(self):
        assert is_irreducible(GHZ_B, BalanceCertificate((1, 1)))
        assert is_irreducible(ODD_B, BalanceCertificate((2, 1, 1, 1, 1)))
        bell_bell = BMatrix(np.array([[0, 1, 0, 1], [0, 1, 1, 0]]), 2)
        assert not is_irreducible(bell_bell, BalanceCertificate((1, 1, 1, 1)))

    def test_rejects_invalid_certificate(self):
        with pytest.raises(ValueError):
            is_irreducible(GHZ_B, BalanceCertificate((1, 2)))

    def test_cap(self):
        B = BMatrix(np.array([list(range(5)) * 1]), 5)
        with pytest.raises(EnumerationCapError):
            is_irreducible(B, BalanceCertificate((1,) * 5), cap=4)

    def test_odd_length_matches_exhaustive_search(self):
        assert exhaustive_irreducible(ODD_B)

    @settings(max_examples=80, deadline=None)
    @given(b_matrices(max_L=6))
    def test_kernel_criterion_matches_subset_search(self, B):
        cert = find_certificate(B)
        if cert is None:
            return
        assert is_irreducible(B, cert) == exhaustive_irreducible(B)
        assert is_irreducible(B, cert) == (kernel_dimension(B) == 1)


class TestBalancedPart:
    def test_w_empty(self):
        assert balanced_part(W_B) == []

    def test_partial(self):
        B = b_matrix(from_terms(3, 2, [(1, [0, 0, 0]), (1, [1, 1, 1]), (1, [0, 0, 1])]))
        cols = B.columns()
        assert sorted(cols[k] for k in balanced_part(B)) == [(0, 0, 0), (1, 1, 1)]

    @settings(max_examples=60, deadline=None)
    @given(b_matrices(max_L=6))
    def test_union_of_balanced_subsets(self, B):
        part = set(balanced_part(B))
        covered = set()
        for size in range(1, B.L + 1):
            for cols in itertools.combinations(range(B.L), size):
                if find_certificate(B.restrict(cols)) is not None:
                    covered |= set(cols)
        assert part == covered


class TestDecomposition:
    def test_partly_balanced_example(self):
        B = BMatrix(np.array([[0, 1, 0], [0, 1, 0], [0, 1, 1]]), 2)
        dec = decompose_balanced(B)
        assert dec.blocks == [[0, 1]]
        assert dec.remainder == [2]

    def test_bell_bell(self):
        B = BMatrix(np.array([[0, 1, 0, 1], [0, 1, 1, 0]]), 2)
        dec = decompose_balanced(B)
        assert sorted(map(sorted, dec.blocks)) == [[0, 1], [2, 3]]
        assert dec.remainder == []

    @settings(max_examples=60, deadline=None)
    @given(b_matrices(max_L=6))
    def test_blocks_are_disjoint_irreducible(self, B):
        dec = decompose_balanced(B)
        seen = [k for b in dec.blocks for k in b]
        assert len(seen) == len(set(seen))
        assert sorted(seen + dec.remainder) == list(range(B.L))
        for block in dec.blocks:
            sub = B.restrict(block)
            assert is_irreducible(sub, find_certificate(sub))


class TestClassify:
    def test_ghz(self):
        c = classify(state_from_columns(GHZ_B))
        assert c.verdict == IRREDUCIBLY_BALANCED
        assert c.to_dict() == {
            "verdict": "irreducibly_balanced",
            "certificate": [1, 1],
            "balanced_support": [1, 2],
            "blocks": [[1, 2]],
        }

    def test_w(self):
        assert classify(state_from_columns(W_B)).verdict == UNBALANCED

    def test_partly(self):
        s = from_terms(3, 2, [(1, [0, 0, 0]), (1, [1, 1, 1]), (1, [0, 0, 1])])
        c = classify(normalize(s))
        assert c.verdict == PARTLY_BALANCED
        assert c.irreducible is True

    def test_reducible(self):
        s = from_terms(2, 2, [(1, [0, 0]), (1, [1, 1]), (1, [0, 1]), (2, [1, 0])])
        assert classify(normalize(s)).verdict == BALANCED_REDUCIBLE

    def test_product(self):
        s = from_terms(2, 2, [(1, [0, 0]), (1, [0, 1]), (1, [1, 0]), (1, [1, 1])])
        assert classify(normalize(s)).verdict == PRODUCT


class TestMaxEntangled:
    @pytest.mark.parametrize("B", [GHZ_B, QUTRIT_B, ODD_B])
    def test_is_stochastic(self, B):
        s = construct_max_entangled(B, find_certificate(B))
        assert is_stochastic(s, tol=1e-12)

    def test_rejects_wrong_certificate(self):
        with pytest.raises(ValueError):
            construct_max_entangled(GHZ_B, BalanceCertificate((1, 2)))
