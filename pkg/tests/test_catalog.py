import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qudit_balance.balance import BMatrix, EnumerationCapError
from qudit_balance.catalog import (
    CatalogEntry,
    canonicalize,
    dump_catalog,
    enumerate_b_matrices,
    enumerate_irreducible,
    is_canonical,
    length_bound,
    load_catalog,
    verify_length_bound,
)


def orbit_count(q, d, L):
    """Count supports of size L up to site permutations and per-site relabelings, naively."""
    points = list(itertools.product(range(d), repeat=q))
    perms = list(itertools.permutations(range(d)))
    seen = set()
    classes = 0
    for support in itertools.combinations(points, L):
        key = frozenset(support)
        if key in seen:
            continue
        classes += 1
        for sp in itertools.permutations(range(q)):
            for labels in itertools.product(perms, repeat=q):
                seen.add(frozenset(tuple(labels[i][c[sp[i]]] for i in range(q)) for c in support))
    return classes


@st.composite
def group_moves(draw, q, d):
    sp = draw(st.permutations(range(q)))
    labels = [draw(st.permutations(range(d))) for _ in range(q)]
    return sp, labels


class TestCanonical:
    def test_two_qubit_length_two(self):
        found = list(enumerate_b_matrices(2, 2, 2))
        assert len(found) == 2 == orbit_count(2, 2, 2)

    @pytest.mark.parametrize("q, d, L", [(2, 2, 3), (3, 2, 3), (3, 2, 4), (2, 3, 3), (2, 3, 4)])
    def test_counts_match_naive_orbits(self, q, d, L):
        assert sum(1 for _ in enumerate_b_matrices(q, d, L)) == orbit_count(q, d, L)

    def test_enumerated_are_canonical(self):
        for B in enumerate_b_matrices(3, 2, 4):
            assert is_canonical(B)

    @settings(max_examples=80, deadline=None)
    @given(st.data())
    def test_invariant_under_group(self, data):
        q = data.draw(st.integers(1, 3))
        d = data.draw(st.integers(2, 3))
        L = data.draw(st.integers(1, min(6, d**q)))
        idx = data.draw(st.lists(st.integers(0, d**q - 1), min_size=L, max_size=L, unique=True))
        B = BMatrix(np.array([np.unravel_index(i, (d,) * q) for i in idx]).T.reshape(q, L), d)
        sp, labels = data.draw(group_moves(q, d))
        moved = np.array([np.array(labels[i])[B.entries[sp[i]]] for i in range(q)])
        col_order = data.draw(st.permutations(range(L)))
        moved = BMatrix(moved[:, list(col_order)], d)
        assert canonicalize(moved) == canonicalize(B)
        assert canonicalize(canonicalize(B)) == canonicalize(B)


class TestEnumeration:
    def test_too_many_columns(self):
        with pytest.raises(ValueError, match="impossible"):
            list(enumerate_b_matrices(2, 2, 5))

    def test_cell_cap(self):
        with pytest.raises(EnumerationCapError):
            list(enumerate_b_matrices(4, 4, 3, cell_cap=8))

    def test_two_qutrit_entry_present(self):
        entries = enumerate_irreducible(2, 3, 5)
        assert any(e.B.tolist() == [[0, 1, 2], [0, 1, 2]] and e.certificate.n == (1, 1, 1) for e in entries)

    def test_irreducible_lengths(self):
        lengths = sorted(e.L for e in enumerate_irreducible(4, 2, length_bound(4, 2)))
        assert lengths == [2, 4, 5]

    def test_length_beyond_slack(self):
        with pytest.raises(ValueError):
            enumerate_irreducible(2, 2, 10)


class TestPersistence:
    def test_round_trip(self):
        entries = enumerate_irreducible(3, 2, 4)
        text = dump_catalog(entries)
        assert len(text.splitlines()) == len(entries)
        back = load_catalog(text)
        assert [e.to_dict() for e in back] == [e.to_dict() for e in entries]

    def test_line_format(self):
        line = dump_catalog([CatalogEntry(BMatrix(np.array([[0, 1], [0, 1]]), 2), None, False)])
        assert line == '{"q": 2, "d": 2, "L": 2, "B": [[0, 1], [0, 1]], "n": null, "irreducible": false}\n'


class TestLengthBound:
    def test_bound_formula(self):
        assert length_bound(3, 2) == 4
        assert length_bound(2, 3) == 5

    @pytest.mark.parametrize("q, d", [(2, 2), (3, 2), (2, 3)])
    def test_small_configs(self, q, d):
        rep = verify_length_bound(q, d)
        assert rep.passed
        assert rep.to_dict()["counterexamples"] == []

    def test_frozen_counts(self):
        rep = verify_length_bound(3, 2)
        assert rep.lengths == {
            5: {"classes": 3, "balanced": 1, "irreducible": 0},
            6: {"classes": 3, "balanced": 2, "irreducible": 0},
        }
