"""Enumeration of B-matrices up to local basis permutations.

Two B-matrices are equivalent when one becomes the other by permuting
columns, permuting sites, and relabeling symbols independently on each
site. The canonical representative is the lexicographically smallest
sorted column list over the whole group, so canonicalization is exact
(not a fixed-point heuristic) and invariant on every orbit.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

from .balance import (
    BalanceCertificate,
    BMatrix,
    EnumerationCapError,
    find_certificate,
    has_positive_solution,
    is_irreducible,
    kernel_dimension,
)

DEFAULT_CELL_CAP = 30
GROUP_TABLE_CAP = 2 * 10**7
MAX_Q, MAX_D, MAX_L = 6, 5, 25


def _check_desk_scale(q: int, d: int) -> None:
    if q < 1 or d < 2:
        raise ValueError("need q >= 1 and d >= 2")
    if q > MAX_Q or d > MAX_D:
        raise EnumerationCapError(f"(q={q}, d={d}) beyond desk scale q <= {MAX_Q}, d <= {MAX_D}")


def encode_columns(entries: np.ndarray, d: int) -> np.ndarray:
    """Column -> ket index, site 1 most significant (so index order = lexicographic)."""
    q = entries.shape[0]
    weights = d ** np.arange(q - 1, -1, -1)
    return weights @ entries


def decode_columns(idx, q: int, d: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    out = np.empty((q, len(idx)), dtype=np.int64)
    for l in range(q - 1, -1, -1):
        out[l] = idx % d
        idx = idx // d
    return out


@lru_cache(maxsize=None)
def group_table(q: int, d: int) -> np.ndarray:
    """Action of site permutations x per-site relabelings on ket indices.

    Row ``g`` maps ket index ``i`` to ``table[g, i]``.
    """
    n_kets = d**q
    size = 1
    for k in range(2, q + 1):
        size *= k
    fd = 1
    for k in range(2, d + 1):
        fd *= k
    size *= fd**q
    if size * n_kets > GROUP_TABLE_CAP:
        raise EnumerationCapError(
            f"symmetry group of (q={q}, d={d}) has {size} elements; canonicalization capped"
        )
    kets = decode_columns(np.arange(n_kets), q, d).T  # (n_kets, q)
    relabel = np.array(list(itertools.permutations(range(d))))  # (d!, d)
    weights = d ** np.arange(q - 1, -1, -1)
    blocks = []
    for perm in itertools.permutations(range(q)):
        moved = kets[:, perm]
        acc = np.zeros((1,) * q + (n_kets,), dtype=np.int64)
        for l in range(q):
            contrib = relabel[:, moved[:, l]] * weights[l]  # (d!, n_kets)
            shape = [1] * q + [n_kets]
            shape[l] = fd
            acc = acc + contrib.reshape(shape)
        blocks.append(acc.reshape(-1, n_kets))
    return np.concatenate(blocks)


def canonical_key(idx, q: int, d: int) -> tuple[int, ...]:
    """Smallest sorted image of a set of ket indices under the symmetry group."""
    table = group_table(q, d)
    images = np.sort(table[:, np.asarray(idx, dtype=np.int64)], axis=1)
    cand = images
    for col in range(cand.shape[1]):
        m = cand[:, col].min()
        cand = cand[cand[:, col] == m]
        if len(cand) == 1:
            break
    return tuple(int(x) for x in cand[0])


def canonicalize(B: BMatrix) -> BMatrix:
    """Canonical representative of ``B``'s orbit (columns sorted lexicographically)."""
    _check_desk_scale(B.q, B.d)
    key = canonical_key(encode_columns(B.entries, B.d), B.q, B.d)
    return BMatrix(decode_columns(key, B.q, B.d), B.d)


def is_canonical(B: BMatrix) -> bool:
    return canonicalize(B) == B


@lru_cache(maxsize=None)
def _level(q: int, d: int, L: int) -> tuple[tuple[int, ...], ...]:
    if L == 1:
        return ((0,),)
    seen = set()
    for key in _level(q, d, L - 1):
        present = set(key)
        for i in range(d**q):
            if i not in present:
                seen.add(canonical_key(key + (i,), q, d))
    return tuple(sorted(seen))


def enumerate_b_matrices(
    q: int, d: int, L: int, cell_cap: int = DEFAULT_CELL_CAP
) -> Iterator[BMatrix]:
    """One canonical B-matrix per equivalence class, in increasing key order."""
    _check_desk_scale(q, d)
    if L < 1:
        raise ValueError("L must be >= 1")
    if L > d**q:
        raise ValueError(f"L={L} distinct columns impossible: only {d**q} kets exist")
    if q * L > cell_cap:
        raise EnumerationCapError(f"q*L={q * L} exceeds the cell cap {cell_cap}")
    for key in _level(q, d, L):
        yield BMatrix(decode_columns(key, q, d), d)


@dataclass
class CatalogEntry:
    B: BMatrix
    certificate: BalanceCertificate | None
    irreducible: bool

    @property
    def q(self) -> int:
        return self.B.q

    @property
    def d(self) -> int:
        return self.B.d

    @property
    def L(self) -> int:
        return self.B.L

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "d": self.d,
            "L": self.L,
            "B": self.B.tolist(),
            "n": list(self.certificate.n) if self.certificate else None,
            "irreducible": self.irreducible,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CatalogEntry":
        B = BMatrix(np.array(doc["B"]), doc["d"])
        n = doc.get("n")
        return cls(B, BalanceCertificate(tuple(n)) if n else None, bool(doc["irreducible"]))


def length_bound(q: int, d: int) -> int:
    """Largest length an irreducibly balanced support can have."""
    return (d - 1) * q + 1


def enumerate_irreducible(
    q: int, d: int, L_max: int, slack: int = 2, cell_cap: int = DEFAULT_CELL_CAP
) -> list[CatalogEntry]:
    """Every canonical irreducibly balanced support with ``L <= L_max``."""
    if L_max > length_bound(q, d) + slack:
        raise ValueError(
            f"L_max={L_max} beyond the length bound {length_bound(q, d)} plus slack {slack}"
        )
    entries = []
    for L in range(1, min(L_max, d**q) + 1):
        for B in enumerate_b_matrices(q, d, L, cell_cap):
            if has_positive_solution(B) and kernel_dimension(B) == 1:
                cert = find_certificate(B)
                assert is_irreducible(B, cert, cap=max(L, 24))
                entries.append(CatalogEntry(B, cert, True))
    return entries


def dump_catalog(entries) -> str:
    return "".join(json.dumps(e.to_dict()) + "\n" for e in entries)


def load_catalog(text: str) -> list[CatalogEntry]:
    return [CatalogEntry.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


@dataclass
class LengthBoundReport:
    q: int
    d: int
    bound: int
    lengths: dict[int, dict[str, int]] = field(default_factory=dict)
    counterexamples: list[CatalogEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def to_dict(self) -> dict:
        return {
            "theorem": 3,
            "q": self.q,
            "d": self.d,
            "bound": self.bound,
            "passed": self.passed,
            "lengths": {str(L): c for L, c in sorted(self.lengths.items())},
            "counterexamples": [e.to_dict() for e in self.counterexamples],
        }


def verify_length_bound(q: int, d: int, cell_cap: int = DEFAULT_CELL_CAP) -> LengthBoundReport:
    """Check that every balanced support just past the bound is reducible.

    Covers lengths ``bound+1 .. bound+2`` (or up to ``d**q`` if smaller).
    """
    bound = length_bound(q, d)
    report = LengthBoundReport(q, d, bound)
    for L in range(bound + 1, min(bound + 2, d**q) + 1):
        counts = {"classes": 0, "balanced": 0, "irreducible": 0}
        for B in enumerate_b_matrices(q, d, L, cell_cap):
            counts["classes"] += 1
            # the minimal certificate is not needed here, only existence
            if not has_positive_solution(B):
                continue
            counts["balanced"] += 1
            if kernel_dimension(B) == 1:
                counts["irreducible"] += 1
                report.counterexamples.append(CatalogEntry(B, find_certificate(B), True))
        report.lengths[L] = counts
    return report
