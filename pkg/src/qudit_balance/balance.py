"""Balance conditions on the ket support of a state.

Rows of a B-matrix index sites, columns index terms. A support is balanced
when positive integer weights on its columns make every symbol occur with
the same weighted count on every site. All decisions here use exact
rational arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact import ilp_min_exact, kernel_basis, linprog_exact, primitive_integer_vector
from .state import DEFAULT_TOL, PureState, QuditSystem, is_product

DEFAULT_SUBSET_CAP = 24


class EnumerationCapError(RuntimeError):
    """An exhaustive search would exceed its configured size cap."""


@dataclass(frozen=True, eq=False)
class BMatrix:
    entries: np.ndarray  # (q, L) ints in 0..d-1
    d: int

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.int64)
        if e.ndim != 2 or e.shape[1] == 0:
            raise ValueError("B-matrix must be a nonempty 2-D array")
        if e.min() < 0 or e.max() >= self.d:
            raise ValueError(f"B-matrix entry out of range 0..{self.d - 1}")
        if len({tuple(c) for c in e.T}) != e.shape[1]:
            raise ValueError("B-matrix columns must be pairwise distinct")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def q(self) -> int:
        return self.entries.shape[0]

    @property
    def L(self) -> int:
        return self.entries.shape[1]

    def columns(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in c) for c in self.entries.T]

    def restrict(self, cols: Sequence[int]) -> "BMatrix":
        return BMatrix(self.entries[:, list(cols)], self.d)

    def tolist(self) -> list[list[int]]:
        return self.entries.tolist()

    def __eq__(self, other):
        return (
            isinstance(other, BMatrix)
            and self.d == other.d
            and np.array_equal(self.entries, other.entries)
        )

    def __hash__(self):
        return hash((self.d, self.entries.tobytes(), self.entries.shape))

    def __repr__(self):
        return f"BMatrix(d={self.d}, {self.tolist()})"


@dataclass(frozen=True, eq=False)
class AlternatingMatrix:
    """Marks symbol ``lo`` with -1 and symbol ``hi`` with +1.

    ``hi == lo + 1`` for the basic matrices; composition widens the range.
    ``lo == hi`` is the zero matrix.
    """

    lo: int
    hi: int
    entries: np.ndarray

    @property
    def j(self) -> int:
        return self.lo


@dataclass(frozen=True)
class BalanceCertificate:
    n: tuple[int, ...]

    def __post_init__(self):
        if not self.n or any(x <= 0 for x in self.n):
            raise ValueError("certificate weights must be positive integers")
        if math.gcd(*self.n) != 1:
            raise ValueError("certificate weights must be coprime")


def b_matrix(state: PureState) -> BMatrix:
    return BMatrix(state.kets.T.copy(), state.d)


def alternating_matrix(B: BMatrix, j: int) -> AlternatingMatrix:
    if not 0 <= j <= B.d - 2:
        raise ValueError(f"j={j} out of range 0..{B.d - 2}")
    e = np.where(B.entries == j, -1, 0) + np.where(B.entries == j + 1, 1, 0)
    return AlternatingMatrix(j, j + 1, e)


def compose_alternating(A1: AlternatingMatrix, A2: AlternatingMatrix) -> AlternatingMatrix:
    """Add ``A^(j, j+s)`` and ``A^(j+s, j+s+1)`` to get ``A^(j, j+s+1)``."""
    if A1.hi != A2.lo:
        raise ValueError(f"ranges ({A1.lo},{A1.hi}) and ({A2.lo},{A2.hi}) are not adjacent")
    if A1.entries.shape != A2.entries.shape:
        raise ValueError("alternating matrices have different shapes")
    return AlternatingMatrix(A1.lo, A2.hi, A1.entries + A2.entries)


def constraint_rows(B: BMatrix) -> list[list[int]]:
    """Stacked ``q(d-1) x L`` system: one row per site and adjacent symbol pair."""
    rows = []
    for j in range(B.d - 1):
        A = alternating_matrix(B, j).entries
        rows.extend(A.tolist())
    return rows


def symbol_counts(B: BMatrix, n: Sequence[int]) -> np.ndarray:
    """Weighted count of each symbol per site, shape ``(q, d)``."""
    counts = np.zeros((B.q, B.d), dtype=object)
    for k, w in enumerate(n):
        for l in range(B.q):
            counts[l, B.entries[l, k]] += int(w)
    return counts


def is_certificate(B: BMatrix, n: Sequence[int]) -> bool:
    if len(n) != B.L or any(int(x) <= 0 for x in n):
        return False
    counts = symbol_counts(B, n)
    return bool(np.all(counts == counts[:, :1]))


def _covers_all_symbols(B: BMatrix) -> bool:
    # every symbol needs positive weight on every site
    return all(len(set(row)) == B.d for row in B.entries.tolist())


def _positive_point(rows: list[list[int]], L: int) -> list[Fraction] | None:
    """A kernel vector with every coordinate >= 1, or None.

    The balance system is homogeneous, so a strictly positive solution
    exists iff one with all weights >= 1 does; substituting ``n = 1 + m``
    leaves a pure feasibility problem ``C m = -C 1``, ``m >= 0``.
    """
    rhs = [-sum(r) for r in rows]
    res = linprog_exact([0] * L, rows, rhs)
    if res.status != "optimal":
        return None
    return [1 + x for x in res.x]


def has_positive_solution(B: BMatrix) -> bool:
    """Exact test for a strictly positive kernel vector of the balance system."""
    if not _covers_all_symbols(B):
        return False
    rows = constraint_rows(B)
    basis = kernel_basis(rows, B.L)
    if not basis:
        return False
    if len(basis) == 1:
        v = basis[0]
        return all(x > 0 for x in v) or all(x < 0 for x in v)
    return _positive_point(rows, B.L) is not None


def kernel_dimension(B: BMatrix) -> int:
    return len(kernel_basis(constraint_rows(B), B.L))


def find_certificate(B: BMatrix) -> BalanceCertificate | None:
    """Smallest positive integer certificate, or None if the support is not balanced.

    "Smallest" means minimal total weight, ties broken lexicographically.
    """
    if not _covers_all_symbols(B):
        return None
    L = B.L
    rows = constraint_rows(B)
    basis = kernel_basis(rows, L)
    if not basis:
        return None
    if len(basis) == 1:
        v = basis[0]
        if all(x < 0 for x in v):
            v = [-x for x in v]
        if not all(x > 0 for x in v):
            return None
        return BalanceCertificate(tuple(primitive_integer_vector(v)))

    point = _positive_point(rows, L)
    if point is None:
        return None
    seed = primitive_integer_vector(point)
    total = sum(seed)
    ones = [1] * L
    lower = [1] * L
    upper = [total - (L - 1)] * L
    best = ilp_min_exact(ones, rows, [0] * len(rows), lower, upper)
    if best.status != "optimal":  # pragma: no cover - seed is feasible
        raise RuntimeError("integer search lost a known feasible point")
    total = int(best.value)
    # lexicographic refinement at fixed total weight
    fixed: list[int] = []
    sum_row = [1] * L
    for k in range(L):
        A_eq = rows + [sum_row] + [[int(i == j) for i in range(L)] for j in range(k)]
        b_eq = [0] * len(rows) + [total] + fixed
        cost = [int(i == k) for i in range(L)]
        res = ilp_min_exact(cost, A_eq, b_eq, lower, [total - (L - 1)] * L)
        fixed.append(int(res.x[k]))
    return BalanceCertificate(tuple(fixed))


def roots_of_unity_sums(B: BMatrix, n: Sequence[int]) -> np.ndarray:
    """Per-site ``sum_k n_k exp(2 pi i B_lk / d)`` in floating point."""
    w = np.exp(2j * np.pi * B.entries / B.d)
    return w @ np.asarray(n, dtype=float)


def _is_prime(m: int) -> bool:
    return m >= 2 and all(m % p for p in range(2, math.isqrt(m) + 1))


def verify_roots_of_unity(B: BMatrix, n: Sequence[int]) -> bool:
    """Weighted d-th roots of unity vanish on every site (``d`` prime).

    Decided exactly from integer symbol counts; the complex sum is evaluated
    as well and must agree.
    """
    if not _is_prime(B.d):
        raise ValueError(f"roots-of-unity form needs prime d, got {B.d}")
    if len(n) != B.L:
        raise ValueError(f"weight vector has length {len(n)}, expected {B.L}")
    if any(int(x) <= 0 for x in n):
        raise ValueError("weights must be positive integers")
    counts = symbol_counts(B, n)
    exact = bool(np.all(counts == counts[:, :1]))
    numeric = bool(np.all(np.abs(roots_of_unity_sums(B, n)) <= 1e-10))
    if exact != numeric:
        raise ArithmeticError("complex evaluation disagrees with exact symbol counts")
    return exact


def is_irreducible(
    B: BMatrix, cert: BalanceCertificate, cap: int = DEFAULT_SUBSET_CAP
) -> bool:
    """No nonempty proper column subset is balanced on its own.

    For a balanced support this holds exactly when the balance system has a
    one-dimensional kernel: a second independent kernel vector can be
    combined with the positive certificate until a coordinate hits zero,
    giving a balanced proper subset, and conversely.
    """
    if B.L > cap:
        raise EnumerationCapError(f"L={B.L} exceeds the irreducibility cap {cap}")
    if not is_certificate(B, cert.n):
        raise ValueError("certificate does not balance this B-matrix")
    return kernel_dimension(B) == 1


def balanced_part(B: BMatrix) -> list[int]:
    """Columns (0-based) carried by some nonnegative balanced weighting."""
    rows = constraint_rows(B)
    L = B.L
    covered: set[int] = set()
    for k in range(L):
        if k in covered:
            continue
        cost = [-int(i == k) for i in range(L)]
        res = linprog_exact(cost, rows + [[1] * L], [0] * len(rows) + [1])
        if res.status == "optimal" and res.x[k] > 0:
            covered.update(i for i, x in enumerate(res.x) if x > 0)
    return sorted(covered)


@dataclass
class Decomposition:
    blocks: list[list[int]]
    remainder: list[int]


def decompose_balanced(B: BMatrix, cap: int = DEFAULT_SUBSET_CAP) -> Decomposition:
    """Greedily peel off smallest balanced column subsets (lexicographic ties)."""
    if B.L > cap:
        raise EnumerationCapError(f"L={B.L} exceeds the decomposition cap {cap}")
    remaining = list(range(B.L))
    blocks: list[list[int]] = []
    while remaining:
        sub = B.restrict(remaining)
        part = [remaining[i] for i in balanced_part(sub)]
        if not part:
            break
        block = _smallest_balanced_subset(B, part)
        blocks.append(block)
        remaining = [c for c in remaining if c not in set(block)]
    return Decomposition(blocks, remaining)


def _smallest_balanced_subset(B: BMatrix, cols: list[int]) -> list[int]:
    for size in range(B.d, len(cols) + 1):
        for subset in itertools.combinations(cols, size):
            if has_positive_solution(B.restrict(subset)):
                return list(subset)
    raise AssertionError("balanced part contains no balanced subset")  # pragma: no cover


PRODUCT = "product"
UNBALANCED = "unbalanced"
PARTLY_BALANCED = "partly_balanced"
BALANCED_REDUCIBLE = "balanced_reducible"
IRREDUCIBLY_BALANCED = "irreducibly_balanced"


@dataclass
class Classification:
    verdict: str
    certificate: BalanceCertificate | None = None
    balanced_support: list[int] = field(default_factory=list)
    blocks: list[list[int]] = field(default_factory=list)
    remainder: list[int] = field(default_factory=list)
    irreducible: bool | None = None

    def to_dict(self) -> dict:
        """JSON form with 1-based column indices."""
        out = {
            "verdict": self.verdict,
            "certificate": list(self.certificate.n) if self.certificate else None,
            "balanced_support": [k + 1 for k in self.balanced_support],
            "blocks": [[k + 1 for k in b] for b in self.blocks],
        }
        if self.verdict == BALANCED_REDUCIBLE:
            out["remainder"] = [k + 1 for k in self.remainder]
        if self.verdict == PARTLY_BALANCED:
            out["irreducible"] = self.irreducible
        return out


def classify(
    state: PureState, tol: float = DEFAULT_TOL, cap: int = DEFAULT_SUBSET_CAP
) -> Classification:
    """Verdict for the given product-basis representation of ``state``.

    The representation is taken as is; no search over local unitaries for
    a shorter form is attempted.
    """
    if state.q >= 2 and is_product(state, tol):
        return Classification(PRODUCT)
    B = b_matrix(state)
    cert = find_certificate(B)
    everything = list(range(B.L))
    if cert is not None:
        if is_irreducible(B, cert, cap):
            return Classification(
                IRREDUCIBLY_BALANCED, cert, everything, [everything], irreducible=True
            )
        dec = decompose_balanced(B, cap)
        return Classification(
            BALANCED_REDUCIBLE, cert, everything, dec.blocks, dec.remainder, irreducible=False
        )
    support = balanced_part(B)
    if support:
        sub = B.restrict(support)
        sub_cert = find_certificate(sub)
        irreducible = is_irreducible(sub, sub_cert, cap)
        return Classification(PARTLY_BALANCED, balanced_support=support, irreducible=irreducible)
    return Classification(UNBALANCED)


def construct_max_entangled(B: BMatrix, cert: BalanceCertificate) -> PureState:
    """Normalized ``sum_k sqrt(n_k) |B_k>``."""
    if not is_certificate(B, cert.n):
        raise ValueError("certificate does not balance this B-matrix")
    amps = np.sqrt(np.asarray(cert.n, dtype=float))
    amps = amps / np.linalg.norm(amps)
    return PureState(QuditSystem(B.q, B.d), B.entries.T.copy(), amps.astype(complex))
