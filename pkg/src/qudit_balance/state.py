"""Pure multi-qudit states in a sparse product-basis representation."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9


class StateFormatError(ValueError):
    """Raised for malformed state documents or invalid state data."""


@dataclass(frozen=True)
class QuditSystem:
    q: int
    d: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")


@dataclass(frozen=True, eq=False)
class PureState:
    """Superposition of distinct computational kets.

    ``kets`` is an ``(L, q)`` integer array, ``amplitudes`` a length-``L``
    complex array. Both are read-only.
    """

    system: QuditSystem
    kets: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        kets = np.array(self.kets, dtype=np.int64).reshape(-1, self.system.q)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if len(kets) != len(amps):
            raise StateFormatError("kets and amplitudes differ in length")
        if len(kets) == 0:
            raise StateFormatError("empty state")
        if kets.min() < 0 or kets.max() >= self.system.d:
            raise StateFormatError(f"ket label out of range 0..{self.system.d - 1}")
        if len({tuple(k) for k in kets}) != len(kets):
            raise StateFormatError("kets must be pairwise distinct")
        if np.any(amps == 0):
            raise StateFormatError("amplitudes must be nonzero")
        kets.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "kets", kets)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def q(self) -> int:
        return self.system.q

    @property
    def d(self) -> int:
        return self.system.d

    @property
    def length(self) -> int:
        return len(self.amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_tensor(self) -> np.ndarray:
        t = np.zeros((self.d,) * self.q, dtype=np.complex128)
        t[tuple(self.kets.T)] = self.amplitudes
        return t

    def sorted(self) -> "PureState":
        order = np.lexsort(self.kets.T[::-1])
        return PureState(self.system, self.kets[order], self.amplitudes[order])

    def __repr__(self) -> str:
        terms = " + ".join(
            f"({a:.4g})|{''.join(map(str, k))}>" for a, k in zip(self.amplitudes, self.kets)
        )
        return f"PureState(q={self.q}, d={self.d}: {terms})"


def from_terms(
    q: int, d: int, terms: Iterable[tuple[complex, Sequence[int]]]
) -> PureState:
    """Build a state, merging repeated kets and dropping zero amplitudes.

    Term order follows first occurrence of each ket.
    """
    system = QuditSystem(q, d)
    merged: dict[tuple[int, ...], complex] = {}
    for amp, ket in terms:
        ket = tuple(int(x) for x in ket)
        if len(ket) != q:
            raise StateFormatError(f"ket {list(ket)} has length {len(ket)}, expected q={q}")
        if any(x < 0 or x >= d for x in ket):
            raise StateFormatError(f"ket {list(ket)}: label out of range 0..{d - 1}")
        merged[ket] = merged.get(ket, 0) + complex(amp)
    kept = [(k, a) for k, a in merged.items() if a != 0]
    if not kept:
        raise StateFormatError("empty state after merging")
    return PureState(system, np.array([k for k, _ in kept]), np.array([a for _, a in kept]))


def from_tensor(tensor: np.ndarray, cutoff: float = 0.0) -> PureState:
    """Sparse state from a dense amplitude tensor; entries with ``|a| <= cutoff`` are dropped."""
    q = tensor.ndim
    d = tensor.shape[0]
    idx = np.argwhere(np.abs(tensor) > cutoff)
    if len(idx) == 0:
        raise StateFormatError("empty state")
    return PureState(QuditSystem(q, d), idx, tensor[tuple(idx.T)])


def parse_state(text: str) -> PureState:
    """Parse a JSON state document ``{"d", "q", "terms": [{"re", "im", "ket"}]}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise StateFormatError("state document must be a JSON object")
    for key in ("d", "q", "terms"):
        if key not in doc:
            raise StateFormatError(f"missing field '{key}'")
    d, q = doc["d"], doc["q"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 2:
        raise StateFormatError("field 'd' must be an integer >= 2")
    if not isinstance(q, int) or isinstance(q, bool) or q < 1:
        raise StateFormatError("field 'q' must be an integer >= 1")
    if not isinstance(doc["terms"], list):
        raise StateFormatError("field 'terms' must be a list")
    terms = []
    for i, t in enumerate(doc["terms"]):
        if not isinstance(t, dict) or "ket" not in t:
            raise StateFormatError(f"terms[{i}]: missing field 'ket'")
        ket = t["ket"]
        if not isinstance(ket, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in ket
        ):
            raise StateFormatError(f"terms[{i}].ket must be a list of integers")
        try:
            amp = complex(float(t.get("re", 0.0)), float(t.get("im", 0.0)))
        except (TypeError, ValueError) as exc:
            raise StateFormatError(f"terms[{i}]: re/im must be numbers") from exc
        terms.append((amp, ket))
    return from_terms(q, d, terms)


def state_to_dict(state: PureState) -> dict:
    s = state.sorted()
    return {
        "d": s.d,
        "q": s.q,
        "terms": [
            {"re": float(a.real), "im": float(a.imag), "ket": [int(x) for x in k]}
            for a, k in zip(s.amplitudes, s.kets)
        ],
    }


def dump_state(state: PureState) -> str:
    """Serialize with terms sorted lexicographically by ket."""
    return json.dumps(state_to_dict(state))


def normalize(state: PureState) -> PureState:
    n = state.norm()
    if n == 0:
        raise ValueError("cannot normalize a zero-norm state")
    return PureState(state.system, state.kets, state.amplitudes / n)


def _check_site(state: PureState, site: int) -> None:
    if not 1 <= site <= state.q:
        raise ValueError(f"site {site} out of range 1..{state.q}")


@dataclass(frozen=True, eq=False)
class LocalDensityMatrix:
    site: int
    entries: np.ndarray


def site_density_matrix(tensor: np.ndarray, axis: int) -> np.ndarray:
    """Unnormalized single-site reduction of a dense tensor (0-based axis)."""
    d = tensor.shape[axis]
    m = np.moveaxis(tensor, axis, 0).reshape(d, -1)
    return m @ m.conj().T


def reduced_density_matrix(state: PureState, site: int) -> LocalDensityMatrix:
    """Partial trace over every site except ``site`` (1-based)."""
    _check_site(state, site)
    rho = np.zeros((state.d, state.d), dtype=np.complex128)
    # group kets by their environment (all other sites)
    env: dict[tuple[int, ...], list[tuple[int, complex]]] = {}
    for ket, amp in zip(state.kets, state.amplitudes):
        key = tuple(np.delete(ket, site - 1))
        env.setdefault(key, []).append((int(ket[site - 1]), amp))
    for group in env.values():
        for s, a in group:
            for t, b in group:
                rho[s, t] += a * np.conj(b)
    return LocalDensityMatrix(site, rho)


def is_stochastic(state: PureState, tol: float = DEFAULT_TOL) -> bool:
    """All single-site reductions equal identity/d within ``tol`` (max norm)."""
    target = np.eye(state.d) / state.d
    for site in range(1, state.q + 1):
        rho = reduced_density_matrix(state, site).entries
        if np.max(np.abs(rho - target)) > tol:
            return False
    return True


def bipartitions(q: int):
    """Yield every unordered bipartition as the part containing site 0."""
    rest = list(range(1, q))
    for r in range(0, q - 1):
        for extra in itertools.combinations(rest, r):
            yield (0,) + extra


def is_product(state: PureState, tol: float = DEFAULT_TOL) -> bool:
    """Whether some bipartition matricization has numerical rank one."""
    if state.q < 2:
        raise ValueError("product test needs q >= 2")
    if state.q > 20:
        raise ValueError("product test is capped at q <= 20")
    tensor = state.to_tensor()
    q, d = state.q, state.d
    for part in bipartitions(q):
        other = [i for i in range(q) if i not in part]
        m = np.transpose(tensor, list(part) + other).reshape(d ** len(part), -1)
        sv = np.linalg.svd(m, compute_uv=False)
        if len(sv) < 2 or np.all(sv[1:] <= tol):
            return True
    return False


def apply_local_operator(state: PureState, site: int, M: np.ndarray) -> PureState:
    """Contract ``M`` into ``site``; merges kets, drops exact zeros, no renormalization."""
    _check_site(state, site)
    M = np.asarray(M, dtype=np.complex128)
    if M.shape != (state.d, state.d):
        raise ValueError(f"operator shape {M.shape} does not match d={state.d}")
    i = site - 1
    out: dict[tuple[int, ...], complex] = {}
    for ket, amp in zip(state.kets, state.amplitudes):
        s = int(ket[i])
        col = M[:, s]
        for t in np.nonzero(col)[0]:
            new = tuple(int(x) for x in ket)
            new = new[:i] + (int(t),) + new[i + 1 :]
            out[new] = out.get(new, 0) + col[t] * amp
    kept = [(k, a) for k, a in out.items() if a != 0]
    if not kept:
        raise ValueError("operator annihilated the state")
    return PureState(state.system, np.array([k for k, _ in kept]), np.array([a for _, a in kept]))
