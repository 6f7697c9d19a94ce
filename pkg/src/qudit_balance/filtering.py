"""Determinant-one local filters: amplitude equalization and the normal form."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .balance import BalanceCertificate, b_matrix, is_certificate
from .state import (
    PureState,
    QuditSystem,
    from_tensor,
    is_stochastic,
    reduced_density_matrix,
    site_density_matrix,
)

DET_TOL = 1e-10
EQUALIZE_TOL = 1e-8
EIGEN_FLOOR = 1e-14
MAX_SWEEPS = 10_000
CONVERGENCE_TOL = 1e-9
NULL_TOL = 1e-6


class EqualizationError(ValueError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class RankDeficientError(RuntimeError):
    """A single-site reduction is singular: the state lives in a smaller local space."""


class NormalFormIndeterminate(RuntimeError):
    """Sweep budget exhausted with neither convergence nor null-cone decay."""

    def __init__(self, message: str, norm_trajectory: list[float], iterations: int):
        super().__init__(message)
        self.norm_trajectory = norm_trajectory
        self.iterations = iterations


@dataclass(frozen=True, eq=False)
class LocalFilter:
    site: int  # 1-based
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("filter matrix must be square")
        det = np.linalg.det(m)
        if abs(det - 1) > DET_TOL:
            raise ValueError(f"filter determinant {det} is not 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def compose_filters(filters: list[LocalFilter], q: int, d: int) -> list[np.ndarray]:
    """Per-site product of filters in application order (later ones on the left)."""
    out = [np.eye(d, dtype=np.complex128) for _ in range(q)]
    for f in filters:
        if f.matrix.shape != (d, d):
            raise ValueError(f"filter on site {f.site} has shape {f.matrix.shape}, expected {(d, d)}")
        if not 1 <= f.site <= q:
            raise ValueError(f"filter site {f.site} out of range 1..{q}")
        out[f.site - 1] = f.matrix @ out[f.site - 1]
    for i, m in enumerate(out):
        if abs(np.linalg.det(m) - 1) > 1e-8:
            raise ArithmeticError(f"composed filter on site {i + 1} lost unit determinant")
    return out


def apply_site_matrix(tensor: np.ndarray, axis: int, M: np.ndarray) -> np.ndarray:
    out = np.tensordot(M, tensor, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


# ---------------------------------------------------------------- equalization


def _exponent_matrix(B: np.ndarray, d: int) -> np.ndarray:
    """Map from per-site exponents z_{s;i} (s < d-1) to the log-factor of each column.

    Symbol s on site i picks up ``z_{s;i} - z_{s-1;i}`` with ``z_{-1} = z_{d-1} = 0``,
    so each diagonal filter has unit determinant by telescoping.
    """
    q, L = B.shape
    M = np.zeros((L, q * (d - 1)))
    for k in range(L):
        for i in range(q):
            s = B[i, k]
            if s <= d - 2:
                M[k, i * (d - 1) + s] += 1
            if s >= 1:
                M[k, i * (d - 1) + s - 1] -= 1
    return M


def _diagonals(z: np.ndarray, q: int, d: int) -> np.ndarray:
    """Per-site diagonal exponents from the z variables, shape ``(q, d)``."""
    z = z.reshape(q, d - 1)
    padded = np.concatenate([np.zeros((q, 1)), z, np.zeros((q, 1))], axis=1)
    return padded[:, 1:] - padded[:, :-1]


@dataclass
class EqualizationResult:
    magnitude_filters: list[LocalFilter]
    phase_filters: list[LocalFilter]
    state: PureState
    residual: float
    offdiagonal_defect: float
    stochastic: bool

    @property
    def filters(self) -> list[LocalFilter]:
        return [
            LocalFilter(m.site, m.matrix @ p.matrix)
            for m, p in zip(self.magnitude_filters, self.phase_filters)
        ]


def equalize_amplitudes(
    state: PureState, cert: BalanceCertificate, tol: float = EQUALIZE_TOL
) -> EqualizationResult:
    """Diagonal unit-determinant filters bringing ``|a_k|`` proportional to ``sqrt(n_k)``.

    Works in log space: for every column ``k``
    ``sum_i x_{i,B_ik} - c = log sqrt(n_k) - log|a_k|`` with a free common
    offset ``c``, solved by least squares. Phases are removed by the same
    linear system applied to the arguments. Raises EqualizationError when
    the residual exceeds ``tol``.

    The result is renormalized. Off-diagonal elements of the reductions are
    not forced to vanish; their size is reported in ``offdiagonal_defect``.
    """
    B = b_matrix(state)
    if len(cert.n) != B.L or not is_certificate(B, cert.n):
        raise ValueError("certificate does not balance the state's support")
    q, d, L = state.q, state.d, state.length
    E = _exponent_matrix(B.entries, d)
    M = np.hstack([E, -np.ones((L, 1))])
    a = state.amplitudes
    target = 0.5 * np.log(np.asarray(cert.n, dtype=float))

    sol_mag, *_ = np.linalg.lstsq(M, target - np.log(np.abs(a)), rcond=None)
    res_mag = np.max(np.abs(M @ sol_mag - (target - np.log(np.abs(a)))))
    sol_ph, *_ = np.linalg.lstsq(M, -np.angle(a), rcond=None)
    res_ph = np.max(np.abs(M @ sol_ph - (-np.angle(a))))
    residual = float(max(res_mag, res_ph))
    if residual > tol:
        raise EqualizationError("amplitude equalization system is inconsistent", residual)

    x_mag = _diagonals(sol_mag[:-1], q, d)
    x_ph = _diagonals(sol_ph[:-1], q, d)
    mag_filters = [LocalFilter(i + 1, np.diag(np.exp(x_mag[i]))) for i in range(q)]
    ph_filters = [LocalFilter(i + 1, np.diag(np.exp(1j * x_ph[i]))) for i in range(q)]

    factor = np.exp(sum(x_mag[i, B.entries[i]] + 1j * x_ph[i, B.entries[i]] for i in range(q)))
    new = a * factor
    new = new * np.exp(-1j * np.angle(new[0])) / np.linalg.norm(new)
    result = PureState(state.system, state.kets, new)

    off = 0.0
    for site in range(1, q + 1):
        rho = reduced_density_matrix(result, site).entries
        off = max(off, float(np.max(np.abs(rho - np.diag(np.diag(rho))))))
    stochastic = is_stochastic(result, tol=1e-8)
    return EqualizationResult(mag_filters, ph_filters, result, residual, off, stochastic)


# ----------------------------------------------------------------- normal form

CONVERGED = "converged"
NULL_CONE = "null_cone"


@dataclass
class NormalFormOutcome:
    verdict: str
    iterations: int
    norm_trajectory: list[float]
    final_norm: float
    state: PureState | None = None
    filters: list[LocalFilter] = field(default_factory=list)

    def to_dict(self) -> dict:
        from .state import state_to_dict

        out = {
            "verdict": self.verdict,
            "iterations": self.iterations,
            "final_norm": self.final_norm,
            "norm_trajectory": self.norm_trajectory,
            "filters": [
                {
                    "site": f.site,
                    "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in f.matrix],
                }
                for f in self.filters
            ],
        }
        out["state"] = state_to_dict(self.state) if self.state is not None else None
        return out


def _stochastic_tensor(tensor: np.ndarray, tol: float) -> bool:
    d = tensor.shape[0]
    target = np.eye(d) / d
    for axis in range(tensor.ndim):
        rho = site_density_matrix(tensor, axis)
        if np.max(np.abs(rho / np.trace(rho).real - target)) > tol:
            return False
    return True


def _unit_det(m: np.ndarray) -> np.ndarray:
    d = m.shape[0]
    return m / np.linalg.det(m) ** (1 / d)


def normal_form(
    state: PureState,
    max_iters: int = MAX_SWEEPS,
    tol: float = CONVERGENCE_TOL,
    null_tol: float = NULL_TOL,
) -> NormalFormOutcome:
    """Iterated local scaling towards maximally mixed single-site reductions.

    Each sweep visits the sites in order and applies
    ``det(rho_i)^(1/2d) * rho_i^(-1/2)`` where ``rho_i`` is the (unnormalized)
    reduction of the current vector. The norm cannot increase. Returns a
    converged outcome once every normalized reduction is within ``tol`` of
    identity/d, or a null-cone outcome once the norm drops below
    ``null_tol``; raises NormalFormIndeterminate when ``max_iters`` sweeps
    are not enough.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    q, d = state.q, state.d
    psi = state.to_tensor()
    acc = [np.eye(d, dtype=np.complex128) for _ in range(q)]
    trajectory = [float(np.linalg.norm(psi))]

    def converged(sweeps: int) -> NormalFormOutcome:
        norm = float(np.linalg.norm(psi))
        final = from_tensor(psi / norm, cutoff=1e-13)
        filters = [LocalFilter(i + 1, _unit_det(m)) for i, m in enumerate(acc)]
        return NormalFormOutcome(CONVERGED, sweeps, trajectory, norm, final, filters)

    if _stochastic_tensor(psi, tol):
        return converged(0)
    for sweep in range(1, max_iters + 1):
        for axis in range(q):
            rho = site_density_matrix(psi, axis)
            w, V = np.linalg.eigh(rho)
            if w[0] <= EIGEN_FLOOR * w.sum():
                raise RankDeficientError(
                    f"reduction on site {axis + 1} is rank deficient (eigenvalues {w})"
                )
            scale = np.exp(np.mean(np.log(w)) / 2)
            A = scale * (V * w**-0.5) @ V.conj().T
            psi = apply_site_matrix(psi, axis, A)
            acc[axis] = A @ acc[axis]
        norm = float(np.linalg.norm(psi))
        trajectory.append(norm)
        if norm < null_tol:
            return NormalFormOutcome(NULL_CONE, sweep, trajectory, norm)
        if _stochastic_tensor(psi, tol):
            return converged(sweep)
    raise NormalFormIndeterminate(
        f"no verdict after {max_iters} sweeps (norm {trajectory[-1]:.3e})", trajectory, max_iters
    )
