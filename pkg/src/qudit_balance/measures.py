"""Polynomial SL-invariant measures: concurrence, two-qudit determinant, three-tangle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import PureState


class MeasureShapeError(ValueError):
    """The measure is not defined for this number of sites or local dimension."""


@dataclass(frozen=True)
class MeasureValue:
    name: str
    value: float
    raw: complex
    normalized: float | None = None

    def to_dict(self) -> dict:
        return {
            "measure": self.name,
            "value": self.value,
            "raw": [self.raw.real, self.raw.imag],
            "normalized": self.normalized,
        }


def _require(state: PureState, q: int, d: int | None = None) -> None:
    if state.q != q or (d is not None and state.d != d):
        want = f"q={q}" + (f", d={d}" if d is not None else "")
        raise MeasureShapeError(f"measure needs {want}, got q={state.q}, d={state.d}")


def concurrence2(state: PureState) -> MeasureValue:
    """Two-qubit concurrence ``|2 (psi00 psi11 - psi01 psi10)|``."""
    _require(state, 2, 2)
    p = state.to_tensor()
    raw = complex(2 * (p[0, 0] * p[1, 1] - p[0, 1] * p[1, 0]))
    return MeasureValue("concurrence", abs(raw), raw)


def two_qudit_det(state: PureState) -> MeasureValue:
    """Determinant of the ``d x d`` amplitude matrix.

    ``value`` is ``|det|``; ``normalized`` is ``d |det|^(2/d)``, which is 1 on
    the uniform superposition of ``|ii>``.
    """
    _require(state, 2)
    raw = complex(np.linalg.det(state.to_tensor()))
    d = state.d
    return MeasureValue("two_qudit_det", abs(raw), raw, d * abs(raw) ** (2 / d))


def tangle_terms(psi: np.ndarray) -> tuple[complex, complex, complex]:
    """The three quartic sums entering the three-tangle, for a (2,2,2) tensor."""
    p = lambda s: psi[int(s[0]), int(s[1]), int(s[2])]  # noqa: E731
    d1 = (
        p("000") ** 2 * p("111") ** 2
        + p("001") ** 2 * p("110") ** 2
        + p("010") ** 2 * p("101") ** 2
        + p("100") ** 2 * p("011") ** 2
    )
    d2 = (
        p("000") * p("111") * p("011") * p("100")
        + p("000") * p("111") * p("101") * p("010")
        + p("000") * p("111") * p("110") * p("001")
        + p("011") * p("100") * p("101") * p("010")
        + p("011") * p("100") * p("110") * p("001")
        + p("101") * p("010") * p("110") * p("001")
    )
    d3 = p("000") * p("110") * p("101") * p("011") + p("111") * p("001") * p("010") * p("100")
    return complex(d1), complex(d2), complex(d3)


def three_tangle(state: PureState) -> MeasureValue:
    """``4 |d1 - 2 d2 + 4 d3|``; ``raw`` holds ``d1 - 2 d2 + 4 d3``."""
    _require(state, 3, 2)
    d1, d2, d3 = tangle_terms(state.to_tensor())
    raw = d1 - 2 * d2 + 4 * d3
    return MeasureValue("tau3", 4 * abs(raw), raw)


def applicable_measures(state: PureState) -> list[MeasureValue]:
    out = []
    if state.q == 2 and state.d == 2:
        out.append(concurrence2(state))
    if state.q == 2:
        out.append(two_qudit_det(state))
    if state.q == 3 and state.d == 2:
        out.append(three_tangle(state))
    return out
