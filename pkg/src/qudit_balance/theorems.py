"""Randomized and exhaustive checks of the structural results at desk scale.

Each ``verify_theoremN`` returns a TheoremReport listing every failing case
verbatim. Randomness comes only from the ``numpy.random.Generator`` passed
in, so reports are reproducible for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .balance import (
    IRREDUCIBLY_BALANCED,
    BMatrix,
    b_matrix,
    balanced_part,
    classify,
    find_certificate,
    has_positive_solution,
    kernel_dimension,
)
from .catalog import CatalogEntry, enumerate_b_matrices, enumerate_irreducible, length_bound, verify_length_bound
from .filtering import (
    CONVERGED,
    EqualizationError,
    NormalFormIndeterminate,
    RankDeficientError,
    compose_filters,
    equalize_amplitudes,
    normal_form,
)
from .state import PureState, QuditSystem, from_tensor, normalize, reduced_density_matrix, state_to_dict

DESK_CONFIGS = ((2, 2), (3, 2), (4, 2), (2, 3), (3, 3), (2, 4))


@dataclass
class TheoremReport:
    theorem: int
    cases: int = 0
    failures: list[dict] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "passed": self.passed,
            "cases": self.cases,
            "details": self.details,
            "failures": self.failures,
        }


def random_amplitudes(rng: np.random.Generator, L: int) -> np.ndarray:
    """Log-magnitudes uniform in [-1, 1], phases uniform."""
    return np.exp(rng.uniform(-1, 1, L) + 1j * rng.uniform(0, 2 * np.pi, L))


def random_local_permutation(rng: np.random.Generator, B: BMatrix) -> BMatrix:
    """Shuffle sites, columns and per-site symbol labels."""
    e = B.entries[rng.permutation(B.q)][:, rng.permutation(B.L)]
    relabeled = np.stack([rng.permutation(B.d)[row] for row in e])
    return BMatrix(relabeled, B.d)


def state_on_support(B: BMatrix, amplitudes: np.ndarray) -> PureState:
    return normalize(PureState(QuditSystem(B.q, B.d), B.entries.T.copy(), amplitudes))


@dataclass
class SampleCase:
    entry: CatalogEntry
    B: BMatrix
    state: PureState


def catalog_sample(
    rng: np.random.Generator, configs=DESK_CONFIGS, per_entry: int = 8
) -> list[SampleCase]:
    """Random-amplitude states on every irreducible catalog support of ``configs``."""
    cases = []
    for q, d in configs:
        for entry in enumerate_irreducible(q, d, length_bound(q, d)):
            for _ in range(per_entry):
                B = random_local_permutation(rng, entry.B)
                cases.append(SampleCase(entry, B, state_on_support(B, random_amplitudes(rng, B.L))))
    return cases


def _case_info(case: SampleCase) -> dict:
    return {"B": case.B.tolist(), "catalog_B": case.entry.B.tolist(), "n": list(case.entry.certificate.n)}


# ------------------------------------------------------------------ product states


def random_product_state(rng: np.random.Generator, q: int, d: int) -> PureState:
    """Tensor product of random factors with random sparse supports."""
    order = rng.permutation(q)
    n_blocks = int(rng.integers(2, q + 1))
    cuts = np.sort(rng.choice(np.arange(1, q), size=n_blocks - 1, replace=False))
    blocks = np.split(order, cuts)
    tensor = np.ones((), dtype=complex)
    sites: list[int] = []
    for block in blocks:
        size = d ** len(block)
        support = rng.choice(size, size=int(rng.integers(1, size + 1)), replace=False)
        factor = np.zeros(size, dtype=complex)
        factor[support] = random_amplitudes(rng, len(support))
        tensor = np.multiply.outer(tensor, factor.reshape((d,) * len(block)))
        sites.extend(int(s) for s in block)
    tensor = np.transpose(tensor, np.argsort(sites))
    return normalize(from_tensor(tensor))


def verify_theorem1(
    rng: np.random.Generator, n_cases: int = 500, q_range=(2, 4), d_range=(2, 3)
) -> TheoremReport:
    """Product states are never irreducibly balanced.

    Checks the classifier verdict and, independently of the product test,
    that no balanced product support has a one-dimensional balance kernel.
    """
    report = TheoremReport(1)
    balanced_supports = 0
    for _ in range(n_cases):
        q = int(rng.integers(q_range[0], q_range[1] + 1))
        d = int(rng.integers(d_range[0], d_range[1] + 1))
        state = random_product_state(rng, q, d)
        report.cases += 1
        verdict = classify(state).verdict
        B = b_matrix(state)
        balanced = has_positive_solution(B)
        balanced_supports += balanced
        support_irreducible = balanced and kernel_dimension(B) == 1
        if verdict == IRREDUCIBLY_BALANCED or support_irreducible:
            report.failures.append({"state": state_to_dict(state), "verdict": verdict})
    report.details = {"balanced_supports": balanced_supports}
    return report


# ------------------------------------------------------------------ stochastic supports


def verify_theorem2(
    rng: np.random.Generator, configs=DESK_CONFIGS, per_entry: int = 8, **nf_kwargs
) -> TheoremReport:
    """Stochastic states have balanced supports.

    Stochastic states are produced by running the normal form on random
    catalog states; only converged runs count as cases.
    """
    report = TheoremReport(2)
    skipped = 0
    for case in catalog_sample(rng, configs, per_entry):
        try:
            out = normal_form(case.state, **nf_kwargs)
        except (NormalFormIndeterminate, RankDeficientError):
            skipped += 1
            continue
        if out.verdict != CONVERGED:
            skipped += 1
            continue
        report.cases += 1
        if find_certificate(b_matrix(out.state)) is None:
            report.failures.append({**_case_info(case), "stochastic_state": state_to_dict(out.state)})
    report.details = {"not_converged": skipped}
    return report


# ------------------------------------------------------------------ length bound


def verify_theorem3(q: int, d: int) -> TheoremReport:
    lb = verify_length_bound(q, d)
    report = TheoremReport(3, cases=sum(c["classes"] for c in lb.lengths.values()))
    report.failures = [e.to_dict() for e in lb.counterexamples]
    report.details = {"bound": lb.bound, "lengths": {str(k): v for k, v in lb.lengths.items()}}
    return report


# ------------------------------------------------------------------ equalization


@dataclass
class EqualizationCheck:
    residual: float
    diagonal_defect: float
    det_defect: float
    offdiagonal_defect: float


def check_equalization(case: SampleCase) -> EqualizationCheck:
    cert = find_certificate(case.B)
    res = equalize_amplitudes(case.state, cert)
    d = case.state.d
    diag = max(
        float(np.max(np.abs(np.diag(reduced_density_matrix(res.state, s).entries) - 1 / d)))
        for s in range(1, case.state.q + 1)
    )
    composed = compose_filters(res.filters, case.state.q, d)
    det = max(abs(np.linalg.det(m) - 1) for m in composed)
    return EqualizationCheck(res.residual, diag, float(det), res.offdiagonal_defect)


def verify_theorem4(
    rng: np.random.Generator,
    configs=DESK_CONFIGS,
    per_entry: int = 8,
    tol: float = 1e-8,
    sample: list[SampleCase] | None = None,
) -> TheoremReport:
    """Irreducibly balanced states within the length bound can be equalized."""
    report = TheoremReport(4)
    worst = {"residual": 0.0, "diagonal": 0.0, "det": 0.0}
    offdiag_flagged = 0
    if sample is None:
        sample = catalog_sample(rng, configs, per_entry)
    for case in sample:
        report.cases += 1
        try:
            chk = check_equalization(case)
        except EqualizationError as exc:
            report.failures.append({**_case_info(case), "error": str(exc)})
            continue
        worst["residual"] = max(worst["residual"], chk.residual)
        worst["diagonal"] = max(worst["diagonal"], chk.diagonal_defect)
        worst["det"] = max(worst["det"], chk.det_defect)
        offdiag_flagged += chk.offdiagonal_defect > tol
        if max(chk.residual, chk.diagonal_defect, chk.det_defect) > tol:
            report.failures.append({**_case_info(case), "check": chk.__dict__})
    report.details = {"worst": worst, "offdiagonal_flagged": offdiag_flagged}
    return report


# ------------------------------------------------------------------ normal form


def unbalanced_sample(
    rng: np.random.Generator, q: int, d: int, L_max: int, per_class: int = 2
) -> list[PureState]:
    """Random states on canonical supports with empty balanced part and full local rank."""
    states = []
    for L in range(d, min(L_max, d**q) + 1):
        for B in enumerate_b_matrices(q, d, L):
            if any(len(set(row)) < d for row in B.tolist()):
                continue
            if balanced_part(B):
                continue
            for _ in range(per_class):
                states.append(state_on_support(B, random_amplitudes(rng, L)))
    return states


def verify_theorem5(
    rng: np.random.Generator,
    configs=DESK_CONFIGS,
    per_entry: int = 8,
    unbalanced_configs=((3, 2), (4, 2), (2, 3)),
    sample: list[SampleCase] | None = None,
    **nf_kwargs,
) -> TheoremReport:
    """Balanced states reach a stochastic normal form; unbalanced ones never do.

    Balanced cases fail on anything other than a converged verdict (an
    exhausted sweep budget included). Unbalanced cases fail only on a
    converged verdict.
    """
    report = TheoremReport(5)
    tally = {"converged": 0, "null_cone": 0, "indeterminate": 0, "rank_deficient": 0, "max_sweeps_used": 0,
             "non_monotone": 0}
    monotone_slack = 1e-12
    if sample is None:
        sample = catalog_sample(rng, configs, per_entry)
    for case in sample:
        report.cases += 1
        try:
            out = normal_form(case.state, **nf_kwargs)
        except NormalFormIndeterminate as exc:
            tally["indeterminate"] += 1
            tally["non_monotone"] += bool(np.any(np.diff(exc.norm_trajectory) > monotone_slack))
            report.failures.append(
                {**_case_info(case), "outcome": "indeterminate", "final_norm": exc.norm_trajectory[-1]}
            )
            continue
        except RankDeficientError:
            tally["rank_deficient"] += 1
            report.failures.append({**_case_info(case), "outcome": "rank_deficient"})
            continue
        tally[out.verdict] += 1
        rising = bool(np.any(np.diff(out.norm_trajectory) > monotone_slack))
        tally["non_monotone"] += rising
        if out.verdict != CONVERGED or rising:
            report.failures.append({**_case_info(case), "outcome": out.verdict})
            continue
        tally["max_sweeps_used"] = max(tally["max_sweeps_used"], out.iterations)
    unbalanced = {"null_cone": 0, "indeterminate": 0, "rank_deficient": 0, "converged": 0}
    for q, d in unbalanced_configs:
        for state in unbalanced_sample(rng, q, d, length_bound(q, d) + 1):
            report.cases += 1
            try:
                out = normal_form(state, **nf_kwargs)
                unbalanced[out.verdict] += 1
                if out.verdict == CONVERGED:
                    report.failures.append({"unbalanced_state": state_to_dict(state), "outcome": out.verdict})
            except NormalFormIndeterminate:
                unbalanced["indeterminate"] += 1
            except RankDeficientError:
                unbalanced["rank_deficient"] += 1
    report.details = {"balanced": tally, "unbalanced": unbalanced}
    return report


def verify(theorem: int, q: int, d: int, rng: np.random.Generator, **nf_kwargs) -> TheoremReport:
    """Run one theorem check restricted to a single ``(q, d)``."""
    if theorem == 1:
        return verify_theorem1(rng, n_cases=200, q_range=(q, q), d_range=(d, d))
    if theorem == 2:
        return verify_theorem2(rng, configs=((q, d),), **nf_kwargs)
    if theorem == 3:
        return verify_theorem3(q, d)
    if theorem == 4:
        return verify_theorem4(rng, configs=((q, d),))
    if theorem == 5:
        return verify_theorem5(rng, configs=((q, d),), unbalanced_configs=((q, d),), **nf_kwargs)
    raise ValueError(f"unknown theorem {theorem}; expected 1..5")
