"""Command-line front end.

Exit codes: 0 success (any verdict), 2 I/O or format error, 3 normal form
indeterminate, 4 no applicable measure, 5 B-matrix without a balance
certificate, 6 enumeration caps exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from .balance import (
    DEFAULT_SUBSET_CAP,
    BalanceCertificate,
    BMatrix,
    EnumerationCapError,
    classify,
    construct_max_entangled,
    find_certificate,
    is_certificate,
)
from .catalog import dump_catalog, enumerate_irreducible
from .filtering import CONVERGENCE_TOL, MAX_SWEEPS, NULL_TOL, NormalFormIndeterminate, RankDeficientError, normal_form
from .measures import applicable_measures
from .state import DEFAULT_TOL, StateFormatError, parse_state, state_to_dict
from .theorems import verify

EXIT_OK = 0
EXIT_FORMAT = 2
EXIT_INDETERMINATE = 3
EXIT_NO_MEASURE = 4
EXIT_UNBALANCED = 5
EXIT_CAPS = 6


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    tol: float = DEFAULT_TOL
    convergence_tol: float = CONVERGENCE_TOL
    null_tol: float = NULL_TOL
    max_sweeps: int = MAX_SWEEPS
    cap_L: int = DEFAULT_SUBSET_CAP
    output_format: str = "json"
    seed: int = 0

    def __post_init__(self):
        for name in ("tol", "convergence_tol", "null_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if not 1 <= self.cap_L <= 30:
            raise ValueError("cap_L must lie in 1..30")
        if self.output_format not in ("json", "human"):
            raise ValueError("format must be 'json' or 'human'")


# ------------------------------------------------------------------ rendering


def render_human(payload, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(payload, dict):
        lines = []
        for key, value in payload.items():
            if isinstance(value, (dict, list)) and value and not _flat(value):
                lines.append(f"{pad}{key}:")
                lines.append(render_human(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {json.dumps(value)}")
        return "\n".join(lines)
    if isinstance(payload, list):
        return "\n".join(
            f"{pad}-\n{render_human(item, indent + 1)}" if isinstance(item, (dict, list)) and not _flat(item)
            else f"{pad}- {json.dumps(item)}"
            for item in payload
        )
    return f"{pad}{json.dumps(payload)}"


def _flat(value) -> bool:
    """Lists of scalars (or of scalar lists) print on one line."""
    if isinstance(value, dict):
        return False
    return all(not isinstance(v, (dict, list)) or (isinstance(v, list) and _flat(v)) for v in value)


def emit(payload, config: RunConfig) -> None:
    if config.output_format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(render_human(payload))


# ------------------------------------------------------------------ commands


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_FORMAT) from exc


def _load_state(path: str):
    try:
        return parse_state(_read(path))
    except StateFormatError as exc:
        raise CliError(f"{path}: {exc}", EXIT_FORMAT) from exc


def cmd_classify(path: str, config: RunConfig) -> dict:
    state = _load_state(path)
    try:
        return classify(state, tol=config.tol, cap=config.cap_L).to_dict()
    except EnumerationCapError as exc:
        raise CliError(str(exc), EXIT_CAPS) from exc


def cmd_normal_form(path: str, config: RunConfig) -> dict:
    state = _load_state(path)
    try:
        out = normal_form(state, config.max_sweeps, config.convergence_tol, config.null_tol)
    except NormalFormIndeterminate as exc:
        raise CliError(f"indeterminate: {exc}", EXIT_INDETERMINATE) from exc
    except RankDeficientError as exc:
        raise CliError(f"indeterminate: {exc}", EXIT_INDETERMINATE) from exc
    return out.to_dict()


def cmd_measures(path: str, config: RunConfig) -> dict:
    state = _load_state(path)
    values = applicable_measures(state)
    if not values:
        raise CliError(f"no measure implemented for q={state.q}, d={state.d}", EXIT_NO_MEASURE)
    return {"measures": [v.to_dict() for v in values]}


def _b_from_document(text: str, path: str) -> tuple[BMatrix, BalanceCertificate | None]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON: {exc}", EXIT_FORMAT) from exc
    if not isinstance(doc, dict) or "B" not in doc:
        raise CliError(f"{path}: missing field 'B'", EXIT_FORMAT)
    rows = doc["B"]
    if not isinstance(rows, list) or not rows or not all(
        isinstance(r, list) and all(isinstance(x, int) and not isinstance(x, bool) for x in r) for r in rows
    ):
        raise CliError(f"{path}: field 'B' must be a nonempty list of integer rows", EXIT_FORMAT)
    if len({len(r) for r in rows}) != 1:
        raise CliError(f"{path}: rows of 'B' have different lengths", EXIT_FORMAT)
    d = doc.get("d", max(max(r) for r in rows) + 1)
    if not isinstance(d, int) or isinstance(d, bool) or d < 2:
        d_err = "field 'd' must be an integer >= 2" if "d" in doc else "B needs at least two symbols or field 'd'"
        raise CliError(f"{path}: {d_err}", EXIT_FORMAT)
    try:
        B = BMatrix(np.array(rows), d)
    except ValueError as exc:
        raise CliError(f"{path}: field 'B': {exc}", EXIT_FORMAT) from exc
    cert = None
    if doc.get("n") is not None:
        try:
            cert = BalanceCertificate(tuple(doc["n"]))
        except (TypeError, ValueError) as exc:
            raise CliError(f"{path}: field 'n': {exc}", EXIT_FORMAT) from exc
        if len(cert.n) != B.L or not is_certificate(B, cert.n):
            raise CliError(f"{path}: field 'n' does not balance B", EXIT_FORMAT)
    return B, cert


def cmd_generate(ghz: tuple[int, int] | None, from_b: str | None, config: RunConfig) -> dict:
    if ghz is not None:
        q, d = ghz
        if q < 1 or d < 2:
            raise CliError("--ghz needs q >= 1 and d >= 2", EXIT_FORMAT)
        B = BMatrix(np.tile(np.arange(d), (q, 1)), d)
        cert = BalanceCertificate((1,) * d)
    else:
        B, cert = _b_from_document(_read(from_b), from_b)
        if cert is None:
            cert = find_certificate(B)
        if cert is None:
            raise CliError("B-matrix admits no balance certificate", EXIT_UNBALANCED)
    return state_to_dict(construct_max_entangled(B, cert))


def cmd_enumerate(q: int, d: int, L_max: int, config: RunConfig) -> str:
    if L_max > config.cap_L:
        raise CliError(f"L_max={L_max} exceeds --cap-L={config.cap_L}", EXIT_CAPS)
    try:
        return dump_catalog(enumerate_irreducible(q, d, L_max))
    except (ValueError, EnumerationCapError) as exc:
        raise CliError(str(exc), EXIT_CAPS) from exc


def cmd_verify(theorem: int, q: int, d: int, config: RunConfig) -> dict:
    if theorem not in range(1, 6):
        raise CliError(f"unknown theorem {theorem}; expected 1..5", EXIT_FORMAT)
    rng = np.random.default_rng(config.seed)
    try:
        report = verify(
            theorem, q, d, rng,
            max_iters=config.max_sweeps, tol=config.convergence_tol, null_tol=config.null_tol,
        )
    except (ValueError, EnumerationCapError) as exc:
        raise CliError(str(exc), EXIT_CAPS) from exc
    return {"q": q, "d": d, **report.to_dict()}


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qudit-balance", description="Balance classification of multi-qudit states.")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="stochasticity/rank tolerance")
    p.add_argument("--convergence-tol", type=float, default=CONVERGENCE_TOL)
    p.add_argument("--null-tol", type=float, default=NULL_TOL)
    p.add_argument("--max-sweeps", type=int, default=MAX_SWEEPS)
    p.add_argument("--format", choices=("human", "json"), default="json", dest="output_format")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap-L", type=int, default=DEFAULT_SUBSET_CAP, dest="cap_L",
                   help="cap on support length for exhaustive searches")
    sub = p.add_subparsers(dest="command", required=True)

    for name in ("classify", "normal-form", "measures"):
        sp = sub.add_parser(name)
        sp.add_argument("path")

    gen = sub.add_parser("generate")
    src = gen.add_mutually_exclusive_group(required=True)
    src.add_argument("--ghz", nargs=2, type=int, metavar=("Q", "D"))
    src.add_argument("--from-b", metavar="PATH")
    gen.add_argument("-o", "--output", help="write the state document here instead of stdout")

    en = sub.add_parser("enumerate")
    for name in ("q", "d", "L_max"):
        en.add_argument(name, type=int)

    ver = sub.add_parser("verify")
    for name in ("theorem", "q", "d"):
        ver.add_argument(name, type=int)
    return p


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(
            args.tol, args.convergence_tol, args.null_tol, args.max_sweeps,
            args.cap_L, args.output_format, args.seed,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    try:
        if args.command == "classify":
            emit(cmd_classify(args.path, config), config)
        elif args.command == "normal-form":
            emit(cmd_normal_form(args.path, config), config)
        elif args.command == "measures":
            emit(cmd_measures(args.path, config), config)
        elif args.command == "generate":
            doc = json.dumps(cmd_generate(args.ghz, args.from_b, config))
            if args.output:
                try:
                    with open(args.output, "w", encoding="utf-8") as fh:
                        fh.write(doc + "\n")
                except OSError as exc:
                    raise CliError(f"cannot write {args.output}: {exc.strerror}", EXIT_FORMAT) from exc
            else:
                print(doc)
        elif args.command == "enumerate":
            sys.stdout.write(cmd_enumerate(args.q, args.d, args.L_max, config))
        elif args.command == "verify":
            emit(cmd_verify(args.theorem, args.q, args.d, config), config)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
