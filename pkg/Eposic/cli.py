#!/usr/bin/env python3
"""
Command-line interface for the Eposic library.

Payloads (JSON or CSV) go to stdout; ``[OK]`` / ``[ERROR]`` / ``[WARN]``
status lines go to stderr. Exit codes: 0 success, 1 verification failure,
2 invalid flags.

Usage examples:
  python -m Eposic.cli kraus --m 1 --n 1 --h 1
  python -m Eposic.cli choi --m 1 --n 2 --h 1 --exact
  python -m Eposic.cli alpha --m 2 --n 1 --h 1 --via operators --format csv
  python -m Eposic.cli epsilon --m 3 --n 2 --h 1
  python -m Eposic.cli enumerate --r 1 --m 1
  python -m Eposic.cli verify --m 2 --n 2 --h 1
  python -m Eposic.cli decompose --choi choi.json
  python -m Eposic.cli classify --choi choi.json
  python -m Eposic.cli positivity --m 1 --alpha 1/3
  python -m Eposic.cli selftest --max-degree 3
"""

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, TextIO

from Eposic import config
from Eposic.channels import EposicChannel, Superoperator, enumerate_ec, verify_eposic
from Eposic.clebsch import CGIndex, alpha_closed, alpha_via_operators, epsilon_table
from Eposic.covariant_analysis import analyze_family, classify, decompose, positivity_threshold
from Eposic.errors import EposicError, ParseError, VerificationFailure
from Eposic.exact_scalar import render
from Eposic.selftest import run_selftest
from Eposic.serialization import (
    envelope,
    epsilon_table_to_csv,
    matrix_from_json,
    matrix_to_csv,
    matrix_to_json,
    scalar_to_json,
    vector_to_json,
)

COMMANDS = (
    "kraus", "choi", "alpha", "epsilon", "enumerate", "verify",
    "decompose", "classify", "positivity", "selftest",
)


# ----------------------------------------------------------------------
# Argument types
# ----------------------------------------------------------------------
def parse_rational(arg: str) -> Fraction:
    """Parse ``P/Q`` (or an integer) into a Fraction for ``--alpha``."""
    try:
        return Fraction(arg.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"Invalid rational {arg!r}: {e}")


def parse_natural(arg: str) -> int:
    try:
        value = int(arg)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected a natural number, got {arg!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"Expected a natural number, got {value}")
    return value


def parse_float_digits(arg: str) -> int:
    value = parse_natural(arg)
    if not 1 <= value <= config.MAX_FLOAT_DIGITS:
        raise argparse.ArgumentTypeError(f"--float-digits must be in 1..{config.MAX_FLOAT_DIGITS}")
    return value


# ----------------------------------------------------------------------
# Configuration
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CommandConfig:
    command: str
    m: Optional[int] = None
    n: Optional[int] = None
    h: Optional[int] = None
    r: Optional[int] = None
    input_path: Optional[str] = None
    output_format: str = "json"
    exact: bool = False
    float_digits: int = config.DEFAULT_FLOAT_DIGITS
    alpha: Optional[Fraction] = None
    via: str = "closed"
    max_degree: int = config.DEFAULT_SELFTEST_DEGREE
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command: {self.command}")
        if not 1 <= self.float_digits <= config.MAX_FLOAT_DIGITS:
            raise ValueError(f"float_digits must be in 1..{config.MAX_FLOAT_DIGITS}")

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "CommandConfig":
        fields = {name: getattr(args, name) for name in cls.__dataclass_fields__ if hasattr(args, name)}
        if getattr(args, "choi", None):
            fields["input_path"] = args.choi
        if getattr(args, "format", None):
            fields["output_format"] = args.format
        return cls(**fields)

    def index(self) -> CGIndex:
        return CGIndex(self.m, self.n, self.h)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Exact SU(2) Clebsch–Gordan isometries and EPOSIC channels")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_index(p):
        p.add_argument("--m", type=parse_natural, required=True)
        p.add_argument("--n", type=parse_natural, required=True)
        p.add_argument("--h", type=parse_natural, required=True)

    def add_output(p, formats=("json", "csv"), default="json"):
        p.add_argument("--format", choices=formats, default=default, help="Output format")
        p.add_argument("--exact", action="store_true", help="Emit exact strings only")
        p.add_argument(
            "--float-digits",
            dest="float_digits",
            type=parse_float_digits,
            default=config.DEFAULT_FLOAT_DIGITS,
            help="Significant digits of float renderings (<= 17)",
        )

    p_kraus = subparsers.add_parser("kraus", help="Kraus operators of Phi_{m,n,h}")
    add_index(p_kraus)
    add_output(p_kraus)

    p_choi = subparsers.add_parser("choi", help="Choi matrix of Phi_{m,n,h}")
    add_index(p_choi)
    add_output(p_choi)

    p_alpha = subparsers.add_parser("alpha", help="The isometry alpha_{m,n,h}")
    add_index(p_alpha)
    add_output(p_alpha)
    p_alpha.add_argument("--via", choices=("closed", "operators"), default="closed")

    p_eps = subparsers.add_parser("epsilon", help="Epsilon table of (m,n,h)")
    add_index(p_eps)
    add_output(p_eps, default="csv")

    p_enum = subparsers.add_parser("enumerate", help="Extreme points EC(r,m)")
    p_enum.add_argument("--r", type=parse_natural, required=True)
    p_enum.add_argument("--m", type=parse_natural, required=True)

    p_verify = subparsers.add_parser("verify", help="Run every per-channel identity")
    add_index(p_verify)

    for name, text in (("decompose", "Decompose a map over EC(r,m)"), ("classify", "Classify a map")):
        p = subparsers.add_parser(name, help=text)
        p.add_argument("--choi", required=True, help="JSON file holding a Choi matrix")
        add_output(p, formats=("json",))

    p_pos = subparsers.add_parser("positivity", help="Analyse Phi_{m,m+1,m} - alpha Phi_{m,m-1,m-1}")
    p_pos.add_argument("--m", type=parse_natural, required=True)
    p_pos.add_argument("--alpha", type=parse_rational, required=True, help="Rational P/Q")
    add_output(p_pos, formats=("json",))

    p_self = subparsers.add_parser("selftest", help="Run the invariant suite")
    p_self.add_argument("--max-degree", dest="max_degree", type=parse_natural, default=config.DEFAULT_SELFTEST_DEGREE)
    p_self.add_argument("--workers", type=parse_natural, default=1)

    return parser


def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    return _build_parser().parse_args(argv)


# ----------------------------------------------------------------------
# Commands
# ----------------------------------------------------------------------
def _index_json(index: CGIndex) -> Dict[str, int]:
    return {"m": index.m, "n": index.n, "h": index.h, "r": index.r}


def _matrix(cfg: CommandConfig, A) -> Dict[str, Any]:
    return matrix_to_json(A, cfg.float_digits, cfg.exact)


def _scalar(cfg: CommandConfig, x) -> Dict[str, Any]:
    return scalar_to_json(x, cfg.float_digits, cfg.exact)


def _cmd_kraus(cfg: CommandConfig):
    ch = EposicChannel(cfg.index())
    ops = ch.kraus().operators
    if cfg.output_format == "csv":
        lines = ["j,row,col,exact" if cfg.exact else "j,row,col,exact,re,im"]
        for j, T in enumerate(ops):
            body = matrix_to_csv(T, cfg.float_digits, cfg.exact).splitlines()[1:]
            lines.extend(f"{j},{line}" for line in body)
        return "\n".join(lines) + "\n"
    return {"index": _index_json(ch.index), "operators": [_matrix(cfg, T) for T in ops]}


def _cmd_choi(cfg: CommandConfig):
    ch = EposicChannel(cfg.index())
    C = ch.choi()
    if cfg.output_format == "csv":
        return matrix_to_csv(C, cfg.float_digits, cfg.exact)
    return {"index": _index_json(ch.index), "trace": render(C.trace()), "matrix": _matrix(cfg, C)}


def _cmd_alpha(cfg: CommandConfig):
    index = cfg.index()
    A = alpha_via_operators(index) if cfg.via == "operators" else alpha_closed(index)
    if cfg.output_format == "csv":
        return matrix_to_csv(A, cfg.float_digits, cfg.exact)
    return {"index": _index_json(index), "via": cfg.via, "matrix": _matrix(cfg, A)}


def _cmd_epsilon(cfg: CommandConfig):
    table = epsilon_table(cfg.index())
    if cfg.output_format == "csv":
        return epsilon_table_to_csv(table, cfg.float_digits, cfg.exact)
    return {
        "index": _index_json(table.index),
        "values": [{"i": i, "j": j, "value": _scalar(cfg, v)} for (i, j), v in table.items()],
    }


def _cmd_enumerate(cfg: CommandConfig):
    return {"r": cfg.r, "m": cfg.m, "channels": [_index_json(ch.index) for ch in enumerate_ec(cfg.r, cfg.m)]}


def _cmd_verify(cfg: CommandConfig):
    ch = EposicChannel(cfg.index())
    checks = verify_eposic(ch)
    data = {"index": _index_json(ch.index), "checks": checks, "passed": all(checks.values())}
    if not data["passed"]:
        failed = ", ".join(name for name, ok in sorted(checks.items()) if not ok)
        raise _CommandFailed(data, f"verification failed for {ch!r}: {failed}")
    return data


def _load_superoperator(path: str) -> Superoperator:
    try:
        with open(path, "r", encoding="utf-8") as f:
            obj = json.load(f)
    except json.JSONDecodeError as exc:
        raise ParseError(f"Invalid JSON in {path}: {exc}") from exc
    return Superoperator.from_choi(matrix_from_json(_unwrap_matrix(obj, path)))


def _unwrap_matrix(obj: Any, path: str) -> Any:
    """Accept a bare matrix, the `choi` envelope, or its `data` object."""
    for key in ("data", "matrix"):
        if not isinstance(obj, dict):
            raise ParseError(f"{path}: expected a JSON object, got {type(obj).__name__}")
        if "entries" in obj or key not in obj:
            continue
        obj = obj[key]
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: expected a matrix object, got {type(obj).__name__}")
    return obj


def _decomposition_json(cfg: CommandConfig, dec) -> Dict[str, Any]:
    return {
        "r": dec.r,
        "m": dec.m,
        "lambdas": [
            {"l": l, "channel": _index_json(dec.channel_index(l)), "value": _scalar(cfg, lam)}
            for l, lam in enumerate(dec.lambdas)
        ],
        "residual_norm_sq": _scalar(cfg, dec.residual_norm_sq),
        "in_span": dec.in_span,
    }


def _cmd_decompose(cfg: CommandConfig):
    return _decomposition_json(cfg, decompose(_load_superoperator(cfg.input_path)))


def _sampled_json(search) -> Optional[Dict[str, Any]]:
    if search is None:
        return None
    return {
        "status": search.status,
        "min_sampled_eigenvalue": search.min_sampled_eigenvalue,
        "samples": search.samples,
    }


def _cmd_classify(cfg: CommandConfig):
    result = classify(_load_superoperator(cfg.input_path))
    return {
        "category": result.category.value,
        "extreme": result.extreme,
        "positive": result.positive,
        "n_positive_note": result.n_positive_note,
        "sampled_positivity": _sampled_json(result.sampled),
        "decomposition": _decomposition_json(cfg, result.decomposition),
    }


def _cmd_positivity(cfg: CommandConfig):
    verdict = analyze_family(cfg.m, cfg.alpha)
    witness = verdict.witness
    return {
        "m": verdict.m,
        "alpha": f"{verdict.alpha.numerator}/{verdict.alpha.denominator}",
        "threshold": str(positivity_threshold(cfg.m)),
        "is_positive": verdict.is_positive,
        "is_cp": verdict.is_cp,
        "not_n_positive": verdict.not_n_positive,
        "witness_eigenvalue": render(witness.eigenvalue) if witness else None,
        "witness_vector": vector_to_json(witness.eigenvector, cfg.float_digits, cfg.exact) if witness else None,
    }


def _cmd_selftest(cfg: CommandConfig):
    report = run_selftest(cfg.max_degree, workers=max(1, cfg.workers))
    data = report.to_dict()
    if not report.passed:
        raise _CommandFailed(data, f"selftest failed: {', '.join(report.failed_names())}")
    return data


_COMMAND_MAP = {
    "kraus": _cmd_kraus,
    "choi": _cmd_choi,
    "alpha": _cmd_alpha,
    "epsilon": _cmd_epsilon,
    "enumerate": _cmd_enumerate,
    "verify": _cmd_verify,
    "decompose": _cmd_decompose,
    "classify": _cmd_classify,
    "positivity": _cmd_positivity,
    "selftest": _cmd_selftest,
}


class _CommandFailed(Exception):
    def __init__(self, data: Any, message: str):
        super().__init__(message)
        self.data = data


def _emit_json(out: TextIO, payload: Dict[str, Any]) -> None:
    out.write(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
    out.write("\n")


def run(cfg: CommandConfig, out: TextIO = None, err: TextIO = None) -> int:
    """Execute one command; returns the process exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        result = _COMMAND_MAP[cfg.command](cfg)
    except _CommandFailed as exc:
        _emit_json(out, envelope(cfg.command, exc.data, "failure", str(exc)))
        print(f"[ERROR] {exc}", file=err)
        return 1
    except VerificationFailure as exc:
        _emit_json(out, envelope(cfg.command, None, "failure", str(exc)))
        print(f"[ERROR] {exc}", file=err)
        return 1
    except (EposicError, ValueError, OSError) as exc:
        _emit_json(out, envelope(cfg.command, None, "error", str(exc)))
        print(f"[ERROR] {exc}", file=err)
        return 2
    if isinstance(result, str):
        out.write(result)
    else:
        _emit_json(out, envelope(cfg.command, result))
    print(f"[OK] {cfg.command} executed successfully.", file=err)
    return 0


def main(argv: Optional[List[str]] = None) -> None:
    args = _parse_args(argv)
    try:
        cfg = CommandConfig.from_namespace(args)
    except ValueError as exc:
        print(f"[ERROR] {exc}", file=sys.stderr)
        sys.exit(2)
    sys.exit(run(cfg))


if __name__ == "__main__":
    main()
