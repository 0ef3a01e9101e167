"""
JSON and CSV renderings of exact scalars, operators and epsilon tables.

Every number carries its canonical exact string; float renderings are added
unless ``exact_only`` is requested. Parsing reads the exact strings only.
"""

import csv
import io
from typing import Any, Dict, List, Optional

from Eposic.clebsch import EpsilonTable
from Eposic.config import DEFAULT_FLOAT_DIGITS, MAX_FLOAT_DIGITS
from Eposic.errors import ParseError
from Eposic.exact_scalar import ExactScalar, parse, render, to_float
from Eposic.polyspaces import Atom, LinOp, PolyVec, SpaceLabel


def _round(x: float, digits: int) -> float:
    if not 1 <= digits <= MAX_FLOAT_DIGITS:
        raise ValueError(f"float_digits must be in 1..{MAX_FLOAT_DIGITS}, got {digits}")
    return float(f"{x:.{digits}g}")


def scalar_to_json(x: ExactScalar, float_digits: int = DEFAULT_FLOAT_DIGITS, exact_only: bool = False) -> Dict[str, Any]:
    out: Dict[str, Any] = {"exact": render(x)}
    if not exact_only:
        z = to_float(x)
        out["re"] = _round(z.real, float_digits)
        out["im"] = _round(z.imag, float_digits)
    return out


def scalar_from_json(obj: Any) -> ExactScalar:
    if isinstance(obj, str):
        return parse(obj)
    if not isinstance(obj, dict) or "exact" not in obj:
        raise ParseError(f"Scalar must be a string or an object with 'exact', got {obj!r}")
    return parse(obj["exact"])


def label_to_json(label: SpaceLabel) -> List[Dict[str, Any]]:
    return [{"degree": a.degree, "conjugate": a.conjugate} for a in label.factors]


def label_from_json(obj: Any) -> SpaceLabel:
    try:
        return SpaceLabel(tuple(Atom(int(a["degree"]), bool(a.get("conjugate", False))) for a in obj))
    except (TypeError, KeyError, ValueError) as exc:
        raise ParseError(f"Malformed space label: {obj!r}") from exc


def matrix_to_json(A: LinOp, float_digits: int = DEFAULT_FLOAT_DIGITS, exact_only: bool = False) -> Dict[str, Any]:
    return {
        "domain": label_to_json(A.domain),
        "codomain": label_to_json(A.codomain),
        "entries": [
            [scalar_to_json(v, float_digits, exact_only) for v in row] for row in A.rows()
        ],
    }


def matrix_from_json(obj: Any) -> LinOp:
    """Rebuild a LinOp from the JSON matrix schema (floats are ignored)."""
    if not isinstance(obj, dict) or not {"domain", "codomain", "entries"} <= set(obj):
        raise ParseError("Matrix JSON needs 'domain', 'codomain' and 'entries'")
    domain = label_from_json(obj["domain"])
    codomain = label_from_json(obj["codomain"])
    if not isinstance(obj["entries"], list) or not all(isinstance(row, list) for row in obj["entries"]):
        raise ParseError("Matrix JSON 'entries' must be a list of rows")
    rows = [[scalar_from_json(v) for v in row] for row in obj["entries"]]
    try:
        return LinOp.from_rows(domain, codomain, rows)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def vector_to_json(v: PolyVec, float_digits: int = DEFAULT_FLOAT_DIGITS, exact_only: bool = False) -> Dict[str, Any]:
    return {
        "space": label_to_json(v.space),
        "coeffs": [scalar_to_json(c, float_digits, exact_only) for c in v.coeffs],
    }


def matrix_to_csv(A: LinOp, float_digits: int = DEFAULT_FLOAT_DIGITS, exact_only: bool = False) -> str:
    """Nonzero entries as ``row,col,exact,re,im`` with 0-based indices."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["row", "col", "exact"] if exact_only else ["row", "col", "exact", "re", "im"])
    for (i, j), v in A.items():
        if exact_only:
            writer.writerow([i, j, render(v)])
            continue
        z = to_float(v)
        writer.writerow([i, j, render(v), _round(z.real, float_digits), _round(z.imag, float_digits)])
    return buffer.getvalue()


def epsilon_table_to_csv(table: EpsilonTable, float_digits: int = DEFAULT_FLOAT_DIGITS, exact_only: bool = False) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["i", "j", "exact"] if exact_only else ["i", "j", "exact", "float"])
    for (i, j), v in table.items():
        row = [i, j, render(v)]
        if not exact_only:
            row.append(_round(to_float(v).real, float_digits))
        writer.writerow(row)
    return buffer.getvalue()


def epsilon_table_payload(table: EpsilonTable) -> str:
    """Canonical exact text of a table: one ``i,j,exact`` line per entry."""
    return "\n".join(f"{i},{j},{render(v)}" for (i, j), v in table.items())


def epsilon_table_from_payload(index, payload: str) -> EpsilonTable:
    values = {}
    for line in payload.splitlines():
        if not line:
            continue
        try:
            i, j, exact = line.split(",", 2)
            values[(int(i), int(j))] = parse(exact)
        except ValueError as exc:
            raise ParseError(f"Malformed epsilon payload line: {line!r}") from exc
    return EpsilonTable(index, values)


def envelope(command: str, data: Any = None, status: str = "success", error: Optional[str] = None) -> Dict[str, Any]:
    return {"command": command, "status": status, "data": data, "error": error}
