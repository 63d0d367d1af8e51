"""Instance and report file formats.

Instances and reports are JSON with every exact quantity carried as a
rational string ("p" or "p/q", q > 0) — never floats, since exactness is
the product.  Files carry a format_version so counterexample artifacts
remain interpretable if the layout ever changes.  Serialization is
deterministic: sorted keys, fixed indentation, trailing newline.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction

from .asymptotics import StructureReport, TransferStructure
from .exact_linalg import RationalMatrix, Vector
from .model import SpectralData, SystemSpec

__all__ = [
    "DimensionError",
    "FORMAT_VERSION",
    "ParseError",
    "build_report",
    "dumps",
    "instance_to_dict",
    "load_instance_file",
    "parse_instance",
    "parse_rational",
]

FORMAT_VERSION = 1

_RATIONAL_RE = re.compile(r"^-?\d+(/\d+)?$")

_INSTANCE_KEYS = {"format_version", "n", "K", "A", "D", "H", "label"}


class ParseError(ValueError):
    """Malformed instance content (bad rational, bad structure, bad JSON)."""


class DimensionError(ValueError):
    """Structurally valid content with inconsistent dimensions."""


def parse_rational(value: object, where: str = "value") -> Fraction:
    """Parse "p" or "p/q" (q > 0) or a plain integer into a Fraction."""
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected a rational string, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        raise ParseError(
            f"{where}: floats are not accepted; write an exact rational "
            f'string like "3/10"'
        )
    if not isinstance(value, str) or not _RATIONAL_RE.match(value):
        raise ParseError(f"{where}: {value!r} is not of the form 'p' or 'p/q'")
    try:
        return Fraction(value)
    except ZeroDivisionError:
        raise ParseError(f"{where}: zero denominator in {value!r}") from None


def _parse_int(data: dict, key: str) -> int:
    value = data.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"{key}: expected an integer, got {value!r}")
    return value


def _parse_vector(raw: object, length: int, where: str) -> Vector:
    if not isinstance(raw, list):
        raise ParseError(f"{where}: expected an array")
    if len(raw) != length:
        raise DimensionError(f"{where}: expected {length} entries, found {len(raw)}")
    return tuple(
        parse_rational(entry, f"{where}[{j}]") for j, entry in enumerate(raw)
    )


def _instance_from_dict(data: object) -> tuple[SystemSpec, Vector | None]:
    if not isinstance(data, dict):
        raise ParseError("instance file must contain a JSON object")
    unknown = set(data) - _INSTANCE_KEYS
    if unknown:
        raise ParseError(f"unknown instance fields: {sorted(unknown)}")
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ParseError(
            f"format_version: expected {FORMAT_VERSION}, got {version!r}"
        )
    n = _parse_int(data, "n")
    k = _parse_int(data, "K")
    if "A" not in data or "D" not in data:
        raise ParseError("instance requires both 'A' and 'D'")
    raw_a = data["A"]
    if not isinstance(raw_a, list):
        raise ParseError("A: expected an array of rows")
    if len(raw_a) != n:
        raise DimensionError(f"A: expected {n} rows, found {len(raw_a)}")
    a_rows = [_parse_vector(row, n, f"A[{i}]") for i, row in enumerate(raw_a)]
    raw_d = data["D"]
    if not isinstance(raw_d, list):
        raise ParseError("D: expected an array of diagonals")
    if len(raw_d) != k:
        raise DimensionError(f"D: expected {k} diagonals, found {len(raw_d)}")
    diagonals = tuple(
        _parse_vector(row, n, f"D[{i}]") for i, row in enumerate(raw_d)
    )
    h: Vector | None = None
    if "H" in data and data["H"] is not None:
        h = _parse_vector(data["H"], n, "H")
    label = data.get("label", "")
    if not isinstance(label, str):
        raise ParseError(f"label: expected a string, got {label!r}")
    try:
        spec = SystemSpec(n=n, K=k, D=diagonals, A=RationalMatrix(a_rows), label=label)
    except ValueError as exc:
        raise DimensionError(str(exc)) from exc
    return spec, h


def load_instance_file(path: str) -> tuple[SystemSpec, Vector | None]:
    """Read an instance file; returns the system plus the recorded initial
    direction H when present (H is echoed into reports, never computed with)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return _instance_from_dict(data)


def parse_instance(path: str) -> SystemSpec:
    """Read and validate an instance file, discarding the optional H."""
    return load_instance_file(path)[0]


def _rational_str(value: Fraction) -> str:
    return str(value)


def _vector_strs(v: Vector) -> list[str]:
    return [_rational_str(x) for x in v]


def _matrix_strs(m: RationalMatrix) -> list[list[str]]:
    return [[_rational_str(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]


def instance_to_dict(spec: SystemSpec, h: Vector | None = None) -> dict:
    out = {
        "format_version": FORMAT_VERSION,
        "n": spec.n,
        "K": spec.K,
        "A": [
            [_rational_str(spec.A[i, j]) for j in range(spec.n)]
            for i in range(spec.n)
        ],
        "D": [_vector_strs(d) for d in spec.D],
        "label": spec.label,
    }
    if h is not None:
        out["H"] = _vector_strs(h)
    return out


def build_report(
    spec: SystemSpec,
    sd: SpectralData,
    ts: TransferStructure,
    report: StructureReport,
    h: Vector | None = None,
) -> dict:
    """Assemble the full analysis report for one instance."""
    return {
        "format_version": FORMAT_VERSION,
        "instance": instance_to_dict(spec, h),
        "spectral": {
            "h1": _vector_strs(sd.h1),
            "h1_star": _vector_strs(sd.h1_star),
            "stable": sd.stable,
        },
        "transfer": {
            "v": _vector_strs(ts.v),
            "G": _matrix_strs(ts.G),
            "M": _matrix_strs(ts.M),
        },
        "structure": {
            "rank_exact": report.rank_exact,
            "predicted_rank": report.predicted_rank,
            "rank_matches_prediction": report.rank_matches_prediction,
            "eigenvalues": list(report.eigenvalues),
            "kernel_directions": [_vector_strs(v) for v in report.kernel_directions],
            "degenerate": report.degenerate,
        },
    }


def dumps(obj: object) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
