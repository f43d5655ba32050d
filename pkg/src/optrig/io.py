"""Matrix/vector files, deterministic JSON reports and CSV traces.

Matrix file::

    {"dim": 2, "p": 2.0, "entries": [[re, im], [re, im], [re, im], [re, im]]}

with ``entries`` row-major.  Vectors use the same layout with ``dim``
entries.  Floats are written with Python's shortest round-trip repr, so a
matrix written here re-parses to bit-identical doubles.  Reports are JSON
objects whose keys are emitted in construction order; non-finite floats are
written as the strings "inf", "-inf" and "nan".
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .errors import MatrixFormatError
from .space import OperatorOnSpace, SpaceSpec, SubspaceBasis, Vector


def _pairs(values: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).ravel()]


def matrix_to_dict(A: OperatorOnSpace, **extra) -> dict:
    out = {"dim": A.n, "p": A.p, "entries": _pairs(A.entries)}
    out.update(extra)
    return out


def vector_to_dict(x: Vector) -> dict:
    return {"dim": x.space.dim, "p": x.space.p, "entries": _pairs(x.coords)}


def _parse_pairs(doc, count: int, what: str) -> np.ndarray:
    entries = doc.get("entries")
    if not isinstance(entries, list) or len(entries) != count:
        raise MatrixFormatError(f"{what}: 'entries' must be a list of {count} [re, im] pairs")
    out = np.empty(count, dtype=complex)
    for i, pair in enumerate(entries):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)
        ):
            raise MatrixFormatError(f"{what}: entry {i} is not a [re, im] pair of numbers")
        re, im = float(pair[0]), float(pair[1])
        if not (math.isfinite(re) and math.isfinite(im)):
            raise MatrixFormatError(f"{what}: entry {i} is not finite")
        out[i] = complex(re, im)
    return out


def _parse_space(doc, what: str) -> SpaceSpec:
    if not isinstance(doc, dict):
        raise MatrixFormatError(f"{what}: top level must be an object")
    dim, p = doc.get("dim"), doc.get("p", 2.0)
    if not isinstance(dim, int) or isinstance(dim, bool):
        raise MatrixFormatError(f"{what}: 'dim' must be an integer")
    if not isinstance(p, (int, float)) or isinstance(p, bool):
        raise MatrixFormatError(f"{what}: 'p' must be a number")
    try:
        return SpaceSpec(dim, float(p))
    except ValueError as exc:
        raise MatrixFormatError(f"{what}: {exc}") from None


def _load_json(path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MatrixFormatError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except (json.JSONDecodeError, ValueError) as exc:
        raise MatrixFormatError(f"{path}: invalid JSON ({exc})") from None


def _reject_constant(name):
    raise ValueError(f"non-finite literal {name} not allowed")


def matrix_from_dict(doc, what: str = "matrix") -> OperatorOnSpace:
    space = _parse_space(doc, what)
    vals = _parse_pairs(doc, space.dim * space.dim, what)
    return OperatorOnSpace(space, vals.reshape(space.dim, space.dim))


def vector_from_dict(doc, what: str = "vector") -> Vector:
    space = _parse_space(doc, what)
    return Vector(space, _parse_pairs(doc, space.dim, what))


def read_matrix(path) -> OperatorOnSpace:
    return matrix_from_dict(_load_json(path), str(path))


def read_matrix_document(path) -> tuple[OperatorOnSpace, dict]:
    """The matrix and the raw document (for optional extra keys such as ``name``)."""
    doc = _load_json(path)
    return matrix_from_dict(doc, str(path)), doc


def read_vector(path) -> Vector:
    return vector_from_dict(_load_json(path), str(path))


def write_matrix(A: OperatorOnSpace, path, **extra) -> None:
    Path(path).write_text(dumps(matrix_to_dict(A, **extra)))


def write_vector(x: Vector, path) -> None:
    Path(path).write_text(dumps(vector_to_dict(x)))


# --------------------------------------------------------------------------
# reports


def _float(v: float):
    v = float(v)
    if math.isfinite(v):
        return v
    return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")


def to_jsonable(obj, exclude: Iterable[str] = ()) -> Any:
    """Convert results to plain JSON values, preserving field order."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, np.bool_):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, OperatorOnSpace):
        return matrix_to_dict(obj)
    if isinstance(obj, Vector):
        return vector_to_dict(obj)
    if isinstance(obj, SubspaceBasis):
        return {"dim": obj.space.dim, "p": obj.space.p, "vectors": [_pairs(c) for c in obj.columns.T]}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()] if obj.ndim else to_jsonable(obj.item())
    if dataclasses.is_dataclass(obj):
        skip = set(exclude)
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.name not in skip}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(doc) -> str:
    return json.dumps(to_jsonable(doc), indent=2, allow_nan=False) + "\n"


def write_csv(path, header: list[str], rows: Iterable[Iterable]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    Path(path).write_text(buf.getvalue())
