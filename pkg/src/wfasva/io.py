"""JSON model documents.

A document looks like::

    {
      "format_version": "1",
      "alphabet": ["a", "b"],
      "n": 2,
      "alpha": [1, -2],
      "beta": [1, -1],
      "transitions": {
        "a": [[1, -1], [-2, 3]],
        "b": [[0, -2], [0, 5]]
      },
      "metadata": {"name": "signed"}
    }

Numbers are written with the shortest decimal that reads back to the same
double, so ``parse(serialize(A))`` reproduces every weight bit for bit.
Integral weights are written without a fractional part.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ModelError
from .wfa import Wfa

FORMAT_VERSION = "1"
TOP_LEVEL_FIELDS = ("format_version", "alphabet", "n", "alpha", "beta", "transitions", "metadata")
METADATA_FIELDS = ("name", "provenance", "sigmas")


@dataclass
class WfaDocument:
    """A parsed model file.

    ``sigmas`` is set for singular value automata written by the ``sva``
    command. ``extra`` and ``metadata_extra`` hold unknown fields kept in
    lenient mode; they are written back unchanged.
    """

    wfa: Wfa
    name: str | None = None
    provenance: str | None = None
    sigmas: np.ndarray | None = None
    extra: dict[str, Any] = field(default_factory=dict)
    metadata_extra: dict[str, Any] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# number formatting


def format_number(x: float) -> str:
    """Shortest round-trip decimal; integral values below 2**53 lose the ``.0``."""
    x = float(x)
    if not math.isfinite(x):
        raise ModelError(f"non-finite number {x!r} cannot be serialized")
    if x.is_integer() and abs(x) < 2**53 and not (x == 0.0 and math.copysign(1.0, x) < 0):
        return str(int(x))
    return repr(x)


def _vector(v) -> str:
    return "[" + ", ".join(format_number(x) for x in v) + "]"


def _matrix(M) -> str:
    return "[" + ", ".join(_vector(row) for row in M) + "]"


def _indent_json(value: Any, level: int) -> str:
    text = json.dumps(value, indent=2, allow_nan=False)
    return text.replace("\n", "\n" + "  " * level)


# ---------------------------------------------------------------------------
# serialization


def serialize_document(doc: WfaDocument) -> str:
    A = doc.wfa
    lines = [
        "{",
        f'  "format_version": "{FORMAT_VERSION}",',
        f'  "alphabet": {json.dumps(list(A.alphabet))},',
        f'  "n": {A.n},',
        f'  "alpha": {_vector(A.alpha)},',
        f'  "beta": {_vector(A.beta)},',
        '  "transitions": {',
    ]
    entries = [f"    {json.dumps(a)}: {_matrix(A[a])}" for a in A.alphabet]
    lines.append(",\n".join(entries))
    lines.append("  }")
    meta_parts = []
    if doc.name is not None:
        meta_parts.append(f'    "name": {json.dumps(doc.name)}')
    if doc.provenance is not None:
        meta_parts.append(f'    "provenance": {json.dumps(doc.provenance)}')
    if doc.sigmas is not None:
        meta_parts.append(f'    "sigmas": {_vector(doc.sigmas)}')
    for key, value in doc.metadata_extra.items():
        meta_parts.append(f"    {json.dumps(key)}: {_indent_json(value, 2)}")
    if meta_parts:
        lines[-1] += ","
        lines.append('  "metadata": {')
        lines.append(",\n".join(meta_parts))
        lines.append("  }")
    for key, value in doc.extra.items():
        lines[-1] += ","
        lines.append(f"  {json.dumps(key)}: {_indent_json(value, 1)}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def serialize(A: Wfa, name: str | None = None, provenance: str | None = None,
              sigmas=None) -> str:
    return serialize_document(
        WfaDocument(A, name, provenance, None if sigmas is None else np.asarray(sigmas, float))
    )


# ---------------------------------------------------------------------------
# parsing


def _reject_constant(token: str):
    # NaN / Infinity are not JSON; keep them as floats so the path check names them
    return float(token.lower().replace("infinity", "inf"))


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelError(f"expected a number, got {type(value).__name__}", path)
    x = float(value)
    if not math.isfinite(x):
        raise ModelError(f"non-finite number {value!r}", path)
    return x


def _number_list(value: Any, path: str, length: int) -> np.ndarray:
    if not isinstance(value, list):
        raise ModelError("expected an array", path)
    if len(value) != length:
        raise ModelError(f"expected {length} entries, got {len(value)}", path)
    return np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)], dtype=float)


def _number_matrix(value: Any, path: str, n: int) -> np.ndarray:
    if not isinstance(value, list) or len(value) != n:
        got = len(value) if isinstance(value, list) else type(value).__name__
        raise ModelError(f"expected an {n}x{n} matrix, got {got} rows", path)
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != n:
            raise ModelError(f"expected an {n}x{n} matrix; row {i} has the wrong length", path)
        rows.append([_number(v, f"{path}[{i}][{j}]") for j, v in enumerate(row)])
    return np.array(rows, dtype=float).reshape(n, n)


def document_from_obj(obj: Any, strict: bool = True) -> WfaDocument:
    if not isinstance(obj, dict):
        raise ModelError("document must be a JSON object", "$")
    unknown = [k for k in obj if k not in TOP_LEVEL_FIELDS]
    if unknown and strict:
        raise ModelError(f"unknown field {unknown[0]!r}", unknown[0])
    for key in TOP_LEVEL_FIELDS[:-1]:
        if key not in obj:
            raise ModelError("missing required field", key)
    if obj["format_version"] != FORMAT_VERSION:
        raise ModelError(f"unsupported format_version {obj['format_version']!r}", "format_version")

    alphabet = obj["alphabet"]
    if not isinstance(alphabet, list) or not alphabet:
        raise ModelError("expected a non-empty array of symbols", "alphabet")
    for i, a in enumerate(alphabet):
        if not isinstance(a, str) or not a:
            raise ModelError("symbols must be non-empty strings", f"alphabet[{i}]")
    if len(set(alphabet)) != len(alphabet):
        raise ModelError("duplicate symbols", "alphabet")

    n = obj["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ModelError("expected a positive integer", "n")
    alpha = _number_list(obj["alpha"], "alpha", n)
    beta = _number_list(obj["beta"], "beta", n)

    trans = obj["transitions"]
    if not isinstance(trans, dict):
        raise ModelError("expected an object mapping symbols to matrices", "transitions")
    for a in trans:
        if a not in alphabet:
            raise ModelError(f"symbol {a!r} is not in the alphabet", f"transitions.{a}")
    mats = []
    for a in alphabet:
        if a not in trans:
            raise ModelError(f"missing matrix for symbol {a!r}", f"transitions.{a}")
        mats.append(_number_matrix(trans[a], f"transitions.{a}", n))

    name = provenance = sigmas = None
    metadata_extra: dict[str, Any] = {}
    meta = obj.get("metadata")
    if meta is not None:
        if not isinstance(meta, dict):
            raise ModelError("expected an object", "metadata")
        for key, value in meta.items():
            if key in ("name", "provenance"):
                if not isinstance(value, str):
                    raise ModelError("expected a string", f"metadata.{key}")
            elif key != "sigmas":
                if strict:
                    raise ModelError(f"unknown field {key!r}", f"metadata.{key}")
                metadata_extra[key] = value
        name = meta.get("name")
        provenance = meta.get("provenance")
        if "sigmas" in meta:
            sigmas = _number_list(meta["sigmas"], "metadata.sigmas", n)

    extra = {k: obj[k] for k in unknown}
    return WfaDocument(Wfa(alphabet, alpha, beta, mats), name, provenance, sigmas, extra,
                       metadata_extra)


def parse_document(text: str, strict: bool = True) -> WfaDocument:
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ModelError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})",
                         "$") from exc
    return document_from_obj(obj, strict)


def parse(text: str, strict: bool = True) -> Wfa:
    return parse_document(text, strict).wfa


def load_document(path: str | Path, strict: bool = True) -> WfaDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ModelError(f"cannot read {path}: {exc.strerror}", "$") from exc
    return parse_document(text, strict)


def load(path: str | Path, strict: bool = True) -> Wfa:
    return load_document(path, strict).wfa


def save_document(doc: WfaDocument, path: str | Path) -> None:
    Path(path).write_text(serialize_document(doc), encoding="utf-8")


def save(A: Wfa, path: str | Path, **metadata) -> None:
    Path(path).write_text(serialize(A, **metadata), encoding="utf-8")
