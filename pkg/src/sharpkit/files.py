"""JSON file formats and deterministic serialization.

POVM file::

    {"dim": 2, "outcomes": 2,
     "elements": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]], ...],
     "labels": ["up", "down"]}          # optional

Each matrix is a list of rows; each entry is a ``[re, im]`` pair. A density
matrix file uses ``{"dim": d, "matrix": ...}`` with the same encoding.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .povm import InvalidPovm, Povm, validate

DIGITS = 12


class FormatError(ValueError):
    """Malformed input document."""


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(rows, dim: int, what: str) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{what}: entries must be [re, im] number pairs") from exc
    if arr.shape != (dim, dim, 2):
        raise FormatError(f"{what}: expected a {dim}x{dim} matrix of [re, im] pairs, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FormatError(f"{what}: entries must be finite")
    return arr[..., 0] + 1j * arr[..., 1]


def _positive_int(doc, key) -> int:
    value = doc.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise FormatError(f"field {key!r} must be a positive integer")
    return value


def povm_from_doc(doc) -> tuple[Povm, list | None]:
    if not isinstance(doc, dict):
        raise FormatError("POVM file must hold a JSON object")
    for key in ("dim", "outcomes", "elements"):
        if key not in doc:
            raise FormatError(f"missing field {key!r}")
    dim, outcomes = _positive_int(doc, "dim"), _positive_int(doc, "outcomes")
    elements = doc["elements"]
    if not isinstance(elements, list) or len(elements) != outcomes:
        raise FormatError(f"'elements' must list {outcomes} matrices")
    mats = [decode_matrix(m, dim, f"element {x}") for x, m in enumerate(elements)]
    labels = doc.get("labels")
    if labels is not None and (not isinstance(labels, list) or len(labels) != outcomes
                               or not all(isinstance(s, str) for s in labels)):
        raise FormatError(f"'labels' must list {outcomes} strings")
    try:
        return validate(mats, dim), labels
    except InvalidPovm:
        raise
    except ValueError as exc:
        raise InvalidPovm(str(exc)) from exc


def povm_to_doc(p: Povm, labels=None) -> dict:
    doc = {"dim": p.dim, "outcomes": p.outcomes, "elements": [encode_matrix(m) for m in p]}
    if labels is not None:
        doc["labels"] = list(labels)
    return doc


def density_from_doc(doc) -> np.ndarray:
    if not isinstance(doc, dict) or "matrix" not in doc:
        raise FormatError("state file must hold an object with 'dim' and 'matrix'")
    dim = _positive_int(doc, "dim")
    return decode_matrix(doc["matrix"], dim, "state")


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def load_povm(path: str) -> Povm:
    return povm_from_doc(load_json(path))[0]


def _round(obj):
    """Floats to 12 significant digits, arrays to lists, non-finite to null."""
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _round(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        x = float(f"{x:.{DIGITS}g}")
        return 0.0 if x == 0 else x   # no "-0.0"
    if isinstance(obj, complex):
        return [_round(obj.real), _round(obj.imag)]
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: insertion key order, 12 significant digits."""
    return json.dumps(_round(obj), indent=2, allow_nan=False)
