"""JSON wire formats for tensors, rank-one terms, critical points and decompositions.

Dense::

    {"kind": "dense", "shape": [...], "entries": [[re, im], ...]}

entries row-major, last index fastest.  Symmetric::

    {"kind": "symmetric", "n": N, "d": D,
     "coeffs": [{"alpha": [...], "re": r, "im": i}, ...]}

with every monomial listed, alpha sorted lexicographically descending.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .core import DenseTensor, RankOneTerm, SymmetricTensor, monomials


class FormatError(ValueError):
    """Raised when a JSON document violates the tensor format; names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def fmt(x: float) -> str:
    """Fixed 17-significant-digit rendering used for all text output."""
    return f"{float(x):.17g}"


def _pair(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(field, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise FormatError(field, "non-finite value")
    return float(value)


def _complex_pair(value, field: str) -> complex:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise FormatError(field, "expected [re, im]")
    return complex(_number(value[0], f"{field}[0]"), _number(value[1], f"{field}[1]"))


def _vector(value, field: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise FormatError(field, "expected a non-empty list of [re, im] pairs")
    return np.array([_complex_pair(v, f"{field}[{i}]") for i, v in enumerate(value)])


def tensor_to_json(t) -> dict:
    if isinstance(t, DenseTensor):
        return {
            "kind": "dense",
            "shape": list(t.shape),
            "entries": [_pair(z) for z in t.data.ravel()],
        }
    if isinstance(t, SymmetricTensor):
        return {
            "kind": "symmetric",
            "n": t.n,
            "d": t.d,
            "coeffs": [
                {"alpha": list(a), "re": float(c.real), "im": float(c.imag)}
                for a, c in zip(monomials(t.n, t.d), t.coeffs)
            ],
        }
    raise TypeError(f"not a tensor: {type(t).__name__}")


def _positive_int(value, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise FormatError(field, f"expected a positive integer, got {value!r}")
    return value


def tensor_from_json(doc) -> DenseTensor | SymmetricTensor:
    if not isinstance(doc, dict):
        raise FormatError("$", "expected an object")
    kind = doc.get("kind")
    if kind == "dense":
        shape = doc.get("shape")
        if not isinstance(shape, list) or not shape:
            raise FormatError("shape", "expected a non-empty list of positive integers")
        shape = [_positive_int(s, f"shape[{i}]") for i, s in enumerate(shape)]
        entries = doc.get("entries")
        size = int(np.prod(shape))
        if not isinstance(entries, list) or len(entries) != size:
            raise FormatError("entries", f"expected {size} [re, im] pairs")
        data = np.array([_complex_pair(e, f"entries[{i}]") for i, e in enumerate(entries)])
        return DenseTensor(data.reshape(shape))
    if kind == "symmetric":
        n = _positive_int(doc.get("n"), "n")
        d = _positive_int(doc.get("d"), "d")
        coeffs = doc.get("coeffs")
        if not isinstance(coeffs, list):
            raise FormatError("coeffs", "expected a list")
        table = {}
        for i, item in enumerate(coeffs):
            where = f"coeffs[{i}]"
            if not isinstance(item, dict):
                raise FormatError(where, "expected an object")
            alpha = item.get("alpha")
            if (
                not isinstance(alpha, list)
                or len(alpha) != n
                or any(isinstance(a, bool) or not isinstance(a, int) or a < 0 for a in alpha)
                or sum(alpha) != d
            ):
                raise FormatError(f"{where}.alpha", f"not a degree-{d} exponent in {n} variables")
            key = tuple(alpha)
            if key in table:
                raise FormatError(f"{where}.alpha", "duplicate exponent")
            table[key] = complex(_number(item.get("re"), f"{where}.re"), _number(item.get("im"), f"{where}.im"))
        return SymmetricTensor.from_dict(n, d, table)
    raise FormatError("kind", f"unknown tensor kind {kind!r}")


def term_to_json(term: RankOneTerm) -> dict:
    if term.symmetric:
        return {"kind": "power", "d": term.degree, "scale": _pair(term.scale), "form": [_pair(z) for z in term.form]}
    return {
        "kind": "rank_one",
        "scale": _pair(term.scale),
        "factors": [[_pair(z) for z in f] for f in term.factors],
    }


def term_from_json(doc) -> RankOneTerm:
    if not isinstance(doc, dict):
        raise FormatError("$", "expected an object")
    scale = _complex_pair(doc.get("scale", [1.0, 0.0]), "scale")
    kind = doc.get("kind")
    if kind == "power":
        d = _positive_int(doc.get("d"), "d")
        return RankOneTerm.power(_vector(doc.get("form"), "form"), d, scale)
    if kind == "rank_one":
        factors = doc.get("factors")
        if not isinstance(factors, list) or not factors:
            raise FormatError("factors", "expected a non-empty list of vectors")
        return RankOneTerm(tuple(_vector(f, f"factors[{i}]") for i, f in enumerate(factors)), scale)
    raise FormatError("kind", f"unknown term kind {kind!r}")


def critical_point_to_json(cp) -> dict:
    objective = cp.objective
    if isinstance(objective, complex):
        objective = _pair(objective)
    return {
        "term": term_to_json(cp.term),
        "scale": _pair(cp.scale),
        "residual": float(cp.residual_norm),
        "objective": objective,
        "source": cp.source.value,
    }


def decomposition_to_json(dec) -> dict:
    terms = []
    for scale, factors in dec.terms:
        terms.append({"scale": _pair(scale), "factors": [[_pair(z) for z in f] for f in factors]})
    out = {"kind": "decomposition", "type": "symmetric" if dec.symmetric else "dense", "terms": terms}
    if dec.symmetric:
        out["d"] = dec.degree
    return out


def frame_to_json(frame) -> list:
    return [[_pair(z) for z in v] for v in frame.vectors]


def load_json(path) -> object:
    with open(path) as fh:
        return json.load(fh)


def read_tensor(path) -> DenseTensor | SymmetricTensor:
    return tensor_from_json(load_json(path))


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")
