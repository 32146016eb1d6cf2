"""Tensor value types and the Bombieri-Weyl bilinear form over the complex numbers.

Symmetric tensors are stored in the scaled monomial basis: the coefficient
``a[alpha]`` represents the term ``C(d, alpha) * a[alpha] * x**alpha`` of the
form, where ``C(d, alpha)`` is the multinomial coefficient.  With this choice
the Bombieri-Weyl form is the weighted sum ``sum C(d, alpha) a[alpha] b[alpha]``
and ``power(u, d)`` has coefficients ``prod(u**alpha)``.

All bilinear forms are the complex-bilinear extension of the Euclidean inner
product (no conjugation).  Norms used for tolerances are Hermitian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-10


# -- combinatorics -----------------------------------------------------------


@lru_cache(maxsize=None)
def monomials(n: int, d: int) -> tuple[tuple[int, ...], ...]:
    """Exponent vectors of degree ``d`` in ``n`` variables, lexicographically descending."""
    if n < 1 or d < 0:
        raise ValueError(f"invalid monomial space n={n}, d={d}")

    def rec(k: int, rem: int):
        if k == n - 1:
            yield (rem,)
            return
        for first in range(rem, -1, -1):
            for rest in rec(k + 1, rem - first):
                yield (first,) + rest

    return tuple(rec(0, d))


def multinomial(alpha: Sequence[int]) -> int:
    """Exact multinomial coefficient ``(sum alpha)! / prod(alpha_i!)``."""
    total = 0
    out = 1
    for a in alpha:
        total += a
        out *= math.comb(total, a)
    return out


@lru_cache(maxsize=None)
def _basis(n: int, d: int):
    mons = monomials(n, d)
    exps = np.array(mons, dtype=np.int64).reshape(len(mons), n)
    weights = np.array([float(multinomial(a)) for a in mons])
    index = {a: i for i, a in enumerate(mons)}
    return exps, weights, index


@lru_cache(maxsize=None)
def _contraction_plan(n: int, d: int, order: int):
    """Index tables for contracting a degree-d form against ``u**(d-order)``.

    Returns ``(exps, weights, target)`` where ``exps``/``weights`` describe the
    monomials of degree ``d - order`` and ``target[b, j1, ..., j_order]`` is the
    index of ``beta + e_j1 + ... + e_jorder`` among degree-d monomials.
    """
    low = d - order
    exps, weights, _ = _basis(n, low)
    _, _, index = _basis(n, d)
    target = np.empty((len(exps),) + (n,) * order, dtype=np.int64)
    for b, beta in enumerate(monomials(n, low)):
        for js in np.ndindex(*(n,) * order):
            alpha = list(beta)
            for j in js:
                alpha[j] += 1
            target[(b,) + js] = index[tuple(alpha)]
    return exps, weights, target


def _monomial_values(exps: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``u**beta`` for every row ``beta`` of ``exps``; ``u`` may be batched (S, n)."""
    u = np.asarray(u)
    top = int(exps.max()) if exps.size else 0
    table = np.ones(u.shape + (top + 1,), dtype=np.result_type(u, float))
    for k in range(1, top + 1):
        table[..., k] = table[..., k - 1] * u
    cols = np.arange(exps.shape[1])
    return np.prod(table[..., cols, exps], axis=-1)


# -- value types -------------------------------------------------------------


def _as_complex_array(values, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite entries")
    arr.setflags(write=False)
    return arr


def as_vector(v) -> np.ndarray:
    """Coerce a linear form to a read-only complex vector."""
    arr = _as_complex_array(v, "linear form")
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("a linear form must be a non-empty 1-d array")
    return arr


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """A p-way complex array, row-major with the last index fastest."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_complex_array(self.data, "dense tensor")
        if arr.ndim < 1 or 0 in arr.shape:
            raise ValueError("dense tensor must have a positive shape")
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def order(self) -> int:
        return self.data.ndim

    def is_real(self, tol: float = 1e-14) -> bool:
        return bool(np.all(np.abs(self.data.imag) <= tol))

    def norm(self) -> float:
        return float(np.linalg.norm(self.data.ravel()))

    def flatten(self, rows: Sequence[int]) -> np.ndarray:
        """Matrix flattening with the indices in ``rows`` as row indices."""
        rows = list(rows)
        cols = [k for k in range(self.order) if k not in rows]
        m = self.data.transpose(rows + cols)
        nrows = int(np.prod([self.shape[k] for k in rows], dtype=np.int64))
        return m.reshape(nrows, -1)

    def __add__(self, other: DenseTensor) -> DenseTensor:
        _check_shapes(self, other)
        return DenseTensor(self.data + other.data)

    def __sub__(self, other: DenseTensor) -> DenseTensor:
        _check_shapes(self, other)
        return DenseTensor(self.data - other.data)

    def __mul__(self, c) -> DenseTensor:
        return DenseTensor(complex(c) * self.data)

    __rmul__ = __mul__

    def __neg__(self) -> DenseTensor:
        return DenseTensor(-self.data)


def _check_shapes(a: DenseTensor, b: DenseTensor):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")


@dataclass(frozen=True, eq=False)
class SymmetricTensor:
    """Homogeneous degree-d form in n variables, scaled monomial basis.

    ``coeffs[i]`` is the coefficient of ``monomials(n, d)[i]``.
    """

    n: int
    d: int
    coeffs: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        size = len(monomials(self.n, self.d))
        if self.coeffs is None:
            arr = np.zeros(size, dtype=np.complex128)
            arr.setflags(write=False)
        else:
            arr = _as_complex_array(self.coeffs, "symmetric tensor")
            if arr.shape != (size,):
                raise ValueError(f"expected {size} coefficients, got {arr.shape}")
        object.__setattr__(self, "coeffs", arr)

    @classmethod
    def from_dict(cls, n: int, d: int, coeffs: dict) -> SymmetricTensor:
        _, _, index = _basis(n, d)
        arr = np.zeros(len(index), dtype=np.complex128)
        for alpha, value in coeffs.items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != n or sum(alpha) != d or min(alpha) < 0:
                raise ValueError(f"exponent {alpha} is not a degree-{d} monomial in {n} variables")
            arr[index[alpha]] = value
        return cls(n, d, arr)

    def coeff(self, alpha: Sequence[int]) -> complex:
        return complex(self.coeffs[_basis(self.n, self.d)[2][tuple(alpha)]])

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return {a: complex(c) for a, c in zip(monomials(self.n, self.d), self.coeffs)}

    def is_real(self, tol: float = 1e-14) -> bool:
        return bool(np.all(np.abs(self.coeffs.imag) <= tol))

    def norm(self) -> float:
        """Hermitian Bombieri-Weyl norm."""
        w = _basis(self.n, self.d)[1]
        return float(np.sqrt(np.sum(w * np.abs(self.coeffs) ** 2)))

    def to_dense(self) -> DenseTensor:
        """Embed as a fully symmetric n x ... x n array."""
        _, _, index = _basis(self.n, self.d)
        out = np.empty((self.n,) * self.d, dtype=np.complex128)
        for idx in np.ndindex(*out.shape):
            alpha = [0] * self.n
            for i in idx:
                alpha[i] += 1
            out[idx] = self.coeffs[index[tuple(alpha)]]
        return DenseTensor(out)

    def _compatible(self, other: SymmetricTensor):
        if (self.n, self.d) != (other.n, other.d):
            raise ValueError(f"shape mismatch (n={self.n}, d={self.d}) vs (n={other.n}, d={other.d})")

    def __add__(self, other: SymmetricTensor) -> SymmetricTensor:
        self._compatible(other)
        return SymmetricTensor(self.n, self.d, self.coeffs + other.coeffs)

    def __sub__(self, other: SymmetricTensor) -> SymmetricTensor:
        self._compatible(other)
        return SymmetricTensor(self.n, self.d, self.coeffs - other.coeffs)

    def __mul__(self, c) -> SymmetricTensor:
        return SymmetricTensor(self.n, self.d, complex(c) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self) -> SymmetricTensor:
        return SymmetricTensor(self.n, self.d, -self.coeffs)


@dataclass(frozen=True, eq=False)
class RankOneTerm:
    """``scale * x1 (x) ... (x) xp``, or ``scale * u**d`` when ``degree`` is set."""

    factors: tuple
    scale: complex = 1.0
    degree: int | None = None

    def __post_init__(self):
        factors = tuple(as_vector(f) for f in self.factors)
        if not factors:
            raise ValueError("a rank-one term needs at least one factor")
        if self.degree is not None:
            if len(factors) != 1:
                raise ValueError("a symmetric term carries exactly one linear form")
            if self.degree < 1:
                raise ValueError("degree must be >= 1")
        scale = complex(self.scale)
        if not np.isfinite(scale):
            raise ValueError("non-finite scale")
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "scale", scale)

    @classmethod
    def power(cls, u, d: int, scale=1.0) -> RankOneTerm:
        return cls((u,), scale, d)

    @property
    def symmetric(self) -> bool:
        return self.degree is not None

    @property
    def form(self) -> np.ndarray:
        return self.factors[0]

    def to_tensor(self):
        if self.symmetric:
            return self.scale * power(self.form, self.degree)
        return self.scale * rank_one(self.factors)


# -- operations --------------------------------------------------------------


def bilinear_form(a, b) -> complex:
    a, b = np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch {a.shape} vs {b.shape}")
    return complex(np.sum(a * b))


def is_isotropic(a, tol: float = DEFAULT_TOL) -> bool:
    if tol < 0:
        raise ValueError("tol must be non-negative")
    a = np.asarray(a, dtype=np.complex128)
    return abs(bilinear_form(a, a)) <= tol * (1.0 + float(np.sum(np.abs(a) ** 2)))


def bw_inner_symmetric(f: SymmetricTensor, g: SymmetricTensor) -> complex:
    f._compatible(g)
    w = _basis(f.n, f.d)[1]
    return complex(np.sum(w * f.coeffs * g.coeffs))


def bw_inner_dense(s: DenseTensor, t: DenseTensor) -> complex:
    _check_shapes(s, t)
    return complex(np.sum(s.data * t.data))


def power(u, d: int) -> SymmetricTensor:
    if d < 1:
        raise ValueError(f"degree must be >= 1, got {d}")
    u = as_vector(u)
    exps = _basis(len(u), d)[0]
    return SymmetricTensor(len(u), d, _monomial_values(exps, u))


def rank_one(factors: Sequence) -> DenseTensor:
    factors = [as_vector(f) for f in factors]
    if not factors:
        raise ValueError("empty factor list")
    out = factors[0]
    for f in factors[1:]:
        out = np.multiply.outer(out, f)
    return DenseTensor(out)


def contract(t: SymmetricTensor, u, times: int) -> np.ndarray:
    """Contract ``t`` with ``u`` in ``times`` slots.

    Returns an array with ``d - times`` free indices; ``u`` may carry a leading
    batch axis.  ``contract(t, u, d - 1)[k]`` is ``<t, u**(d-1) e_k>_BW``.
    """
    free = t.d - times
    if not 0 <= free <= t.d:
        raise ValueError("cannot contract more slots than the degree")
    exps, weights, target = _contraction_plan(t.n, t.d, free)
    mono = _monomial_values(exps, u) * weights
    gathered = t.coeffs[target]
    return np.tensordot(mono, gathered, axes=([-1], [0]))


def veronese_tangent_residuals(t: SymmetricTensor, l) -> np.ndarray:
    """``<t, l**(d-1) e_k>_BW`` for k = 0..n-1; all zero iff t is normal at ``l**d``."""
    l = as_vector(l)
    if len(l) != t.n:
        raise ValueError(f"dimension mismatch: form has {len(l)} coordinates, tensor n={t.n}")
    return contract(t, l, t.d - 1)


def segre_contract(t: DenseTensor, factors: Sequence, skip: int) -> np.ndarray:
    """Contract ``t`` with every factor except slot ``skip``."""
    out = t.data
    for k in range(t.order - 1, -1, -1):
        if k != skip:
            out = np.tensordot(out, factors[k], axes=([k], [0]))
    return out


def segre_tangent_residuals(t: DenseTensor, x: Sequence) -> np.ndarray:
    """``<t, b>_BW`` for every tangent basis direction at ``x1 (x) ... (x) xp``.

    Slot k contributes ``n_k`` values, in slot order.
    """
    x = [as_vector(f) for f in x]
    if tuple(len(f) for f in x) != t.shape:
        raise ValueError(f"factor lengths {[len(f) for f in x]} do not match shape {t.shape}")
    for f in x:
        if not np.any(f):
            raise ValueError("tangent space is undefined at the cone point (zero factor)")
    return np.concatenate([segre_contract(t, x, k) for k in range(t.order)])


def flattening_ranks(t, rtol: float = 1e-8, atol: float = 0.0) -> list[int]:
    """Numerical ranks of the flattenings of a tensor.

    Dense tensors: one rank per bipartition of the slots (up to complement),
    ordered by the row-slot set.  Symmetric tensors: one rank per catalecticant
    of row degree 1..floor(d/2), which equal the flattening ranks.
    """
    if isinstance(t, SymmetricTensor):
        mats = [catalecticant(t, q) for q in range(1, t.d // 2 + 1)]
    else:
        p = t.order
        parts = []
        for size in range(1, p // 2 + 1):
            for rows in combinations(range(p), size):
                if 2 * size == p and 0 not in rows:
                    continue
                parts.append(rows)
        mats = [t.flatten(rows) for rows in parts]
    return [numerical_rank(m, rtol, atol) for m in mats]


def numerical_rank(m: np.ndarray, rtol: float = 1e-8, atol: float = 0.0) -> int:
    """Count singular values above ``max(rtol * s_max, atol)``."""
    s = np.linalg.svd(np.asarray(m), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > max(rtol * s[0], atol)))


def catalecticant(t: SymmetricTensor, q: int) -> np.ndarray:
    """Catalecticant matrix with rows indexed by degree-q monomials."""
    if not 0 <= q <= t.d:
        raise ValueError("row degree out of range")
    _, _, index = _basis(t.n, t.d)
    rows, cols = monomials(t.n, q), monomials(t.n, t.d - q)
    out = np.empty((len(rows), len(cols)), dtype=np.complex128)
    for i, b in enumerate(rows):
        for j, c in enumerate(cols):
            out[i, j] = t.coeffs[index[tuple(x + y for x, y in zip(b, c))]]
    return out
