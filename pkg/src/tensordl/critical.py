"""Critical rank-one approximations: search and certification.

A rank-one ``x`` is critical for ``T`` when ``T - x`` is orthogonal (in the
Bombieri-Weyl form) to the tangent space of the rank-one cone at ``x``.
Matrices are handled exactly through the SVD.  Symmetric tensors use a
multi-start shifted symmetric power iteration, general tensors use ALS (the
higher-order power method); both are polished by Newton's method on the
stationarity system and every returned point is certified by the residual
test.  Only real critical points are searched for.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._parallel import ordered_map
from .core import (
    DEFAULT_TOL,
    DenseTensor,
    RankOneTerm,
    SymmetricTensor,
    bw_inner_symmetric,
    contract,
    segre_contract,
    segre_tangent_residuals,
    veronese_tangent_residuals,
)

log = logging.getLogger(__name__)

DEDUP_TOL = 1e-6
RANK_RTOL = 1e-8


class Source(Enum):
    SVD = "svd"
    POWER_ITERATION = "power_iteration"
    ALS = "als"
    USER_SUPPLIED = "user_supplied"


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 500
    tol: float = DEFAULT_TOL
    num_starts: int = 16
    seed: int = 0
    shift: float | None = None  # None: 1 + ||T||
    newton_iters: int = 50
    workers: int | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.num_starts < 1:
            raise ValueError("num_starts must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    term: RankOneTerm
    residual_norm: float
    objective: float | complex
    source: Source

    @property
    def scale(self) -> complex:
        return self.term.scale

    def tensor(self):
        return self.term.to_tensor()


# -- certification -----------------------------------------------------------


def _unit(v: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ValueError("zero linear form")
    return v / nrm


def verify_critical_symmetric(t: SymmetricTensor, term: RankOneTerm, tol: float = DEFAULT_TOL):
    """Return ``(is_critical, residual)`` for a power term ``scale * u**d``.

    The residual is the largest tangent residual of ``t - term`` at the unit
    form ``u/|u|``, divided by ``|t| + |term|``.
    """
    if not term.symmetric or term.degree != t.d or len(term.form) != t.n:
        raise ValueError("term is not a power compatible with the tensor")
    u = _unit(term.form)
    x = term.to_tensor()
    res = np.max(np.abs(veronese_tangent_residuals(t - x, u)))
    denom = t.norm() + x.norm()
    residual = float(res / denom) if denom > 0 else 0.0
    return residual <= tol, residual


def verify_critical_dense(t: DenseTensor, term: RankOneTerm, tol: float = DEFAULT_TOL):
    """Return ``(is_critical, residual)`` for ``scale * x1 (x) ... (x) xp``."""
    if term.symmetric:
        raise ValueError("expected a product term for a dense tensor")
    factors = [_unit(f) for f in term.factors]
    x = term.to_tensor()
    res = np.max(np.abs(segre_tangent_residuals(t - x, factors)))
    denom = t.norm() + x.norm()
    residual = float(res / denom) if denom > 0 else 0.0
    return residual <= tol, residual


def verify_critical(t, term: RankOneTerm, tol: float = DEFAULT_TOL):
    if isinstance(t, SymmetricTensor):
        return verify_critical_symmetric(t, term, tol)
    return verify_critical_dense(t, term, tol)


def objective(t, x) -> float | complex:
    """``||t - x||^2``: real for real inputs, the complex BW value otherwise."""
    r = t - x
    if r.is_real():
        return r.norm() ** 2
    if isinstance(r, SymmetricTensor):
        return bw_inner_symmetric(r, r)
    return complex(np.sum(r.data * r.data))


def make_critical_point(t, term: RankOneTerm, source: Source, tol: float = DEFAULT_TOL) -> CriticalPoint:
    _, residual = verify_critical(t, term, tol)
    return CriticalPoint(term, residual, objective(t, term.to_tensor()), source)


def _sort_key(cp: CriticalPoint):
    obj = cp.objective
    obj = obj.real if isinstance(obj, complex) else obj
    entries = cp.tensor()
    data = entries.coeffs if isinstance(entries, SymmetricTensor) else entries.data.ravel()
    return (round(obj, 12), tuple(np.round(data.real, 12)))


def sort_critical_points(points) -> list[CriticalPoint]:
    """Smallest objective first; ties by lexicographic order of the term entries."""
    return sorted(points, key=_sort_key)


# -- matrices ----------------------------------------------------------------


def matrix_critical_points(m: DenseTensor) -> list[CriticalPoint]:
    """All critical rank-one approximations of a real matrix, one per nonzero singular value."""
    if m.order != 2:
        raise ValueError(f"expected a matrix, got order {m.order}")
    if not m.is_real():
        raise ValueError("matrix_critical_points needs real input")
    a = m.data.real
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return []
    out = []
    for k in np.flatnonzero(s > RANK_RTOL * s[0]):
        uk, vk = u[:, k], vt[k]
        # fix the sign ambiguity of singular vectors
        j = int(np.argmax(np.abs(uk)))
        if uk[j] < 0:
            uk, vk = -uk, -vk
        term = RankOneTerm((uk, vk), float(s[k]))
        out.append(make_critical_point(m, term, Source.SVD))
    return out


# -- symmetric tensors -------------------------------------------------------


def _canonical_power(u: np.ndarray, lam: float, d: int):
    if d % 2 == 1:
        if lam < 0:
            return -u, -lam
        return u, lam
    j = int(np.argmax(np.abs(u)))
    return (-u if u[j] < 0 else u), lam


def _sym_newton(a: SymmetricTensor, u: np.ndarray, iters: int):
    d, n = a.d, a.n
    lam = float(u @ contract(a, u, d - 1).real)
    best, stalled = np.inf, 0
    for _ in range(iters):
        g = contract(a, u, d - 1).real
        f = np.concatenate([g - lam * u, [(u @ u - 1.0) / 2.0]])
        fn = np.max(np.abs(f))
        if fn <= 1e-15 * (1.0 + abs(lam)):
            break
        # quadratic convergence never stalls; linear creep near singular points does
        stalled = 0 if fn < best / 10 else stalled + 1
        best = min(best, fn)
        if stalled >= 5:
            break
        h = contract(a, u, d - 2).real
        jac = np.zeros((n + 1, n + 1))
        jac[:n, :n] = (d - 1) * h - lam * np.eye(n)
        jac[:n, n] = -u
        jac[n, :n] = u
        step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        u = u + step[:n]
        lam = lam + step[n]
        if not np.all(np.isfinite(u)):
            return None
        if np.max(np.abs(step[:n])) <= 1e-15:
            break
    nrm = np.linalg.norm(u)
    if nrm == 0:
        return None
    u = u / nrm
    return u, float(u @ contract(a, u, d - 1).real)


def _shifted_power(a: SymmetricTensor, starts: np.ndarray, shift: float, max_iters: int) -> np.ndarray:
    """Batched SS-HOPM: rows of ``starts`` alternate maximising/minimising runs."""
    u = starts.copy()
    sign = np.where(np.arange(len(u)) % 2 == 0, 1.0, -1.0)[:, None]
    for _ in range(max_iters):
        g = contract(a, u, a.d - 1).real
        nxt = sign * g + shift * u
        nxt /= np.linalg.norm(nxt, axis=1, keepdims=True)
        if not np.all(np.isfinite(nxt)):
            raise FloatingPointError("non-finite iterate in shifted power iteration")
        done = np.max(np.linalg.norm(nxt - u, axis=1)) < 1e-8
        u = nxt
        if done:
            break
    return u


def _dedup(cands, same) -> list:
    kept = []
    for c in cands:
        if not any(same(c, k) for k in kept):
            kept.append(c)
    return kept


def symmetric_critical_search(t: SymmetricTensor, cfg: SolverConfig | None = None) -> list[CriticalPoint]:
    """Real critical rank-one approximations ``scale * u**d`` of a real symmetric tensor."""
    cfg = cfg or SolverConfig()
    if not t.is_real():
        raise ValueError("symmetric_critical_search needs a real tensor")
    if t.n < 2:
        raise ValueError("need n >= 2")
    tn = t.norm()
    if tn == 0:
        return []
    a = SymmetricTensor(t.n, t.d, t.coeffs.real)
    d = t.d
    if d == 1:
        u = a.coeffs.real / np.linalg.norm(a.coeffs.real)
        term = RankOneTerm.power(u, 1, float(np.linalg.norm(a.coeffs.real)))
        return [make_critical_point(t, term, Source.POWER_ITERATION, cfg.tol)]
    shift = cfg.shift if cfg.shift is not None else 1.0 + tn

    children = np.random.SeedSequence(cfg.seed).spawn(cfg.num_starts)
    raw = np.array([np.random.default_rng(c).standard_normal(t.n) for c in children])
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    # each start runs once maximising and once minimising
    iterated = _shifted_power(a, np.repeat(raw, 2, axis=0), shift, cfg.max_iters)
    # iterated runs mostly land on the same few points; polish each only once
    seeds = _dedup(list(iterated), lambda a, b: min(np.linalg.norm(a - b), np.linalg.norm(a + b)) <= 1e-5)
    seeds += list(raw)

    def polish(u0):
        return _sym_newton(a, u0, cfg.newton_iters)

    cands = []
    for res in ordered_map(polish, seeds, cfg.workers):
        if res is None:
            continue
        u, lam = _canonical_power(*res, d)
        term = RankOneTerm.power(u, d, lam)
        ok, residual = verify_critical_symmetric(t, term, cfg.tol)
        # a zero scale is the cone vertex, not a rank-one point
        if ok and abs(lam) > cfg.tol * tn:
            cands.append(CriticalPoint(term, residual, objective(t, term.to_tensor()), Source.POWER_ITERATION))

    def same(p, q):
        u, v = p.term.form.real, q.term.form.real
        return min(np.linalg.norm(u - v), np.linalg.norm(u + v)) <= DEDUP_TOL

    out = sort_critical_points(_dedup(cands, same))
    if not out:
        log.warning("symmetric_critical_search: no start converged to a certified critical point")
    return out


# -- general tensors ---------------------------------------------------------


def _pair_contract(a: np.ndarray, xs, k: int, j: int) -> np.ndarray:
    """Contract with all factors except slots k and j; result indexed (k, j)."""
    out = a
    for i in range(a.ndim - 1, -1, -1):
        if i not in (k, j):
            out = np.tensordot(out, xs[i], axes=([i], [0]))
    return out if k < j else out.T


def _segre_newton(a: np.ndarray, xs, iters: int):
    p = a.ndim
    dims = [x.size for x in xs]
    offs = np.concatenate([[0], np.cumsum(dims)])
    nvar = offs[-1] + 1
    lam = float(segre_contract(DenseTensor(a), xs, 0).real @ xs[0])
    xs = [x.copy() for x in xs]
    best, stalled = np.inf, 0
    for _ in range(iters):
        rows = []
        for k in range(p):
            rows.append(segre_contract(DenseTensor(a), xs, k).real - lam * xs[k])
        rows.append(np.array([(x @ x - 1.0) / 2.0 for x in xs]))
        f = np.concatenate(rows)
        fn = np.max(np.abs(f))
        if fn <= 1e-15 * (1.0 + abs(lam)):
            break
        stalled = 0 if fn < best / 10 else stalled + 1
        best = min(best, fn)
        if stalled >= 5:
            break
        jac = np.zeros((f.size, nvar))
        for k in range(p):
            rk = slice(offs[k], offs[k + 1])
            for j in range(p):
                cj = slice(offs[j], offs[j + 1])
                if j == k:
                    jac[rk, cj] = -lam * np.eye(dims[k])
                else:
                    jac[rk, cj] = _pair_contract(a, xs, k, j)
            jac[rk, nvar - 1] = -xs[k]
            jac[offs[-1] + k, offs[k] : offs[k + 1]] = xs[k]
        step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        for k in range(p):
            xs[k] = xs[k] + step[offs[k] : offs[k + 1]]
        lam += step[-1]
        if not all(np.all(np.isfinite(x)) for x in xs):
            return None
    if any(np.linalg.norm(x) == 0 for x in xs):
        return None
    xs = [x / np.linalg.norm(x) for x in xs]
    lam = float(segre_contract(DenseTensor(a), xs, 0).real @ xs[0])
    return xs, lam


def _als(a: np.ndarray, xs, max_iters: int):
    t = DenseTensor(a)
    xs = [x.copy() for x in xs]
    for _ in range(max_iters):
        delta = 0.0
        for k in range(a.ndim):
            g = segre_contract(t, xs, k).real
            nrm = np.linalg.norm(g)
            if nrm == 0:
                return xs
            g = g / nrm
            if not np.all(np.isfinite(g)):
                raise FloatingPointError("non-finite iterate in ALS")
            delta = max(delta, min(np.linalg.norm(g - xs[k]), np.linalg.norm(g + xs[k])))
            xs[k] = g
        if delta < 1e-8:
            break
    return xs


def _canonical_product(xs, lam):
    out = []
    for x in xs:
        j = int(np.argmax(np.abs(x)))
        if x[j] < 0:
            x, lam = -x, -lam
        out.append(x)
    return out, lam


def segre_critical_search(t: DenseTensor, cfg: SolverConfig | None = None) -> list[CriticalPoint]:
    """Real critical rank-one approximations of a real tensor of order >= 3."""
    cfg = cfg or SolverConfig()
    if not t.is_real():
        raise ValueError("segre_critical_search needs a real tensor")
    if t.order < 3:
        raise ValueError("segre_critical_search needs order >= 3; use matrix_critical_points")
    if t.norm() == 0:
        return []
    a = t.data.real

    def run(child):
        rng = np.random.default_rng(child)
        x0 = [rng.standard_normal(n) for n in t.shape]
        x0 = [x / np.linalg.norm(x) for x in x0]
        found = []
        for start in (_als(a, x0, cfg.max_iters), x0):
            res = _segre_newton(a, start, cfg.newton_iters)
            if res is not None:
                found.append(res)
        return found

    children = np.random.SeedSequence(cfg.seed).spawn(cfg.num_starts)
    results = ordered_map(run, children, cfg.workers)
    # ALS-polished points first, then Newton-from-random points, each in seed order
    ordered = [r[0] for r in results if r] + [r[1] for r in results if len(r) > 1]

    cands = []
    for xs, lam in ordered:
        xs, lam = _canonical_product(xs, lam)
        term = RankOneTerm(tuple(xs), lam)
        ok, residual = verify_critical_dense(t, term, cfg.tol)
        if ok and abs(lam) > 0:
            cands.append(CriticalPoint(term, residual, objective(t, term.to_tensor()), Source.ALS))

    def same(p, q):
        c = np.prod([abs(x.real @ y.real) for x, y in zip(p.term.factors, q.term.factors)])
        return np.sqrt(max(0.0, 2.0 - 2.0 * c)) <= DEDUP_TOL

    out = sort_critical_points(_dedup(cands, same))
    if not out:
        log.warning("segre_critical_search: no start converged to a certified critical point")
    return out


def critical_search(t, cfg: SolverConfig | None = None) -> list[CriticalPoint]:
    """Dispatch to the matrix, symmetric or general search."""
    if isinstance(t, SymmetricTensor):
        return symmetric_critical_search(t, cfg)
    if t.order == 2:
        return sort_critical_points(matrix_critical_points(t))
    return segre_critical_search(t, cfg)


__all__ = [
    "CriticalPoint",
    "SolverConfig",
    "Source",
    "critical_search",
    "matrix_critical_points",
    "make_critical_point",
    "objective",
    "segre_critical_search",
    "sort_critical_points",
    "symmetric_critical_search",
    "verify_critical",
    "verify_critical_dense",
    "verify_critical_symmetric",
]
