"""Weakly orthogonally decomposable tensors and membership tests for the data loci DL_r.

Orthogonality is always the complex-bilinear extension of the Euclidean
product, so isotropic vectors (``<v, v> = 0``) are orthogonal to themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    DEFAULT_TOL,
    DenseTensor,
    RankOneTerm,
    SymmetricTensor,
    as_vector,
    bilinear_form,
    is_isotropic,
    power,
    segre_tangent_residuals,
    veronese_tangent_residuals,
)
from .critical import verify_critical_symmetric
from .stabilization import generic_rank, max_isotropic_span, stabilization_step


class OdecoKind(Enum):
    CLASSICAL_REAL = "ClassicalReal"
    STRONG = "Strong"
    WEAK = "Weak"
    NOT_ORTHOGONAL = "NotOrthogonal"


@dataclass(frozen=True, eq=False)
class OrthoDecomposition:
    """``sum scale_i * x_i^1 (x) ... (x) x_i^p``, or ``sum scale_i * l_i**d`` if ``degree`` is set."""

    terms: tuple  # of (scale, factors)
    degree: int | None = None

    def __post_init__(self):
        terms = []
        for scale, factors in self.terms:
            factors = tuple(as_vector(f) for f in factors)
            if self.degree is not None and len(factors) != 1:
                raise ValueError("symmetric terms carry exactly one linear form")
            terms.append((complex(scale), factors))
        if not terms:
            raise ValueError("empty decomposition")
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def symmetric(self) -> bool:
        return self.degree is not None

    def rank_one_terms(self) -> list[RankOneTerm]:
        return [RankOneTerm(f, s, self.degree) for s, f in self.terms]

    def tensor(self):
        parts = [t.to_tensor() for t in self.rank_one_terms()]
        out = parts[0]
        for p in parts[1:]:
            out = out + p
        return out

    def without(self, k: int) -> OrthoDecomposition:
        return OrthoDecomposition(self.terms[:k] + self.terms[k + 1 :], self.degree)

    @property
    def kind(self) -> OdecoKind:
        return odeco_check(self)


@dataclass(frozen=True, eq=False)
class IsotropicFrame:
    """Linearly independent, pairwise orthogonal isotropic vectors in C^n."""

    n: int
    vectors: tuple

    def __post_init__(self):
        vecs = tuple(as_vector(v) for v in self.vectors)
        if any(len(v) != self.n for v in vecs):
            raise ValueError("frame vectors must have n coordinates")
        if len(vecs) > self.n // 2:
            raise ValueError(f"at most {self.n // 2} orthogonal isotropic vectors fit in C^{self.n}")
        for v in vecs:
            if not is_isotropic(v / np.linalg.norm(v)):
                raise ValueError(f"frame vector {v} is not isotropic")
        gram = np.array([[bilinear_form(a, b) for b in vecs] for a in vecs]).reshape(len(vecs), len(vecs))
        norms = np.array([np.linalg.norm(v) for v in vecs])
        if np.any(np.abs(gram) > DEFAULT_TOL * np.outer(norms, norms)):
            raise ValueError("frame vectors are not pairwise orthogonal")
        if vecs and np.linalg.matrix_rank(np.array(vecs)) < len(vecs):
            raise ValueError("frame vectors are linearly dependent")
        object.__setattr__(self, "vectors", vecs)

    def __len__(self):
        return len(self.vectors)


def isotropic_frame(n: int) -> IsotropicFrame:
    """The frame ``e_0 + i e_1, e_2 + i e_3, ...`` of size ``floor(n/2)``."""
    if n < 2:
        raise ValueError("need n >= 2")
    vecs = []
    for k in range(max_isotropic_span(n)):
        w = np.zeros(n, dtype=np.complex128)
        w[2 * k], w[2 * k + 1] = 1, 1j
        vecs.append(w)
    return IsotropicFrame(n, tuple(vecs))


def random_rotation(n: int, rng) -> np.ndarray:
    """Haar-distributed real orthogonal matrix (QR of a Gaussian, signs fixed)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def weakly_odeco_symmetric(s: int, t: int, n: int, d: int, seed: int = 0, weights=None):
    """``f = sum_i l_i**d + sum_j y_j**d`` from a rotated isotropic frame of size ``s``
    and ``t`` real orthonormal forms orthogonal to it.

    ``weights`` (length ``s + t``) optionally scales the terms.  Returns the
    tensor and its decomposition.
    """
    if s < 0 or t < 0 or s > n // 2 or t > n - 2 * s or s + t == 0:
        raise ValueError(f"infeasible (s={s}, t={t}) for n={n}")
    if d < 1:
        raise ValueError("degree must be >= 1")
    weights = np.ones(s + t) if weights is None else np.asarray(weights, dtype=float)
    if weights.shape != (s + t,):
        raise ValueError(f"expected {s + t} weights")
    q = random_rotation(n, np.random.default_rng(seed))
    forms = []
    for k in range(s):
        w = np.zeros(n, dtype=np.complex128)
        w[2 * k], w[2 * k + 1] = 1, 1j
        forms.append(q @ w)
    for j in range(t):
        forms.append(q[:, 2 * s + j].astype(np.complex128))
    dec = OrthoDecomposition(tuple((w, (f,)) for w, f in zip(weights, forms)), d)
    return dec.tensor(), dec


def odeco_symmetric(weights, n: int, d: int, seed: int = 0):
    """Real classically odeco ``sum w_i v_i**d`` with random orthonormal ``v_i``."""
    weights = np.asarray(weights, dtype=float)
    return weakly_odeco_symmetric(0, len(weights), n, d, seed, weights)


def _orthogonal(a, b, tol) -> bool:
    return abs(bilinear_form(a, b)) <= tol * np.linalg.norm(a) * np.linalg.norm(b)


def odeco_check(dec: OrthoDecomposition, tol: float = DEFAULT_TOL) -> OdecoKind:
    """Strongest tier (classical real, strong, weak) whose conditions hold at ``tol``."""
    slots = list(zip(*(f for _, f in dec.terms)))
    for slot in slots:
        for v in slot:
            if not np.any(v):
                raise ValueError("zero factor in decomposition")
    for slot in slots:
        for i in range(len(slot)):
            for j in range(i + 1, len(slot)):
                if not _orthogonal(slot[i], slot[j], tol):
                    return OdecoKind.NOT_ORTHOGONAL
    if any(is_isotropic(v / np.linalg.norm(v), tol) for slot in slots for v in slot):
        return OdecoKind.WEAK
    real = all(np.all(np.abs(v.imag) <= 1e-14 * np.linalg.norm(v)) for slot in slots for v in slot)
    real = real and all(abs(s.imag) <= 1e-14 * max(abs(s), 1.0) for s, _ in dec.terms)
    return OdecoKind.CLASSICAL_REAL if real else OdecoKind.STRONG


SPAN_SCALES = (0.5, 1.0, 2 + 1j)


def isotropic_span_criticality(frame, d: int, num_samples: int = 20, seed: int = 0, tol: float = DEFAULT_TOL) -> bool:
    """Check that ``c * l**d`` is critical for ``sum l_i**d`` for random ``l`` in the frame span.

    ``frame`` may be an ``IsotropicFrame`` or a raw list of vectors (not
    validated), so that broken inputs can be probed.
    """
    if d < 2:
        raise ValueError("need d >= 2")
    vecs = frame.vectors if isinstance(frame, IsotropicFrame) else tuple(as_vector(v) for v in frame)
    f = power(vecs[0], d)
    for v in vecs[1:]:
        f = f + power(v, d)
    rng = np.random.default_rng(seed)
    basis = np.array(vecs)
    for _ in range(num_samples):
        alpha = rng.standard_normal(len(vecs)) + 1j * rng.standard_normal(len(vecs))
        l = alpha @ basis
        for c in SPAN_SCALES:
            ok, _ = verify_critical_symmetric(f, RankOneTerm.power(l, d, c), tol)
            if not ok:
                return False
    return True


# lexicographic coordinates x1..x8 = a000, a001, ..., a111
def _x(t: DenseTensor):
    if t.shape != (2, 2, 2):
        raise ValueError(f"expected shape (2, 2, 2), got {t.shape}")
    return (None, *t.data.ravel())


def dl2_quadrics_222(t: DenseTensor) -> tuple[complex, complex, complex]:
    """The three quadrics whose pairs cut out the components of DL_2 in C^2 (x) C^2 (x) C^2.

    ``q_mid`` vanishes on rank-2 tensors orthogonal in the middle slot,
    ``q_first`` in the first slot, ``q_last`` in the last slot.
    """
    x = _x(t)
    q_mid = -x[2] * x[5] + x[1] * x[6] - x[4] * x[7] + x[3] * x[8]
    q_first = -x[2] * x[3] + x[1] * x[4] - x[6] * x[7] + x[5] * x[8]
    q_last = -x[3] * x[5] - x[4] * x[6] + x[1] * x[7] + x[2] * x[8]
    return complex(q_mid), complex(q_first), complex(q_last)


@dataclass(frozen=True)
class DL2Membership:
    component1: bool
    component2: bool
    component3: bool

    def __iter__(self):
        return iter((self.component1, self.component2, self.component3))

    @property
    def any(self) -> bool:
        return self.component1 or self.component2 or self.component3


def dl2_membership_222(t: DenseTensor, tol: float = DEFAULT_TOL) -> DL2Membership:
    """Test each component of DL_2 for a 2x2x2 tensor; generators vanish at ``tol * |t|^2``."""
    q_mid, q_first, q_last = (abs(q) <= tol * t.norm() ** 2 for q in dl2_quadrics_222(t))
    return DL2Membership(q_mid and q_first, q_mid and q_last, q_first and q_last)


def normal_space_membership(x: RankOneTerm, y, tol: float = DEFAULT_TOL) -> bool:
    """Whether ``y`` lies in the normal space of the rank-one cone at ``x``."""
    if x.scale == 0 or any(not np.any(f) for f in x.factors):
        raise ValueError("x must be a nonzero rank-one tensor")
    unit = [f / np.linalg.norm(f) for f in x.factors]
    if x.symmetric:
        if not isinstance(y, SymmetricTensor) or (y.n, y.d) != (len(unit[0]), x.degree):
            raise ValueError("y must be a symmetric tensor matching x")
        res = veronese_tangent_residuals(y, unit[0])
    else:
        if not isinstance(y, DenseTensor):
            raise ValueError("y must be a dense tensor")
        res = segre_tangent_residuals(y, unit)
    return float(np.max(np.abs(res))) <= tol * y.norm()


def weakly_odeco_dense(shape, rank: int, seed: int = 0, orthogonal_slots=None, isotropic_slots=()):
    """Random rank-r tensor whose terms are pairwise orthogonal in the given slots.

    Slots outside ``orthogonal_slots`` (default: all) get generic real
    factors.  Orthogonal slots get scaled columns of a random rotation, except
    those in ``isotropic_slots``, which get complex multiples of one rotated
    ``(1, i, 0, ...)``; an isotropic vector is orthogonal to itself.
    """
    rng = np.random.default_rng(seed)
    p = len(shape)
    ortho = set(range(p)) if orthogonal_slots is None else set(orthogonal_slots)
    iso = set(isotropic_slots)
    if not iso <= ortho:
        raise ValueError("isotropic slots must be orthogonal slots")
    per_slot = []
    for k, n in enumerate(shape):
        if k in iso:
            if n < 2:
                raise ValueError("isotropic slots need length >= 2")
            w = np.zeros(n, dtype=np.complex128)
            w[0], w[1] = 1, 1j
            w = random_rotation(n, rng) @ w
            coeffs = rng.standard_normal(rank) + 1j * rng.standard_normal(rank)
            per_slot.append([c * w for c in coeffs])
        elif k in ortho:
            if rank > n:
                raise ValueError(f"cannot fit {rank} orthogonal vectors in slot {k} of length {n}")
            q = random_rotation(n, rng)
            per_slot.append([q[:, i] * rng.uniform(0.5, 2.0) for i in range(rank)])
        else:
            per_slot.append([rng.standard_normal(n) for _ in range(rank)])
    dec = OrthoDecomposition(tuple((1.0, tuple(per_slot[k][i] for k in range(p))) for i in range(rank)))
    return dec.tensor(), dec


def dl_sample(r: int, n: int, d: int, seed: int = 0) -> SymmetricTensor:
    """Random weakly odeco tensor of rank at most ``r`` in ``S^d C^n``.

    Uses real orthogonal terms while ``r <= n``; beyond that, the smallest
    isotropic span dimension ``s`` with ``g_s + n - 2s >= r`` hosts ``r - (n - 2s)``
    random isotropic terms next to ``n - 2s`` real ones.
    """
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 and d >= 1")
    top = stabilization_step((n, d)).step if d >= 2 else n
    if not 1 <= r <= top:
        raise ValueError(f"r={r} is infeasible for (n={n}, d={d}); DL_r stabilizes at {top}")
    rng = np.random.default_rng(seed)
    if r <= n:
        f, _ = weakly_odeco_symmetric(0, r, n, d, seed, rng.uniform(0.5, 2.0, size=r))
        return f
    s = next(s for s in range(1, n // 2 + 1) if generic_rank(s, d) + n - 2 * s >= r)
    t = n - 2 * s
    _, frame_dec = weakly_odeco_symmetric(s, t, n, d, seed)
    iso = np.array([f[0] for _, f in frame_dec.terms[:s]])
    terms = [(w, f) for w, f in frame_dec.terms[s:]]
    for _ in range(r - t):
        alpha = rng.standard_normal(s) + 1j * rng.standard_normal(s)
        terms.append((1.0, (alpha @ iso,)))
    return OrthoDecomposition(tuple(terms), d).tensor()


__all__ = [
    "DL2Membership",
    "IsotropicFrame",
    "OdecoKind",
    "OrthoDecomposition",
    "dl2_membership_222",
    "dl2_quadrics_222",
    "dl_sample",
    "isotropic_frame",
    "isotropic_span_criticality",
    "normal_space_membership",
    "odeco_check",
    "odeco_symmetric",
    "random_rotation",
    "weakly_odeco_dense",
    "weakly_odeco_symmetric",
]
