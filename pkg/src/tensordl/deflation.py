"""Deflation chains T -> T - x -> ... and 2x2x2 rank diagnostics."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from ._parallel import ordered_map
from .core import DEFAULT_TOL, DenseTensor, flattening_ranks
from .critical import CriticalPoint, SolverConfig, critical_search, segre_critical_search
from .io import critical_point_to_json, fmt

ZERO_TOL = 1e-9

# Cayley's hyperdeterminant in x1..x8 = a000, a001, a010, a011, a100, a101, a110, a111
# (lexicographic, last index fastest).  Entries: (coefficient, 1-based variables).
CAYLEY_222 = (
    (1, (1, 1, 8, 8)),
    (1, (2, 2, 7, 7)),
    (1, (3, 3, 6, 6)),
    (1, (4, 4, 5, 5)),
    (-2, (1, 2, 7, 8)),
    (-2, (1, 3, 6, 8)),
    (-2, (1, 4, 5, 8)),
    (-2, (2, 3, 6, 7)),
    (-2, (2, 4, 5, 7)),
    (-2, (3, 4, 5, 6)),
    (4, (1, 4, 6, 7)),
    (4, (2, 3, 5, 8)),
)


class Sign(Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    ZERO = "Zero"


class Termination(Enum):
    REACHED_ZERO = "ReachedZero"
    MAX_STEPS = "MaxSteps"
    NO_CRITICAL_POINT = "NoCriticalPointFound"


@dataclass(frozen=True)
class Policy:
    """How a step picks among the certified critical points (sorted best first)."""

    kind: str = "best"
    seed: int = 0
    index: int = 0

    @classmethod
    def best(cls):
        return cls("best")

    @classmethod
    def random(cls, seed: int):
        return cls("random", seed=seed)

    @classmethod
    def user_selected(cls, index: int):
        return cls("index", index=index)

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> Policy:
        """Parse ``best``, ``random`` or ``index:k``."""
        if text == "best":
            return cls.best()
        if text == "random":
            return cls.random(seed)
        if text.startswith("index:"):
            k = int(text.split(":", 1)[1])
            if k < 0:
                raise ValueError("index must be non-negative")
            return cls.user_selected(k)
        raise ValueError(f"unknown policy {text!r}")

    def __str__(self):
        if self.kind == "random":
            return f"Random({self.seed})"
        if self.kind == "index":
            return f"UserSelected({self.index})"
        return "BestFit"


@dataclass(frozen=True)
class RankReport:
    flattening_ranks: tuple[int, ...]
    hyperdet_sign: Sign | None = None
    real_rank: int | None = None  # 2x2x2 real only

    def as_dict(self) -> dict:
        return {
            "flattening_ranks": list(self.flattening_ranks),
            "hyperdet_sign": self.hyperdet_sign.value if self.hyperdet_sign else None,
            "real_rank": self.real_rank,
        }


@dataclass(frozen=True)
class ChainStep:
    norm_before: float
    chosen: CriticalPoint
    report: RankReport
    norm_after: float


@dataclass
class DeflationChain:
    policy: Policy
    initial_norm: float
    initial_report: RankReport
    steps: list[ChainStep] = field(default_factory=list)
    terminated: Termination = Termination.MAX_STEPS
    final: object = None

    @property
    def final_norm(self) -> float:
        return self.final.norm()

    def jsonl(self) -> str:
        lines = []
        for k, s in enumerate(self.steps, 1):
            rec = {
                "step": k,
                "norm_before": s.norm_before,
                "norm_after": s.norm_after,
                "chosen": critical_point_to_json(s.chosen),
                "rank_report": s.report.as_dict(),
            }
            lines.append(json.dumps(rec))
        return "".join(line + "\n" for line in lines)


# -- hyperdeterminant --------------------------------------------------------


def _coords_222(t) -> list:
    if isinstance(t, DenseTensor):
        if t.shape != (2, 2, 2):
            raise ValueError(f"expected shape (2, 2, 2), got {t.shape}")
        return [complex(z) for z in t.data.ravel()]
    arr = np.asarray(t, dtype=object)
    if arr.shape != (2, 2, 2):
        raise ValueError(f"expected shape (2, 2, 2), got {arr.shape}")
    return list(arr.ravel())


def hyperdeterminant_222(t):
    """Cayley's hyperdeterminant of a 2x2x2 tensor.

    Accepts a ``DenseTensor`` (complex result, real part only if the input is
    real) or a nested 2x2x2 sequence of exact numbers (``int``/``Fraction``),
    which is evaluated exactly.
    """
    x = _coords_222(t)
    total = 0
    for c, vs in CAYLEY_222:
        m = c
        for v in vs:
            m = m * x[v - 1]
        total = total + m
    if isinstance(t, DenseTensor) and t.is_real():
        return float(complex(total).real)
    return total


def _sign(value: float, scale: float) -> Sign:
    if abs(value) <= scale:
        return Sign.ZERO
    return Sign.POSITIVE if value > 0 else Sign.NEGATIVE


def _real_rank_from(ranks, sign: Sign) -> int:
    if max(ranks) == 0:
        return 0
    if max(ranks) == 1:
        return 1
    if min(ranks) == 1:
        # a vector times a rank-2 matrix
        return 2
    if sign is Sign.POSITIVE:
        return 2
    # Negative: open rank-3 region; Zero with all flattening ranks 2: boundary, rank 3
    return 3


def real_rank_222(t: DenseTensor, tol: float = DEFAULT_TOL, atol: float = 0.0) -> RankReport:
    """Flattening ranks, hyperdeterminant sign (at ``tol * |t|^4``) and real rank."""
    if t.shape != (2, 2, 2):
        raise ValueError(f"expected shape (2, 2, 2), got {t.shape}")
    if not t.is_real():
        raise ValueError("real_rank_222 needs a real tensor")
    ranks = tuple(flattening_ranks(t, atol=atol))
    sign = _sign(hyperdeterminant_222(t), tol * t.norm() ** 4)
    return RankReport(ranks, sign, _real_rank_from(ranks, sign))


def rank_report(t, atol: float = 0.0) -> RankReport:
    if isinstance(t, DenseTensor) and t.shape == (2, 2, 2) and t.is_real():
        return real_rank_222(t, atol=atol)
    return RankReport(tuple(flattening_ranks(t, atol=atol)))


# -- chains ------------------------------------------------------------------


def _step_seed(seed: int, step: int) -> int:
    return int(np.random.SeedSequence([seed, step]).generate_state(1, np.uint64)[0])


def deflate(
    t,
    policy: Policy | None = None,
    cfg: SolverConfig | None = None,
    max_steps: int = 50,
    zero_tol: float = ZERO_TOL,
) -> DeflationChain:
    """Repeatedly subtract a critical rank-one approximation chosen by ``policy``.

    Stops when the norm drops to ``zero_tol`` times the initial norm, after
    ``max_steps`` subtractions, or when no certified critical point is found.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    policy = policy or Policy.best()
    cfg = cfg or SolverConfig()
    n0 = t.norm()
    atol = zero_tol * n0
    chain = DeflationChain(policy, n0, rank_report(t, atol), final=t)
    rng = np.random.default_rng(policy.seed)
    current = t
    for step in range(max_steps):
        if current.norm() <= atol:
            chain.terminated = Termination.REACHED_ZERO
            break
        points = critical_search(current, replace(cfg, seed=_step_seed(cfg.seed, step)))
        if not points:
            chain.terminated = Termination.NO_CRITICAL_POINT
            break
        if policy.kind == "best":
            chosen = points[0]
        elif policy.kind == "random":
            chosen = points[int(rng.integers(len(points)))]
        else:
            if policy.index >= len(points):
                raise IndexError(f"policy index {policy.index} but only {len(points)} critical points")
            chosen = points[policy.index]
        before = current.norm()
        current = current - chosen.tensor()
        chain.steps.append(ChainStep(before, chosen, rank_report(current, atol), current.norm()))
        chain.final = current
    else:
        chain.terminated = Termination.REACHED_ZERO if current.norm() <= atol else Termination.MAX_STEPS
    return chain


# -- the rank-increase experiment on 2x2x2 -----------------------------------


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    delta_sign_before: Sign
    delta_sign_after: Sign
    real_rank_before: int
    real_rank_after: int
    delta_after_relative: float
    reached_zero: bool | None = None


@dataclass(frozen=True)
class SC10Summary:
    records: tuple[TrialRecord, ...]

    def _count(self, sign: Sign) -> int:
        return sum(r.delta_sign_after is sign for r in self.records)

    @property
    def negative(self) -> int:
        return self._count(Sign.NEGATIVE)

    @property
    def positive(self) -> int:
        return self._count(Sign.POSITIVE)

    @property
    def zero_at_tol(self) -> int:
        return self._count(Sign.ZERO)

    @property
    def rank_increased(self) -> int:
        return sum(r.real_rank_after > r.real_rank_before for r in self.records)

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(
            [
                "trial",
                "seed",
                "delta_sign_before",
                "delta_sign_after",
                "real_rank_before",
                "real_rank_after",
                "delta_after_relative",
            ]
        )
        for r in self.records:
            w.writerow(
                [
                    r.trial,
                    r.seed,
                    r.delta_sign_before.value,
                    r.delta_sign_after.value,
                    r.real_rank_before,
                    r.real_rank_after,
                    fmt(r.delta_after_relative),
                ]
            )
        return buf.getvalue()


def _sample_positive_222(rng, tol: float) -> DenseTensor:
    while True:
        t = DenseTensor(rng.standard_normal((2, 2, 2)))
        if hyperdeterminant_222(t) > tol * t.norm() ** 4:
            return t


def _sample_diagonal_222(rng) -> DenseTensor:
    a = np.zeros((2, 2, 2))
    a[0, 0, 0], a[1, 1, 1] = rng.uniform(0.5, 2.0, size=2) * rng.choice([-1.0, 1.0], size=2)
    return DenseTensor(a)


def sc10_experiment(
    num_trials: int,
    seed: int,
    cfg: SolverConfig | None = None,
    odeco: bool = False,
    tol: float = DEFAULT_TOL,
    workers: int | None = None,
) -> SC10Summary:
    """Subtract the best-fit critical rank-one approximation from random rank-2 2x2x2 tensors.

    Tensors are real Gaussian, conditioned on a positive hyperdeterminant, or
    random diagonal tensors when ``odeco`` is set (whose chains are also run to
    completion).  Each trial draws from its own spawned seed.
    """
    if num_trials < 1:
        raise ValueError("num_trials must be >= 1")
    cfg = cfg or SolverConfig()
    children = np.random.SeedSequence(seed).spawn(num_trials)

    def trial(args):
        k, child = args
        trial_seed = int(child.generate_state(1, np.uint64)[0])
        rng = np.random.default_rng(trial_seed)
        t = _sample_diagonal_222(rng) if odeco else _sample_positive_222(rng, tol)
        before = real_rank_222(t, tol)
        best = segre_critical_search(t, replace(cfg, seed=trial_seed))[0]
        r = t - best.tensor()
        after = real_rank_222(r, tol, atol=ZERO_TOL * t.norm())
        reached = None
        if odeco:
            chain = deflate(t, Policy.best(), replace(cfg, seed=trial_seed), max_steps=4)
            reached = chain.terminated is Termination.REACHED_ZERO
        rel = hyperdeterminant_222(r) / r.norm() ** 4 if r.norm() > 0 else 0.0
        return TrialRecord(
            k,
            trial_seed,
            before.hyperdet_sign,
            after.hyperdet_sign,
            before.real_rank,
            after.real_rank,
            float(rel),
            reached,
        )

    return SC10Summary(tuple(ordered_map(trial, enumerate(children), workers)))


__all__ = [
    "CAYLEY_222",
    "ChainStep",
    "DeflationChain",
    "Policy",
    "RankReport",
    "SC10Summary",
    "Sign",
    "Termination",
    "TrialRecord",
    "deflate",
    "hyperdeterminant_222",
    "rank_report",
    "real_rank_222",
    "sc10_experiment",
]
