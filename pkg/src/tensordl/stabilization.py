"""Exact stabilization step of the chain DL_1 in DL_2 in ... for symmetric tensors.

The chain for ``S^d C^n`` stabilizes at ``max_s (g_s + n - 2s)`` over
``s = 0..floor(n/2)``, where ``g_s`` is the generic (Waring) rank of degree-d
forms in ``s`` variables (Alexander-Hirschowitz).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

# (n, d) -> generic rank, for the Alexander-Hirschowitz exceptions with d >= 3
AH_EXCEPTIONS = {
    (3, 4): 6,
    (4, 4): 10,
    (5, 4): 15,
    (5, 3): 8,
}

TABLE_N = range(4, 11)
TABLE_D = range(3, 16)


def generic_rank(n: int, d: int) -> int:
    """Generic Waring rank of a degree-d form in n variables."""
    if n < 0 or d < 1:
        raise ValueError(f"need n >= 0 and d >= 1, got n={n}, d={d}")
    if n == 0:
        return 0
    if n == 1:
        return 1
    if d == 2:
        return n
    if (n, d) in AH_EXCEPTIONS:
        return AH_EXCEPTIONS[(n, d)]
    return -(-math.comb(n + d - 1, d) // n)


def max_isotropic_span(n: int) -> int:
    if n < 0:
        raise ValueError("n must be non-negative")
    return n // 2


@dataclass(frozen=True)
class StabQuery:
    n: int
    d: int

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")


@dataclass(frozen=True)
class StabResult:
    n: int
    d: int
    m: int
    per_s: tuple[tuple[int, int, int], ...]  # (s, g_s, g_s + n - 2s)
    step: int

    @property
    def in_table_range(self) -> bool:
        return self.n >= 2 and self.d >= 3

    @property
    def argmax(self) -> int:
        """Smallest isotropic span dimension s attaining the step."""
        return next(s for s, _, v in self.per_s if v == self.step)


def stabilization_step(q: StabQuery | tuple[int, int]) -> StabResult:
    if not isinstance(q, StabQuery):
        q = StabQuery(*q)
    m = max_isotropic_span(q.n)
    per_s = tuple((s, generic_rank(s, q.d), generic_rank(s, q.d) + q.n - 2 * s) for s in range(m + 1))
    return StabResult(q.n, q.d, m, per_s, max(v for _, _, v in per_s))


def table_generate(n_range=TABLE_N, d_range=TABLE_D) -> list[list[int]]:
    """Matrix of stabilization steps, rows indexed by n, columns by d."""
    return [[stabilization_step((n, d)).step for d in d_range] for n in n_range]


def table_csv(n_range=TABLE_N, d_range=TABLE_D) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n\\d", *d_range])
    for n, row in zip(n_range, table_generate(n_range, d_range)):
        w.writerow([n, *row])
    return buf.getvalue()


def table_ascii(n_range=TABLE_N, d_range=TABLE_D) -> str:
    rows = [["n\\d", *map(str, d_range)]]
    rows += [[str(n), *map(str, r)] for n, r in zip(n_range, table_generate(n_range, d_range))]
    width = max(len(c) for r in rows for c in r)
    return "\n".join(" ".join(c.rjust(width) for c in r) for r in rows)
