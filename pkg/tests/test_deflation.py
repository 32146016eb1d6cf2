import json
from fractions import Fraction

import numpy as np
import pytest

from tensordl.core import DenseTensor, power, rank_one
from tensordl.critical import SolverConfig
from tensordl.data_locus import odeco_symmetric, random_rotation
from tensordl.deflation import (
    CAYLEY_222,
    Policy,
    Sign,
    Termination,
    deflate,
    hyperdeterminant_222,
    real_rank_222,
    sc10_experiment,
)

e0, e1 = np.eye(2)
DIAG = rank_one([e0, e0, e0]) + rank_one([e1, e1, e1])
W = rank_one([e0, e0, e1]) + rank_one([e0, e1, e0]) + rank_one([e1, e0, e0])


def discriminant_oracle(a):
    """Delta as the discriminant of det(x A0 + y A1), slicing on the first index."""
    a0, a1 = np.asarray(a[0]), np.asarray(a[1])
    qa = a0[0, 0] * a0[1, 1] - a0[0, 1] * a0[1, 0]
    qc = a1[0, 0] * a1[1, 1] - a1[0, 1] * a1[1, 0]
    qb = a0[0, 0] * a1[1, 1] + a1[0, 0] * a0[1, 1] - a0[0, 1] * a1[1, 0] - a1[0, 1] * a0[1, 0]
    return qb * qb - 4 * qa * qc


# -- hyperdeterminant -------------------------------------------------------------


def test_cayley_visible_terms():
    # monomials shown explicitly for the dual hypersurface, in x1..x8 coordinates
    shown = {
        (4, 4, 5, 5): 1,
        (3, 4, 5, 6): -2,
        (3, 3, 6, 6): 1,
        (1, 3, 6, 8): -2,
        (1, 2, 7, 8): -2,
        (1, 1, 8, 8): 1,
    }
    table = {vs: c for c, vs in CAYLEY_222}
    for vs, c in shown.items():
        assert table[vs] == c
    assert len(table) == 12


def test_hyperdet_examples():
    assert hyperdeterminant_222(rank_one([e0, e0, e0])) == 0
    assert hyperdeterminant_222(DIAG) == 1
    assert hyperdeterminant_222(W) == 0


def test_hyperdet_exact_rational():
    diag = [[[Fraction(1), 0], [0, 0]], [[0, 0], [0, Fraction(1)]]]
    value = hyperdeterminant_222(diag)
    assert value == 1 and isinstance(value, Fraction)


def test_hyperdet_matches_discriminant_oracle():
    rng = np.random.default_rng(0)
    for _ in range(50):
        a = rng.integers(-5, 6, size=(2, 2, 2))
        exact = hyperdeterminant_222(a.tolist())
        assert exact == discriminant_oracle(a.tolist())
        assert hyperdeterminant_222(DenseTensor(a.astype(float))) == pytest.approx(exact, abs=1e-9)


def test_hyperdet_complex():
    t = DIAG * (1 + 1j)
    assert hyperdeterminant_222(t) == pytest.approx((1 + 1j) ** 4)


def test_hyperdet_vanishes_on_rank_one():
    rng = np.random.default_rng(1)
    for _ in range(100):
        t = rank_one([rng.standard_normal(2) for _ in range(3)])
        assert abs(hyperdeterminant_222(t)) <= 1e-10 * t.norm() ** 4


def test_hyperdet_rotation_invariant():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a = rng.standard_normal((2, 2, 2))
        gs = []
        for _ in range(3):
            g = random_rotation(2, rng)
            if np.linalg.det(g) < 0:
                g[:, 0] *= -1
            gs.append(g)
        b = np.einsum("ia,jb,kc,abc->ijk", *gs, a)
        assert hyperdeterminant_222(DenseTensor(b)) == pytest.approx(hyperdeterminant_222(DenseTensor(a)), rel=1e-8)


def test_hyperdet_wrong_shape():
    with pytest.raises(ValueError):
        hyperdeterminant_222(DenseTensor(np.zeros((2, 2))))


# -- rank reports -----------------------------------------------------------------


def test_real_rank_examples():
    r = real_rank_222(DIAG)
    assert r.flattening_ranks == (2, 2, 2) and r.hyperdet_sign is Sign.POSITIVE and r.real_rank == 2
    r = real_rank_222(rank_one([e0, e0, e0]))
    assert r.flattening_ranks == (1, 1, 1) and r.hyperdet_sign is Sign.ZERO and r.real_rank == 1
    r = real_rank_222(W)
    assert r.flattening_ranks == (2, 2, 2) and r.hyperdet_sign is Sign.ZERO and r.real_rank == 3


def test_real_rank_negative_region():
    # x0 x0 x0 - x0 x1 x1 - x1 x0 x1 - x1 x1 x0 has Delta < 0: real rank 3
    a = np.zeros((2, 2, 2))
    a[0, 0, 0], a[0, 1, 1], a[1, 0, 1], a[1, 1, 0] = 1, -1, -1, -1
    r = real_rank_222(DenseTensor(a))
    assert r.hyperdet_sign is Sign.NEGATIVE and r.real_rank == 3


# -- chains -----------------------------------------------------------------------


def test_matrix_chain_rank_three():
    rng = np.random.default_rng(3)
    m = DenseTensor(rng.standard_normal((4, 3)) @ rng.standard_normal((3, 4)))
    chain = deflate(m)
    assert chain.terminated is Termination.REACHED_ZERO
    assert len(chain.steps) == 3
    assert [chain.initial_report.flattening_ranks[0]] + [s.report.flattening_ranks[0] for s in chain.steps] == [3, 2, 1, 0]


def test_odeco_chain_three_terms():
    f, dec = odeco_symmetric([3.0, 2.0, 1.0], 4, 4, seed=5)
    chain = deflate(f)
    assert chain.terminated is Termination.REACHED_ZERO and len(chain.steps) == 3
    scales = [s.chosen.scale.real for s in chain.steps]
    assert np.allclose(scales, [3.0, 2.0, 1.0])
    assert chain.final_norm <= 1e-9 * chain.initial_norm


def test_single_power_any_policy():
    for policy in (Policy.best(), Policy.random(4), Policy.user_selected(0)):
        chain = deflate(power([1.0, 0.0], 3), policy)
        assert chain.terminated is Termination.REACHED_ZERO and len(chain.steps) == 1


def test_pythagoras_along_best_chain():
    f, _ = odeco_symmetric([1.5, -0.8], 3, 3, seed=1)
    t = f + 0.1 * power([0.3, -1.0, 0.2], 3)
    chain = deflate(t, max_steps=3)
    for s in chain.steps:
        assert abs(s.norm_after**2 - (s.norm_before**2 - s.chosen.tensor().norm() ** 2)) <= 1e-9 * s.norm_before**2


def test_max_steps_and_index_errors():
    t = DenseTensor(np.random.default_rng(6).standard_normal((2, 2, 2)))
    chain = deflate(t, max_steps=2)
    assert chain.terminated is Termination.MAX_STEPS and len(chain.steps) == 2
    with pytest.raises(IndexError):
        deflate(power([1.0, 0.0], 3), Policy.user_selected(50))
    with pytest.raises(ValueError):
        deflate(t, max_steps=0)


def test_policy_parse():
    assert Policy.parse("best") == Policy.best()
    assert Policy.parse("random", 3) == Policy.random(3)
    assert Policy.parse("index:2") == Policy.user_selected(2)
    for bad in ("worst", "index:-1", "index:x"):
        with pytest.raises(ValueError):
            Policy.parse(bad)


def test_chain_jsonl_log():
    chain = deflate(DenseTensor(np.diag([2.0, 1.0])))
    lines = [json.loads(x) for x in chain.jsonl().splitlines()]
    assert len(lines) == 2
    assert lines[0]["step"] == 1 and lines[1]["rank_report"]["flattening_ranks"] == [0]


def test_chain_deterministic():
    t = DenseTensor(np.random.default_rng(8).standard_normal((2, 2, 2)))
    cfg = SolverConfig(seed=2)
    assert deflate(t, Policy.random(1), cfg, 3).jsonl() == deflate(t, Policy.random(1), cfg, 3).jsonl()


# -- rank change on 2x2x2 -----------------------------------------------------------


def test_sc10_residual_lies_on_dual_hypersurface():
    # the residual of a critical subtraction is normal to the rank-one cone, so Delta vanishes
    summary = sc10_experiment(10, seed=7)
    for rec in summary.records:
        assert rec.delta_sign_before is Sign.POSITIVE
        assert abs(rec.delta_after_relative) <= 1e-10
        assert rec.real_rank_before == 2 and rec.real_rank_after == 3
    assert summary.rank_increased == 10


def test_sc10_single_trial_deterministic():
    a = sc10_experiment(1, seed=11).csv()
    assert a == sc10_experiment(1, seed=11, workers=1).csv()
    assert a.splitlines()[0].startswith("trial,seed,delta_sign_before,delta_sign_after")


def test_sc10_odeco_variant():
    summary = sc10_experiment(10, seed=3, odeco=True)
    assert summary.negative == 0
    assert all(r.reached_zero for r in summary.records)
