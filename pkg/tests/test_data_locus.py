import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensordl.core import DenseTensor, RankOneTerm, bilinear_form, bw_inner_symmetric, flattening_ranks, power, rank_one
from tensordl.critical import verify_critical
from tensordl.data_locus import (
    IsotropicFrame,
    OdecoKind,
    OrthoDecomposition,
    dl2_membership_222,
    dl_sample,
    isotropic_frame,
    isotropic_span_criticality,
    normal_space_membership,
    odeco_check,
    weakly_odeco_dense,
    weakly_odeco_symmetric,
)
from tensordl.stabilization import stabilization_step

e0, e1 = np.eye(2)
I = 1j


# -- frames ---------------------------------------------------------------------


def test_isotropic_frame_examples():
    assert [list(v) for v in isotropic_frame(2).vectors] == [[1, I]]
    f5 = isotropic_frame(5)
    assert [list(v) for v in f5.vectors] == [[1, I, 0, 0, 0], [0, 0, 1, I, 0]]
    assert len(isotropic_frame(4)) == 2
    with pytest.raises(ValueError):
        isotropic_frame(1)


@pytest.mark.parametrize("n", range(2, 11))
def test_isotropic_frame_gram_exactly_null(n):
    vecs = isotropic_frame(n).vectors
    assert len(vecs) == n // 2
    gram = [[bilinear_form(a, b) for b in vecs] for a in vecs]
    assert all(g == 0 for row in gram for g in row)


def test_frame_rejects_bad_inputs():
    with pytest.raises(ValueError):
        IsotropicFrame(3, ([1, I, 0], [0, 0, 1]))
    with pytest.raises(ValueError):
        IsotropicFrame(4, ([1, I, 0, 0], [2, 2 * I, 0, 0]))
    with pytest.raises(ValueError):
        IsotropicFrame(4, ([1, I, 0, 0], [1, -I, 0, 0]))
    with pytest.raises(ValueError):
        IsotropicFrame(3, ([1, I, 0], [0, 1, I]))


def test_isotropic_span_criticality():
    assert isotropic_span_criticality(isotropic_frame(2), 3)
    assert isotropic_span_criticality(isotropic_frame(5), 4, num_samples=20)
    assert not isotropic_span_criticality([[1, I, 0], [0, 0, 1]], 3)


# -- weakly odeco symmetric -------------------------------------------------------


def test_weakly_odeco_real_examples():
    f, dec = weakly_odeco_symmetric(0, 2, 2, 3, seed=1)
    assert dec.kind is OdecoKind.CLASSICAL_REAL
    assert f.is_real()
    assert np.isclose(f.norm() ** 2, 2)


def test_weakly_odeco_isotropic_power_is_null():
    f, dec = weakly_odeco_symmetric(1, 0, 2, 4, seed=2)
    assert dec.kind is OdecoKind.WEAK
    assert abs(bw_inner_symmetric(f, f)) < 1e-12


def test_weakly_odeco_mixed_pairwise_orthogonal():
    f, dec = weakly_odeco_symmetric(2, 1, 5, 3, seed=3)
    terms = dec.rank_one_terms()
    assert len(terms) == 3
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs(bw_inner_symmetric(terms[i].to_tensor(), terms[j].to_tensor())) < 1e-12


def test_weakly_odeco_infeasible():
    for args in [(3, 0, 5, 3), (2, 2, 5, 3), (0, 0, 3, 3)]:
        with pytest.raises(ValueError):
            weakly_odeco_symmetric(*args)


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n // 2))).flatmap(
    lambda ns: st.tuples(st.just(ns[0]), st.just(ns[1]), st.integers(1 if ns[1] == 0 else 0, ns[0] - 2 * ns[1]),
                         st.integers(2, 5), st.integers(0, 2**31))
))
def test_weak_decomposition_terms_critical_and_closed(args):
    n, s, t, d, seed = args
    f, dec = weakly_odeco_symmetric(s, t, n, d, seed)
    for term in dec.rank_one_terms():
        assert verify_critical(f, term, 1e-9)[0]
    if len(dec.terms) > 1:
        assert odeco_check(dec.without(0)) in (OdecoKind.WEAK, OdecoKind.STRONG, OdecoKind.CLASSICAL_REAL)


# -- odeco_check ------------------------------------------------------------------


def test_odeco_check_examples():
    assert odeco_check(OrthoDecomposition(((1, (e0, e0)), (1, (e1, e1))))) is OdecoKind.CLASSICAL_REAL
    mixed = OrthoDecomposition(((1, ([1, I, 0],)), (1, ([0, 0, 1],))), 3)
    assert odeco_check(mixed) is OdecoKind.WEAK
    assert odeco_check(OrthoDecomposition(((1, (e0, e0)), (1, (e0, e1))))) is OdecoKind.NOT_ORTHOGONAL
    complex_strong = OrthoDecomposition(((1, ([1, I],)), (1, ([I, 1 + 0j],))), 3)
    assert bilinear_form([1, I], [I, 1]) == 2 * I
    assert odeco_check(complex_strong) is OdecoKind.NOT_ORTHOGONAL
    strong = OrthoDecomposition(((1j, (e0, e0)), (1, (e1, e1))))
    assert odeco_check(strong) is OdecoKind.STRONG
    with pytest.raises(ValueError):
        odeco_check(OrthoDecomposition(((1, (e0, [0, 0])),)))


# -- DL2 components of 2x2x2 --------------------------------------------------------


def test_dl2_diag_all_true():
    m = dl2_membership_222(rank_one([e0, e0, e0]) + rank_one([e1, e1, e1]))
    assert tuple(m) == (True, True, True)


def test_dl2_generic_rank_two_none():
    rng = np.random.default_rng(0)
    for _ in range(20):
        t = rank_one([rng.standard_normal(2) for _ in range(3)]) + rank_one([rng.standard_normal(2) for _ in range(3)])
        assert not dl2_membership_222(t).any


@pytest.mark.parametrize(
    "slots, expected",
    [
        ((0, 1), (True, False, False)),
        ((1, 2), (False, True, False)),
        ((0, 2), (False, False, True)),
    ],
)
def test_dl2_slot_selective(slots, expected):
    for seed in range(10):
        t, _ = weakly_odeco_dense((2, 2, 2), 2, seed=seed, orthogonal_slots=slots)
        assert tuple(dl2_membership_222(t)) == expected


def test_dl2_complex_isotropic_samples():
    for seed in range(10):
        t, dec = weakly_odeco_dense((2, 2, 2), 2, seed=seed, isotropic_slots=(0,))
        assert dec.kind is OdecoKind.WEAK
        assert dl2_membership_222(t).any


def test_dl2_wrong_shape():
    with pytest.raises(ValueError):
        dl2_membership_222(DenseTensor(np.zeros((2, 2))))


# -- normal space ---------------------------------------------------------------------


def test_normal_space_examples():
    x = RankOneTerm((e0, e0, e0))
    assert normal_space_membership(x, rank_one([e0, e1, e1]))
    assert not normal_space_membership(x, rank_one([e1, e0, e0]))
    assert normal_space_membership(RankOneTerm.power(e0, 3), power(e1, 3))
    with pytest.raises(ValueError):
        normal_space_membership(RankOneTerm((e0, e0, e0), 0), rank_one([e0, e1, e1]))


# -- DL_r sampling ------------------------------------------------------------------


def test_dl_sample_rank_one_is_power():
    f = dl_sample(1, 3, 4, seed=1)
    assert flattening_ranks(f) == [1, 1]


def test_dl_sample_two_real_terms():
    f = dl_sample(2, 3, 3, seed=2)
    assert f.is_real()
    assert flattening_ranks(f) == [2]


def test_dl_sample_at_stabilization_step():
    r = stabilization_step((4, 3)).step
    assert r == 4
    f = dl_sample(r, 4, 3, seed=3)
    assert max(flattening_ranks(f)) <= 4


@pytest.mark.parametrize("n, d", [(4, 3), (6, 4), (6, 6), (8, 4), (5, 5)])
def test_dl_sample_border_rank_proxy(n, d):
    top = stabilization_step((n, d)).step
    for r in sorted({1, 2, n, top}):
        f = dl_sample(r, n, d, seed=r)
        assert max(flattening_ranks(f, rtol=1e-9)) <= r


def test_dl_sample_infeasible():
    with pytest.raises(ValueError):
        dl_sample(stabilization_step((6, 5)).step + 1, 6, 5)
    with pytest.raises(ValueError):
        dl_sample(0, 3, 3)
