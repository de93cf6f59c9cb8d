"""Tests for matrix embeddings of ATR extensions and their geodesic cycles."""

from fractions import Fraction as Q

import mpmath as mp
import pytest

from atrpoints.cycles import (
    EmbeddingQ,
    build_embedding,
    conjugation_flip,
    cycle_data,
    mat_det,
    mat_embed,
    mat_inv,
    mat_mul,
    mat_trace,
    maximal_order_params,
    mobius,
    orientation_transport,
)
from atrpoints.errors import AdmissibilityError, NoOptimalEmbedding
from atrpoints.nfield import ElementF, QuadExtension, make_field


def atr_K(a, b):
    """K = Q(sqrt5)(sqrt(a + b*sqrt5)), must be checked ATR by the caller."""
    F = make_field(5)
    return QuadExtension(F, ElementF(Q(a), Q(b), 5))


ATR_DELTAS = [(Q(-3, 2), Q(-3, 2)), (1, -1), (4, -4), (-2, -1), (3, -2)]


def K_accept():
    return atr_K(Q(-3, 2), Q(-3, 2))


def first_prime_with(K, splitting, skip_disc=True):
    """Smallest degree-one prime of F with the requested behaviour in K."""
    F = K.base
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59):
        for P, f in F.primes_above(p):
            if f != 1:
                continue
            if skip_disc and P.divides(K.rel_disc):
                continue
            if K.place_splitting(P) == splitting:
                return P
    raise RuntimeError("no prime found; widen the search window")


# -- order parameters ----------------------------------------------------


@pytest.mark.parametrize("a,b", ATR_DELTAS)
def test_theta_satisfies_its_minimal_polynomial(a, b):
    K = atr_K(a, b)
    assert K.is_pipeline_admissible()
    s, n, kappa = maximal_order_params(K)
    assert s.is_integral() and n.is_integral()
    assert kappa in (1, 2)
    theta = K.elem(s / kappa, Q(1, kappa) if kappa == 2 else 1)
    lhs = theta * theta
    rhs = K.elem(s * (s / kappa) - n, s * (Q(1, kappa) if kappa == 2 else 1))
    assert lhs == rhs


def test_kappa_two_is_found_when_available():
    # delta = 4 - 4*sqrt5: (0^2 - delta)/4 = -1 + sqrt5 is integral
    K = atr_K(4, -4)
    s, n, kappa = maximal_order_params(K)
    assert kappa == 2
    assert n == ElementF(Q(-1), Q(1), 5)


# -- the matrix square root of delta ------------------------------------


@pytest.mark.parametrize("a,b", ATR_DELTAS)
def test_level_one_matrix_squares_to_delta(a, b):
    K = atr_K(a, b)
    q = build_embedding(K, K.base.unit_ideal())
    m = q.m_sqrt_delta
    sq = mat_mul(m, m)
    assert sq[0][1].is_zero() and sq[1][0].is_zero()
    assert sq[0][0] == K.delta and sq[1][1] == K.delta
    assert mat_trace(m).is_zero()
    assert mat_det(m) == -K.delta


def test_q_of_is_a_ring_homomorphism():
    K = K_accept()
    q = build_embedding(K, K.base.unit_ideal())
    xs = [K.elem(1, 2), K.elem((Q(1, 2), Q(1, 2)), -1), K.elem(0, 3),
          K.elem(-2, (0, 1))]
    for x in xs:
        for y in xs:
            lhs = q.q_of(x * y)
            rhs = mat_mul(q.q_of(x), q.q_of(y))
            assert lhs == rhs
    # and q(theta) has the right trace and determinant
    s, n, _k = maximal_order_params(K)
    mt = q.m_theta()
    assert mat_trace(mt) == s
    assert mat_det(mt) == n


def test_level_embedding_lands_in_eichler_order():
    K = K_accept()
    P = first_prime_with(K, "split")
    q = build_embedding(K, P)
    m = q.m_sqrt_delta
    sq = mat_mul(m, m)
    assert sq[0][1].is_zero() and sq[0][0] == K.delta
    mt = q.m_theta()
    for row in mt:
        for x in row:
            assert x.is_integral()
    assert P.divides(K.base.ideal(mt[1][0]))


def test_level_embedding_is_deterministic():
    K = K_accept()
    P = first_prime_with(K, "split")
    q1 = build_embedding(K, P)
    q2 = build_embedding(K, P)
    assert q1.m_sqrt_delta == q2.m_sqrt_delta


def test_inert_level_prime_is_rejected():
    K = K_accept()
    P = first_prime_with(K, "inert")
    with pytest.raises(NoOptimalEmbedding):
        build_embedding(K, P)


def test_non_squarefree_level_is_rejected():
    K = K_accept()
    P = first_prime_with(K, "split")
    with pytest.raises(NoOptimalEmbedding):
        build_embedding(K, P * P)


# -- cycle data ----------------------------------------------------------


def embedded_fix_error(M, z, j, prec=100):
    Me = mat_embed(M, j, prec)
    return abs(mobius(Me, z, prec) - z)


@pytest.mark.parametrize("a,b", ATR_DELTAS)
def test_fixed_point_and_endpoints(a, b):
    K = atr_K(a, b)
    q = build_embedding(K, K.base.unit_ideal())
    cyc = cycle_data(q, prec=100)
    assert mp.im(cyc.z1_star) > 0
    with mp.workprec(120):
        assert embedded_fix_error(q.m_sqrt_delta, cyc.z1_star, 1) < 1e-25
        for e in cyc.endpoints:
            if e == mp.inf:
                continue
            assert mp.im(e) == 0
            assert embedded_fix_error(q.m_sqrt_delta, e, 2) < 1e-20
    assert cyc.orientation == 1


@pytest.mark.parametrize("a,b", ATR_DELTAS)
def test_stabilizer_commutes_and_fixes_endpoints(a, b):
    K = atr_K(a, b)
    q = build_embedding(K, K.base.unit_ideal())
    cyc = cycle_data(q, prec=100)
    g = cyc.gamma_eps
    # exact: the stabilizer is a polynomial in m, so it commutes with it,
    # hence shares its fixed points
    assert mat_mul(g, q.m_sqrt_delta) == mat_mul(q.m_sqrt_delta, g)
    det = mat_det(g)
    assert det.is_integral() and det.is_totally_positive()
    assert abs(det.norm()) == 1
    # numeric double check at tau2
    with mp.workprec(120):
        for e in cyc.endpoints:
            if e == mp.inf:
                continue
            assert embedded_fix_error(g, e, 2) < 1e-18
    # gamma is hyperbolic at tau2: distinct real eigenvalues
    with mp.workprec(120):
        tr = mat_trace(g).embed(2, 120)
        assert tr * tr - 4 * det.embed(2, 120) > 0


def test_stabilizer_is_not_a_base_field_unit():
    # the loop must be a genuinely new unit: off-diagonal part nonzero
    K = K_accept()
    q = build_embedding(K, K.base.unit_ideal())
    cyc = cycle_data(q, prec=80)
    (ga, gb), (gc, gd) = cyc.gamma_eps
    assert not (gb.is_zero() and gc.is_zero())


def test_conjugated_embedding_moves_endpoints_by_mobius():
    K = K_accept()
    F = K.base
    q = build_embedding(K, F.unit_ideal())
    base = cycle_data(q, prec=100)
    conjugators = [
        ((F.elem(1), F.elem(2)), (F.elem(0), F.elem(1))),
        ((F.elem(1), F.elem(0)), (F.elem(1), F.elem(1))),
        ((F.elem(2), F.elem(1)), (F.elem(1), F.elem(1))),
        ((F.elem(1), F.omega), (F.elem(0), F.elem(1))),
        ((F.elem(0), F.elem(-1)), (F.elem(1), F.elem(0))),
    ]
    for g in conjugators:
        assert abs(mat_det(g).norm()) == 1
        m2 = mat_mul(g, mat_mul(q.m_sqrt_delta, mat_inv(g)))
        q2 = EmbeddingQ(K, m2, q.level, q.theta_s, q.theta_n, q.kappa)
        cyc2 = cycle_data(q2, prec=100)
        with mp.workprec(120):
            ge = mat_embed(g, 2, 120)
            moved = sorted(
                (mp.mpf(mobius(ge, e, 120)) for e in base.endpoints
                 if mobius(ge, e, 120) != mp.inf)
            )
            got = sorted(e for e in cyc2.endpoints if e != mp.inf)
            assert len(moved) == len(got)
            for x, y in zip(moved, got):
                assert abs(x - y) < 1e-22
            # fixed point moves the same way at tau1
            ge1 = mat_embed(g, 1, 120)
            assert abs(mobius(ge1, base.z1_star, 120) - cyc2.z1_star) < 1e-22


def test_non_atr_delta_is_rejected():
    F = make_field(5)
    K = QuadExtension(F, F.elem(-1))  # both embeddings negative: CM case
    q = build_embedding(K, F.unit_ideal())
    with pytest.raises(AdmissibilityError):
        cycle_data(q)
    K2 = QuadExtension(F, F.elem(2))  # both positive: totally real case
    q2 = build_embedding(K2, F.unit_ideal())
    with pytest.raises(AdmissibilityError):
        cycle_data(q2)


# -- orientation bookkeeping ---------------------------------------------


def test_orientation_transport_table():
    K = K_accept()
    cyc = cycle_data(build_embedding(K, K.base.unit_ideal()), prec=80)
    assert orientation_transport(cyc, 1, 1) == 1
    assert orientation_transport(cyc, 1, -1) == 1
    assert orientation_transport(cyc, -1, 1) == 1
    assert orientation_transport(cyc, -1, -1) == -1
    with pytest.raises(ValueError):
        orientation_transport(cyc, 0, 1)


def test_conjugation_flip_is_an_orientation_reversing_involution():
    K = K_accept()
    cyc = cycle_data(build_embedding(K, K.base.unit_ideal()), prec=80)
    f = conjugation_flip(cyc)
    assert f.orientation == -cyc.orientation
    assert f.conjugated and not cyc.conjugated
    assert f.endpoints == cyc.endpoints
    assert f.z1_star == cyc.z1_star
    ff = conjugation_flip(f)
    assert ff == cyc


# -- the well-conditioned normalization at a large level ------------------


def test_large_level_cycle_is_well_conditioned():
    F = make_field(5)
    K = K_accept()
    P = F.factor_ideal(
        F.ideal(ElementF(Q(-529, 2), Q(-109, 2), 5))
    )[0][0]
    assert P.norm() == 55109
    q = build_embedding(K, P)
    m = q.m_sqrt_delta
    sq = mat_mul(m, m)
    assert sq[0][1].is_zero() and sq[0][0] == K.delta
    cyc = cycle_data(q, prec=100)
    # normalization keeps the data near the imaginary axis and the geodesic
    # as tall as the level permits
    assert abs(mp.re(cyc.z1_star)) < 5
    assert mp.im(cyc.z1_star) > 1e-4
    e1, e2 = cyc.endpoints
    assert abs((e1 + e2) / 2) < 5
    assert abs(e1 - e2) / 2 > 1e-4
