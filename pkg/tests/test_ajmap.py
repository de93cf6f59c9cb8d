"""Tests for the double integrator and the recognition layer.

The structural identities (path additivity, twist linearity, degenerate
paths, the closed form of a single Fourier term) are checked on a synthetic
one-term coefficient table, where the corner sums are exact and nothing is
truncated. Recognition is tested directly on lattice data.
"""

import mpmath as mp
import pytest
from fractions import Fraction as Q

from atrpoints.ajmap import (
    DoubleIntegralSpec,
    _anti_terms,
    _e,
    _hol_terms,
    _recognize_in_F,
    _exact_y,
    _unit_pm,
    four_corner,
    invariance_multiplier,
    recognize,
    semi_indefinite,
)
from atrpoints.hmf import enumerate_indices
from atrpoints.nfield import ElementF, make_field
from atrpoints.periods import omega_beta, period_lattice
from test_ecurve import curve199


class OneTermTable:
    """Coefficient 1 on a single ideal, 0 elsewhere; enough structure for
    the integrator's enumeration."""

    def __init__(self, F, ideal):
        self.F = F
        self.ideal0 = ideal

    def a(self, m):
        return 1 if m == self.ideal0 else 0


def smallest_index(F):
    return next(iter(enumerate_indices(F, (1.0, 1.0, 1e-6))))


@pytest.fixture(scope="module")
def one_term():
    F = make_field(5)
    fi = smallest_index(F)
    return F, fi, OneTermTable(F, fi.ideal)


Z1 = (mp.mpc("0.31", "0.8"), mp.mpc("-0.12", "1.1"))
X_A = mp.mpc("0.07", "0.9")
X_B = mp.mpc("0.44", "1.3")
X_C = mp.mpc("-0.29", "0.75")


def spec_for(table, z2, beta, z1=Z1, bits=140, tol=1e-8):
    return DoubleIntegralSpec(table, z1, z2, beta, tol=tol,
                              precision_bits=bits)


def test_path_additivity_is_exact(one_term):
    # the identity is exact termwise; the only leakage is the truncation
    # tail, since the three boxes include slightly different unit multiples
    _F, _fi, table = one_term
    for beta in (1, -1):
        full = four_corner(spec_for(table, (X_A, X_B), beta, tol=1e-20))
        part1 = four_corner(spec_for(table, (X_A, X_C), beta, tol=1e-20))
        part2 = four_corner(spec_for(table, (X_C, X_B), beta, tol=1e-20))
        assert abs(full - (part1 + part2)) < mp.mpf(10) ** -18


def test_degenerate_path_vanishes(one_term):
    _F, _fi, table = one_term
    for beta in (1, -1):
        assert four_corner(spec_for(table, (X_A, X_A), beta)) == 0
        spec = DoubleIntegralSpec(table, None, (X_A, X_A), beta,
                                  tol=1e-8, precision_bits=140)
        assert semi_indefinite(spec, mp.mpc(0, 1)) == 0


def test_twist_linearity(one_term):
    """S(+1) + S(-1) doubles the holomorphic block."""
    _F, _fi, table = one_term
    plus = four_corner(spec_for(table, (X_A, X_B), 1))
    minus = four_corner(spec_for(table, (X_A, X_B), -1))
    prec = 160
    with mp.workprec(prec):
        w1, w2 = Z1
        hol = mp.mpc(0)
        for n1, n2, c in _hol_terms(table, mp.mpf("0.8"), mp.mpf("0.9"),
                                    1e-8, prec):
            hol += c * (_e(n1 * w2) - _e(n1 * w1)) * (
                _e(n2 * X_B) - _e(n2 * X_A))
        assert abs(plus + minus - 2 * hol) < mp.mpf(10) ** -35


def test_corner_assembly_closed_form(one_term):
    """four_corner is exactly the product-of-differences assembly over its
    two term lists (all unit multiples of the ideal included)."""
    F, _fi, table = one_term
    prec = 160
    with mp.workprec(prec):
        w1, w2 = Z1
        Y1 = min(mp.im(w1), mp.im(w2))
        Y2 = min(mp.im(X_A), mp.im(X_B))
        hol = mp.mpc(0)
        for n1, n2, c in _hol_terms(table, Y1, Y2, 1e-8, prec):
            hol += c * (_e(n1 * w2) - _e(n1 * w1)) * (
                _e(n2 * X_B) - _e(n2 * X_A))
        anti = mp.mpc(0)
        for m1, m2, c in _anti_terms(table, Y1, Y2, 1e-8, prec):
            anti += c * (_e(m1 * w2) - _e(m1 * w1)) * (
                _e(m2 * mp.conj(X_B)) - _e(m2 * mp.conj(X_A)))
        for beta in (1, -1):
            got = four_corner(spec_for(table, (X_A, X_B), beta))
            assert abs(got - (hol + beta * anti)) < mp.mpf(10) ** -35


def test_mixed_partial_matches_the_integrand(one_term):
    """Finite-difference d^2/dw dx of the corner sum recovers the Fourier
    series of the differential itself."""
    F, _fi, table = one_term
    prec = 200
    beta = -1
    tol = 1e-25
    with mp.workprec(prec):
        h = mp.mpf(10) ** -6
        w0, x0 = Z1[0], X_A
        w, x = Z1[1], X_B

        def Fwx(dw, dx):
            spec = DoubleIntegralSpec(table, (w0, w + dw), (x0, x + dx),
                                      beta, tol=tol, precision_bits=prec - 20)
            return four_corner(spec)

        mixed = (Fwx(h, h) - Fwx(h, -h) - Fwx(-h, h) + Fwx(-h, -h)) / (
            4 * h * h)
        # the finite differences move the endpoints along the real axis,
        # where d/dx e(m2 conj(x)) = 2 pi i m2 e(m2 conj(x)) like in the
        # holomorphic block, so both blocks reproduce their integrands;
        # the coefficient of each term is recovered as (2 pi i)^2 n1 n2 c
        sq = (2 * mp.pi * mp.mpc(0, 1)) ** 2
        Y1 = min(mp.im(w0), mp.im(w))
        Y2 = min(mp.im(x0), mp.im(x))
        expect = mp.mpc(0)
        for n1, n2, c in _hol_terms(table, Y1, Y2, tol, prec):
            expect += sq * n1 * n2 * c * _e(n1 * w + n2 * x)
        for m1, m2, c in _anti_terms(table, Y1, Y2, tol, prec):
            expect += beta * sq * m1 * m2 * c * _e(m1 * w + m2 * mp.conj(x))
        assert abs(mixed - expect) < mp.mpf(10) ** -10


def test_four_corner_approaches_the_anchored_sum(one_term):
    """Sending the far first-variable endpoint to high height turns the
    definite box into minus the anchored semi-indefinite sum."""
    _F, _fi, table = one_term
    far = mp.mpc(0, 500)
    for beta in (1, -1):
        box = four_corner(DoubleIntegralSpec(
            table, (Z1[0], far), (X_A, X_B), beta,
            tol=1e-12, precision_bits=140))
        anchored = semi_indefinite(DoubleIntegralSpec(
            table, None, (X_A, X_B), beta,
            tol=1e-12, precision_bits=140), Z1[0])
        assert abs(box + anchored) < mp.mpf(10) ** -20


def test_anti_terms_have_mixed_signature():
    E = curve199()
    from atrpoints.hmf import CoefficientTable
    table = CoefficientTable(E, 60)
    terms = _anti_terms(table, mp.mpf(1), mp.mpf(1), 1e-4, 100)
    assert terms
    for m1, m2, _c in terms:
        assert m1 > 0 and m2 < 0


def test_unit_pm_signs():
    F = make_field(5)
    u1, u2 = _unit_pm(F, 80)
    assert u1 > 0 and u2 < 0
    assert abs(u1 * u2 + 1) < mp.mpf(10) ** -18


def test_endpoints_must_be_in_the_upper_half_plane(one_term):
    _F, _fi, table = one_term
    with pytest.raises(ValueError):
        DoubleIntegralSpec(table, Z1, (X_A, mp.mpc(0, -1)), 1)
    with pytest.raises(ValueError):
        DoubleIntegralSpec(table, Z1, (X_A, X_B), 0)


# -- recognition -----------------------------------------------------------


def test_recognize_lattice_point_as_infinity():
    E = curve199()
    lat1 = period_lattice(E, 1, 96)
    lat2 = period_lattice(E, 2, 96)
    om_b = omega_beta(lat2, 1)
    with mp.workprec(130):
        g1, g2 = lat1.generators()
        J = om_b * (2 * g1 - g2) / 3
    rep = recognize(J, lat1, om_b, E, precision_bits=96)
    assert rep.conjecture_status == "recognized"
    assert rep.recognized == "infinity"
    assert rep.multiplier_m == 3
    assert rep.lattice_residual < 1e-12


def test_recognize_reports_failure_for_generic_input():
    E = curve199()
    lat1 = period_lattice(E, 1, 96)
    lat2 = period_lattice(E, 2, 96)
    om_b = omega_beta(lat2, 1)
    with mp.workprec(130):
        g1, _g2 = lat1.generators()
        J = om_b * g1 * mp.mpf("0.37192381812")
    rep = recognize(J, lat1, om_b, E, search=(6, 10 ** 4),
                    precision_bits=96)
    assert rep.conjecture_status == "unrecognized"
    assert rep.recognized is None


def test_recognize_in_F_roundtrip():
    F = make_field(5)
    x = ElementF(Q(3, 7), Q(-2, 5), 5)
    with mp.workprec(140):
        xr = x.embed(1, 140)
    got = _recognize_in_F(F, xr, 10 ** 6, 140)
    assert got == x


def test_exact_y_solves_the_curve_equation():
    E = curve199()
    x0, y0 = E.generator_hint
    x0 = ElementF.of(x0, 5)
    y0 = ElementF.of(y0, 5)
    with mp.workprec(120):
        y_num = y0.embed(1, 120)
    got = _exact_y(E, x0, y_num, 120)
    assert got == y0


def test_invariance_multiplier_on_commensurable_data():
    E = curve199()
    lat1 = period_lattice(E, 1, 96)
    lat2 = period_lattice(E, 2, 96)
    om_b = omega_beta(lat2, 1)
    with mp.workprec(130):
        g1, g2 = lat1.generators()
        diffs = [om_b * (g1 + g2) / 2, om_b * g2 / 2, om_b * (3 * g1) / 2]
        assert invariance_multiplier(diffs, lat1, om_b) == 2
        bad = [om_b * g1 * mp.mpf("0.2746281")]
        assert invariance_multiplier(bad, lat1, om_b, k_max=8) is None
