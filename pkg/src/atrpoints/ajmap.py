"""Numerical Abel-Jacobi integration along geodesic cycles.

The differential attached to the coefficient table is integrated through its
Fourier antiderivative: every term a_nu/((2pi i)^2 nu1 nu2) e(nu1 z1 + nu2 z2)
is an exact antiderivative in both variables, so definite integrals become
alternating sums over the corners of the integration box. The first variable
sits at the complex fixed point of the cycle (or is taken from the formal
cusp, the semi-indefinite variant); the second runs along a path between a
basepoint and its image under the stabilizer. The twist sign beta selects
how the anti-holomorphic block in the second variable is folded in.

The anti-holomorphic block is a genuine Fourier series of its own: its
indices are the mixed-signature elements mu of the inverse different with
tau1(mu) > 0 > tau2(mu). Since the fundamental unit u has norm -1, these are
exactly mu = u * nu with nu totally positive (normalize u so tau1(u) > 0),
and the coefficient attached to mu is the one of the ideal (mu) = (nu). The
term shape is a_mu / ((2 pi i)^2 mu1 mu2) e(mu1 z1 + mu2 conj(z2)); note
mu1 mu2 = -nu1 nu2, which is where the relative sign between the two blocks
comes from.

The value J is well defined modulo a rank-2 lattice commensurable with
Lambda_1 * Omega^beta; recognition reduces multiples of J to the fundamental
domain and attempts exact reconstruction of the Weierstrass coordinates.

Working normalization: J is the bare corner sum above (no extra powers of
2 pi i, no discriminant factor); recognize() folds all unknown rational
scalars into the integer multiplier m and reports the m it used.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import mpmath as mp

from .cycles import GeodesicCycle, mat_embed, mobius
from .hmf import CoefficientTable, enumerate_indices
from .nfield import ElementF, sqrt_in_F
from .periods import PeriodLattice, weierstrass_point


@dataclass(frozen=True)
class DoubleIntegralSpec:
    table: CoefficientTable
    z1: Optional[tuple]        # (w1, w2) with Im > 0, or None for indefinite
    z2: tuple                  # (x1, x2) with Im > 0
    beta: int
    tol: float = 1e-12
    precision_bits: int = 80

    def __post_init__(self):
        if self.beta not in (1, -1):
            raise ValueError("beta must be +-1")
        if not (0 < self.tol < 1e-4):
            raise ValueError("tol must be in (0, 1e-4)")
        pts = list(self.z2) + (list(self.z1) if self.z1 is not None else [])
        for z in pts:
            if not mp.im(z) > 0:
                raise ValueError("endpoints must be in the upper half-plane")


def _e(x):
    return mp.exp(2 * mp.pi * mp.mpc(0, 1) * x)


def _unit_pm(F, prec):
    """Embeddings of the fundamental unit, normalized to tau1 > 0. The unit
    has norm -1 for every field in the pipeline, so tau2 < 0."""
    with mp.workprec(prec):
        u = F.fund_unit
        u1 = u.embed(1, prec)
        u2 = u.embed(2, prec)
        if u1 < 0:
            u1, u2 = -u1, -u2
        if not (u1 > 0 and u2 < 0):
            raise ValueError("fundamental unit is not of mixed signature")
        return u1, u2


def _hol_terms(table, Y1, Y2, tol, prec):
    """(nu1, nu2, a_nu/((2 pi i)^2 nu1 nu2)) over totally positive indices
    that can beat the truncation weight, in the fixed deterministic order."""
    out = []
    with mp.workprec(prec):
        norm = (2 * mp.pi * mp.mpc(0, 1)) ** 2
        for fi in enumerate_indices(table.F, (float(Y1), float(Y2), tol)):
            a = table.a(fi.ideal)
            if a == 0:
                continue
            n1 = fi.nu.embed(1, prec)
            n2 = fi.nu.embed(2, prec)
            out.append((n1, n2, a / (norm * n1 * n2)))
    return out


def _anti_terms(table, Y1, Y2, tol, prec):
    """(mu1, mu2, a_mu/((2 pi i)^2 mu1 mu2)) over the mixed-signature
    indices mu = u * nu, tau1(mu) > 0 > tau2(mu). The exponential weight of
    mu at heights (Y1, Y2) is that of nu at (u1*Y1, |u2|*Y2)."""
    out = []
    with mp.workprec(prec):
        u1, u2 = _unit_pm(table.F, prec)
        norm = (2 * mp.pi * mp.mpc(0, 1)) ** 2
        box = (float(u1 * Y1), float(-u2 * Y2), tol)
        for fi in enumerate_indices(table.F, box):
            a = table.a(fi.ideal)
            if a == 0:
                continue
            m1 = u1 * fi.nu.embed(1, prec)
            m2 = u2 * fi.nu.embed(2, prec)
            out.append((m1, m2, a / (norm * m1 * m2)))
    return out


def four_corner(spec: DoubleIntegralSpec):
    """Definite double integral over the box z1 in (w1, w2), z2 in (x1, x2),
    as the alternating corner sum of the Fourier antiderivative."""
    if spec.z1 is None:
        raise ValueError("four_corner needs finite first-variable endpoints")
    w1, w2 = spec.z1
    x1, x2 = spec.z2
    prec = spec.precision_bits + 20
    with mp.workprec(prec):
        Y1 = min(mp.im(w1), mp.im(w2))
        Y2 = min(mp.im(x1), mp.im(x2))
        total = mp.mpc(0)
        for n1, n2, c in _hol_terms(spec.table, Y1, Y2, spec.tol, prec):
            f1 = _e(n1 * w2) - _e(n1 * w1)
            if f1 == 0:
                continue
            total += c * f1 * (_e(n2 * x2) - _e(n2 * x1))
        for m1, m2, c in _anti_terms(spec.table, Y1, Y2, spec.tol, prec):
            f1 = _e(m1 * w2) - _e(m1 * w1)
            if f1 == 0:
                continue
            total += spec.beta * c * f1 * (
                _e(m2 * mp.conj(x2)) - _e(m2 * mp.conj(x1)))
        return +total


def semi_indefinite(spec: DoubleIntegralSpec, z1_eval):
    """First variable anchored at z1_eval with the other endpoint at the
    formal cusp (where every Fourier term vanishes), second variable along
    the path x1 -> x2."""
    if spec.z1 is not None:
        raise ValueError("spec must carry the indefinite first variable")
    if not mp.im(z1_eval) > 0:
        raise ValueError("z1_eval must be in the upper half-plane")
    x1, x2 = spec.z2
    prec = spec.precision_bits + 20
    with mp.workprec(prec):
        Y1 = mp.im(z1_eval)
        Y2 = min(mp.im(x1), mp.im(x2))
        total = mp.mpc(0)
        for n1, n2, c in _hol_terms(spec.table, Y1, Y2, spec.tol, prec):
            total += c * _e(n1 * z1_eval) * (_e(n2 * x2) - _e(n2 * x1))
        for m1, m2, c in _anti_terms(spec.table, Y1, Y2, spec.tol, prec):
            total += spec.beta * c * _e(m1 * z1_eval) * (
                _e(m2 * mp.conj(x2)) - _e(m2 * mp.conj(x1)))
        return +total


def choose_basepoint(cycle: GeodesicCycle, precision_bits: int = 80,
                     samples: int = 60):
    """Point on the geodesic semicircle maximizing the smaller of its own
    height and the height of its stabilizer image; high heights keep the
    Fourier truncation short."""
    prec = precision_bits + 20
    with mp.workprec(prec):
        e1, e2 = cycle.endpoints
        center = (e1 + e2) / 2
        rad = abs(e1 - e2) / 2
        g = mat_embed(cycle.gamma_eps, 2, prec)
        best = None
        for j in range(1, samples):
            t = mp.pi * j / samples
            w = center + rad * mp.exp(mp.mpc(0, 1) * t)
            gw = mobius(g, w, prec)
            score = min(mp.im(w), mp.im(gw))
            if best is None or score > best[0]:
                best = (score, +w)
        return best[1]


def darmon_J(cycle: GeodesicCycle, table: CoefficientTable, beta: int,
             w, precision_bits: int = 80, tol: float = 1e-12, w_ref=None):
    """Integral along the cycle: first variable at the complex fixed point,
    second from the basepoint w to its stabilizer image.

    The cusp-anchored antiderivative is not invariant under the stabilizer
    (the defect is a cusp-to-cusp partial period of the form), so the raw
    corner sum depends on w. Passing a reference basepoint w_ref pins the
    integration chain: the two correction legs w_ref -> w and
    gamma(w_ref) -> gamma(w) telescope the defect away exactly, and the
    result is independent of w. With w_ref=None the basepoint itself
    anchors the chain (the raw sum)."""
    prec = precision_bits + 20
    with mp.workprec(prec):
        g = mat_embed(cycle.gamma_eps, 2, prec)
        w = mp.mpc(w)
        gw = mobius(g, w, prec)
        if not mp.im(gw) > 0:
            raise ValueError("stabilizer image of w left the upper half-plane")

        def leg(x1, x2):
            if x1 == x2:
                return mp.mpc(0)
            spec = DoubleIntegralSpec(table, None, (x1, x2), beta,
                                      tol=tol, precision_bits=precision_bits)
            return semi_indefinite(spec, cycle.z1_star)

        J = leg(w, gw)
        if w_ref is not None:
            wr = mp.mpc(w_ref)
            gwr = mobius(g, wr, prec)
            if not mp.im(gwr) > 0:
                raise ValueError("stabilizer image of w_ref left the upper "
                                 "half-plane")
            J += leg(wr, w) - leg(gwr, gw)
        return +(cycle.orientation * J)


def invariance_multiplier(diffs, lat1: PeriodLattice, omega_b,
                          k_max: int = 24, tol_factor: float = 1e-8):
    """Smallest k such that k * (every difference) / Omega^beta lies in
    Lambda_1 within tol_factor * covolume; None if no k <= k_max works.
    Certifies that the differences generate a lattice commensurable with
    Lambda_1 * Omega^beta."""
    with mp.workprec(lat1.precision_bits + 30):
        tol = tol_factor * lat1.covolume
        for k in range(1, k_max + 1):
            if all(
                lat1.distance_to_lattice(k * d / omega_b) < tol
                for d in diffs
            ):
                return k
    return None


@dataclass
class DarmonPointReport:
    J: object
    J_normalized: object
    lattice_residual: float
    multiplier_m: int
    recognized: object                 # None, "infinity", or (x, y) in F^2
    conjecture_status: str             # "recognized" | "unrecognized"
    precision_bits: int = 80
    normalization: str = "J/Omega^beta; rational scalars folded into m"
    basepoints: tuple = ()


def _recognize_in_F(F, xr, height_max, prec):
    """Integer-relation reconstruction of a real number as an element of F."""
    with mp.workprec(prec):
        s = mp.sqrt(F.D)
        rel = mp.pslq([mp.mpf(1), s, xr, xr * s], maxcoeff=height_max,
                      maxsteps=20000)
    if rel is None:
        return None
    a, b, c, d = rel
    den = ElementF(c, d, F.D)
    if den.is_zero():
        return None
    cand = -ElementF(a, b, F.D) / den
    with mp.workprec(prec):
        if abs(cand.embed(1, prec) - xr) > mp.mpf(2) ** (-prec // 2):
            return None
    return cand


def _exact_y(E, x, y_num, prec):
    """Solve the curve equation for y over F at exact x, picking the root
    matching the numeric value; None if the point is not F-rational."""
    b = E.a1 * x + E.a3
    c = -(x * x * x + E.a2 * x * x + E.a4 * x + E.a6)
    disc = b * b - 4 * c
    r = sqrt_in_F(E.F, disc)
    if r is None:
        return None
    best = None
    with mp.workprec(prec):
        for sign in (1, -1):
            y = (-b + sign * r) / 2
            err = abs(y.embed(1, prec) - y_num)
            if best is None or err < best[0]:
                best = (err, y)
        if best[0] > mp.mpf(10) ** -6 * max(1, abs(y_num)):
            return None
    return best[1]


def recognize(J, lat1: PeriodLattice, omega_b, E,
              search=(24, 10 ** 6), precision_bits: int = 80) -> DarmonPointReport:
    """Scan integer multiples of J/Omega^beta for an algebraic point."""
    m_max, height_max = search
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    prec = precision_bits + 20
    with mp.workprec(prec):
        Jn = J / omega_b
        g1, g2 = lat1.generators()
        scale = max(abs(g1), abs(g2))
        inf_tol = mp.mpf(2) ** (-precision_bits // 2)
        best_resid = mp.inf
        for m in range(1, m_max + 1):
            z = m * Jn
            d = lat1.distance_to_lattice(z) / scale
            best_resid = min(best_resid, d)
            if d < inf_tol:
                return DarmonPointReport(
                    J=+J, J_normalized=+Jn, lattice_residual=float(d),
                    multiplier_m=m, recognized="infinity",
                    conjecture_status="recognized",
                    precision_bits=precision_bits,
                )
            pt = weierstrass_point(z, lat1, E, 1, precision_bits)
            if pt is None:
                continue
            xn, yn = pt
            if abs(mp.im(xn)) > mp.mpf(10) ** -8 * max(1, abs(xn)):
                continue
            x = _recognize_in_F(E.F, mp.re(xn), height_max, prec)
            if x is None:
                continue
            y = _exact_y(E, x, mp.re(yn), prec)
            if y is None:
                continue
            assert E.is_on_curve((x, y))
            return DarmonPointReport(
                J=+J, J_normalized=+Jn, lattice_residual=float(d),
                multiplier_m=m, recognized=(x, y),
                conjecture_status="recognized",
                precision_bits=precision_bits,
            )
        return DarmonPointReport(
            J=+J, J_normalized=+Jn, lattice_residual=float(best_resid),
            multiplier_m=m_max, recognized=None,
            conjecture_status="unrecognized",
            precision_bits=precision_bits,
        )
