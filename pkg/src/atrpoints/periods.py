"""Period lattices at the real embeddings and the Weierstrass map.

Periods come from the complex arithmetic-geometric mean applied to the
embedded curve; the lattice is sign-normalized so the first generator is
real positive and the second purely imaginary with positive imaginary part
(rectangular convention). When the embedded discriminant is negative the
curve has one real component and the honest lattice is generated by
omega_plus and (omega_plus + omega_minus)/2; both descriptions are stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

from .errors import SingularEmbedding


@dataclass(frozen=True)
class PeriodLattice:
    omega_plus: mp.mpc
    omega_minus: mp.mpc
    covolume: mp.mpf
    rectangular: bool      # two real components at this embedding
    precision_bits: int

    def generators(self):
        """Z-basis of the honest period lattice."""
        with mp.workprec(self.precision_bits + 30):
            if self.rectangular:
                return (+self.omega_plus, +self.omega_minus)
            return (+self.omega_plus,
                    (self.omega_plus + self.omega_minus) / 2)

    def reduce(self, z):
        """Representative of z modulo the lattice, coefficients in [0,1)."""
        with mp.workprec(self.precision_bits + 30):
            g1, g2 = self.generators()
            # solve z = s*g1 + t*g2 over R
            a, b = mp.re(g1), mp.re(g2)
            c, d = mp.im(g1), mp.im(g2)
            det = a * d - b * c
            s = (mp.re(z) * d - mp.im(z) * b) / det
            t = (a * mp.im(z) - c * mp.re(z)) / det
            s -= mp.floor(s)
            t -= mp.floor(t)
            return s * g1 + t * g2

    def distance_to_lattice(self, z):
        """Euclidean distance from z to the nearest lattice point."""
        with mp.workprec(self.precision_bits + 30):
            g1, g2 = self.generators()
            w = self.reduce(z)
            best = abs(w)
            for m in (-1, 0, 1):
                for n in (-1, 0, 1):
                    best = min(best, abs(w - m * g1 - n * g2))
            return +best


def _embedded_roots(E, j, prec):
    """Roots of 4x^3 + b2 x^2 + 2 b4 x + b6 at the embedding tau_j."""
    b2, b4, b6, _b8 = E.b_invariants()
    with mp.workprec(prec + 20):
        coeffs = [mp.mpf(4), b2.embed(j, prec + 20),
                  2 * b4.embed(j, prec + 20), b6.embed(j, prec + 20)]
        roots = mp.polyroots(coeffs, maxsteps=200, extraprec=prec)
    return roots


def period_lattice(E, j, precision_bits=128) -> PeriodLattice:
    """Period lattice of E embedded by tau_j, via the AGM."""
    if precision_bits < 64:
        raise ValueError("precision_bits must be >= 64")
    prec = precision_bits + 30
    with mp.workprec(prec):
        disc = E.discriminant().embed(j, prec)
        if abs(disc) < mp.mpf(2) ** (-precision_bits // 2):
            raise SingularEmbedding("embedded discriminant numerically zero")
        roots = _embedded_roots(E, j, prec)
        if disc > 0:
            # three real roots e1 > e2 > e3; two real components
            e1, e2, e3 = sorted((mp.re(r) for r in roots), reverse=True)
            om_plus = mp.pi / mp.agm(mp.sqrt(e1 - e3), mp.sqrt(e1 - e2))
            om_minus = mp.mpc(0, 1) * mp.pi / mp.agm(
                mp.sqrt(e1 - e3), mp.sqrt(e2 - e3)
            )
            rectangular = True
        else:
            # one real root; one real component
            reals = sorted(roots, key=lambda r: abs(mp.im(r)))
            e1 = mp.re(reals[0])
            cplx = [r for r in roots if r != reals[0]]
            # write the conjugate pair as a +- bi
            a = mp.re(cplx[0])
            b = abs(mp.im(cplx[0]))
            # |e1 - (a+bi)| = sqrt((e1-a)^2 + b^2)
            A = mp.sqrt((e1 - a) ** 2 + b ** 2)
            om_plus = 2 * mp.pi / mp.agm(2 * mp.sqrt(A),
                                         mp.sqrt(2 * A + 2 * (e1 - a)))
            om_im = 2 * mp.pi / mp.agm(2 * mp.sqrt(A),
                                       mp.sqrt(2 * A - 2 * (e1 - a)))
            om_minus = mp.mpc(0, 1) * om_im
            rectangular = False
        # sign normalization is already Re > 0 / Im > 0 by construction
        om_plus = mp.mpc(mp.re(om_plus), 0)
        covol = abs(mp.im(mp.conj(om_plus) * om_minus))
        if not rectangular:
            covol = covol / 2
        out = PeriodLattice(
            omega_plus=+om_plus,
            omega_minus=+om_minus,
            covolume=+covol,
            rectangular=rectangular,
            precision_bits=precision_bits,
        )
    return out


def omega_beta(lattice2: PeriodLattice, beta: int):
    """The single secondary-embedding period selected by the twist sign."""
    if beta not in (1, -1):
        raise ValueError("beta must be +1 or -1")
    return lattice2.omega_plus if beta == 1 else lattice2.omega_minus


def _wp_and_deriv(z, g2, g3, prec):
    """Weierstrass elliptic function and derivative by Laurent series plus
    repeated argument halving: wp(z) computed at z/2^k in the series range,
    then doubled back with the duplication formula."""
    with mp.workprec(prec):
        z = mp.mpc(z)
        # halve until well inside the series disk of convergence proxy
        k = 0
        while abs(z) > mp.mpf(1) / 8 and k < 60:
            z = z / 2
            k += 1
        # Laurent coefficients c_k: c2 = g2/20, c3 = g3/28, recurrence
        nterms = max(12, prec // 8)
        c = {2: g2 / 20, 3: g3 / 28}
        for kk in range(4, nterms):
            s = mp.mpf(0)
            for m in range(2, kk - 1):
                s += c[m] * c[kk - m]
            c[kk] = 3 * s / ((2 * kk + 1) * (kk - 3))
        z2 = z * z
        wp = 1 / z2
        wpd = -2 / (z2 * z)
        zp = z2
        for kk in range(2, nterms):
            wp += c[kk] * zp
            wpd += (2 * kk - 2) * c[kk] * zp / z
            zp *= z2
        for _ in range(k):
            # duplication: the tangent at (wp, wp') with slope lam meets the
            # cubic again at (wp(2z), -wp'(2z))
            lam = (6 * wp * wp - g2 / 2) / wpd
            wp2 = lam * lam / 4 - 2 * wp
            wpd2 = lam * (wp - wp2) - wpd
            wp, wpd = wp2, wpd2
        return wp, wpd


def weierstrass_point(z, lattice: PeriodLattice, E, j, precision_bits=128):
    """Transport z in C/Lambda to a point on the embedded Weierstrass model.

    Returns None for the point at infinity (z within tolerance of the
    lattice); otherwise complex (x, y) on the a-invariant model at tau_j.
    """
    prec = precision_bits + 30
    with mp.workprec(prec):
        z = lattice.reduce(z)
        tol = mp.mpf(2) ** (-precision_bits * 3 // 4)
        if lattice.distance_to_lattice(z) < tol * max(
            abs(g) for g in lattice.generators()
        ):
            return None
        b2, b4, b6, _b8 = E.b_invariants()
        b2j = b2.embed(j, prec)
        b4j = b4.embed(j, prec)
        b6j = b6.embed(j, prec)
        # y'^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 has g-invariants after the
        # shift x = X - b2/12:
        g2 = b2j ** 2 / 12 - 2 * b4j
        g3 = -(b2j ** 3) / 216 + b2j * b4j / 6 - b6j
        wp, wpd = _wp_and_deriv(z, g2, g3, prec)
        # wp' = 2y + a1 x + a3 on the original model
        a1j = E.a1.embed(j, prec)
        a3j = E.a3.embed(j, prec)
        x = wp - b2j / 12
        y = (wpd - a1j * x - a3j) / 2
        return (+x, +y)
