"""Fourier coefficient table of the weight-(2,2) form attached to a curve.

The table maps integral ideals of norm <= bound to exact integer Hecke
eigenvalues, built from prime traces via multiplicativity and the standard
recurrence. Fourier indices are the totally positive elements of the inverse
different, enumerated by exponential magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

import mpmath as mp
import sympy

from .errors import TableTooSmall
from .nfield import ElementF, IdealF, RealQuadraticField


@dataclass(frozen=True)
class FourierIndex:
    nu: ElementF          # totally positive element of the inverse different
    ideal: IdealF         # (nu) * different, integral
    emb: tuple            # (tau1(nu), tau2(nu)) as mpf


class CoefficientTable:
    """Ideal-indexed eigenvalue table a_m, exact integers."""

    def __init__(self, curve, bound: int):
        if bound < 1:
            raise ValueError("bound must be >= 1")
        self.curve = curve
        self.bound = bound
        self.F = curve.F
        self.table = {}
        self._build()

    def _build(self):
        F = self.F
        bound = self.bound
        # prime-power blocks: for each prime P of norm <= bound, the list
        # [(P^k, a_{P^k})] for all k with N(P^k) <= bound
        blocks = []
        for p in sympy.primerange(2, bound + 1):
            for P, _f in F.primes_above(p):
                Np = int(P.norm())
                if Np > bound:
                    continue
                aP = self.curve.a_P(P)
                bad = self.curve.conductor_type(P) is not None
                powers = []
                ideal_pow = P
                a_prev, a_cur = 1, aP
                k = 1
                while ideal_pow.norm() <= bound:
                    powers.append((ideal_pow, a_cur))
                    ideal_pow = ideal_pow * P
                    if bad:
                        a_prev, a_cur = a_cur, a_cur * aP
                    else:
                        a_prev, a_cur = a_cur, aP * a_cur - Np * a_prev
                    k += 1
                blocks.append(powers)
        self.table = {F.unit_ideal(): 1}
        for powers in blocks:
            current = list(self.table.items())
            for ideal_pow, a_pk in powers:
                npk = ideal_pow.norm()
                for m, a_m in current:
                    if m.norm() * npk <= self.bound:
                        self.table[m * ideal_pow] = a_m * a_pk

    def a(self, m: IdealF) -> int:
        try:
            return self.table[m]
        except KeyError:
            raise TableTooSmall(
                f"ideal of norm {m.norm()} not in table (bound {self.bound})"
            )

    def __contains__(self, m):
        return m in self.table

    def __len__(self):
        return len(self.table)

    # -- cache file: one record per line "norm u v a_m", where the canonical
    # -- generator is u + v*omega (integers)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(f"# D={self.F.D} bound={self.bound}\n")
            for m in sorted(self.table,
                            key=lambda I: (I.norm(), str(I.gen))):
                u, v = m.gen.omega_coords()
                fh.write(f"{m.norm()} {u} {v} {self.table[m]}\n")

    @classmethod
    def load(cls, curve, bound, path):
        self = cls.__new__(cls)
        self.curve = curve
        self.bound = bound
        self.F = curve.F
        self.table = {}
        F = self.F
        with open(path) as fh:
            header = fh.readline().strip()
            if header != f"# D={F.D} bound={bound}":
                raise ValueError(f"cache header mismatch: {header!r}")
            for line in fh:
                _n, u, v, a_m = line.split()
                gen = F.elem(Fraction(u)) + F.elem(Fraction(v)) * F.omega
                self.table[F.ideal(gen)] = int(a_m)
        return self


def build_table(curve, bound: int) -> CoefficientTable:
    return CoefficientTable(curve, bound)


def enumerate_indices(F: RealQuadraticField, box) -> Iterator[FourierIndex]:
    """Totally positive nu in the inverse different with slowly decaying
    exponential weight: exp(-2pi(tau1(nu) Y1 + tau2(nu) Y2)) >= tol.

    Complete: the qualifying set lies in the triangle x1 Y1 + x2 Y2 <= L,
    x1, x2 > 0 in the embedding plane; we cover it with an exact integer
    coefficient box and filter.
    """
    Y1, Y2, tol = box
    if not (Y1 > 0 and Y2 > 0 and 0 < tol < 1):
        raise ValueError("need Y1, Y2 > 0 and 0 < tol < 1")
    L = float(math.log(1.0 / tol) / (2 * math.pi))
    d = F.different_gen
    prec = 80
    # nu = (m + n*omega)/d; embedding matrix columns for 1/d and omega/d
    with mp.workprec(prec):
        a1, a2 = (1 / d.embed(1, prec)), (1 / d.embed(2, prec))
        b1 = F.omega.embed(1, prec) / d.embed(1, prec)
        b2 = F.omega.embed(2, prec) / d.embed(2, prec)
        det = a1 * b2 - a2 * b1
        # map triangle corners (0,0), (L/Y1,0), (0,L/Y2) back to (m,n)
        corners = []
        for x1, x2 in ((0, 0), (L / Y1, 0), (0, L / Y2)):
            m_c = (x1 * b2 - x2 * b1) / det
            n_c = (a1 * x2 - a2 * x1) / det
            corners.append((m_c, n_c))
        m_lo = int(mp.floor(min(c[0] for c in corners))) - 2
        m_hi = int(mp.ceil(max(c[0] for c in corners))) + 2
        n_lo = int(mp.floor(min(c[1] for c in corners))) - 2
        n_hi = int(mp.ceil(max(c[1] for c in corners))) + 2
    if (m_hi - m_lo + 1) * (n_hi - n_lo + 1) > 4 * 10 ** 7:
        raise ValueError(
            "index box of %d x %d cells is infeasible; the integration "
            "geometry is too degenerate for this tolerance"
            % (m_hi - m_lo + 1, n_hi - n_lo + 1)
        )
    out = []
    for m in range(m_lo, m_hi + 1):
        for n in range(n_lo, n_hi + 1):
            if m == 0 and n == 0:
                continue
            nu = (F.elem(m) + F.elem(n) * F.omega) / d
            if nu.sign_tau(1) <= 0 or nu.sign_tau(2) <= 0:
                continue
            with mp.workprec(prec):
                t1 = nu.embed(1, prec)
                t2 = nu.embed(2, prec)
                if t1 * Y1 + t2 * Y2 > L:
                    continue
                emb = (mp.mpf(t1), mp.mpf(t2))
            out.append(FourierIndex(nu, F.ideal(nu * d), emb))
    # fixed deterministic order: by ideal norm, then embedding
    out.sort(key=lambda fi: (fi.ideal.norm(), fi.emb[0]))
    yield from out
