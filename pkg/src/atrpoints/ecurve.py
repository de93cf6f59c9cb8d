"""Elliptic curves over F: reduction data, Frobenius traces, root numbers.

Curves are given by global Weierstrass coefficients in O_F together with a
declared squarefree conductor (list of primes with multiplicative reduction
type). The declaration is re-verified from scratch: good reduction by the
discriminant, multiplicative type by the tangent-cone square test at the
singular point of the reduced curve. Additive reduction is a hard error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import AdditiveReduction, NormBoundExceeded
from .nfield import ElementF, IdealF, RealQuadraticField, residue_char


@dataclass
class EllipticCurveF:
    F: RealQuadraticField
    a1: ElementF
    a2: ElementF
    a3: ElementF
    a4: ElementF
    a6: ElementF
    conductor: list  # [(IdealF, "split_mult" | "nonsplit_mult"), ...]
    generator_hint: Optional[tuple] = None  # (x, y) in F^2
    norm_bound: int = 10 ** 4
    _ap_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for a in (self.a1, self.a2, self.a3, self.a4, self.a6):
            if not a.is_integral():
                raise ValueError("Weierstrass coefficients must be integral")
        if self.discriminant().is_zero():
            raise ValueError("singular curve: discriminant is zero")
        seen = set()
        for P, typ in self.conductor:
            if typ not in ("split_mult", "nonsplit_mult"):
                raise AdditiveReduction(
                    f"unsupported reduction type {typ!r} at {P!r}"
                )
            if P in seen:
                raise ValueError("conductor must be squarefree")
            seen.add(P)
            got = self.reduction_type(P)
            if got != typ:
                raise ValueError(
                    f"declared reduction {typ} at {P!r} but recomputed {got}"
                )
        # every prime dividing the discriminant must be declared
        for P, _e in self.F.factor_ideal(self.F.ideal(self.discriminant())):
            if P not in seen:
                got = self.reduction_type(P)
                if got != "good":
                    raise ValueError(
                        f"undeclared bad prime {P!r} (type {got})"
                    )

    # -- invariants ----------------------------------------------------

    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = (
            a1 * a1 * a6
            + 4 * a2 * a6
            - a1 * a3 * a4
            + a2 * a3 * a3
            - a4 * a4
        )
        return b2, b4, b6, b8

    def c_invariants(self):
        b2, b4, b6, _b8 = self.b_invariants()
        c4 = b2 * b2 - 24 * b4
        c6 = -b2 * b2 * b2 + 36 * b2 * b4 - 216 * b6
        return c4, c6

    def discriminant(self) -> ElementF:
        b2, b4, b6, b8 = self.b_invariants()
        return (
            -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
        )

    def conductor_ideal(self) -> IdealF:
        out = self.F.unit_ideal()
        for P, _t in self.conductor:
            out = out * P
        return out

    def conductor_type(self, P: IdealF):
        for Q, typ in self.conductor:
            if Q == P:
                return typ
        return None

    # -- reduction -----------------------------------------------------

    def reduction_type(self, P: IdealF) -> str:
        """good / split_mult / nonsplit_mult, or AdditiveReduction."""
        F = self.F
        if F.valuation(P, self.discriminant()) == 0:
            return "good"
        k = F.residue_field(P)
        a1, a2, a3, a4, a6 = (k.reduce(a) for a in
                              (self.a1, self.a2, self.a3, self.a4, self.a6))
        sing = self._singular_point(k, a1, a2, a3, a4, a6)
        if sing is None:  # pragma: no cover
            raise AdditiveReduction("no singular point found mod P")
        r, t = sing
        # translate the singular point to the origin (Weierstrass transform
        # with u=1, s=0): only a1', a2' feed the tangent cone
        A1 = a1
        A2 = k.add(a2, k.mul(k.int_embed(3), r))
        A3 = k.add(a3, k.add(k.mul(r, a1), k.mul(k.int_embed(2), t)))
        if not k.is_zero(A3):
            raise AdditiveReduction("translated a3 nonzero at singular point")
        # tangent cone y^2 + A1 x y - A2 x^2: node iff it has two distinct
        # roots; split iff both slopes live in the residue field
        if k.p == 2:
            roots = sum(
                1
                for T in k.elements()
                if k.is_zero(
                    k.add(k.mul(T, T), k.sub(k.mul(A1, T), A2))
                )
            )
            if roots == 2:
                return "split_mult"
            if roots == 0:
                return "nonsplit_mult"
            raise AdditiveReduction("cusp at residue characteristic 2")
        disc = k.add(k.mul(A1, A1), k.mul(k.int_embed(4), A2))
        ch = k.chi(disc)
        if ch == 1:
            return "split_mult"
        if ch == -1:
            return "nonsplit_mult"
        raise AdditiveReduction("vanishing tangent-cone discriminant (cusp)")

    def _singular_point(self, k, a1, a2, a3, a4, a6):
        """Singular point of the reduced curve over k(P).

        Odd characteristic: complete the square, then the singular x is the
        multiple root of g(x) = 4x^3 + b2 x^2 + 2 b4 x + b6, located as the
        root of gcd(g, g'). Characteristic 2: the residue field has at most
        4 elements, scan.
        """
        if k.p != 2:
            b2 = k.add(k.mul(a1, a1), k.mul(k.int_embed(4), a2))
            b4 = k.add(k.mul(k.int_embed(2), a4), k.mul(a1, a3))
            b6 = k.add(k.mul(a3, a3), k.mul(k.int_embed(4), a6))
            g = [b6, k.mul(k.int_embed(2), b4), b2, k.int_embed(4)]
            gp = [k.mul(k.int_embed(2), b4), k.mul(k.int_embed(2), b2),
                  k.int_embed(12)]
            h = _poly_gcd(k, g, gp)
            if len(h) != 2:
                # multiple-root structure beyond a simple node
                raise AdditiveReduction(
                    "reduced cubic has a root of multiplicity > 2"
                )
            r = k.neg(k.mul(h[0], k.inv(h[1])))
            # y from 2y + a1 x + a3 = 0
            y = k.neg(
                k.mul(k.add(k.mul(a1, r), a3), k.inv(k.int_embed(2)))
            )
            return (r, y)
        return self._singular_point_scan(k, a1, a2, a3, a4, a6)

    def _singular_point_scan(self, k, a1, a2, a3, a4, a6):
        for x in k.elements():
            x2 = k.mul(x, x)
            rhs = k.add(
                k.add(k.mul(x2, x), k.mul(a2, x2)),
                k.add(k.mul(a4, x), a6),
            )
            for y in k.elements():
                lhs = k.add(
                    k.mul(y, y), k.add(k.mul(k.mul(a1, x), y), k.mul(a3, y))
                )
                if lhs != rhs:
                    continue
                # partial derivatives
                fy = k.add(
                    k.add(k.mul(k.int_embed(2), y), k.mul(a1, x)), a3
                )
                fx = k.sub(
                    k.mul(a1, y),
                    k.add(
                        k.add(
                            k.mul(k.int_embed(3), x2),
                            k.mul(k.mul(k.int_embed(2), a2), x),
                        ),
                        a4,
                    ),
                )
                if k.is_zero(fy) and k.is_zero(fx):
                    return (x, y)
        return None

    # -- point counts / eigenvalues -------------------------------------

    def a_P(self, P: IdealF) -> int:
        """Frobenius trace at good P (naive count), +-1 at conductor primes."""
        if P in self._ap_cache:
            return self._ap_cache[P]
        typ = self.conductor_type(P)
        if typ == "split_mult":
            out = 1
        elif typ == "nonsplit_mult":
            out = -1
        else:
            if P.norm() > self.norm_bound:
                raise NormBoundExceeded(
                    f"N(P) = {P.norm()} exceeds bound {self.norm_bound}"
                )
            rt = self.reduction_type(P)
            if rt != "good":
                raise AdditiveReduction(
                    f"undeclared bad reduction {rt} at {P!r}"
                )
            out = int(P.norm()) + 1 - self._point_count(P)
        self._ap_cache[P] = out
        return out

    def _point_count(self, P: IdealF) -> int:
        k = self.F.residue_field(P)
        a1, a2, a3, a4, a6 = (k.reduce(a) for a in
                              (self.a1, self.a2, self.a3, self.a4, self.a6))
        count = 1  # point at infinity
        if k.p == 2:
            for x in k.elements():
                x2 = k.mul(x, x)
                rhs = k.add(
                    k.add(k.mul(x2, x), k.mul(a2, x2)),
                    k.add(k.mul(a4, x), a6),
                )
                for y in k.elements():
                    lhs = k.add(
                        k.mul(y, y),
                        k.add(k.mul(k.mul(a1, x), y), k.mul(a3, y)),
                    )
                    if lhs == rhs:
                        count += 1
            return count
        # odd characteristic: complete the square;
        # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
        b2 = k.add(k.mul(a1, a1), k.mul(k.int_embed(4), a2))
        b4 = k.add(k.mul(k.int_embed(2), a4), k.mul(a1, a3))
        b6 = k.add(k.mul(a3, a3), k.mul(k.int_embed(4), a6))
        if k.f == 1:
            # precomputed character table is the fast path
            p = k.p
            chi = [0] * p
            for t in range(1, p):
                chi[(t * t) % p] = 1
            for t in range(1, p):
                if chi[t] == 0:
                    chi[t] = -1
            chi[0] = 0
            b2i, b4i, b6i = b2, b4, b6
            for x in range(p):
                r = (4 * x * x * x + b2i * x * x + 2 * b4i * x + b6i) % p
                count += 1 + chi[r]
            return count
        for x in k.elements():
            x2 = k.mul(x, x)
            r = k.add(
                k.add(k.mul(k.int_embed(4), k.mul(x2, x)), k.mul(b2, x2)),
                k.add(k.mul(k.mul(k.int_embed(2), b4), x), b6),
            )
            count += 1 + k.chi(r)
        return count

    # -- root numbers ----------------------------------------------------

    def local_root_number(self, v) -> int:
        """v = 1 or 2 (archimedean) or an IdealF prime."""
        if v in (1, 2):
            return -1
        typ = self.conductor_type(v)
        if typ is None:
            rt = self.reduction_type(v)
            if rt != "good":
                raise AdditiveReduction(f"additive place {v!r}")
            return 1
        return -1 if typ == "split_mult" else 1

    def global_root_number(self) -> int:
        eps = self.local_root_number(1) * self.local_root_number(2)
        for P, _t in self.conductor:
            eps *= self.local_root_number(P)
        return eps

    # -- exact group law over F ------------------------------------------

    def is_on_curve(self, pt) -> bool:
        if pt is None:
            return True
        x, y = pt
        lhs = y * y + self.a1 * x * y + self.a3 * y
        rhs = x * x * x + self.a2 * x * x + self.a4 * x + self.a6
        return lhs == rhs

    def neg_point(self, pt):
        if pt is None:
            return None
        x, y = pt
        return (x, -y - self.a1 * x - self.a3)

    def add_points(self, p1, p2):
        """Exact chord-tangent addition on the general Weierstrass model."""
        if p1 is None:
            return p2
        if p2 is None:
            return p1
        x1, y1 = p1
        x2, y2 = p2
        a1, a2, a3, a4, a6 = self.a1, self.a2, self.a3, self.a4, self.a6
        if x1 == x2:
            if y2 == -y1 - a1 * x1 - a3:
                return None
            lam = (3 * x1 * x1 + 2 * a2 * x1 + a4 - a1 * y1) / (
                2 * y1 + a1 * x1 + a3
            )
            nu = y1 - lam * x1
        else:
            lam = (y2 - y1) / (x2 - x1)
            nu = y1 - lam * x1
        x3 = lam * lam + a1 * lam - a2 - x1 - x2
        y3 = -(lam + a1) * x3 - nu - a3
        return (x3, y3)

    def mul_point(self, n: int, pt):
        if n < 0:
            return self.mul_point(-n, self.neg_point(pt))
        out = None
        base = pt
        while n:
            if n & 1:
                out = self.add_points(out, base)
            base = self.add_points(base, base)
            n >>= 1
        return out


def _poly_trim(k, f):
    while f and k.is_zero(f[-1]):
        f = f[:-1]
    return f


def _poly_mod(k, f, g):
    """Remainder of f by g over the residue field k; g nonzero."""
    f = list(f)
    dg = len(g) - 1
    lead_inv = k.inv(g[-1])
    while len(f) - 1 >= dg and f:
        c = k.mul(f[-1], lead_inv)
        shift = len(f) - 1 - dg
        for i, gi in enumerate(g):
            f[shift + i] = k.sub(f[shift + i], k.mul(c, gi))
        f = _poly_trim(k, f)
        if not f:
            break
    return f


def _poly_gcd(k, f, g):
    """Monic gcd of two polynomials over the residue field k."""
    f = _poly_trim(k, list(f))
    g = _poly_trim(k, list(g))
    while g:
        f, g = g, _poly_mod(k, f, g)
    if f:
        c = k.inv(f[-1])
        f = [k.mul(c, x) for x in f]
    return f


def curve_from_a_invariants(F, ai, conductor, generator_hint=None,
                            norm_bound=10 ** 4) -> EllipticCurveF:
    a1, a2, a3, a4, a6 = (ElementF.of(a, F.D) for a in ai)
    return EllipticCurveF(F, a1, a2, a3, a4, a6, conductor,
                          generator_hint=generator_hint,
                          norm_bound=norm_bound)
