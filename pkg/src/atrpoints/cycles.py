"""Toric cycle data: matrix embeddings of K, fixed points, and stabilizers.

K = F(sqrt(delta)) with tau1(delta) < 0 < tau2(delta) acts on the product of
an upper half-plane (first embedding, complex fixed point) and a geodesic in
the second (two real endpoints). The stabilizer of the geodesic modulo units
of F is generated by the relative fundamental unit, whose matrix image is the
closed-loop holonomy used by the integrator.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import mpmath as mp

from .errors import (
    AdmissibilityError,
    DegenerateFixedPoint,
    NoOptimalEmbedding,
    SingularEmbedding,
)
from .nfield import ElementF, ElementK, IdealF, QuadExtension


# -- 2x2 matrices over F as ((a, b), (c, d)) of ElementF -----------------

def mat_mul(A, B):
    (a, b), (c, d) = A
    (e, f), (g, h) = B
    return ((a * e + b * g, a * f + b * h), (c * e + d * g, c * f + d * h))


def mat_add(A, B):
    return tuple(
        tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(A, B)
    )


def mat_scale(s, A):
    return tuple(tuple(s * x for x in row) for row in A)


def mat_det(A):
    (a, b), (c, d) = A
    return a * d - b * c


def mat_trace(A):
    return A[0][0] + A[1][1]


def mat_inv(A):
    (a, b), (c, d) = A
    det = mat_det(A)
    return ((d / det, -b / det), (-c / det, a / det))


def mat_embed(A, j, prec):
    return [[complex_or_real(x, j, prec) for x in row] for row in A]


def complex_or_real(x, j, prec):
    return x.embed(j, prec)


def mobius(M, z, prec=80):
    """Action of an embedded 2x2 real/complex matrix on z (mp number)."""
    (a, b), (c, d) = M
    if z == mp.inf:
        return a / c if c != 0 else mp.inf
    den = c * z + d
    if den == 0:
        return mp.inf
    return (a * z + b) / den


@dataclass(frozen=True)
class EmbeddingQ:
    K: QuadExtension
    m_sqrt_delta: tuple          # 2x2 over F, square = delta, trace 0
    level: IdealF                # Eichler level it is optimally embedded in
    theta_s: ElementF            # O_K = O_F[theta], theta^2 = s*theta - n
    theta_n: ElementF
    kappa: int                   # theta = (s + sqrt(delta))/kappa, 1 or 2

    def q_of(self, x: ElementK):
        """Matrix image of x = a + b*sqrt(delta) in K."""
        F = self.K.base
        one = F.elem(1)
        I = ((one, F.elem(0)), (F.elem(0), one))
        return mat_add(mat_scale(x.x, I), mat_scale(x.y, self.m_sqrt_delta))

    def m_theta(self):
        """Matrix of theta = (s + sqrt(delta))/kappa."""
        return mat_scale(
            self.K.base.elem(1) / self.kappa,
            mat_add(
                mat_scale(self.theta_s, _identity(self.K.base)),
                self.m_sqrt_delta,
            ),
        )


def _identity(F):
    one = F.elem(1)
    zero = F.elem(0)
    return ((one, zero), (zero, one))


def maximal_order_params(K: QuadExtension):
    """(s, n, kappa) with O = O_F[theta], theta = (s + sqrt(delta))/kappa
    and theta^2 = s*theta - n. Prefers kappa = 2 (some s mod 2 making
    (s^2 - delta)/4 integral, the bigger dyadic order); otherwise theta is
    sqrt(delta) itself."""
    F = K.base
    cands = [
        F.elem(i) + F.elem(j) * F.omega for i in (0, 1) for j in (0, 1)
    ]
    for s in cands:
        n = (s * s - K.delta) / 4
        if n.is_integral():
            return s, n, 2
    return F.elem(0), -K.delta, 1


def build_embedding(K: QuadExtension, N_plus: IdealF) -> EmbeddingQ:
    """Embedding of O_K into the level-N_plus Eichler order (c = 0 mod
    N_plus), optimal in the sense q(K) cap R = q(O_K).

    Level one: the regular representation on the basis (1, theta). Otherwise
    q(theta) = [[r, (r(s-r)-n)/c], [c, s-r]] where c generates N_plus and r
    solves theta's minimal polynomial mod N_plus; r exists at each level
    prime exactly when it is non-inert in K, i.e. under the Heegner
    hypothesis. Smallest root representative at each prime, so the result
    is deterministic.
    """
    F = K.base
    s, n, kappa = maximal_order_params(K)
    if N_plus == F.unit_ideal():
        # regular representation of sqrt(delta) = kappa*theta - s on the
        # basis (1, theta), where M_theta = [[0, -n], [1, s]]
        mtheta = ((F.elem(0), -n), (F.elem(1), s))
        m = mat_add(
            mat_scale(F.elem(kappa), mtheta), mat_scale(-s, _identity(F))
        )
        return EmbeddingQ(K, m, N_plus, s, n, kappa)
    r = _root_mod_level(K, s, n, N_plus)
    c = N_plus.gen
    b = (r * (s - r) - n) / c
    assert b.is_integral()
    mtheta = ((r, b), (c, s - r))
    m = mat_add(
        mat_scale(F.elem(kappa), mtheta), mat_scale(-s, _identity(F))
    )
    emb = EmbeddingQ(K, m, N_plus, s, n, kappa)
    emb = _normalize_embedding(emb)
    assert _lands_in_eichler(emb)
    if not _is_optimal(emb):
        raise NoOptimalEmbedding(
            "constructed embedding is not optimal (non-maximal input order?)"
        )
    return emb


def _normalize_embedding(emb: EmbeddingQ) -> EmbeddingQ:
    """Conjugate by diag(u, 1) (u a totally positive unit) and by an integral
    translation so the fixed-point data is numerically well conditioned:
    the c-entry gets comparable absolute values at both embeddings (tall
    geodesic) and the fixed points sit near the imaginary axis. Both moves
    preserve the Eichler order, so the cycle class is unchanged."""
    import math

    F = emb.K.base
    m = emb.m_sqrt_delta
    c = m[1][0]
    if c.is_zero():
        return emb
    u = F.tp_unit
    lu = math.log(abs(float(u.embed(1, 80))))
    # want |tau1(c u^k)| ~ |tau2(c u^k)|
    ratio = math.log(
        abs(float(c.embed(1, 80))) / abs(float(c.embed(2, 80)))
    )
    k = round(-ratio / (2 * lu))
    if k:
        uk = u ** k
        (a, b), (cc, d) = m
        m = ((a, b / uk), (cc * uk, d))
    # recenter: subtract the integral translation nearest to the fixed
    # points' real parts at both embeddings
    (a, b), (cc, d) = m
    centers = []
    for j in (1, 2):
        aj = float(a.embed(j, 80))
        dj = float(d.embed(j, 80))
        cj = float(cc.embed(j, 80))
        centers.append((aj - dj) / (2 * cj))
    # t = x + y*omega with embeddings close to the centers
    w1 = float(F.omega.embed(1, 80))
    w2 = float(F.omega.embed(2, 80))
    y = round((centers[0] - centers[1]) / (w1 - w2))
    x = round(centers[0] - y * w1)
    t = F.elem(x) + F.elem(y) * F.omega
    if not t.is_zero():
        # T^{-1} m T with T = [[1, t], [0, 1]]
        at = a - t * cc
        m = ((at, at * t + b - t * d), (cc, cc * t + d))
    return EmbeddingQ(emb.K, m, emb.level, emb.theta_s, emb.theta_n,
                      emb.kappa)


def _root_mod_level(K, s, n, N_plus):
    """Element r of O_F with r^2 - s r + n = 0 mod N_plus, via per-prime
    roots and coefficient-wise CRT; N_plus must be squarefree."""
    from sympy.ntheory.residue_ntheory import sqrt_mod

    F = K.base
    # per-prime congruences on (u, v) where r = u + v*omega
    prime_moduli = {}
    for P, e in F.factor_ideal(N_plus):
        if e > 1:
            raise NoOptimalEmbedding("level must be squarefree")
        kP = F.residue_field(P)
        if kP.f != 1:
            raise NoOptimalEmbedding(
                "inert level prime: theta has no eigenvalue there"
            )
        p = int(P.norm())
        sb, nb = kP.reduce(s), kP.reduce(n)
        disc = (sb * sb - 4 * nb) % p
        rt = sqrt_mod(disc, p, all_roots=True)
        if not rt:
            raise NoOptimalEmbedding(
                f"minimal polynomial has no root mod prime of norm {p} "
                "(Heegner hypothesis fails)"
            )
        if p == 2:
            # direct scan instead of the characteristic-0 formula
            roots = [x for x in range(2) if (x * x - sb * x + nb) % 2 == 0]
            if not roots:
                raise NoOptimalEmbedding("no root mod the dyadic prime")
            root = min(roots)
        else:
            inv2 = pow(2, -1, p)
            root = min(((sb + t) * inv2) % p for t in rt)
        # omega mod P: image t with r = u + v*t = root
        t = kP.reduce(F.omega)
        prime_moduli.setdefault(p, []).append((t, root))
    # solve for (u, v) modulo each rational prime, then CRT
    u_pairs, v_pairs = [], []
    for p, congs in prime_moduli.items():
        if len(congs) == 1:
            t, root = congs[0]
            u, v = root % p, 0
        else:
            (t1, r1), (t2, r2) = congs
            # u + v t1 = r1, u + v t2 = r2 mod p with t1 != t2
            dt = (t1 - t2) % p
            v = ((r1 - r2) * pow(dt, -1, p)) % p
            u = (r1 - v * t1) % p
        u_pairs.append((u, p))
        v_pairs.append((v, p))
    from sympy.ntheory.modular import crt

    mods = [p for _u, p in u_pairs]
    u_all = int(crt(mods, [u for u, _p in u_pairs])[0])
    v_all = int(crt(mods, [v for v, _p in v_pairs])[0])
    return F.elem(u_all) + F.elem(v_all) * F.omega


def _lands_in_eichler(emb: EmbeddingQ) -> bool:
    """q(O_K) inside the upper-triangular-mod-level Eichler order."""
    F = emb.K.base
    mt = emb.m_theta()
    for row in mt:
        for x in row:
            if not x.is_integral():
                return False
    c = mt[1][0]
    return emb.level.divides(F.ideal(c)) if not c.is_zero() else True


def _is_optimal(emb: EmbeddingQ) -> bool:
    """q(K) cap R = q(O_K), by testing the half-integral refinements: the
    only modules strictly between O_K and (1/p)O_K that could appear are
    generated by (a + b*theta)/p for small primes p dividing the index
    candidates; since R is an order it is enough to rule out proper
    super-orders of O_K inside K, which all contain (a + b*theta)/p for
    some prime p with p^2 dividing disc(O_K)."""
    F = emb.K.base
    disc = emb.theta_s * emb.theta_s - 4 * emb.theta_n
    # rational prime candidates: p with P^2 | (disc) for some P above p
    from .nfield import _prime_factors

    nrm = abs(disc.norm())
    ps = _prime_factors(nrm.numerator if hasattr(nrm, "numerator") else nrm)
    mt = emb.m_theta()
    for p in sorted(set(ps)):
        for P, _f in F.primes_above(p):
            if F.valuation(P, disc) < 2:
                continue
            ginv = F.elem(1) / P.gen
            for a in F.residues_mod_power(P, 1):
                for b in F.residues_mod_power(P, 1):
                    if b.is_zero() and a.is_zero():
                        continue
                    cand = mat_scale(
                        ginv,
                        mat_add(mat_scale(a, _identity(F)),
                                mat_scale(b, mt)),
                    )
                    # in R but not in q(O_K)?
                    if b.is_zero():
                        continue  # scalar refinements live in F, not new
                    if not (b * ginv).is_integral() and _in_eichler(
                        cand, emb.level
                    ):
                        return False
    return True


def _in_eichler(M, level: IdealF) -> bool:
    from .nfield import make_field

    for row in M:
        for x in row:
            if not x.is_integral():
                return False
    c = M[1][0]
    if c.is_zero():
        return True
    return level.divides(make_field(c.D).ideal(c))


@dataclass(frozen=True)
class GeodesicCycle:
    z1_star: mp.mpc              # fixed point, Im > 0, first embedding
    endpoints: tuple             # (z2, z2prime) real (mp numbers or inf)
    gamma_eps: tuple             # matrix of the relative fundamental unit
    orientation: int             # +1 or -1
    conjugated: bool = False     # bookkeeping flag set by conjugation_flip
    prec: int = 80


def cycle_data(q: EmbeddingQ, prec: int = 80) -> GeodesicCycle:
    """Fixed point at tau1, geodesic endpoints at tau2, stabilizer matrix."""
    K = q.K
    if not K.is_pipeline_admissible():
        raise AdmissibilityError("cycle data requires the ATR signature")
    m = q.m_sqrt_delta
    with mp.workprec(prec + 20):
        # tau1: m acts with complex conjugate fixed points
        a, b = (x.embed(1, prec + 20) for x in m[0])
        c, d = (x.embed(1, prec + 20) for x in m[1])
        if c == 0:
            raise DegenerateFixedPoint("c = 0 at tau1 for an ATR delta")
        disc1 = (d - a) ** 2 + 4 * b * c
        if disc1 >= 0:
            raise DegenerateFixedPoint(
                "real fixed points at tau1 contradict admissibility"
            )
        z1 = ((a - d) + mp.sqrt(mp.mpc(disc1))) / (2 * c)
        if mp.im(z1) < 0:
            z1 = mp.conj(z1)
        # tau2: two real endpoints
        a2, b2 = (x.embed(2, prec + 20) for x in m[0])
        c2, d2 = (x.embed(2, prec + 20) for x in m[1])
        if c2 == 0:
            endpoints = (mp.inf, -b2 / (a2 - d2))
        else:
            disc2 = (d2 - a2) ** 2 + 4 * b2 * c2
            if disc2 <= 0:
                raise DegenerateFixedPoint(
                    "complex fixed points at tau2 contradict admissibility"
                )
            r = mp.sqrt(disc2)
            endpoints = (
                ((a2 - d2) + r) / (2 * c2),
                ((a2 - d2) - r) / (2 * c2),
            )
        u = K.relative_fund_unit()
        gamma = q.q_of(u)
        det = mat_det(gamma)
        if not (det.is_integral() and det.is_totally_positive()
                and abs(det.norm()) == 1):
            raise SingularEmbedding(
                "stabilizer determinant is not a totally positive unit"
            )
        return GeodesicCycle(
            z1_star=+z1,
            endpoints=tuple(
                e if e == mp.inf else +e for e in endpoints
            ),
            gamma_eps=gamma,
            orientation=1,
            prec=prec,
        )


def orientation_transport(cycle: GeodesicCycle, u: int, beta: int) -> int:
    """Sign picked up when the orbit is moved to the u-component of the
    real torus; the nontrivial component only matters for the odd twist."""
    if u not in (1, -1) or beta not in (1, -1):
        raise ValueError("u and beta must be +-1")
    if u == 1:
        return 1
    return 1 if beta == 1 else -1


def conjugation_flip(cycle: GeodesicCycle) -> GeodesicCycle:
    """Complex conjugation on the first factor: same endpoints, reversed
    orientation (one circle factor), conjugation flag toggled."""
    return replace(
        cycle,
        orientation=-cycle.orientation,
        conjugated=not cycle.conjugated,
    )
