"""Bruhat-Tits tree of PGL_2 over a p-adic completion.

Vertices are homothety classes of rank-2 lattices, written in the canonical
triangular form [[p^k, u], [0, 1]] with u determined mod p^k. All arithmetic
is exact (Fraction entries), so the only truncation is the search radius of
the ambient ball; running past it raises DepthExceeded or
TruncationInsufficient rather than returning wrong answers.

A quadratic algebra Q_p[x]/(x^2 - s x + n) embeds through the companion
matrix of its generator. Each vertex then carries a level: the conductor
exponent of the order cut out in the algebra by the vertex stabilizer. The
level-0 locus reads off the splitting type (a line, a point, or an adjacent
pair), and counting orbits of level-0 geodesic segments under the action of
the algebra's unit group gives the local multiplicities used by the
coefficient scan.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import sympy

from .errors import DepthExceeded, TruncationInsufficient


def _val(p: int, x: Fraction):
    """p-adic valuation of a rational, +infinity for 0."""
    if x == 0:
        return None
    num, den = x.numerator, x.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _reduce_mod(p: int, u: Fraction, k: int) -> Fraction:
    """Canonical representative of u modulo p^k Z_p.

    Writes u = x / p^m with p not dividing x and returns the unique
    representative x' / p^m with 0 <= x' < p^(k+m); zero when u lies in
    p^k Z_p already.
    """
    v = _val(p, u)
    if v is None or v >= k:
        return Fraction(0)
    m = max(0, -v)
    mod = p ** (k + m)
    x = u * p ** m  # p-integral, but the denominator may be a unit
    t = x.numerator * pow(x.denominator, -1, mod) % mod
    return Fraction(t, p ** m)


@dataclass(frozen=True)
class TreeVertex:
    """Lattice class [[p^k, u], [0, 1]], u reduced mod p^k."""
    p: int
    k: int
    u: Fraction

    def __post_init__(self):
        object.__setattr__(self, "u", _reduce_mod(self.p, Fraction(self.u),
                                                  self.k))

    def matrix(self):
        p = Fraction(self.p)
        return ((p ** self.k, self.u), (Fraction(0), Fraction(1)))


def base_vertex(p: int) -> TreeVertex:
    return TreeVertex(p, 0, Fraction(0))


def neighbors(v: TreeVertex, depth_bound: int | None = None):
    """The q+1 adjacent lattice classes (here q = p: degree-one primes)."""
    if depth_bound is not None and distance(v, base_vertex(v.p)) >= depth_bound:
        raise DepthExceeded(
            f"vertex at distance >= {depth_bound} from the base"
        )
    p = v.p
    out = [TreeVertex(p, v.k - 1, v.u)]
    for c in range(p):
        out.append(TreeVertex(p, v.k + 1, v.u + c * Fraction(p) ** v.k))
    return out


def distance(v: TreeVertex, w: TreeVertex) -> int:
    """Tree distance: spread of the elementary divisors of M_v^-1 M_w."""
    if v.p != w.p:
        raise ValueError("vertices on different trees")
    a = w.k - v.k
    b = (w.u - v.u) / Fraction(v.p) ** v.k
    vb = _val(v.p, b)
    lo = min(0, a) if vb is None else min(0, a, vb)
    return a - 2 * lo


def ball(p: int, depth: int):
    """All vertices within the given distance of the base vertex."""
    seen = {base_vertex(p)}
    frontier = [base_vertex(p)]
    for _ in range(depth):
        nxt = []
        for v in frontier:
            for w in neighbors(v):
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return seen


@dataclass(frozen=True)
class LocalEmbeddingData:
    """Quadratic algebra Q_p[theta], theta^2 = s*theta - n, embedded in
    M_2(Q_p) by the companion matrix of its generator."""
    p: int
    s: int
    n: int

    def __post_init__(self):
        if self.disc() == 0:
            raise ValueError("degenerate quadratic algebra")

    def disc(self) -> int:
        return self.s * self.s - 4 * self.n

    def theta(self):
        return ((Fraction(0), Fraction(-self.n)),
                (Fraction(1), Fraction(self.s)))

    @property
    def splitting(self) -> str:
        p, d = self.p, self.disc()
        v = 0
        while d % p == 0:
            d //= p
            v += 1
        if v % 2 == 1:
            return "ramified"
        if v > 0:
            # the generator would not generate the maximal order
            raise ValueError("discriminant has even positive valuation; "
                             "pick a generator with squarefree-at-p disc")
        if p == 2:
            r = d % 8
            return "split" if r == 1 else ("inert" if r == 5 else "ramified")
        return "split" if sympy.legendre_symbol(d % p, p) == 1 else "inert"


def _mat_mul2(A, B):
    return (
        (A[0][0] * B[0][0] + A[0][1] * B[1][0],
         A[0][0] * B[0][1] + A[0][1] * B[1][1]),
        (A[1][0] * B[0][0] + A[1][1] * B[1][0],
         A[1][0] * B[0][1] + A[1][1] * B[1][1]),
    )


def _mat_inv2(A):
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    return ((A[1][1] / det, -A[0][1] / det),
            (-A[1][0] / det, A[0][0] / det))


def embedding_level(v: TreeVertex, emb: LocalEmbeddingData,
                    max_level: int = 40) -> int:
    """Conductor exponent of Q_p[theta] cap End(L_v): the n with
    intersection = Z_p + p^n * Z_p[theta]."""
    if v.p != emb.p:
        raise ValueError("vertex and embedding at different primes")
    M = v.matrix()
    X = _mat_mul2(_mat_inv2(M), _mat_mul2(emb.theta(), M))
    # a + b*X is integral iff b clears the off-diagonal entries and the
    # diagonal difference (a is free, the trace is already integral), so the
    # conductor exponent is the worst denominator among those three
    worst = 0
    for x in (X[0][1], X[1][0], X[0][0] - X[1][1]):
        val = _val(v.p, x)
        if val is not None:
            worst = max(worst, -val)
    if worst > max_level:
        raise TruncationInsufficient(
            f"level {worst} exceeds max_level {max_level}"
        )
    return worst


def level_zero_vertices(emb: LocalEmbeddingData, depth: int):
    return sorted(
        (v for v in ball(emb.p, depth) if embedding_level(v, emb) == 0),
        key=lambda v: (v.k, v.u),
    )


def _act(g, v: TreeVertex) -> TreeVertex:
    """Left action of g in GL_2(Q_p) on lattice classes, in canonical form:
    column-reduce g * M_v to the triangular shape."""
    p = v.p
    (a, b), (c, d) = _mat_mul2(g, v.matrix())
    # bring to [[p^k, u], [0, 1]] by column operations over Z_p (valuation
    # pivoting) and a homothety
    vc, vd = _val(p, c), _val(p, d)
    if vd is None or (vc is not None and vc < vd):
        # swap columns so the (1,1) entry has minimal valuation
        a, b = b, a
        c, d = d, c
        vc, vd = vd, vc
    # clear c with a unimodular column operation: col1 -= (c/d) col2
    t = c / d
    a, c = a - t * b, Fraction(0)
    # homothety by 1/d, then scale column 1 by a unit to a power of p
    a, b, d = a / d, b / d, Fraction(1)
    va = _val(p, a)
    return TreeVertex(p, va, b)


def _unit_group_elements(emb: LocalEmbeddingData, span: int | None = None):
    """Invertible elements a + b*theta with small integer coordinates,
    closed under the adjugate (inverse up to scalar). The span must reach
    past p so that elements of every valuation appear."""
    if span is None:
        span = emb.p
    theta = emb.theta()
    out = []
    for a, b in itertools.product(range(-span, span + 1), repeat=2):
        if b == 0:
            continue
        g = ((Fraction(a) + b * theta[0][0], b * theta[0][1]),
             (b * theta[1][0], Fraction(a) + b * theta[1][1]))
        det = g[0][0] * g[1][1] - g[0][1] * g[1][0]
        if det == 0:
            continue
        out.append(g)
        adj = ((g[1][1], -g[0][1]), (-g[1][0], g[0][0]))
        out.append(adj)
    return out


def orbit_count(emb: LocalEmbeddingData, delta: int, depth: int) -> int:
    """Number of orbits of oriented level-0 geodesic segments of length
    delta under the multiplicative action of the quadratic algebra."""
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if depth < delta + 2:
        raise TruncationInsufficient("need depth >= delta + 2")
    if emb.splitting == "ramified":
        raise ValueError("tree orbit counting needs split or inert data")
    zero = set(level_zero_vertices(emb, depth))
    if delta == 0:
        pairs = [(v, v) for v in zero]
    else:
        pairs = [(v, w) for v in zero for w in zero
                 if distance(v, w) == delta]
    if not pairs:
        raise TruncationInsufficient("no level-0 segments in the ball")
    index = {pr: i for i, pr in enumerate(pairs)}
    parent = list(range(len(pairs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj

    for g in _unit_group_elements(emb):
        for pr, i in index.items():
            img = (_act(g, pr[0]), _act(g, pr[1]))
            if img in index:
                union(i, index[img])
    return len({find(i) for i in range(len(pairs))})


def atkin_lehner_image(v: TreeVertex, delta: int) -> TreeVertex:
    """Action of [[0, p^delta], [1, 0]] on a vertex class."""
    p = Fraction(v.p)
    w = ((Fraction(0), p ** delta), (Fraction(1), Fraction(0)))
    return _act(w, v)
