"""Exact sign calculus: local invariants of the auxiliary quaternion algebra,
parity and splitting checks, conjugation signs, and the multiplicity factor
that decides in advance whether a coefficient-scan row can be nonzero.

Places are denoted 1, 2 for the archimedean embeddings and by prime ideals
otherwise. Everything is exact integer arithmetic on +-1 data: eta is the
local norm character of K/F evaluated at -1, eps is the local sign of the
curve paired with K (so at a multiplicative place it is -1 exactly when the
place is inert in K, and at a complex archimedean place it is -1), and the
prescribed invariant is their product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import AdmissibilityError
from .nfield import QuadExtension


@dataclass(frozen=True)
class PlaceRecord:
    place: object          # 1, 2 or IdealF
    eta: int               # local norm character of K/F at -1
    eps: int               # local sign of the (curve, K) pair
    inv: int               # prescribed local invariant, eta * eps


@dataclass
class SignProfile:
    records: list          # PlaceRecord for every place that can matter
    global_eps: int = 1    # global root number of the curve itself
    ram_set: list = field(init=False)

    def __post_init__(self):
        self.ram_set = [r.place for r in self.records if r.inv == -1]

    def record(self, place):
        for r in self.records:
            if r.place == place:
                return r
        return PlaceRecord(place, 1, 1, 1)


def paired_local_sign(E, K: QuadExtension, v) -> int:
    """Local sign of the curve paired with the quadratic extension: the
    product of the local root number and the root number of the twist by
    the character of K/F. Good places contribute +1, a multiplicative place
    contributes -1 exactly when inert in K, a complex archimedean place
    contributes -1."""
    if v in (1, 2):
        return -1 if K.arch_type[v] == "ramified" else 1
    typ = E.conductor_type(v)
    if typ is None:
        return 1
    sp = K.place_splitting(v)
    if sp == "ramified":
        raise AdmissibilityError(
            "conductor place ramifies in K; pairing sign undefined here"
        )
    return -1 if sp == "inert" else 1


def predicted_invariants(E, K: QuadExtension, r: int = 2) -> SignProfile:
    """Local invariant prescription for the auxiliary algebra attached to
    (E, K): inv_v = eta_v * eps_v at every place. The places listed are the
    ones where either factor can be -1: both archimedean places, conductor
    support, and primes ramified in K/F."""
    if r != 2:
        raise NotImplementedError("only the two-embedding pipeline")
    F = E.F
    if K.base is not F:
        raise ValueError("curve and extension live over different fields")
    records = []
    for j in (1, 2):
        eta = K.eta_local(j)
        eps = paired_local_sign(E, K, j)
        records.append(PlaceRecord(j, eta, eps, eta * eps))
    finite = {P for P, _t in E.conductor}
    for P, _e in F.factor_ideal(K.rel_disc):
        finite.add(P)
    for P in sorted(finite,
                    key=lambda P: (int(P.norm()), P.gen.omega_coords())):
        eta = K.eta_local(P)
        if E.conductor_type(P) is None:
            # good reduction: no local obstruction, the paired sign equals
            # eta so the invariant is +1
            eps = eta
        else:
            eps = paired_local_sign(E, K, P)
        records.append(PlaceRecord(P, eta, eps, eta * eps))
    return SignProfile(records, global_eps=E.global_root_number())


def parity_check(profile: SignProfile):
    """(ok, diagnostic): the ramification set must have even size and the
    reconstructed global sign -prod_v eta_v * inv_v must equal -1."""
    even = len(profile.ram_set) % 2 == 0
    prod = 1
    for r in profile.records:
        prod *= r.eta * r.inv
    sign_ok = (-prod) == -1
    msgs = []
    if not even:
        msgs.append(f"odd ramification set of size {len(profile.ram_set)}")
    if not sign_ok:
        msgs.append(f"reconstructed global sign {-prod} != -1")
    return even and sign_ok, "; ".join(msgs) or "ok"


def heegner_check(K: QuadExtension, conductor) -> bool:
    """Splitting hypothesis: split-multiplicative primes split in K, the
    remaining conductor primes are inert, and K/F is unramified at the
    whole conductor."""
    for P, typ in conductor:
        if P.divides(K.rel_disc):
            return False
        want = "split" if typ == "split_mult" else "inert"
        if K.place_splitting(P) != want:
            return False
    return True


def galois_conjugation_sign(E) -> int:
    """Eigenvalue of complex conjugation on the traced point: -eps."""
    return -E.global_root_number()


@dataclass(frozen=True)
class Transport:
    """Symbolic effect of the level involution at one place on a point:
    a scalar in {+1, -1} and an optional Galois twist label."""
    scalar: int
    galois_twist: bool = False


def atkin_lehner_transport(v, reduction_type: str, splitting: str) -> Transport:
    """Action of the local involution at v (trivial-cocycle convention):
    identity away from the conductor, sign -eps_v at inert multiplicative
    places, and eps_v composed with a Galois twist at split ones. Here
    eps_v is the local root number of the curve at v."""
    if reduction_type == "good":
        return Transport(1)
    eps = -1 if reduction_type == "split_mult" else 1
    if splitting == "inert":
        return Transport(-eps)
    if splitting == "split":
        return Transport(eps, galois_twist=True)
    raise ValueError("conductor places must be unramified in K")


def multiplicity_factor(base_profile: SignProfile, conductor,
                        row_profile: SignProfile | None = None) -> int:
    """prod over conductor places of (1 + inv_v * eps_v), where inv_v comes
    from the fixed base algebra and eps_v from the row's own extension
    (defaulting to the base pair): 0 as soon as one local sign disagrees,
    else 2^(number of conductor places)."""
    if row_profile is None:
        row_profile = base_profile
    out = 1
    for P, _typ in conductor:
        out *= 1 + base_profile.record(P).inv * row_profile.record(P).eps
    return out


def transport_composition_sign(conductor_data, r: int = 2) -> int:
    """Total conjugation sign accumulated by moving a point through the
    involutions at every bad place and reflecting the first complex factor:
    (-1)^(r-1) * prod over inert places of (-eps_v) * prod over split
    places of eps_v. conductor_data is a list of (reduction_type, splitting)
    pairs."""
    sign = (-1) ** (r - 1)
    for typ, splitting in conductor_data:
        t = atkin_lehner_transport(None, typ, splitting)
        sign *= t.scalar
    return sign
