"""Tests for the exact sign calculus."""

import random
from fractions import Fraction as Q

import pytest

from atrpoints.errors import AdmissibilityError
from atrpoints.nfield import ElementF, QuadExtension, make_field
from atrpoints.signs import (
    atkin_lehner_transport,
    galois_conjugation_sign,
    heegner_check,
    multiplicity_factor,
    paired_local_sign,
    parity_check,
    predicted_invariants,
    transport_composition_sign,
)

from test_ecurve import curve11_basechange, curve199, curve55109


def K_of(a, b):
    F = make_field(5)
    return QuadExtension(F, ElementF(Q(a), Q(b), 5))


def K_acc():
    return K_of(Q(-3, 2), Q(-3, 2))


# -- profile structure ---------------------------------------------------


def test_archimedean_records():
    E = curve199()
    prof = predicted_invariants(E, K_acc())
    r1, r2 = prof.record(1), prof.record(2)
    assert (r1.eta, r1.eps, r1.inv) == (-1, -1, 1)
    assert (r2.eta, r2.eps, r2.inv) == (1, 1, 1)


def test_profile_support_is_conductor_and_ramified_places():
    E = curve55109()
    K = K_acc()
    prof = predicted_invariants(E, K)
    F = E.F
    allowed = {1, 2} | {P for P, _t in E.conductor} | {
        P for P, _e in F.factor_ideal(K.rel_disc)
    }
    assert {r.place for r in prof.records} <= allowed
    # everywhere else the default record is trivial
    for p in (7, 11, 13, 19, 23):
        for P, f in F.primes_above(p):
            assert prof.record(P).inv == 1


def test_invariant_trivial_at_good_unramified_places_up_to_500():
    E = curve199()
    K = K_acc()
    F = E.F
    listed = {r.place for r in predicted_invariants(E, K).records}
    import sympy

    for p in sympy.primerange(2, 501):
        for P, _f in F.primes_above(p):
            if P.norm() > 500 or P in listed:
                continue
            assert K.eta_local(P) == 1 or K.place_splitting(P) == "ramified"
            assert paired_local_sign(E, K, P) == 1


def test_inert_conductor_prime_gives_negative_invariant():
    # the norm-199 prime is inert in K when delta is a nonresidue there
    E = curve199()
    F = E.F
    P = E.conductor[0][0]
    inert_delta = None
    for a, b in [(1, -1), (-2, -1), (3, -2), (-1, -1), (4, -3), (2, -2)]:
        K = QuadExtension(F, ElementF(Q(a), Q(b), 5))
        if K.place_splitting(P) == "inert":
            inert_delta = K
            break
    assert inert_delta is not None
    prof = predicted_invariants(E, inert_delta)
    r = prof.record(P)
    assert r.eps == -1 and r.eta == 1 and r.inv == -1
    assert P in prof.ram_set


# -- parity over a batch of admissible pairs ----------------------------


def atr_deltas():
    out = []
    for b in range(-6, 0):
        for a in range(-13, 14):
            d = ElementF(Q(a), Q(b), 5)
            if d.sign_tau(1) < 0 and d.sign_tau(2) > 0:
                out.append(d)
    for b in (-1, -3):
        for a in (-5, -3, -1, 1, 3, 5):
            d = ElementF(Q(a, 2), Q(b, 2), 5)
            if d.sign_tau(1) < 0 and d.sign_tau(2) > 0:
                out.append(d)
    return out


def admissible_pairs(count):
    """(E, K) pairs with K unramified at the conductor and an even number
    of conductor places inert in K."""
    rng = random.Random(20260824)
    curves = [curve199(), curve55109(), curve11_basechange()]
    deltas = atr_deltas()
    rng.shuffle(deltas)
    pairs = []
    for d in deltas:
        E = rng.choice(curves)
        K = QuadExtension(E.F, d)
        if not heegner_compatible(E, K):
            continue
        pairs.append((E, K))
        if len(pairs) == count:
            break
    return pairs


def heegner_compatible(E, K):
    inert = 0
    for P, _t in E.conductor:
        if P.divides(K.rel_disc):
            return False
        sp = K.place_splitting(P)
        if sp == "inert":
            inert += 1
    return inert % 2 == 0


def test_parity_for_twenty_admissible_pairs():
    pairs = admissible_pairs(20)
    assert len(pairs) == 20
    for E, K in pairs:
        prof = predicted_invariants(E, K)
        assert len(prof.ram_set) % 2 == 0
        ok, diag = parity_check(prof)
        assert ok, diag


def test_parity_fails_with_odd_inert_count():
    E = curve199()
    F = E.F
    P = E.conductor[0][0]
    for a, b in [(1, -1), (-2, -1), (3, -2), (-1, -1)]:
        K = QuadExtension(F, ElementF(Q(a), Q(b), 5))
        if K.place_splitting(P) == "inert":
            ok, diag = parity_check(predicted_invariants(E, K))
            assert not ok and "odd" in diag
            return
    pytest.fail("no inert delta in the sample")


# -- Heegner hypothesis --------------------------------------------------


def test_heegner_check_cases():
    E = curve199()
    F = E.F
    P = E.conductor[0][0]
    assert K_acc().place_splitting is not None
    split_K = None
    inert_K = None
    for a, b in [(Q(-3, 2), Q(-3, 2)), (1, -1), (-2, -1), (3, -2), (-1, -1)]:
        K = QuadExtension(F, ElementF(Q(a), Q(b), 5))
        sp = K.place_splitting(P)
        if sp == "split" and split_K is None:
            split_K = K
        if sp == "inert" and inert_K is None:
            inert_K = K
    assert heegner_check(split_K, E.conductor)
    assert not heegner_check(inert_K, E.conductor)
    # nonsplit-declared conductor wants inert, so the roles flip
    fake = [(P, "nonsplit_mult")]
    assert heegner_check(inert_K, fake)
    assert not heegner_check(split_K, fake)
    # ramified at the conductor: always rejected
    K_ram = QuadExtension(F, -P.gen)
    assert P.divides(K_ram.rel_disc)
    assert not heegner_check(K_ram, E.conductor)


# -- conjugation sign ----------------------------------------------------


def test_galois_conjugation_sign():
    assert galois_conjugation_sign(curve199()) == 1
    assert galois_conjugation_sign(curve55109()) == 1
    assert galois_conjugation_sign(curve11_basechange()) == -1
    for E in (curve199(), curve11_basechange()):
        assert galois_conjugation_sign(E) ** 2 == 1


# -- transport -----------------------------------------------------------


def test_atkin_lehner_transport_table():
    t = atkin_lehner_transport(None, "good", "split")
    assert t.scalar == 1 and not t.galois_twist
    assert atkin_lehner_transport(None, "split_mult", "inert").scalar == 1
    assert atkin_lehner_transport(None, "nonsplit_mult", "inert").scalar == -1
    t = atkin_lehner_transport(None, "split_mult", "split")
    assert t.scalar == -1 and t.galois_twist
    t = atkin_lehner_transport(None, "nonsplit_mult", "split")
    assert t.scalar == 1 and t.galois_twist
    with pytest.raises(ValueError):
        atkin_lehner_transport(None, "split_mult", "ramified")


def test_transport_composition_matches_conjugation_sign():
    """Moving through every bad-place involution plus the reflection of the
    complex factor accumulates exactly -epsilon, for random conductor
    shapes with an admissible (even) number of inert places."""
    rng = random.Random(1199)
    for _ in range(50):
        nbad = rng.randint(1, 6)
        data = [
            (rng.choice(["split_mult", "nonsplit_mult"]),
             rng.choice(["split", "inert"]))
            for _ in range(nbad)
        ]
        data += [("good", rng.choice(["split", "inert"]))
                 for _ in range(rng.randint(0, 3))]
        inert_bad = [d for d in data if d[0] != "good" and d[1] == "inert"]
        if len(inert_bad) % 2 == 1:
            # flip one splitting to restore admissibility
            i = data.index(inert_bad[0])
            data[i] = (data[i][0], "split")
        eps = 1
        for typ, _sp in data:
            eps *= -1 if typ == "split_mult" else 1
        assert transport_composition_sign(data) == -eps


def test_transport_composition_detects_odd_inert():
    data = [("split_mult", "inert")]
    eps = -1
    assert transport_composition_sign(data) != -eps


# -- multiplicity factor -------------------------------------------------


def test_multiplicity_factor_base_pair_is_power_of_two():
    E = curve199()
    pairs = admissible_pairs(6)
    for E2, K in pairs:
        if not heegner_check(K, E2.conductor):
            continue
        prof = predicted_invariants(E2, K)
        assert multiplicity_factor(prof, E2.conductor) == 2 ** len(E2.conductor)


def test_multiplicity_factor_vanishes_on_splitting_mismatch():
    E = curve199()
    F = E.F
    P = E.conductor[0][0]
    base_K = None
    row_K = None
    for a, b in [(Q(-3, 2), Q(-3, 2)), (1, -1), (-2, -1), (3, -2), (-1, -1),
                 (4, -3)]:
        K = QuadExtension(F, ElementF(Q(a), Q(b), 5))
        sp = K.place_splitting(P)
        if sp == "split" and base_K is None:
            base_K = K
        if sp == "inert" and row_K is None:
            row_K = K
    base = predicted_invariants(E, base_K)
    row = predicted_invariants(E, row_K)
    assert multiplicity_factor(base, E.conductor, row) == 0
    assert multiplicity_factor(base, E.conductor, base) == 2


def test_multiplicity_factor_empty_conductor_is_one():
    E = curve199()
    prof = predicted_invariants(E, K_acc())
    assert multiplicity_factor(prof, []) == 1


def test_ramified_conductor_place_raises():
    E = curve199()
    P = E.conductor[0][0]
    K_ram = QuadExtension(E.F, -P.gen)
    with pytest.raises(AdmissibilityError):
        predicted_invariants(E, K_ram)
