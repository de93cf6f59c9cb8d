"""One-off generator for the narrow-class-number table shipped in nfield.py.

Counts proper equivalence classes of primitive indefinite binary quadratic
forms of the field discriminant (form class group = narrow class group).
Reduced forms are grouped into reduction cycles; #cycles = h^+.
"""
import math
from sympy import isprime


def squarefree(n):
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


def reduced_forms(disc):
    out = []
    s = math.isqrt(disc)
    for b in range(1, s + 1):
        if (b - disc) % 2 != 0:
            continue
        # b^2 - 4ac = disc -> ac = (b^2 - disc)/4 < 0
        prod4 = b * b - disc
        if prod4 >= 0:
            continue
        ac = prod4 // 4
        for a in range(1, s + 1):
            for sa in (a, -a):
                if ac % sa != 0:
                    continue
                c = ac // sa
                # reduced iff |sqrt(disc) - 2|a|| < b < sqrt(disc)
                if b * b >= disc:
                    continue
                t = abs(2 * abs(sa) - math.isqrt(disc) - 1)
                # exact check: (sqrt(disc)-2|a|)^2 < b^2 and b^2 < disc
                lhs = disc + 4 * sa * sa - 4 * abs(sa) * math.isqrt(disc)
                # avoid float: condition |sqrt(D)-2|a|| < b  <=>
                # (2|a| - b)^2 < disc and (2|a| + b)^2 > disc
                if (2 * abs(sa) - b) ** 2 < disc and (2 * abs(sa) + b) ** 2 > disc:
                    g = math.gcd(math.gcd(abs(sa), b), abs(c))
                    if g == 1:
                        out.append((sa, b, c))
    return set(out)


def rho(form, disc):
    a, b, c = form
    # next form: (c, b', c') with b' = -b + 2|c|*m chosen so that
    # sqrt(disc) - 2|c| < b' < sqrt(disc)
    s = math.isqrt(disc)
    twoc = 2 * abs(c)
    # smallest b' > sqrt(disc) - 2|c| congruent to -b mod 2|c|
    lo = s - twoc + 1
    r = (-b - lo) % twoc
    bp = lo + r
    while (2 * abs(c) - bp) ** 2 >= disc or bp <= 0:
        bp += twoc
    cp = (bp * bp - disc) // (4 * c)
    return (c, bp, cp)


def h_plus(disc):
    forms = reduced_forms(disc)
    seen = set()
    cycles = 0
    for f in sorted(forms):
        if f in seen:
            continue
        cycles += 1
        g = f
        while True:
            seen.add(g)
            g = rho(g, disc)
            if g == f:
                break
    return cycles


res = []
for D in range(2, 101):
    if not squarefree(D):
        continue
    disc = D if D % 4 == 1 else 4 * D
    h = h_plus(disc)
    res.append((D, h))
    print(D, h)

print("narrow h+ = 1:", sorted(D for D, h in res if h == 1))
