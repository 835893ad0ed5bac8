"""Binary quadratic form class groups for imaginary quadratic orders.

Forms (a, b, c) of discriminant D = b^2 - 4ac < 0 represent ideal classes;
composition realizes the group law.  Also here: Hurwitz class numbers, the
coefficient height bound used to size the CRT prime set, and optimal
polycyclic presentations computed by a table-driven generic group algorithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import mpmath

from .arith import SMALL_PRIMES, factorize, is_prime, kronecker, sqrt_mod, valuation

HEIGHT_C = 2114.567  # bounds |j(tau) - 1/q| on the fundamental domain

# prime norms available for presentation generators; matches the shipped
# modular polynomial database
GENERATOR_NORM_BOUND = 47


class NeedMoreGenerators(Exception):
    """Candidate generator list exhausted before the table reached h(D)."""


@dataclass(frozen=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def D(self):
        return self.b * self.b - 4 * self.a * self.c

    def is_primitive(self):
        return math.gcd(math.gcd(self.a, self.b), self.c) == 1

    def is_reduced(self):
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if b < 0 and (abs(b) == a or a == c):
            return False
        return a > 0

    def opposite(self):
        return reduce_form(QuadForm(self.a, -self.b, self.c))

    def key(self):
        return (self.a, self.b)


def principal_form(D: int) -> QuadForm:
    k = D & 1
    return QuadForm(1, k, (k - D) // 4)


def _normalize(a, b, c):
    r = (a - b) // (2 * a)
    b2 = b + 2 * r * a
    return a, b2, a * r * r + b * r + c


def reduce_form(f: QuadForm) -> QuadForm:
    """The unique reduced form equivalent to f (D < 0, a > 0)."""
    a, b, c = f.a, f.b, f.c
    if a <= 0 or b * b - 4 * a * c >= 0:
        raise ValueError("need a positive definite form")
    if math.gcd(math.gcd(a, b), c) != 1:
        raise ValueError("form is not primitive")
    a, b, c = _normalize(a, b, c)
    while a > c or (a == c and b < 0):
        s = (c + b) // (2 * c)
        a, b, c = c, -b + 2 * s * c, c * s * s - b * s + a
    return QuadForm(a, b, c)


def _solve_linmod(a, b, m):
    """x with a*x = b (mod m), as (x0, modulus-of-solutions)."""
    g, d, _ = gmpy2.gcdext(a, m)
    g = int(g)
    q, r = divmod(b, g)
    if r != 0:
        raise ValueError("no solution")
    return q * int(d) % m, m // g


def _square(a, b, c):
    mu, _ = _solve_linmod(b, c, a)
    A = a * a
    B = b - 2 * a * mu
    C = mu * mu - (b * mu - c) // a
    return A, B, C


def compose(f: QuadForm, g: QuadForm) -> QuadForm:
    """Reduced Gauss composite of two forms of the same discriminant."""
    if f.D != g.D:
        raise ValueError("mismatched discriminants")
    if f.a == g.a and f.b == g.b and f.c == g.c:
        A, B, C = _square(f.a, f.b, f.c)
        return reduce_form(QuadForm(A, B, C))
    a1, b1, c1 = f.a, f.b, f.c
    a2, b2, c2 = g.a, g.b, g.c
    s = (b1 + b2) // 2
    h = -(b1 - b2) // 2
    w = math.gcd(math.gcd(a1, a2), s)
    j = w
    t = a1 // w
    u = a2 // w
    v = s // w
    mu, nu = _solve_linmod(u * v, h * v + t * c1, t * u)
    lam, _ = _solve_linmod(u * nu, h - u * mu, t)
    k = mu + nu * lam
    ell = (k * u - h) // t
    m = (u * v * k - h * v - c1 * t) // (t * u)
    A = t * u
    B = j * v - (k * u + ell * t)
    C = k * ell - j * m
    return reduce_form(QuadForm(A, B, C))


def form_pow(f: QuadForm, n: int) -> QuadForm:
    r = principal_form(f.D)
    base = reduce_form(f)
    while n > 0:
        if n & 1:
            r = compose(r, base)
        n >>= 1
        if n:
            base = compose(base, base)
    return r


def prime_form(ell: int, D: int):
    """The canonical form (ell, b, c) with 0 <= b <= ell, or None.

    None signals kronecker(D, ell) = -1; a ValueError signals ell dividing
    the conductor of D (no primitive form with norm ell exists).
    """
    if kronecker(D, ell) == -1:
        return None
    if ell == 2:
        m8 = D % 8
        if m8 == 1:
            b = 1
        elif m8 == 0:
            b = 0
        else:  # D = 4 mod 8
            b = 2
    else:
        r = sqrt_mod(D % ell, ell)
        if r is None:  # can happen only when ell | D at depth > 1
            raise ValueError(f"{ell} divides the conductor of {D}")
        b = r if (r - D) % 2 == 0 else ell - r
    if (b * b - D) % (4 * ell) != 0:
        raise ValueError(f"{ell} divides the conductor of {D}")
    c = (b * b - D) // (4 * ell)
    form = QuadForm(ell, b, c)
    if not form.is_primitive():
        raise ValueError(f"{ell} divides the conductor of {D}")
    return form


def validate_discriminant(D: int):
    if D >= 0 or D % 4 not in (0, 1):
        raise ValueError(f"{D} is not a negative discriminant")


def _spf_table(limit):
    spf = list(range(limit))
    for i in range(2, int(limit**0.5) + 1):
        if spf[i] == i:
            for k in range(i * i, limit, i):
                if spf[k] == k:
                    spf[k] = i
    return spf


def _sqrts_mod_2k(D, k):
    """All solutions of x^2 = D (mod 2^k)."""
    sols = [x for x in range(min(2, 1 << k)) if (x * x - D) % (1 << min(k, 2)) == 0]
    mod = 1 << min(k, 1)
    if k >= 2:
        sols = [x for x in range(4) if (x * x - D) % 4 == 0]
        mod = 4
    for j in range(2, k):
        m2 = mod << 1
        sols = sorted(
            {y % m2 for x in sols for y in (x, x + mod) if (y * y - D) % m2 == 0}
        )
        mod = m2
    return sols


def _sqrts_mod_pk(D, p, k):
    """All solutions of x^2 = D (mod p^k), p an odd prime."""
    pk = p**k
    a = D % pk
    if a == 0:
        step = p ** ((k + 1) // 2)
        return list(range(0, pk, step))
    v = valuation(a, p)
    if v >= k:
        step = p ** ((k + 1) // 2)
        return list(range(0, pk, step))
    if v % 2 == 1:
        return []
    unit = a // p**v
    ku = k - v
    r = sqrt_mod(unit % p, p)
    if r is None:
        return []
    # Hensel lift the unit root to p^ku
    mod = p
    while mod < p**ku:
        mod2 = min(mod * mod, p**ku)
        f = (r * r - unit) % mod2
        r = (r - f * pow(2 * r, -1, mod2)) % mod2
        mod = mod2
    half = p ** (v // 2)
    base = p ** (ku + v // 2)
    out = set()
    for root in (r, (p**ku) - r):
        x0 = root * half % pk
        for i in range(p ** (v - v // 2)):
            out.add((x0 + i * base) % pk)
    return sorted(x for x in out if (x * x - a) % pk == 0)


def _sqrts_mod(D, m, spf):
    """All x in [0, m) with x^2 = D (mod m); m >= 1 with spf table cover."""
    parts = []
    mm = m
    k2 = 0
    while mm % 2 == 0:
        mm //= 2
        k2 += 1
    if k2:
        parts.append((1 << k2, _sqrts_mod_2k(D, k2)))
    while mm > 1:
        p = spf[mm]
        k = 0
        while mm % p == 0:
            mm //= p
            k += 1
        parts.append((p**k, _sqrts_mod_pk(D, p, k)))
    sols = [0]
    mod = 1
    for q, rs in parts:
        if not rs:
            return []
        qinv = pow(mod, -1, q) if mod > 1 else 1
        sols = [x + mod * ((r - x) * qinv % q) for x in sols for r in rs]
        mod *= q
    return sorted(s % m for s in sols)


_FORMS_CACHE = {}


def reduced_forms(D: int):
    """All primitive reduced forms of discriminant D, sorted by (a, b)."""
    validate_discriminant(D)
    if D in _FORMS_CACHE:
        return _FORMS_CACHE[D]
    amax = math.isqrt(-D // 3)
    spf = _spf_table(4 * amax + 5)
    out = []
    for a in range(1, amax + 1):
        fa = 4 * a
        for b in _sqrts_mod(D, fa, spf):
            if b > a:
                b -= fa  # want |b| <= a
                if b < -a:
                    continue
            c, rem = divmod(b * b - D, fa)
            if rem or c < a:
                continue
            if b < 0 and (-b == a or a == c):
                continue
            if math.gcd(math.gcd(a, abs(b)), c) == 1:
                out.append(QuadForm(a, b, c))
    out.sort(key=lambda f: (f.a, f.b))
    out = tuple(out)
    if len(_FORMS_CACHE) > 64:
        _FORMS_CACHE.clear()
    _FORMS_CACHE[D] = out
    return out


def class_number(D: int) -> int:
    return len(reduced_forms(D))


_FUND_CACHE = {}


def fundamental_decomposition(D: int):
    """(D0, u) with D = u^2 * D0 and D0 a fundamental discriminant."""
    validate_discriminant(D)
    if D in _FUND_CACHE:
        return _FUND_CACHE[D]
    fac = factorize(-D)
    d0 = 1
    u = 1
    for q, e in fac.factors:
        if e % 2:
            d0 *= q
        u *= q ** (e // 2)
    D0 = -d0
    if D0 % 4 != 1:
        D0 *= 4
        if u % 2:
            raise ValueError(f"{D} is not a discriminant")
        u //= 2
    assert u * u * D0 == D
    if len(_FUND_CACHE) > 4096:
        _FUND_CACHE.clear()
    _FUND_CACHE[D] = (D0, u)
    return D0, u


def unit_count(D0: int) -> int:
    """w(D0): units in the order of fundamental discriminant D0."""
    if D0 == -3:
        return 6
    if D0 == -4:
        return 4
    return 2


def hurwitz_number(D: int, v: int = 1) -> Fraction:
    """Hurwitz class number H(-v^2 D), by the multiplicative formula."""
    validate_discriminant(D)
    D0, u = fundamental_decomposition(D)
    h0 = class_number(D0)
    w = unit_count(D0)
    out = Fraction(2 * h0, w)
    for q, e in factorize(u * v).factors:
        chi = kronecker(D0, q)
        out *= 1 + Fraction((q**e - 1) * (q - chi), q - 1)
    return out


@dataclass(frozen=True)
class HeightBound:
    b: int  # ceil(lg B) + 2; never an underestimate
    h: int
    form_norms: tuple


def height_bound(D: int) -> HeightBound:
    """Bit bound b = lg(B) + 2 on the class polynomial coefficients.

    Computed in log space at 256-bit precision with explicit upward slack,
    so the returned integer never underestimates.
    """
    if D >= -4:
        raise ValueError("need D < -4")
    forms = reduced_forms(D)
    h = len(forms)
    with mpmath.workprec(256):
        pi_sqrt = mpmath.pi * mpmath.sqrt(-D)
        ln2 = mpmath.ln(2)
        lg_sum = mpmath.mpf(0)
        for f in forms:
            x = pi_sqrt / f.a
            lg_sum += x / ln2 + mpmath.log(1 + HEIGHT_C * mpmath.exp(-x), 2)
        x_h = pi_sqrt / forms[-1].a
        M_h = mpmath.exp(x_h) + HEIGHT_C
        m = int((h + 1) / (M_h + 1))
        lg_b = lg_sum - m * (x_h / ln2 + mpmath.log(1 + HEIGHT_C * mpmath.exp(-x_h), 2))
        if m:
            lg_b += (
                mpmath.loggamma(h + 1)
                - mpmath.loggamma(m + 1)
                - mpmath.loggamma(h - m + 1)
            ) / ln2
        # upward slack dominating the accumulated rounding error
        lg_b += abs(lg_b) * mpmath.mpf(2) ** -180 * (h + 4) + mpmath.mpf(2) ** -60
        b = int(mpmath.ceil(lg_b)) + 2
    return HeightBound(b=b, h=h, form_norms=tuple(f.a for f in forms))


@dataclass(frozen=True)
class PolycyclicPresentation:
    """Minimal polycyclic presentation of cl(D) from norm-ordered generators."""

    D: int
    norms: tuple  # ell_1..ell_k
    rel_orders: tuple  # r_1..r_k, all > 1, product = h
    relations: tuple  # s_1..s_k encoding the power relations
    class_number: int

    def decode(self, s: int):
        """Exponent vector (x_1..x_k) with Z(x) = s."""
        out = []
        for r in self.rel_orders:
            out.append(s % r)
            s //= r
        return tuple(out)

    def power_relation_word(self, i: int):
        """Exponents x with alpha_i^{r_i} = prod alpha_j^{x_j}."""
        return self.decode(self.relations[i])


def default_norm_candidates(D: int, u: int):
    """Prime norms ell <= 47 usable as generators: split or ramified, not
    dividing the conductor."""
    out = []
    for ell in SMALL_PRIMES:
        if ell > GENERATOR_NORM_BOUND:
            break
        if u % ell == 0:
            continue
        if kronecker(D, ell) != -1:
            try:
                if prime_form(ell, D) is not None:
                    out.append(ell)
            except ValueError:
                continue
    return out


def polycyclic_presentation(D: int, cost_order=None, h: int | None = None, stats=None):
    """Optimal polycyclic presentation from generators in cost order.

    Runs the generic table algorithm: for each candidate generator, powers
    are composed against the current table until a collision, inserting one
    full coset per miss.  Exactly h(D) table insertions occur.  Generators
    with relative order 1 are dropped from the returned presentation.
    """
    validate_discriminant(D)
    if h is None:
        h = class_number(D)
    if cost_order is None:
        _, u = fundamental_decomposition(D)
        cost_order = default_norm_candidates(D, u)
    table = [principal_form(D)]
    index = {table[0].key(): 0}
    insertions = 1
    norms, rel_orders, relations = [], [], []
    for ell in cost_order:
        if len(table) >= h:
            break
        gamma = prime_form(ell, D)
        if gamma is None:
            continue
        beta = gamma
        r = 1
        N = len(table)
        while True:
            hit = index.get(beta.key())
            if hit is not None:
                s = hit
                break
            for j in range(N):
                elt = beta if j == 0 else compose(beta, table[j])
                index[elt.key()] = len(table)
                table.append(elt)
                insertions += 1
            beta = compose(beta, gamma)
            r += 1
        if r > 1:
            norms.append(ell)
            rel_orders.append(r)
            relations.append(s)
    if stats is not None:
        stats["insertions"] = insertions
    if len(table) != h:
        raise NeedMoreGenerators(
            f"generators with norm <= {GENERATOR_NORM_BOUND} span only "
            f"{len(table)} of {h} classes of D={D}"
        )
    return PolycyclicPresentation(
        D=D,
        norms=tuple(norms),
        rel_orders=tuple(rel_orders),
        relations=tuple(relations),
        class_number=h,
    )
