"""Elliptic curve arithmetic over F_p and the trace-targeted curve search.

Points are affine tuples (x, y) with None as the identity; curves are short
Weierstrass y^2 = x^3 + Ax + B.  The search for a curve with a prescribed
Frobenius trace samples torsion-constrained families (Tate normal form
parametrizations of X1(N)), filters batches with a shared-inversion
double-and-add chain, and confirms survivors with an order test that never
needs the actual point count.
"""

from __future__ import annotations

from dataclasses import dataclass

from .arith import FACTORED_ONE, FactoredInteger, Stream, batch_inverse, sqrt_mod
from .polyring import ModPoly, roots


@dataclass(frozen=True)
class Curve:
    p: int
    A: int
    B: int

    def __post_init__(self):
        if (4 * self.A**3 + 27 * self.B**2) % self.p == 0:
            raise ValueError("singular curve")

    def j_invariant(self):
        p = self.p
        num = 6912 * self.A**3 % p
        den = (4 * self.A**3 + 27 * self.B**2) % p
        return num * pow(den, p - 2, p) % p

    def is_on(self, P):
        if P is None:
            return True
        x, y = P
        return (y * y - x * x * x - self.A * x - self.B) % self.p == 0


def ec_neg(P, p):
    return None if P is None else (P[0], (-P[1]) % p)


def ec_add(P, Q, A, p):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        num = (3 * x1 * x1 + A) % p
        den = 2 * y1 % p
    else:
        num = (y2 - y1) % p
        den = (x2 - x1) % p
    lam = num * pow(den, p - 2, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return (x3, (lam * (x1 - x3) - y1) % p)


def _naf(n):
    """Signed binary digits of n, least significant first."""
    out = []
    while n:
        if n & 1:
            d = 2 - (n & 3)
            n -= d
        else:
            d = 0
        out.append(d)
        n >>= 1
    return out


def scalar_mul(n, P, E: Curve):
    """nP on E; signed-digit double-and-add."""
    if n < 0:
        n, P = -n, ec_neg(P, E.p)
    if n == 0 or P is None:
        return None
    A, p = E.A, E.p
    acc = None
    R = P
    for d in _naf(n):
        if d == 1:
            acc = ec_add(acc, R, A, p)
        elif d == -1:
            acc = ec_add(acc, ec_neg(R, p), A, p)
        R = ec_add(R, R, A, p)
        if R is None:
            # remaining digits contribute nothing
            break
    return acc


def batch_scalar_mul(n, points, curves):
    """nP_i for many (P_i, E_i) over the same field, in lockstep.

    All curves must share one modulus p.  Each double-and-add step performs
    a single shared inversion across the batch; elements that hit a group-law
    exception (identity or equal x) fall back to the scalar path.
    """
    if not points:
        return []
    p = curves[0].p
    if any(E.p != p for E in curves):
        raise ValueError("batch requires a common modulus")
    if n == 0:
        return [None] * len(points)
    neg = n < 0
    n = abs(n)
    digits = _naf(n)
    acc = [None] * len(points)
    run = list(points)
    fallback = set(i for i, P in enumerate(points) if P is None)
    for step, d in enumerate(digits):
        if d:
            # acc_i += +-run_i
            idx, dens = [], []
            for i in range(len(points)):
                if i in fallback:
                    continue
                Q = run[i] if d == 1 else ec_neg(run[i], p)
                if acc[i] is None:
                    acc[i] = Q
                    continue
                if acc[i][0] == Q[0]:
                    fallback.add(i)
                    continue
                idx.append((i, Q))
                dens.append((Q[0] - acc[i][0]) % p)
            if dens:
                invs = batch_inverse(dens, p)
                for (i, Q), inv in zip(idx, invs):
                    x1, y1 = acc[i]
                    lam = (Q[1] - y1) * inv % p
                    x3 = (lam * lam - x1 - Q[0]) % p
                    acc[i] = (x3, (lam * (x1 - x3) - y1) % p)
        if step == len(digits) - 1:
            break
        idx, dens = [], []
        for i in range(len(points)):
            if i in fallback or run[i] is None:
                continue
            if run[i][1] == 0:
                run[i] = None
                continue
            idx.append(i)
            dens.append(2 * run[i][1] % p)
        if dens:
            invs = batch_inverse(dens, p)
            for i, inv in zip(idx, invs):
                x1, y1 = run[i]
                lam = (3 * x1 * x1 + curves[i].A) * inv % p
                x3 = (lam * lam - 2 * x1) % p
                run[i] = (x3, (lam * (x1 - x3) - y1) % p)
    out = []
    sign = -1 if neg else 1
    for i in range(len(points)):
        if i in fallback:
            out.append(scalar_mul(sign * n, points[i], curves[i]))
        else:
            out.append(acc[i] if not neg else ec_neg(acc[i], p))
    return out


def random_point(E: Curve, rng: Stream):
    p = E.p
    while True:
        x = rng.randrange(p)
        f = (x * x * x + E.A * x + E.B) % p
        if f == 0:
            return (x, 0)
        if pow(f, (p - 1) // 2, p) == 1:
            y = sqrt_mod(f, p)
            return (x, y if rng.randrange(2) else p - y)


def quadratic_twist(E: Curve, rng: Stream) -> Curve:
    p = E.p
    while True:
        d = rng.randrange(2, p)
        if pow(d, (p - 1) // 2, p) == p - 1:
            return Curve(p, E.A * d * d % p, E.B * d * d % p * d % p)


def fast_order(P, E: Curve, N: FactoredInteger):
    """Factored order of P when it divides N, else None.

    Prime-power case probes q^i P for increasing i; composite N splits into
    coprime halves balanced by the number of distinct primes.
    """
    if N.omega == 0:
        return FACTORED_ONE if P is None else None
    if N.omega == 1:
        q, n = N.factors[0]
        Q = P
        for i in range(n + 1):
            if Q is None:
                return FactoredInteger(q**i, ((q, i),) if i else ())
            if i == n:
                return None
            Q = scalar_mul(q, Q, E)
        return None
    half = N.omega // 2
    f1 = FactoredInteger(
        _prod(N.factors[:half]), N.factors[:half]
    )
    f2 = FactoredInteger(_prod(N.factors[half:]), N.factors[half:])
    m1 = fast_order(scalar_mul(f2.n, P, E), E, f1)
    if m1 is None:
        return None
    m2 = fast_order(scalar_mul(f1.n, P, E), E, f2)
    if m2 is None:
        return None
    return m1.times(m2)


def _prod(factors):
    out = 1
    for q, e in factors:
        out *= q**e
    return out


def count_points_naive(E: Curve) -> int:
    """Exhaustive #E(F_p); for tiny p and test oracles."""
    p = E.p
    n = 1
    for x in range(p):
        f = (x * x * x + E.A * x + E.B) % p
        if f == 0:
            n += 1
        elif pow(f, (p - 1) // 2, p) == 1:
            n += 2
    return n


def test_curve_order(E: Curve, N0: FactoredInteger, N1: FactoredInteger,
                     rng: Stream, first_point=None) -> bool:
    """True iff #E is N0 or N1, given N0 < N1, N0 + N1 = 2p + 2, both in the
    Hasse interval.  Random points on E and its twist rule candidates out
    until the surviving arithmetic progression pins the order down."""
    p = E.p
    if N0.n + N1.n != 2 * p + 2 or N0.n >= N1.n:
        raise ValueError("need N0 < N1 with N0 + N1 = 2p + 2")
    if p <= 11:
        return count_points_naive(E) in (N0.n, N1.n)
    curves = (E, quadratic_twist(E, rng.child("twist")))
    m = [FACTORED_ONE, FACTORED_ONE]
    n_pair = [N0, N1]
    s = 0
    four_sqrt = 1
    while four_sqrt * four_sqrt <= 16 * p:
        four_sqrt += 1
    hasse_lo, hasse_hi = p + 1 - four_sqrt, p + 1 + four_sqrt
    while True:
        if first_point is not None and s == 0:
            P, first_point = first_point, None
        else:
            P = random_point(curves[s], rng)
        Q = scalar_mul(m[s].n, P, curves[s])
        ns = fast_order(Q, curves[s], n_pair[s].over_common(m[s]))
        if ns is None:
            if (
                n_pair[1].n % m[0].n == 0
                and n_pair[0].n % m[1].n == 0
                and n_pair[0].n < n_pair[1].n
            ):
                n_pair = [n_pair[1], n_pair[0]]
                continue
            return False
        m[s] = m[s].times(ns)
        # surviving orders: = 0 mod m0 and = 2p+2 mod m1, inside Hasse
        import math

        m0, m1 = m[0].n, m[1].n
        a1 = (2 * p + 2) % m1
        g = math.gcd(m0, m1)
        if a1 % g == 0:
            L = m0 // g * m1
            # solve x = 0 (m0), x = a1 (m1)
            t = (a1 // g) * pow(m0 // g, -1, m1 // g) % (m1 // g)
            x0 = m0 * t % L
            first = x0 + ((hasse_lo - x0) % L + L) % L
            ok = True
            x = first
            while x <= hasse_hi:
                if x not in (N0.n, N1.n):
                    ok = False
                    break
                x += L
            if ok:
                return True
        s = 1 - s


# --- torsion-constrained curve generation -------------------------------

RETRY_LIMIT = 256


class TorsionGenerationError(Exception):
    pass


def _short_weierstrass(a1, a2, a3, a4, a6, p, pts):
    """General Weierstrass to y^2 = x^3 + Ax + B, mapping the given points."""
    b2 = (a1 * a1 + 4 * a2) % p
    b4 = (2 * a4 + a1 * a3) % p
    b6 = (a3 * a3 + 4 * a6) % p
    c4 = (b2 * b2 - 24 * b4) % p
    c6 = (-b2**3 + 36 * b2 * b4 - 216 * b6) % p
    inv48 = pow(48, p - 2, p)
    inv864 = pow(864, p - 2, p)
    A = -c4 * inv48 % p
    B = -c6 * inv864 % p
    inv12 = pow(12, p - 2, p)
    inv2 = (p + 1) // 2
    out = []
    for P in pts:
        if P is None:
            out.append(None)
        else:
            x, y = P
            out.append(((x + b2 * inv12) % p, (y + (a1 * x + a3) * inv2) % p))
    return A, B, out


def _tate_curve(b, c, p, want_order=None):
    """Short Weierstrass curve from Tate normal form, with (0,0) mapped."""
    A, B, (P,) = _short_weierstrass((1 - c) % p, (-b) % p, (-b) % p, 0, 0, p, [(0, 0)])
    E = Curve(p, A, B)
    return E, P


# X1(N) parametrizations in Tate normal form (b, c) for genus-0 N;
# (0,0) has order exactly N off a finite bad locus.
def _tate_params(N, d, p):
    if N == 4:
        return d % p, 0
    if N == 5:
        return d % p, d % p
    if N == 6:
        return (d * d + d) % p, d % p
    if N == 7:
        return (d**3 - d**2) % p, (d * d - d) % p
    if N == 8:
        c = (2 * d - 1) * (d - 1) % p * pow(d, p - 2, p) % p
        return c * d % p, c
    if N == 9:
        c = d * d % p * (d - 1) % p
        return c * (d * d - d + 1) % p, c
    if N == 10:
        den = (d * d - 3 * d + 1) % p
        if den == 0:
            raise ZeroDivisionError
        c = -d * (d - 1) % p * (2 * d - 1) % p * pow(den, p - 2, p) % p
        b = d * d % p * c % p * pow(den, p - 2, p) % p
        return (-b) % p, c
    raise ValueError(f"no rational parametrization for N={N}")


def _sample_x1_11(p, rng):
    """Point on X1(11): s^2 - (r^2+r)s + 3r^2 - 3r + 1 = 0, then (b, c)."""
    for _ in range(64):
        r = rng.randrange(2, p)
        br = (r * r + r) % p
        disc = (br * br - 4 * (3 * r * r - 3 * r + 1)) % p
        if pow(disc, (p - 1) // 2, p) not in (1, 0):
            continue
        root = sqrt_mod(disc, p)
        s = (br + (root if rng.randrange(2) else -root)) * (p + 1) // 2 % p
        c = s * (r - 1) % p
        b = r * c % p
        if b and c:
            return b, c
    raise TorsionGenerationError("no X1(11) point found")


def _sample_x1_12(p, rng):
    """Point on X1(12): quartic in b over random c (from the division
    relation 3b^4 - b^3c^2 - 9b^3c + 10b^2c^2 + bc^4 - 5bc^3 + c^6 + c^4)."""
    for _ in range(64):
        c = rng.randrange(2, p)
        c2 = c * c % p
        f = ModPoly(
            p,
            [
                (c2 * c2 % p * (c2 + 1)) % p,
                (c2 * c % p * (c - 5)) % p,
                10 * c2 % p,
                (-c * (c + 9)) % p,
                3,
            ],
        )
        rs = roots(f)
        if not rs:
            continue
        b = rs[rng.randrange(len(rs))][0]
        if b:
            return b, c
    raise TorsionGenerationError("no X1(12) point found")


def _two_torsion_xs(E: Curve):
    f = ModPoly(E.p, [E.B, E.A, 0, 1])
    return [r for r, _ in roots(f)]


def _is_square(a, p):
    a %= p
    return a == 0 or pow(a, (p - 1) // 2, p) == 1


def four_divides_order(E: Curve, xs=None) -> bool:
    """Whether 4 | #E, from the 2-torsion structure (no point counting)."""
    p = E.p
    if xs is None:
        xs = _two_torsion_xs(E)
    if len(xs) == 0:
        return False
    if len(xs) == 3:
        return True
    x0 = xs[0]
    a = 3 * x0 % p
    b = (3 * x0 * x0 + E.A) % p
    d = sqrt_mod(b, p)
    if d is None:
        return False
    return _is_square(a + 2 * d, p) or _is_square(a - 2 * d, p)


def has_three_torsion(E: Curve) -> bool:
    """Whether E(F_p) has a point of order 3 (3-division polynomial)."""
    p = E.p
    psi3 = ModPoly(p, [(-E.A * E.A) % p, 12 * E.B % p, 6 * E.A % p, 0, 3])
    for x, _ in roots(psi3):
        f = (x * x * x + E.A * x + E.B) % p
        if f and pow(f, (p - 1) // 2, p) == 1:
            return True
    return False


def _passes_sylow_filters(E: Curve, plan) -> bool:
    exact2 = getattr(plan, "exact2", None)
    min2 = getattr(plan, "min2", 0)
    exact3 = getattr(plan, "exact3", None)
    min3 = getattr(plan, "min3", 0)
    if exact2 is not None or min2:
        xs = _two_torsion_xs(E)
        if exact2 == 0:
            if xs:
                return False
        elif exact2 == 1:
            if not xs or four_divides_order(E, xs):
                return False
        elif exact2 is not None:
            raise ValueError("2-power exactness supported only up to 2^1")
        if min2 >= 1 and not xs:
            return False
        if min2 >= 2 and not four_divides_order(E, xs):
            return False
        if min2 >= 3:
            raise ValueError("divisibility filters supported only up to 4")
    if exact3 == 0:
        if has_three_torsion(E):
            return False
    elif exact3 is not None:
        raise ValueError("3-power exactness supported only for 3^0")
    if min3 >= 1 and not has_three_torsion(E):
        return False
    if min3 >= 2:
        raise ValueError("9-divisibility is expressed through X1(9)")
    return True


def random_curve_with_torsion(p, plan, rng: Stream):
    """A random curve with the plan's torsion built in, plus the torsion point.

    The N-part comes from a point on Y1(N); exact 2-power and 3-power side
    conditions are enforced by inspecting the 2-torsion cubic (with the
    halving criterion) and the 3-division polynomial.  Degenerate parameters
    are resampled; gives up only after RETRY_LIMIT attempts.
    """
    N = getattr(plan, "gen_n", 1)
    for _ in range(RETRY_LIMIT):
        try:
            if N == 1:
                A, B = rng.randrange(p), rng.randrange(p)
                E = Curve(p, A, B)
                P = None
            elif N == 2:
                a, b = rng.randrange(p), rng.randrange(1, p)
                A, B, (P,) = _short_weierstrass(0, a, 0, b, 0, p, [(0, 0)])
                E = Curve(p, A, B)
            elif N == 3:
                a1, a3 = rng.randrange(p), rng.randrange(1, p)
                A, B, (P,) = _short_weierstrass(a1, 0, a3, 0, 0, p, [(0, 0)])
                E = Curve(p, A, B)
            else:
                if N == 11:
                    b, c = _sample_x1_11(p, rng)
                elif N == 12:
                    b, c = _sample_x1_12(p, rng)
                else:
                    b, c = _tate_params(N, rng.randrange(2, p), p)
                if b == 0:
                    continue
                E, P = _tate_curve(b, c, p)
        except (ValueError, ZeroDivisionError):
            continue
        if E.j_invariant() in (0, 1728):
            continue
        if not _passes_sylow_filters(E, plan):
            continue
        return E, P
    raise TorsionGenerationError(f"could not build a curve with plan {plan}")


# --- Frobenius trace search ---------------------------------------------


def _joint_digits(a, b):
    da, db = _naf(a), _naf(b)
    n = max(len(da), len(db))
    da += [0] * (n - len(da))
    db += [0] * (n - len(db))
    return list(zip(da, db))


def _batch_two_scalar(p, a, b, curves, points):
    """(aP_i, bP_i) for the whole batch, sharing one doubling chain."""
    digits = _joint_digits(a, b)
    accA = [None] * len(points)
    accB = [None] * len(points)
    run = list(points)
    fallback = set(i for i, P in enumerate(points) if P is None)

    def add_into(acc, d):
        idx, dens = [], []
        for i in range(len(points)):
            if i in fallback:
                continue
            R = run[i]
            if R is None:
                continue
            Q = R if d == 1 else (R[0], (-R[1]) % p)
            if acc[i] is None:
                acc[i] = Q
                continue
            if acc[i][0] == Q[0]:
                fallback.add(i)
                continue
            idx.append((i, Q))
            dens.append((Q[0] - acc[i][0]) % p)
        if dens:
            invs = batch_inverse(dens, p)
            for (i, Q), inv in zip(idx, invs):
                x1, y1 = acc[i]
                lam = (Q[1] - y1) * inv % p
                x3 = (lam * lam - x1 - Q[0]) % p
                acc[i] = (x3, (lam * (x1 - x3) - y1) % p)

    for step, (da, db) in enumerate(digits):
        if da:
            add_into(accA, da)
        if db:
            add_into(accB, db)
        if step == len(digits) - 1:
            break
        idx, dens = [], []
        for i in range(len(points)):
            if i in fallback or run[i] is None:
                continue
            if run[i][1] == 0:
                run[i] = None
                continue
            idx.append(i)
            dens.append(2 * run[i][1] % p)
        if dens:
            invs = batch_inverse(dens, p)
            for i, inv in zip(idx, invs):
                x1, y1 = run[i]
                lam = (3 * x1 * x1 + curves[i].A) * inv % p
                x3 = (lam * lam - 2 * x1) % p
                run[i] = (x3, (lam * (x1 - x3) - y1) % p)
    outA, outB = [], []
    for i in range(len(points)):
        if i in fallback:
            outA.append(scalar_mul(a, points[i], curves[i]))
            outB.append(scalar_mul(b, points[i], curves[i]))
        else:
            outA.append(accA[i])
            outB.append(accB[i])
    return outA, outB


DEFAULT_BATCH = 64


def find_trace_curve(crt_prime, rng: Stream, batch_size=DEFAULT_BATCH, stats=None):
    """j-invariant of a curve over F_p with Frobenius trace +-t.

    Batches of torsion-constrained random curves are filtered by testing
    (p+1)P = +-tP with a joint signed-digit chain (or (p+1-+t)P = 0 when the
    torsion plan pins the sign of t); survivors are confirmed by the full
    order test.  Las Vegas: loops until a curve is found.
    """
    p, t = crt_prime.p, crt_prime.t
    plan = crt_prime.plan
    from .arith import factorize  # local import to keep module load light

    n0 = factorize(p + 1 - t)
    n1 = factorize(p + 1 + t)
    applies = getattr(plan, "applies_to", "both")
    tested = 0
    attempt = 0
    while True:
        curves, points = [], []
        while len(curves) < batch_size:
            attempt += 1
            gen = rng.child("curve", attempt)
            try:
                E, _ = random_curve_with_torsion(p, plan, gen)
            except TorsionGenerationError:
                continue
            curves.append(E)
            points.append(random_point(E, gen.child("pt")))
        tested += len(curves)
        if stats is not None:
            stats["curves_tested"] = tested
        survivors = []
        if applies == "both":
            accA, accB = _batch_two_scalar(p, p + 1, t, curves, points)
            for i in range(len(curves)):
                a, b = accA[i], accB[i]
                if a is None and b is None:
                    survivors.append(i)
                elif a is not None and b is not None and a[0] == b[0]:
                    survivors.append(i)
        else:
            s = p + 1 - t if applies == "N0" else p + 1 + t
            res = batch_scalar_mul(s, points, curves)
            survivors = [i for i, r in enumerate(res) if r is None]
        for i in survivors:
            if test_curve_order(
                curves[i], n0, n1, rng.child("tco", attempt, i), first_point=points[i]
            ):
                return curves[i].j_invariant()


def curve_from_j(j, p) -> Curve:
    """A curve with the given j-invariant (fixed twist representative)."""
    j %= p
    if j == 0:
        return Curve(p, 0, 1)
    if j == 1728 % p:
        return Curve(p, 1, 0)
    k = j * pow((1728 - j) % p, p - 2, p) % p
    return Curve(p, 3 * k % p, 2 * k % p)


def select_twist(E: Curve, N: int, rng: Stream, checks=40) -> Curve:
    """E or its quadratic twist, whichever has order N (error < 2^-checks)."""
    p = E.p
    four_sqrt = 1
    while four_sqrt * four_sqrt <= 16 * p:
        four_sqrt += 1
    if not (p + 1 - four_sqrt <= N <= p + 1 + four_sqrt):
        raise ValueError("N outside the Hasse interval")
    cand = E
    for _ in range(2):
        ok = True
        for i in range(checks):
            Q = random_point(cand, rng.child("tw", cand.A, cand.B, i))
            if scalar_mul(N, Q, cand) is not None:
                ok = False
                break
        if ok:
            return cand
        cand = quadratic_twist(cand, rng.child("twgen"))
    raise ArithmeticError("neither twist has the requested order")
