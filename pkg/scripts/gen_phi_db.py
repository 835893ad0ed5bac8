#!/usr/bin/env python3
"""Generate the classical modular polynomial database shipped in
src/classpoly/data/phi_db.txt.

For each prime ell <= 47 the bivariate polynomial relating the j-invariants
of ell-isogenous curves is computed exactly over Z from q-expansions:

  * j(q) comes from E4^3 / Delta with integer series arithmetic;
  * the elementary symmetric functions of the ell conjugate roots
    j((tau+k)/ell) are obtained from their power sums, which are plain
    decimations of the series of j^r (the root-of-unity average kills all
    exponents not divisible by ell), via Newton's identities;
  * multiplying by (X - j(ell*tau)) and rewriting each Laurent coefficient
    as a polynomial in j yields the coefficient table.

Strong self-checks: the table must be symmetric, must satisfy the Kronecker
congruence mod ell, and (spot-checked in the test suite) must vanish
numerically at (j(tau), j(ell*tau)).

All series multiplications are one GMP integer product via signed Kronecker
substitution, so the whole run takes a few minutes.
"""

import sys
import time
from math import isqrt

import gmpy2

OUT = "src/classpoly/data/phi_db.txt"
PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]


def _pack_signed(f, W, B):
    """f(2^W) as a signed integer, via byte assembly (CPython big-int
    division is quadratic, so everything here sticks to shifts/bytes)."""
    mask = (1 << W) - 1
    F = int.from_bytes(
        b"".join((c & mask).to_bytes(B, "little") for c in f), "little"
    )
    borrow = bytearray((len(f) + 1) * B)
    any_neg = False
    for i, c in enumerate(f):
        if c < 0:
            borrow[(i + 1) * B] = 1
            any_neg = True
    if any_neg:
        F -= int.from_bytes(bytes(borrow), "little")
    return F


def ser_mul(f, g, n_out):
    """First n_out coefficients of f*g; signed Kronecker substitution."""
    f = f[:n_out]
    g = g[:n_out]
    bits_f = max((abs(c).bit_length() for c in f), default=0)
    bits_g = max((abs(c).bit_length() for c in g), default=0)
    W = bits_f + bits_g + min(len(f), len(g)).bit_length() + 2
    W = (W + 7) & ~7
    B = W // 8
    H = int(gmpy2.mpz(_pack_signed(f, W, B)) * gmpy2.mpz(_pack_signed(g, W, B)))
    bias = 1 << (W - 1)
    m_full = len(f) + len(g) - 1
    H += int.from_bytes(bias.to_bytes(B, "little") * m_full, "little")
    hb = H.to_bytes(m_full * B, "little")
    m = min(n_out, m_full)
    out = [
        int.from_bytes(hb[i * B : (i + 1) * B], "little") - bias for i in range(m)
    ]
    return out + [0] * (n_out - len(out))


def ser_inv(f, n_out):
    """Inverse of a series with f[0] = 1, to n_out terms (Newton lifting)."""
    assert f[0] == 1
    inv = [1]
    k = 1
    while k < n_out:
        k = min(2 * k, n_out)
        t = ser_mul(f[:k], inv, k)
        # inv <- inv*(2 - f*inv)
        t = [-c for c in t]
        t[0] += 2
        inv = ser_mul(inv, t, k)
    return inv


def eta_product(n):
    """prod (1-q^k) to n terms, by the pentagonal number theorem."""
    out = [0] * n
    out[0] = 1
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        e2 = k * (3 * k + 1) // 2
        if e1 >= n and e2 >= n:
            break
        s = 1 if k % 2 == 0 else -1
        if e1 < n:
            out[e1] += s
        if e2 < n:
            out[e2] += s
        k += 1
    return out


def j_series(n):
    """Coefficients b[0..n-1] with j = q^-1 * sum b[i] q^i."""
    eta = eta_product(n)
    e2 = ser_mul(eta, eta, n)
    e4_ = ser_mul(e2, e2, n)
    e8 = ser_mul(e4_, e4_, n)
    e16 = ser_mul(e8, e8, n)
    eta24 = ser_mul(e16, e8, n)  # Delta = q * eta24
    sig3 = [0] * n
    for d in range(1, n):
        d3 = d * d * d
        for mult in range(d, n, d):
            sig3[mult] += d3
    E4 = [1] + [240 * sig3[i] for i in range(1, n)]
    E4c = ser_mul(ser_mul(E4, E4, n), E4, n)
    return ser_mul(E4c, ser_inv(eta24, n), n)


class Laurent:
    """Laurent series on a fixed exponent window [lo, lo+len-1]."""

    __slots__ = ("lo", "c")

    def __init__(self, lo, c):
        self.lo = lo
        self.c = c

    def get(self, e):
        i = e - self.lo
        return self.c[i] if 0 <= i < len(self.c) else 0


def conv(x, y, lo, hi):
    """x*y restricted to exponents [lo, hi]."""
    # shift to ordinary series, multiply, reshift
    n_out = hi - (x.lo + y.lo) + 1
    if n_out <= 0:
        return Laurent(lo, [0] * (hi - lo + 1))
    prod = ser_mul(x.c, y.c, n_out)
    base = x.lo + y.lo
    out = [0] * (hi - lo + 1)
    for e in range(lo, hi + 1):
        i = e - base
        if 0 <= i < len(prod):
            out[e - lo] = prod[i]
    return Laurent(lo, out)


def phi_table(ell, progress=False):
    """Coefficient dict {(i, k): c} of the level-ell modular polynomial."""
    t0 = time.time()
    m = ell + 1
    top = 2 * ell + 3  # highest exponent carried through Newton
    lo = -1
    nj = top * ell + ell + 1  # j^r needed to exponent top*ell
    b = j_series(nj)

    # power sums p[r] of the ell conjugates, r = 1..m: decimate j^r
    p = [None] * (m + 1)
    jr = b[:]  # series of j^r, exponent offset -r
    for r in range(1, m + 1):
        if r > 1:
            jr = ser_mul(jr, b, nj)
        row = [0] * (top - lo + 1)
        for e in range(lo, top + 1):
            n = e * ell  # exponent of q in j^r
            i = n + r  # index into jr
            if 0 <= i < len(jr):
                row[e - lo] = ell * jr[i]
        p[r] = Laurent(lo, row)
        if progress and r % 8 == 0:
            print(f"  ell={ell}: power sums {r}/{m} ({time.time()-t0:.0f}s)", flush=True)

    # Newton's identities for elementary symmetric functions of the ell
    # conjugates (only e_0..e_ell are nonzero)
    e = [None] * (ell + 1)
    e[0] = Laurent(0, [1])
    for a in range(1, ell + 1):
        acc = Laurent(lo, [0] * (top - lo + 1))
        sign = 1
        for i in range(1, a + 1):
            t = conv(e[a - i], p[i], lo, top)
            if sign > 0:
                acc = Laurent(lo, [x + y for x, y in zip(acc.c, t.c)])
            else:
                acc = Laurent(lo, [x - y for x, y in zip(acc.c, t.c)])
            sign = -sign
        row = []
        for x in acc.c:
            q, r_ = divmod(x, a)
            assert r_ == 0, "Newton identity division failed"
            row.append(q)
        e[a] = Laurent(lo, row)
        if progress and a % 8 == 0:
            print(f"  ell={ell}: newton {a}/{ell} ({time.time()-t0:.0f}s)", flush=True)

    # G(X) = prod (X - rho_k) = sum_{a} (-1)^{ell-a} e_{ell-a} X^a
    # Phi(X) = (X - J) G(X), J = j(q^ell) sparse with exponents = 0 mod ell
    G = [None] * (ell + 1)
    for a in range(ell + 1):
        coeffs = e[ell - a].c
        if (ell - a) % 2:
            coeffs = [-x for x in coeffs]
        G[a] = Laurent(e[ell - a].lo, coeffs)

    philo = -(ell + 1)
    delta = 2  # extra check slots above exponent 0
    # j^b on [-b, jtop]; carried high enough that slots up to delta stay exact
    jtop = delta + ell + 3
    jpow = [Laurent(0, [1])]
    jl = Laurent(-1, b[: jtop + 2])
    for bb in range(1, ell + 2):
        jpow.append(conv(jpow[-1], jl, -bb, jtop))

    table = {}
    for a in range(ell + 2):
        # coefficient of X^a as a Laurent series on [philo, delta]
        row = [0] * (delta - philo + 1)
        if a <= ell:
            ga = G[a]
            # subtract J * G_a: J exponents are multiples of ell, J = sum b[i] q^{(i-1) ell}
            for idx in range(0, (delta - philo) // ell + 3):
                s = (idx - 1) * ell  # exponent in J
                if s > delta + 1:
                    break
                coef = b[idx] if idx < len(b) else 0
                if coef == 0:
                    continue
                for t in range(philo, delta + 1):
                    row[t - philo] -= coef * ga.get(t - s)
        if a >= 1:
            gprev = G[a - 1]
            for t in range(philo, delta + 1):
                row[t - philo] += gprev.get(t)
        # rewrite as a polynomial in j: peel leading Laurent terms
        poly = [0] * (ell + 2)
        for bb in range(ell + 1, -1, -1):
            z = row[-bb - philo]
            if z:
                poly[bb] = z
                jp = jpow[bb]
                for t in range(-bb, delta + 1):
                    row[t - philo] -= z * jp.get(t)
        assert all(x == 0 for x in row), f"reduction remainder nonzero (ell={ell}, a={a})"
        for bb, z in enumerate(poly):
            if z:
                table[(a, bb)] = z
    if progress:
        print(f"  ell={ell}: done in {time.time()-t0:.0f}s", flush=True)

    # self-checks: symmetry and the Kronecker congruence mod ell
    for (i, k), v in table.items():
        assert table.get((k, i), 0) == v, f"asymmetry at {(i, k)} for ell={ell}"
    kron = {}
    for (i, k), v in table.items():
        kron[(i, k)] = v % ell
    ref = {}
    # (X^ell - Y)(X - Y^ell) = X^{ell+1} - X Y - X^ell Y^ell + Y^{ell+1}
    for (i, k), v in [((ell + 1, 0), 1), ((1, 1), -1), ((ell, ell), -1), ((0, ell + 1), 1)]:
        ref[(i, k)] = v % ell
    keys = set(kron) | set(ref)
    for key in keys:
        assert kron.get(key, 0) == ref.get(key, 0), f"Kronecker congruence fails at {key} for ell={ell}"
    return table


def main():
    primes = PRIMES
    if len(sys.argv) > 1:
        primes = [int(a) for a in sys.argv[1:]]
    lines = []
    for ell in primes:
        t0 = time.time()
        table = phi_table(ell, progress=(ell > 20))
        for (i, k) in sorted(table):
            if i >= k:
                lines.append(f"{ell} {i} {k} {table[(i, k)]}")
        print(f"ell={ell}: {sum(1 for (i,k) in table if i>=k)} entries, {time.time()-t0:.1f}s", flush=True)
    with open(OUT, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
