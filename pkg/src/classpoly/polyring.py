"""Dense univariate polynomial arithmetic over prime fields.

Polynomials are lists of ints in [0, p), degree ascending, trailing zeros
trimmed.  The multiplication cascade is schoolbook below SCHOOLBOOK_BOUND,
Karatsuba up to KRONECKER_BOUND, and Kronecker substitution into GMP integers
above that (quasi-linear; GMP switches to FFT internally).  Bounds were fixed
with scripts/bench_poly.py on the build host.
"""

from __future__ import annotations

import hashlib
import random

import gmpy2

from .arith import sqrt_mod

SCHOOLBOOK_BOUND = 24
KRONECKER_BOUND = 72


class ModPoly:
    """A polynomial over F_p; thin wrapper around a coefficient list."""

    __slots__ = ("p", "coeffs")

    def __init__(self, p, coeffs):
        self.p = p
        c = [x % p for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = c

    @property
    def degree(self):
        return len(self.coeffs) - 1  # -1 for the zero polynomial

    def is_zero(self):
        return not self.coeffs

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.p
        return acc

    def __eq__(self, other):
        return (
            isinstance(other, ModPoly)
            and self.p == other.p
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.p, tuple(self.coeffs)))

    def __mul__(self, other):
        return poly_mul(self, other)

    def __repr__(self):
        return f"ModPoly(p={self.p}, coeffs={self.coeffs})"


def _trim(c):
    while c and c[-1] == 0:
        c.pop()
    return c


def _school_mul(f, g, p):
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            out[i : i + len(g)] = [x + a * b for x, b in zip(out[i : i + len(g)], g)]
    return [c % p for c in out]


def _karatsuba(f, g, p):
    n = min(len(f), len(g))
    if n <= SCHOOLBOOK_BOUND:
        return _school_mul(f, g, p)
    h = max(len(f), len(g)) // 2
    f0, f1 = f[:h], f[h:]
    g0, g1 = g[:h], g[h:]
    lo = _karatsuba(f0, g0, p) if f0 and g0 else []
    hi = _karatsuba(f1, g1, p) if f1 and g1 else []
    fs = [a + b for a, b in zip(f0, f1)] + (f1[len(f0) :] or f0[len(f1) :])
    gs = [a + b for a, b in zip(g0, g1)] + (g1[len(g0) :] or g0[len(g1) :])
    mid = _karatsuba(fs, gs, p) if fs and gs else []
    out = [0] * (len(f) + len(g) - 1)
    for i, c in enumerate(lo):
        out[i] += c
    for i, c in enumerate(mid):
        out[h + i] += c
    for i, c in enumerate(lo):
        out[h + i] -= c
    for i, c in enumerate(hi):
        out[h + i] -= c
    for i, c in enumerate(hi):
        out[2 * h + i] += c
    return [c % p for c in out]


def _kron_mul(f, g, p):
    """One big GMP multiplication via Kronecker substitution."""
    n = min(len(f), len(g))
    slot = 2 * (p - 1).bit_length() + n.bit_length() + 1
    B = (slot + 7) // 8
    fb = b"".join(c.to_bytes(B, "little") for c in f)
    gb = b"".join(c.to_bytes(B, "little") for c in g)
    prod = gmpy2.mpz(int.from_bytes(fb, "little")) * gmpy2.mpz(
        int.from_bytes(gb, "little")
    )
    m = len(f) + len(g) - 1
    hb = int(prod).to_bytes(m * B + B, "little")
    return [int.from_bytes(hb[i * B : (i + 1) * B], "little") % p for i in range(m)]


def _mul(f, g, p):
    if not f or not g:
        return []
    n = min(len(f), len(g))
    if n <= SCHOOLBOOK_BOUND:
        return _trim(_school_mul(f, g, p))
    if n <= KRONECKER_BOUND:
        return _trim(_karatsuba(f, g, p))
    return _trim(_kron_mul(f, g, p))


def poly_mul(f: ModPoly, g: ModPoly) -> ModPoly:
    if f.p != g.p:
        raise ValueError("mismatched moduli")
    out = ModPoly(f.p, [])
    out.coeffs = _mul(f.coeffs, g.coeffs, f.p)
    return out


def _divmod(u, f, p):
    """(quotient, remainder) of u by f; f need not be monic."""
    if not f:
        raise ZeroDivisionError("division by zero polynomial")
    u = list(u)
    m = len(f) - 1
    if len(u) <= m:
        return [], _trim(u)
    linv = pow(f[-1], p - 2, p)
    q = [0] * (len(u) - m)
    for k in range(len(u) - 1, m - 1, -1):
        t = u[k] % p
        if t:
            t = t * linv % p
            q[k - m] = t
            for j in range(m):
                u[k - m + j] -= t * f[j]
        u[k] = 0
    return _trim(q), _trim([x % p for x in u[:m]])


def _monic(f, p):
    if not f or f[-1] == 1:
        return list(f)
    inv = pow(f[-1], p - 2, p)
    return [c * inv % p for c in f]


def _sqr_mod(a, f, p):
    """a^2 mod f for monic f; a reduced, deg a < deg f."""
    n = len(a)
    out = [0] * (2 * n - 1)
    for i in range(n):
        ai = a[i]
        if ai:
            out[2 * i] += ai * ai
            a2 = 2 * ai
            out[2 * i + 1 : i + n] = [
                x + a2 * b for x, b in zip(out[2 * i + 1 : i + n], a[i + 1 :])
            ]
    return _reduce_mod(out, f, p)


def _mul_mod(a, b, f, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            out[i : i + len(b)] = [x + ai * c for x, c in zip(out[i : i + len(b)], b)]
    return _reduce_mod(out, f, p)


def _reduce_mod(u, f, p):
    m = len(f) - 1
    for k in range(len(u) - 1, m - 1, -1):
        t = u[k] % p
        if t:
            off = k - m
            u[off : k] = [x - t * c for x, c in zip(u[off : k], f[:m])]
    out = [x % p for x in u[:m]]
    while out and out[-1] == 0:
        out.pop()
    return out


def _xpow_mod(e, f, p):
    """X^e mod f for monic f of degree >= 1."""
    m = len(f) - 1
    if m == 1:
        return [pow(p - f[0], e, p)] if f[0] or e else ([] if e else [1])
    r = [0, 1]
    for bit in bin(e)[3:]:
        r = _sqr_mod(r, f, p)
        if bit == "1":
            r = _reduce_mod([0] + r, f, p)
    return r


def _gcd(a, b, p):
    a, b = list(a), list(b)
    while b:
        _, a = _divmod(a, b, p)
        a, b = b, a
    return _monic(a, p)


def _linear_roots(g, p, rng):
    """Roots of g, a product of distinct monic linear factors."""
    if len(g) <= 1:
        return []
    if len(g) == 2:
        return [(p - g[0]) % p]
    if len(g) == 3:
        # quadratic formula
        b, c = g[1], g[0]
        disc = (b * b - 4 * c) % p
        r = sqrt_mod(disc, p)
        half = pow(2, p - 2, p)
        return [(r - b) * half % p, (-r - b) * half % p]
    e = (p - 1) // 2
    while True:
        a = rng.randrange(p)
        base = [a, 1]
        t = _powmod_generic(base, e, g, p)
        if t:
            t = list(t)
            t[0] = (t[0] - 1) % p
        h = _gcd(t, g, p) if t else list(g)
        if 0 < len(h) - 1 < len(g) - 1:
            q, r = _divmod(g, h, p)
            assert not r
            return _linear_roots(h, p, rng) + _linear_roots(q, p, rng)


def _powmod_generic(a, e, f, p):
    r = [1]
    a = _reduce_mod(list(a), f, p)
    while e:
        if e & 1:
            r = _mul_mod(r, a, f, p) if r and a else []
        e >>= 1
        if e:
            a = _sqr_mod(a, f, p) if a else []
    return r


def _distinct_root_part(f, p):
    """gcd(X^p - X, f): the product of (X - r) over distinct roots r of f."""
    fm = _monic(f, p)
    xp = _xpow_mod(p, fm, p)
    xp = list(xp)
    # subtract X
    while len(xp) < 2:
        xp.append(0)
    xp[1] = (xp[1] - 1) % p
    return _gcd(_trim(xp), fm, p)


def roots(f: ModPoly):
    """All distinct roots of f in F_p with multiplicities, sorted ascending.

    Returns a list of (root, multiplicity) pairs.
    """
    if f.degree < 1:
        raise ValueError("need deg f >= 1")
    p = f.p
    g = _distinct_root_part(f.coeffs, p)
    rng = random.Random(hashlib.sha256(f"roots|{p}|{f.coeffs}".encode()).digest())
    rs = sorted(_linear_roots(g, p, rng))
    out = []
    for r in rs:
        e = 0
        c = f.coeffs
        while True:
            q, rem = _synth_div(c, r, p)
            if rem != 0:
                break
            e += 1
            c = q
        out.append((r, e))
    return out


def _synth_div(c, r, p):
    """Synthetic division of c by (X - r): (quotient, remainder)."""
    acc = 0
    out = [0] * (len(c) - 1)
    for k in range(len(c) - 1, 0, -1):
        acc = (acc * r + c[k]) % p
        out[k - 1] = acc
    return out, (acc * r + c[0]) % p


def find_one_root(f: ModPoly, rng=None):
    """Some root of f in F_p, or None; uniform over roots for injected rng."""
    if f.degree < 1:
        raise ValueError("need deg f >= 1")
    p = f.p
    g = _distinct_root_part(f.coeffs, p)
    if len(g) <= 1:
        return None
    if rng is None:
        rng = random.Random(hashlib.sha256(f"root1|{p}|{f.coeffs}".encode()).digest())
    rs = _linear_roots(g, p, rng)
    return rng.choice(rs) if len(rs) > 1 else rs[0]


def product_from_roots(rts, p) -> ModPoly:
    """Monic product of (X - r); pairwise tree holding two levels at a time."""
    level = [[(p - r) % p, 1] for r in rts]
    if not level:
        out = ModPoly(p, [])
        out.coeffs = [1]
        return out
    while len(level) > 1:
        nxt = [
            _mul(level[i], level[i + 1], p) for i in range(0, len(level) - 1, 2)
        ]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    out = ModPoly(p, [])
    out.coeffs = level[0]
    return out
