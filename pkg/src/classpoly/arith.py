"""Word-size modular arithmetic and number-theoretic primitives.

Everything here is pure and safe to call concurrently.  Field elements are
plain Python ints in [0, p); the field modulus is passed explicitly.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

import gmpy2

MAX_FIELD_PRIME = 1 << 62

# deterministic Miller-Rabin witnesses, correct for all n < 3.3e24 > 2^64
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

_SMALL_PRIME_BOUND = 1000


def _small_primes(bound=_SMALL_PRIME_BOUND):
    sieve = bytearray([1]) * bound
    sieve[0] = sieve[1] = 0
    for i in range(2, int(bound**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i in range(bound) if sieve[i]]


SMALL_PRIMES = _small_primes()


def is_prime(n) -> bool:
    """Primality test: deterministic below 2^64, error < 2^-80 above."""
    n = int(n)
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s

    def witness(a):
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            return False
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                return False
        return True

    for a in _MR_WITNESSES:
        if witness(a):
            return False
    if n < (1 << 64):
        return True
    # extra rounds with bases derived deterministically from n
    rng = random.Random(hashlib.sha256(b"mr|%d" % n).digest())
    for _ in range(40):
        if witness(rng.randrange(2, n - 1)):
            return False
    return True


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D|n) for n >= 1, with the standard (D|2) convention."""
    if n <= 0:
        raise ValueError("n must be positive")
    if n == 1:
        return 1
    result = 1
    # peel off factors of 2 using (D|2)
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            result = -result
    # now n odd: Jacobi symbol with reciprocity
    a = D % n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def invmod(a: int, m: int) -> int:
    """Inverse of a modulo m (extended Euclid; raises if gcd != 1)."""
    return int(gmpy2.invert(a, m))


def batch_inverse(values, p):
    """Invert many field elements with a single modular inversion."""
    n = len(values)
    prefix = [0] * n
    acc = 1
    for i, v in enumerate(values):
        prefix[i] = acc
        acc = acc * v % p
    inv = pow(acc, p - 2, p)
    out = [0] * n
    for i in range(n - 1, -1, -1):
        out[i] = prefix[i] * inv % p
        inv = inv * values[i] % p
    return out


def sqrt_mod(a: int, p: int, rng: random.Random | None = None):
    """A square root of a modulo an odd prime p, or None for a non-residue.

    Tonelli-Shanks; the auxiliary non-residue is sampled from a stream seeded
    by (a, p) unless an explicit rng is supplied, so results are reproducible.
    """
    a %= p
    if a == 0:
        return 0
    if p == 2:
        return a
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # write p-1 = q * 2^s with q odd
    q = p - 1
    s = 0
    while q % 2 == 0:
        q //= 2
        s += 1
    if rng is None:
        rng = random.Random(hashlib.sha256(b"ts|%d|%d" % (a, p)).digest())
    while True:
        z = rng.randrange(2, p)
        if pow(z, (p - 1) // 2, p) == p - 1:
            break
    c = pow(z, q, p)
    x = pow(a, (q + 1) // 2, p)
    t = pow(a, q, p)
    m = s
    while t != 1:
        i = 0
        t2 = t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        x = x * b % p
        c = b * b % p
        t = t * c % p
        m = i
    return x


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer together with its complete prime factorization."""

    n: int
    factors: tuple  # ((prime, exponent), ...), primes strictly increasing

    def __post_init__(self):
        prod = 1
        prev = 1
        for q, e in self.factors:
            if q <= prev or e <= 0:
                raise ValueError("factors must be increasing prime powers")
            prev = q
            prod *= q**e
        if prod != self.n or self.n < 1:
            raise ValueError("factorization does not recompose to n")

    def check_primality(self) -> bool:
        return all(is_prime(q) for q, _ in self.factors)

    @property
    def omega(self) -> int:
        return len(self.factors)

    def valuation(self, q: int) -> int:
        for qq, e in self.factors:
            if qq == q:
                return e
        return 0

    def times(self, other: "FactoredInteger") -> "FactoredInteger":
        exps = dict(self.factors)
        for q, e in other.factors:
            exps[q] = exps.get(q, 0) + e
        return FactoredInteger(self.n * other.n, tuple(sorted(exps.items())))

    def over(self, other: "FactoredInteger") -> "FactoredInteger":
        """Quotient self/other; other must divide self exactly."""
        exps = dict(self.factors)
        for q, e in other.factors:
            r = exps.get(q, 0) - e
            if r < 0:
                raise ValueError("not a divisor")
            if r == 0:
                del exps[q]
            else:
                exps[q] = r
        return FactoredInteger(self.n // other.n, tuple(sorted(exps.items())))


FACTORED_ONE = FactoredInteger(1, ())


def _brent_rho(n: int, rng: random.Random) -> int:
    """A non-trivial factor of composite n (Brent's cycle variant)."""
    if n % 2 == 0:
        return 2
    while True:
        y = rng.randrange(1, n)
        c = rng.randrange(1, n)
        m = 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = int(gmpy2.gcd(q, n))
                k += m
            r <<= 1
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = int(gmpy2.gcd(abs(x - ys), n))
        if g != n:
            return g


def factorize(n) -> FactoredInteger:
    """Complete prime factorization (trial division plus Brent's rho)."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be positive")
    exps = {}
    m = n
    for q in SMALL_PRIMES:
        if q * q > m:
            break
        while m % q == 0:
            exps[q] = exps.get(q, 0) + 1
            m //= q
    stack = [m] if m > 1 else []
    rng = random.Random(hashlib.sha256(b"rho|%d" % n).digest())
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            exps[m] = exps.get(m, 0) + 1
            continue
        root = gmpy2.iroot(m, 2)
        if root[1]:  # perfect square shortcut helps rho on p^2
            stack.extend([int(root[0])] * 2)
            continue
        d = _brent_rho(m, rng)
        stack.extend([d, m // d])
    return FactoredInteger(n, tuple(sorted(exps.items())))


def valuation(n: int, q: int) -> int:
    """Largest e with q^e dividing n (n != 0)."""
    e = 0
    while n % q == 0:
        n //= q
        e += 1
    return e


def validate_field_prime(p: int):
    """Check the single-word field modulus contract: odd prime below 2^62."""
    if p >= MAX_FIELD_PRIME:
        raise ValueError(f"field prime {p} exceeds the 2^62 word bound")
    if p < 3 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")


class Stream:
    """Seedable, splittable pseudorandom stream.

    Children are derived by hashing the parent's seed material with a label,
    so whole-pipeline runs are reproducible and per-prime streams are
    independent of scheduling order.
    """

    def __init__(self, *seed_material):
        self._tag = "|".join(str(s) for s in seed_material)
        self.random = random.Random(hashlib.sha256(self._tag.encode()).digest())

    def child(self, *labels) -> "Stream":
        return Stream(self._tag, *labels)

    def randrange(self, *args):
        return self.random.randrange(*args)

    def randint(self, a, b):
        return self.random.randint(a, b)

    def choice(self, seq):
        return self.random.choice(seq)

    def shuffle(self, seq):
        self.random.shuffle(seq)
