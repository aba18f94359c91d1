"""Integer arithmetic substrate: factorization, divisors, Kronecker symbols,
and square roots modulo prime powers.

A smallest-prime-factor sieve (built lazily, read-only afterwards) backs
factorization of small numbers; larger inputs fall back to trial division
over the sieved primes and a deterministic Miller-Rabin / Pollard-rho
combination.  Everything here is pure and safe to call concurrently once
the sieve exists.
"""

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_SIEVE_BOUND = 1 << 20

_spf = None
_spf_bound = 0
_primes = None

# Witnesses proving Miller-Rabin deterministic for n < 3.317e24 (~2**81).
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_PROVEN_LIMIT = 3317044064679887385961981


def build_spf(bound=DEFAULT_SIEVE_BOUND):
    """Smallest-prime-factor table for 0..bound as a uint32 array.

    spf[n] is the least prime dividing n (n >= 2); spf[0] = spf[1] = 1.
    """
    spf = np.zeros(bound + 1, dtype=np.uint32)
    spf[0:2] = 1
    spf[2::2] = 2
    for p in range(3, math.isqrt(bound) + 1, 2):
        if spf[p] == 0:
            sl = spf[p * p :: 2 * p]
            sl[sl == 0] = p
    rest = np.nonzero(spf == 0)[0]
    spf[rest] = rest
    return spf


def ensure_sieve(bound=DEFAULT_SIEVE_BOUND):
    """Build (or extend) the shared sieve; returns the spf array."""
    global _spf, _spf_bound, _primes
    if _spf is None or bound > _spf_bound:
        _spf = build_spf(bound)
        _spf_bound = bound
        _primes = None
    return _spf


def sieved_primes(bound=DEFAULT_SIEVE_BOUND):
    """All primes up to the current sieve bound, as an int64 array."""
    global _primes
    spf = ensure_sieve(bound)
    if _primes is None:
        idx = np.arange(len(spf), dtype=np.int64)
        _primes = idx[(spf == idx) & (idx >= 2)]
    return _primes


@dataclass(frozen=True)
class Factorization:
    """Prime factorization n = prod p**e with primes strictly increasing."""

    n: int
    factors: tuple  # ((p, e), ...)

    def recompose(self):
        m = 1
        for p, e in self.factors:
            m *= p**e
        return m


def _is_probable_prime(n):
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime(n):
    """Deterministic primality for n below ~2**81; gmpy2 beyond that."""
    if n < _MR_PROVEN_LIMIT:
        return _is_probable_prime(n)
    import gmpy2

    return bool(gmpy2.is_prime(n, 40))


def _pollard_rho(n):
    # Brent's cycle variant with a fixed, deterministic parameter sweep.
    if n % 2 == 0:
        return 2
    for c in range(1, 64):
        y, m, g, r, q = 2, 128, 1, 1, 1
        x = ys = 0
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
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g
    raise ArithmeticError(f"pollard rho failed for {n}")


def _factor_large(n, out):
    if n == 1:
        return
    if is_prime(n):
        out.append(n)
        return
    d = _pollard_rho(n)
    _factor_large(d, out)
    _factor_large(n // d, out)


def factorize(n):
    """Factor a positive integer into (prime, exponent) pairs.

    Uses the sieve below its bound, trial division by sieved primes next,
    and Miller-Rabin + Pollard rho for what remains.  Deterministic.
    """
    if n < 1:
        raise ValueError(f"factorize requires n >= 1, got {n}")
    orig = n
    if n == 1:
        return Factorization(1, ())
    spf = ensure_sieve()
    fac = []
    if n <= _spf_bound:
        while n > 1:
            p = int(spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            fac.append((p, e))
        fac.sort()
        return Factorization(orig, tuple(fac))
    primes = sieved_primes()
    for p in map(int, primes):
        if p * p > n:
            break
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            fac.append((p, e))
        if n <= _spf_bound:
            break
    if n > 1:
        if n <= _spf_bound:
            while n > 1:
                p = int(spf[n])
                e = 0
                while n % p == 0:
                    n //= p
                    e += 1
                fac.append((p, e))
        elif n < _spf_bound * _spf_bound or is_prime(n):
            # no prime factor below the sieve bound survived trial division
            fac.append((n, 1))
        else:
            large = []
            _factor_large(n, large)
            large.sort()
            p_prev = None
            for p in large:
                if p == p_prev:
                    fac[-1] = (p, fac[-1][1] + 1)
                else:
                    fac.append((p, 1))
                p_prev = p
    fac.sort()
    return Factorization(orig, tuple(fac))


def divisors(n):
    """All positive divisors of n, ascending."""
    divs = [1]
    for p, e in factorize(n).factors:
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def square_divisors(n):
    """All u >= 1 with u*u dividing n, ascending."""
    if n < 1:
        raise ValueError(f"square_divisors requires n >= 1, got {n}")
    us = [1]
    for p, e in factorize(n).factors:
        if e >= 2:
            us = [u * p**k for u in us for k in range(e // 2 + 1)]
    return sorted(us)


def squarefree_core(n):
    """Split n = core * cofactor**2 with core square-free."""
    if n < 1:
        raise ValueError(f"squarefree_core requires n >= 1, got {n}")
    core = cof = 1
    for p, e in factorize(n).factors:
        if e % 2:
            core *= p
        cof *= p ** (e // 2)
    return core, cof


def kronecker(a, n):
    """Kronecker symbol (a/n), completely multiplicative in both arguments.

    (a/2) is 0 for even a, +1 for a = +-1 mod 8 and -1 for a = +-3 mod 8.
    """
    if n == 0:
        raise ValueError("kronecker symbol undefined for n = 0")
    if n < 0:
        sign = 1 if a >= 0 else -1
        return sign * kronecker(a, -n)
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    # Jacobi symbol by quadratic reciprocity for odd n
    a %= n
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


def _sqrt_mod_prime(a, p):
    """Square roots of a modulo an odd prime p (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return [0]
    if kronecker(a, p) != 1:
        return []
    if p % 4 == 3:
        s = pow(a, (p + 1) // 4, p)
        return sorted({s, p - s})
    # Tonelli-Shanks: p-1 = q * 2^e with q odd
    q, e = p - 1, 0
    while q % 2 == 0:
        q //= 2
        e += 1
    z = 2
    while kronecker(z, p) != -1:
        z += 1
    m, c, t, s = e, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t = t * c % p
        s = s * b % p
    return sorted({s, p - s})


def _sqrt_unit_mod_2r(a, r):
    """Square roots of an odd a modulo 2**r (three regimes, then lifting)."""
    a %= 1 << r
    if r == 1:
        return [1]
    if r == 2:
        return [1, 3] if a % 4 == 1 else []
    if a % 8 != 1:
        return []
    s = 1
    for k in range(3, r):
        # lift a root mod 2^k to mod 2^(k+1); exactly one of s, s+2^(k-1) works
        if (s * s - a) % (1 << (k + 1)) != 0:
            s += 1 << (k - 1)
    mod = 1 << r
    half = 1 << (r - 1)
    return sorted({s % mod, (-s) % mod, (s + half) % mod, (half - s) % mod})


def sqrt_mod_prime_power(a, p, r):
    """All residues s in [0, p**r) with s*s = a mod p**r.

    Roots are found modulo p and Hensel-lifted; for p = 2 the mod-2, mod-4
    and mod-8 regimes are handled separately before lifting.  An empty list
    means a is not a square modulo p**r.
    """
    if r < 1:
        raise ValueError("exponent r must be >= 1")
    mod = p**r
    a %= mod
    if a == 0:
        step = p ** ((r + 1) // 2)
        return list(range(0, mod, step))
    v = 0
    aa = a
    while aa % p == 0:
        aa //= p
        v += 1
    if v % 2 == 1:
        return []
    if v > 0:
        half = p ** (v // 2)
        sub = sqrt_mod_prime_power(aa, p, r - v)
        out = set()
        submod = p ** (r - v)
        for w in sub:
            for m in range(p ** (v // 2)):
                out.add((half * (w + m * submod)) % mod)
        return sorted(out)
    # unit case
    if p == 2:
        return _sqrt_unit_mod_2r(a, r)
    roots = _sqrt_mod_prime(a, p)
    if not roots:
        return []
    pk = p
    for _ in range(r - 1):
        pk_next = pk * p
        lifted = []
        for s in roots:
            # f(s) = s^2 - a, f'(s) = 2s is a unit: unique Hensel lift
            inv = pow(2 * s % pk_next, -1, pk_next)
            lifted.append((s - (s * s - a) * inv) % pk_next)
        roots = lifted
        pk = pk_next
    return sorted(set(roots))
