"""Indefinite binary quadratic forms: validation, Gauss reduction, narrow
class numbers, and the bijection with primitive hyperbolic matrices.

A form [a, b, c] is reduced when ac < 0, 0 < b < sqrt(D) and
sqrt(D) - b < 2|a| < sqrt(D) + b.  The reduction step rho permutes the
reduced forms of a discriminant; its cycles are the narrow classes, so the
narrow class number h(D) is the cycle count.  Hot enumeration lives in
_kernels; the pure-Python forms here are the reference path and the oracle
machinery.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

from . import _kernels
from .numtheory import sieved_primes, squarefree_core
from .pell import check_discriminant


@dataclass(frozen=True)
class Discriminant:
    """A validated D in the discriminant set, with companion d and core."""

    D: int
    d: int
    core: int


def make_discriminant(D):
    """Validate D (positive, non-square, 0 or 1 mod 4) and attach d, core."""
    check_discriminant(D)
    core, _ = squarefree_core(D)
    d = D if core % 4 == 1 else D // 4
    return Discriminant(D, d, core)


@dataclass(frozen=True)
class QuadraticForm:
    a: int
    b: int
    c: int

    def __post_init__(self):
        if math.gcd(math.gcd(self.a, self.b), self.c) != 1:
            raise ValueError(f"form {self} is not primitive")
        check_discriminant(self.discriminant)

    @property
    def discriminant(self):
        return self.b * self.b - 4 * self.a * self.c

    def __iter__(self):
        return iter((self.a, self.b, self.c))


def is_reduced(f):
    D = f.discriminant
    s2 = math.isqrt(D)  # floor sqrt; D non-square so sqrt(D) is irrational
    if f.a * f.c >= 0 or f.b <= 0 or f.b > s2:
        return False
    ta = 2 * abs(f.a)
    # sqrt(D) - b < 2|a| < sqrt(D) + b with exact integer comparisons
    return ta >= s2 - f.b + 1 and ta <= s2 + f.b


def reduce_step(f):
    """One application of the reduction operator rho.

    rho([a,b,c]) = [c, r, (r^2-D)/(4c)] with r = -b mod 2|c| chosen in the
    window (sqrt(D) - 2|c|, sqrt(D)); the integer square root suffices
    because sqrt(D) is irrational.
    """
    D = f.discriminant
    s = math.isqrt(D)
    c = f.c
    ac = abs(c)
    k = (s + f.b) // (2 * ac)
    r = -f.b + 2 * ac * k
    return QuadraticForm(c, r, (r * r - D) // (4 * c))


def reduce_to_cycle(f, max_steps=10000):
    """Apply rho until the form is reduced (Gauss reduction terminates)."""
    for _ in range(max_steps):
        if is_reduced(f):
            return f
        f = reduce_step(f)
    raise ArithmeticError(f"reduction did not terminate for {f}")


def rho_cycle(f):
    """The full rho-cycle through a reduced form, as a list."""
    if not is_reduced(f):
        raise ValueError(f"{f} is not reduced")
    cycle = [f]
    g = reduce_step(f)
    while g != f:
        cycle.append(g)
        g = reduce_step(g)
    return cycle


def reduced_forms(disc):
    """All reduced forms of the discriminant, ascending in (a, b).

    Enumerates b = D mod 2 with 0 < b < sqrt(D) and reads the admissible
    |a| from the divisors of (D - b^2)/4 inside the reduction window.
    """
    D = disc.D if isinstance(disc, Discriminant) else make_discriminant(disc).D
    fa, fb, n = _kernels.reduced_forms_kernel(D, sieved_primes())
    if n == -2:
        sieved_primes(max(1 << 20, 2 * (math.isqrt(D) // 2 + 2)))
        fa, fb, n = _kernels.reduced_forms_kernel(D, sieved_primes())
    if n < 0:
        raise ArithmeticError(f"reduced-form enumeration failed for D={D} ({n})")
    out = []
    for i in range(n):
        a, b = int(fa[i]), int(fb[i])
        out.append(QuadraticForm(a, b, (b * b - D) // (4 * a)))
    out.sort(key=lambda f: (f.a, f.b))
    return out


def class_number(disc):
    """Narrow class number h(D): the number of rho-cycles of reduced forms."""
    D = disc.D if isinstance(disc, Discriminant) else make_discriminant(disc).D
    return _class_number_cached(D)


@lru_cache(maxsize=200000)
def _class_number_cached(D):
    h = int(_kernels.class_number_kernel(D, sieved_primes()))
    if h == -2:
        sieved_primes(max(1 << 20, 2 * (math.isqrt(D) // 2 + 2)))
        h = int(_kernels.class_number_kernel(D, sieved_primes()))
    if h == -4:
        return _class_number_pure(D)
    if h < 0:
        raise ArithmeticError(f"class number kernel failed for D={D} ({h})")
    return h


def _class_number_pure(D):
    # unbounded-integer fallback for D past the kernel's packing guard
    forms = reduced_forms(make_discriminant(D))
    seen = set()
    h = 0
    for f in forms:
        if (f.a, f.b) in seen:
            continue
        h += 1
        for g in rho_cycle(f):
            seen.add((g.a, g.b))
    return h


def class_numbers_batch(Ds):
    """Class numbers for many discriminants at once (kernel batch)."""
    import numpy as np

    Ds = [int(D) for D in Ds]
    if not Ds:
        return {}
    maxD = max(Ds)
    primes = sieved_primes(max(1 << 20, 2 * (math.isqrt(maxD) // 2 + 2)))
    arr = np.array(Ds, dtype=np.int64)
    hs = _kernels.class_number_batch_kernel(arr, primes)
    out = {}
    for D, h in zip(Ds, hs):
        h = int(h)
        if h < 0:
            h = _class_number_cached(D)
        out[D] = h
    return out


@dataclass(frozen=True)
class HyperbolicMatrix:
    """Integer matrix of determinant 1 with |trace| > 2."""

    m11: int
    m12: int
    m21: int
    m22: int

    def __post_init__(self):
        if self.m11 * self.m22 - self.m12 * self.m21 != 1:
            raise ValueError(f"determinant of {self} is not 1")
        if abs(self.trace) <= 2:
            raise ValueError(f"{self} is not hyperbolic")

    @property
    def trace(self):
        return self.m11 + self.m22

    @property
    def u(self):
        return math.gcd(math.gcd(self.m12, self.m11 - self.m22), self.m21)

    @property
    def D(self):
        t = self.trace
        return (t * t - 4) // (self.u * self.u)

    def matmul(self, other):
        return HyperbolicMatrix(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )


def form_to_matrix(f, sol):
    """The hyperbolic matrix attached to a form and its fundamental solution:
    [[(t + b u)/2, a u], [-c u, (t - b u)/2]]."""
    if sol.D != f.discriminant:
        raise ValueError(f"solution for D={sol.D} does not match form D={f.discriminant}")
    t, u = sol.t, sol.u
    if (t + f.b * u) % 2 != 0:
        raise ArithmeticError(f"parity violation for {f}, {sol}")
    return HyperbolicMatrix(
        (t + f.b * u) // 2, f.a * u, -f.c * u, (t - f.b * u) // 2
    )


def matrix_to_form(g):
    """Inverse direction: gamma maps to (g12/u) x^2 + ((g11-g22)/u) xy - (g21/u) y^2."""
    u = g.u
    return QuadraticForm(g.m12 // u, (g.m11 - g.m22) // u, -g.m21 // u)


def class_count_oracle(disc, search_bound):
    """Independent class count: enumerate every primitive form of the
    discriminant with |a|, |b|, |c| <= search_bound, reduce each, and count
    the distinct rho-cycles (keyed by their minimal member)."""
    D = disc.D if isinstance(disc, Discriminant) else make_discriminant(disc).D
    B = search_bound
    reps = set()
    b_lo = -B + ((B + D) % 2)
    for a in range(-B, B + 1):
        if a == 0:
            continue
        for b in range(b_lo, B + 1, 2):
            num = b * b - D
            if num % (4 * a) != 0:
                continue
            c = num // (4 * a)
            if abs(c) > B:
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            f = reduce_to_cycle(QuadraticForm(a, b, c))
            key = min((g.a, g.b, g.c) for g in rho_cycle(f))
            reps.add(key)
    return len(reps)
