"""Summatory statistics over the census: the logarithmic-integral baseline,
exact density values and their empirical estimators, weighted geodesic
counts for congruence subgroups, class-group divisibility ratios, the
class-number-one census, and the two classical asymptotic ratios.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from scipy import integrate

from . import congruence
from .numtheory import is_prime, kronecker, squarefree_core
from .pell import (
    PellSolution,
    epsilon_below,
    fundamental_below,
    log_epsilon,
    pell_fundamental,
)
from .qforms import class_number, class_numbers_batch, make_discriminant

# ----------------------------------------------------------------------
# baseline integrals and constants


def li(x):
    """Logarithmic integral from 2 to x by adaptive quadrature.

    Substituting t = e^s makes the integrand e^s / s, smooth on
    [log 2, log x], which quad handles to ~1e-12 relative error.
    """
    if x < 2:
        raise ValueError(f"li requires x >= 2, got {x}")
    if x == 2:
        return 0.0
    val, _ = integrate.quad(
        lambda s: math.exp(s) / s, math.log(2), math.log(x), epsabs=0, epsrel=1e-13, limit=200
    )
    return val


def zeta3(terms=2_000_000):
    """zeta(3) by direct series, tail-corrected with the Euler-Maclaurin
    integral term; good to ~1e-14."""
    import numpy as np

    n = np.arange(1, terms + 1, dtype=np.float64)
    s = float(np.sum(1.0 / (n * n * n)[::-1]))
    # tail: integral + half-term correction
    return s + 1.0 / (2.0 * terms**2) - 1.0 / (2.0 * terms**3)


def siegel_constant():
    """pi^2 / (18 zeta(3)): the coefficient of x^(3/2) in the
    discriminant-ordered sum of h log eps."""
    return math.pi**2 / (18.0 * zeta3())


# ----------------------------------------------------------------------
# conditions on the companion d and their exact limiting densities

DIV = "div"  # p^m | d
RES = "res"  # (d/p) = +-1, with the mod-8 convention at p = 2
MOD4 = "mod4"  # d = 3 mod 4 (p = 2 family)


@dataclass(frozen=True)
class Atom:
    kind: str
    p: int
    m: int = 1  # exponent for DIV
    sign: int = 0  # +-1 for RES

    def __post_init__(self):
        if self.kind not in (DIV, RES, MOD4):
            raise ValueError(f"unknown atom kind {self.kind!r}")
        if self.kind == MOD4 and self.p != 2:
            raise ValueError("the d=3 mod 4 atom belongs to p=2")
        if self.kind == RES and self.sign not in (-1, 1):
            raise ValueError("residue atom needs sign +-1")
        if self.kind == DIV and self.m < 1:
            raise ValueError("divisibility atom needs m >= 1")

    def holds(self, d):
        if self.kind == DIV:
            return d % self.p**self.m == 0
        if self.kind == MOD4:
            return d % 4 == 3
        if self.p == 2:
            # the partition convention: (d/2)=1 iff d=1 mod 8, -1 iff d=5 mod 8
            return d % 8 == (1 if self.sign == 1 else 5)
        return kronecker(d, self.p) == self.sign


@dataclass(frozen=True)
class Condition:
    """Conjunction of atoms, at most one per prime."""

    atoms: tuple

    def __post_init__(self):
        ps = [a.p for a in self.atoms]
        if len(set(ps)) != len(ps):
            raise ValueError("conditions admit at most one atom per prime")

    def holds(self, d):
        return all(a.holds(d) for a in self.atoms)

    def label(self):
        parts = []
        for a in self.atoms:
            if a.kind == DIV:
                parts.append(f"{a.p}|d" if a.m == 1 else f"{a.p}^{a.m}|d")
            elif a.kind == MOD4:
                parts.append("d%4==3")
            else:
                parts.append(f"(d/{a.p})={a.sign:+d}".replace("+1", "1"))
        return " and ".join(parts) or "true"


def _mu_atom(a):
    p = a.p
    if a.kind == MOD4:
        return Fraction(29, 112)
    if a.kind == DIV:
        m = a.m
        if p == 2:
            if m == 1:
                return Fraction(45, 112)
            if m == 2:
                return Fraction(37, 112)
            if m == 3:
                return Fraction(17, 56)
            if m == 4:
                return Fraction(9, 56)
            if m % 2 == 1:  # odd m >= 5
                return Fraction(3, 7 * 2 ** (m - 3))
            return Fraction(1, 7 * 2 ** (m - 5))  # even m >= 6
        return Fraction(2 * p ** max(3 - m, 0), (p**3 - 1) * p ** max(m - 3, 0))
    if p == 2:
        return Fraction(1, 224) if a.sign == 1 else Fraction(75, 224)
    if a.sign == 1:
        return Fraction(1, 2) - Fraction(p * (p + 1), p**3 - 1)
    return Fraction(1, 2) - Fraction(p * (p - 1), p**3 - 1)


def mu_theoretical(cond):
    """Exact limiting density of the condition, as a Fraction: the table
    values multiplied across the (distinct-prime) atoms."""
    out = Fraction(1)
    for a in cond.atoms:
        out *= _mu_atom(a)
    return out


@dataclass(frozen=True)
class MuEstimate:
    numerator: int
    denominator: int
    x: int

    @property
    def value(self):
        return self.numerator / self.denominator


def mu_estimate(cond, x, records):
    """Class-number-weighted density of the condition among fundamental
    (j = 1) records with eps(D) < x."""
    num = den = 0
    for r in records:
        if r.j != 1 or not epsilon_below(PellSolution(r.D, r.j, r.t, r.u), x):
            continue
        den += r.h
        if cond.holds(r.d):
            num += r.h
    if den == 0:
        raise ValueError(f"empty census below x={x}")
    return MuEstimate(num, den, x)


# ----------------------------------------------------------------------
# weighted geodesic counts and the classical ratios


def hatpi(records, x, spec=None):
    """The j^-1-weighted geodesic count below x^2, with each (D, j) record
    weighted by the validated induced-character value of its subgroup spec
    (spec None means the full modular group, weight 1)."""
    total = []
    for r in records:
        if not epsilon_below(PellSolution(r.D, r.j, r.t, r.u), x):
            continue
        if spec is None:
            w = 1
        else:
            w = congruence.m_validated(
                spec, congruence.PellClassData(r.D, r.d, r.j, r.t, r.u)
            )
        if w:
            total.append(w * r.h / r.j)
    return math.fsum(total)


def sigma_estimate(records, x, spec):
    """Ratio of the subgroup-weighted geodesic count to the unweighted one;
    tends to 1 for every congruence subgroup."""
    return hatpi(records, x, spec) / hatpi(records, x)


def beta_sum(cond, x, entries):
    """Exploratory D-ordered conditional sum: h(D) log eps(D) over D < x
    with the condition on the companion, and its ratio to x^(3/2).

    No limiting constant is asserted anywhere; this only exposes the raw
    numbers for experimentation.
    """
    total = math.fsum(
        h * log_epsilon(fund)
        for disc, fund, h in entries
        if disc.D < x and cond.holds(disc.d)
    )
    return total, total / x**1.5


def sarnak_ratio(records, x):
    """(sum of h(D) over eps(D) < x, its ratio to li(x^2))."""
    sum_h = sum(
        r.h for r in records if r.j == 1 and epsilon_below(PellSolution(r.D, r.j, r.t, r.u), x)
    )
    return sum_h, sum_h / li(float(x) * float(x))


def siegel_ratio(x, entries=None):
    """(sum of h(D) log eps(D) over D < x, its ratio to C x^(3/2))."""
    from .census import census_by_discriminant

    if entries is None:
        entries = census_by_discriminant(x)
    total = math.fsum(h * log_epsilon(fund) for _, fund, h in entries)
    return total, total / (siegel_constant() * x**1.5)


# ----------------------------------------------------------------------
# class-group divisibility and the class-number-one census


def alpha_p(p, x, sf_records, convention="rows"):
    """Fraction of square-free d with p | h(D), ordered by fundamental unit.

    Every trace contributes exactly one square-free-d row, so the published
    tables index the census by row count: the "rows" convention reads the
    first x rows (traces 3..x+2) and divides the count of distinct d with
    p | h by exactly x.  The "strict" convention is the literal definition
    #{d : p | h, eps < x} / #{d : eps < x} over distinct d.
    """
    if convention == "rows":
        rows = [r for r in sf_records if r.t <= x + 2]
        if len(rows) != x:
            raise ValueError(
                f"need the first {x} square-free rows, got {len(rows)} "
                "(census must cover traces up to x+2)"
            )
        num = sum(1 for r in rows if r.j == 1 and r.h % p == 0)
        return num / x
    if convention == "strict":
        rows = [
            r
            for r in sf_records
            if r.j == 1 and epsilon_below(PellSolution(r.D, r.j, r.t, r.u), x)
        ]
        num = sum(1 for r in rows if r.h % p == 0)
        return num / len(rows)
    raise ValueError(f"unknown convention {convention!r}")


def _square_odd_part(n):
    while n % 2 == 0:
        n //= 2
    s = math.isqrt(n)
    return s * s == n


@dataclass(frozen=True)
class H1Entry:
    d: int
    D: int
    t: int
    u: int
    h: int


def h1_census(x):
    """All prime d with h(D) = 1 and eps(D) < x, in order of eps.

    Candidate traces are pruned: an odd prime d = D forces t-2 and t+2 to
    be coprime with square-free parts {1, d}, so one of them has square odd
    part; d = 2 only arises from D = 8; and primes d = 3 mod 4 have even
    narrow class number (their discriminant splits into two prime
    discriminants), so they can never reach h = 1.  A full-census cross
    check of this pruning runs in the tests.
    """
    out = []
    candidates = set()
    pw = 1
    while pw <= x + 2:
        a = 1
        while pw * a * a <= x + 2:
            for t in (pw * a * a - 2, pw * a * a + 2):
                if 3 <= t <= x:
                    candidates.add(t)
            a += 1
        pw *= 2
    from .census import _records_at_trace

    need_h = []
    rows = []
    for t in sorted(candidates):
        if not (_square_odd_part(t - 2) or _square_odd_part(t + 2)):
            continue
        for u, D in _records_at_trace(t):
            d = make_discriminant(D).d
            if d == 2 or (d % 4 == 1 and is_prime(d)):
                fund = fundamental_below(D, x + 1)
                if fund is None or (fund.t, fund.u) != (t, u):
                    continue  # a higher power of a smaller solution
                if not epsilon_below(fund, x):
                    continue
                rows.append((t, u, D, d))
                need_h.append(D)
    hs = class_numbers_batch(need_h)
    for t, u, D, d in rows:
        if hs[D] == 1:
            out.append(H1Entry(d, D, t, u, 1))
    return len(out), out


# ----------------------------------------------------------------------
# class number formula cross-check


def is_fundamental(D):
    core, cof = squarefree_core(D)
    if D % 4 == 1:
        return cof == 1
    m = D // 4
    mc, mcof = squarefree_core(m)
    return mcof == 1 and m % 4 in (2, 3)


def l1_crosscheck(D, cutoff_factor=10**4):
    """Compare h(D) log eps(D) against sqrt(D) * L(1, chi_D) with the
    L-value from a truncated character sum (consistency check only; the
    class number itself always comes from the reduction cycles).

    Returns (lhs, rhs, relative error).  The cutoff is cutoff_factor *
    sqrt(D) terms; the partial-summation tail is O(sqrt(D) log D / cutoff).
    """
    disc = make_discriminant(D)
    if not is_fundamental(D):
        raise ValueError(f"D={D} is not a fundamental discriminant")
    h = class_number(disc)
    lhs = h * log_epsilon(pell_fundamental(D))
    cutoff = cutoff_factor * math.isqrt(D)
    acc = []
    for n in range(1, cutoff + 1):
        chi = kronecker(D, n)
        if chi:
            acc.append(chi / n)
    rhs = math.sqrt(D) * math.fsum(acc)
    rel = abs(lhs - rhs) / abs(lhs)
    return lhs, rhs, rel
