"""Exact Pell-equation machinery for t^2 - D u^2 = 4.

Fundamental solutions come from the reduction cycle of the principal form
of discriminant D, accumulating the unimodular transformation in unbounded
integers; this is polynomial in log(eps) where a direct u-scan is
exponential.  An int64 fast path handles the threshold-bounded queries the
census makes, promoting to big integers on overflow.
"""

import math
from dataclasses import dataclass

from . import _kernels
from .numtheory import squarefree_core


class InvalidDiscriminant(ValueError):
    pass


def check_discriminant(D):
    """Raise InvalidDiscriminant unless D > 0, non-square, D = 0,1 mod 4."""
    if D <= 0:
        raise InvalidDiscriminant(f"D must be positive, got {D}")
    if D % 4 not in (0, 1):
        raise InvalidDiscriminant(f"D must be 0 or 1 mod 4, got {D}")
    s = math.isqrt(D)
    if s * s == D:
        raise InvalidDiscriminant(f"D must not be a square, got {D}")


@dataclass(frozen=True)
class PellSolution:
    """The j-th positive solution (t, u) of t^2 - D u^2 = 4."""

    D: int
    j: int
    t: int
    u: int

    def __post_init__(self):
        if self.t * self.t - self.D * self.u * self.u != 4:
            raise ValueError(f"not a Pell solution: {self}")


def _principal_form(D):
    s = math.isqrt(D)
    b0 = s if (s - D) % 2 == 0 else s - 1
    return s, b0


def pell_fundamental(D):
    """Minimal positive solution of t^2 - D u^2 = 4, exact integers.

    Walks the reduction cycle of the principal form [1, b0, (b0^2 - D)/4]
    once, multiplying out the per-step transformations [[0, -1], [1, w]];
    the trace of the full-cycle matrix is t and its lower-left entry is u.
    """
    check_discriminant(D)
    s, b0 = _principal_form(D)
    a, b = 1, b0
    m11, m12, m21, m22 = 1, 0, 0, 1
    while True:
        c = (b * b - D) // (4 * a)
        ac = abs(c)
        k = (s + b) // (2 * ac)
        w = k if c > 0 else -k
        m11, m12 = m12, -m11 + m12 * w
        m21, m22 = m22, -m21 + m22 * w
        a, b = c, -b + 2 * ac * k
        if a == 1 and b == b0:
            break
    t = abs(m11 + m22)
    u = abs(m21)
    sol = PellSolution(D, 1, t, u)
    return sol


def fundamental_below(D, x_max):
    """pell_fundamental(D) if eps(D) < x_max, else None.

    Tries the int64 kernel first (it aborts cheaply once the solution is
    certified to exceed the threshold) and promotes to the big-integer walk
    if the kernel's width guard trips.
    """
    check_discriminant(D)
    if 3 <= x_max <= 10**6 and D < _kernels.MAX_KERNEL_D:
        t, u = _kernels.cf_fundamental_bounded(D, x_max)
        if t == 0:
            return None
        if t > 0:
            sol = PellSolution(D, 1, int(t), int(u))
            return sol if epsilon_below(sol, x_max) else None
    sol = pell_fundamental(D)
    return sol if epsilon_below(sol, x_max) else None


def pell_power(fund, j):
    """The j-th solution from the fundamental one.

    (t_j + u_j sqrt(D))/2 = ((t_1 + u_1 sqrt(D))/2)^j via the integer
    recurrence; both halving divisions are exact.
    """
    if fund.j != 1:
        raise ValueError("pell_power expects the fundamental (j=1) solution")
    if j < 1:
        raise ValueError(f"solution index must be >= 1, got {j}")
    D, t1, u1 = fund.D, fund.t, fund.u
    t, u = t1, u1
    for _ in range(j - 1):
        t, u = (t1 * t + D * u1 * u) // 2, (t1 * u + u1 * t) // 2
    return PellSolution(D, j, t, u)


def epsilon_below(sol, x):
    """Exact test of (t + u sqrt(D))/2 < x for integer x, no rounding."""
    r = 2 * x - sol.t
    return r > 0 and sol.u * sol.u * sol.D < r * r


def log_epsilon(sol):
    """log((t + sqrt(t^2 - 4))/2), computed from t alone.

    Good to ~1 ulp even for t with thousands of digits (math.log accepts
    arbitrary ints).
    """
    t = sol.t
    if t.bit_length() > 500:
        return math.log(t)  # correction below log(t) - log(2) + log(2) underflows
    return math.log(t) + math.log1p(math.sqrt(max(0.0, 1.0 - 4.0 / (t * t)))) - math.log(2.0)


def companion(D):
    """d = D if the square-free core of D is 1 mod 4, else D/4."""
    core, _ = squarefree_core(D)
    return D if core % 4 == 1 else D // 4
