import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qfcensus import pell


def brute_fundamental(D, u_max=10**5):
    """Independent oracle: scan u upward for the first square t^2 = D u^2 + 4."""
    for u in range(1, u_max + 1):
        v = D * u * u + 4
        t = math.isqrt(v)
        if t * t == v:
            return t, u
    return None


def valid_discriminants(lo, hi):
    for D in range(lo, hi):
        if D % 4 in (0, 1) and math.isqrt(D) ** 2 != D:
            yield D


class TestFundamental:
    @pytest.mark.parametrize("D,expected", [(5, (3, 1)), (8, (6, 2)), (13, (11, 3))])
    def test_examples(self, D, expected):
        sol = pell.pell_fundamental(D)
        assert (sol.t, sol.u) == expected
        assert sol.j == 1

    @pytest.mark.parametrize("D", [4, 9, 16, 7, 6, -3, 0, 2])
    def test_invalid_discriminants(self, D):
        with pytest.raises(pell.InvalidDiscriminant):
            pell.pell_fundamental(D)

    def test_brute_scan_agreement(self):
        for D in valid_discriminants(5, 700):
            sol = pell.pell_fundamental(D)
            assert sol.t * sol.t - D * sol.u * sol.u == 4
            brute = brute_fundamental(D)
            if brute is not None:
                assert (sol.t, sol.u) == brute, D
            else:
                assert sol.u > 10**5

    def test_large_regulator_exact(self):
        sol = pell.pell_fundamental(1621)
        assert sol.t * sol.t - 1621 * sol.u * sol.u == 4
        assert sol.t.bit_length() > 80  # thousands of times beyond int64


class TestPower:
    def test_examples(self):
        f5 = pell.pell_fundamental(5)
        p2 = pell.pell_power(f5, 2)
        assert (p2.t, p2.u) == (7, 3) and p2.t**2 - 5 * p2.u**2 == 4
        assert pell.pell_power(f5, 1) == f5
        f8 = pell.pell_fundamental(8)
        p2 = pell.pell_power(f8, 2)
        assert (p2.t, p2.u) == (34, 12)

    def test_matches_brute_jth(self):
        for D in valid_discriminants(5, 120):
            fund = pell.pell_fundamental(D)
            if fund.u > 1000:
                continue
            sols = []
            u = 1
            while len(sols) < 4 and u < 10**7:
                v = D * u * u + 4
                t = math.isqrt(v)
                if t * t == v:
                    sols.append((t, u))
                u += 1
            for j, tu in enumerate(sols, start=1):
                pj = pell.pell_power(fund, j)
                assert (pj.t, pj.u) == tu, (D, j)

    def test_exact_power_identity(self):
        # (t_j + u_j sqrt(D)) = (t_1 + u_1 sqrt(D))^j / 2^(j-1) as integers
        for D in (5, 8, 12, 13, 60):
            f = pell.pell_fundamental(D)
            for j in (2, 3, 4, 5, 6):
                pj = pell.pell_power(f, j)
                # expand (t1 + u1 w)^j with w^2 = D symbolically
                a, b = 1, 0  # a + b w
                for _ in range(j):
                    a, b = a * f.t + b * f.u * D, a * f.u + b * f.t
                assert (pj.t, pj.u) == (a // 2 ** (j - 1), b // 2 ** (j - 1))
                assert pj.t * pj.t - D * pj.u * pj.u == 4

    def test_rejects_bad_input(self):
        f = pell.pell_fundamental(5)
        with pytest.raises(ValueError):
            pell.pell_power(pell.pell_power(f, 2), 2)
        with pytest.raises(ValueError):
            pell.pell_power(f, 0)


class TestEpsilonOrder:
    @pytest.mark.parametrize(
        "D,t,u,x,expected",
        [(5, 3, 1, 3, True), (5, 3, 1, 2, False), (8, 6, 2, 6, True)],
    )
    def test_examples(self, D, t, u, x, expected):
        assert pell.epsilon_below(pell.PellSolution(D, 1, t, u), x) is expected

    def test_monotone_in_x(self):
        sol = pell.pell_fundamental(61)
        xs = [x for x in range(3, 4000)]
        flags = [pell.epsilon_below(sol, x) for x in xs]
        assert flags == sorted(flags)  # False... then True...

    def test_consistent_with_log(self):
        for D in valid_discriminants(5, 300):
            sol = pell.pell_fundamental(D)
            le = pell.log_epsilon(sol)
            for x in (3, 10, 100, 10**6):
                if abs(le - math.log(x)) > 1e-9:
                    assert pell.epsilon_below(sol, x) == (le < math.log(x)), (D, x)


class TestLogEpsilon:
    def test_frozen_digits(self):
        assert pell.log_epsilon(pell.PellSolution(5, 1, 3, 1)) == pytest.approx(
            0.9624236501192069, abs=1e-12
        )
        assert pell.log_epsilon(pell.PellSolution(8, 1, 6, 2)) == pytest.approx(
            1.7627471740390861, abs=1e-12
        )

    def test_asymptote(self):
        # log t - log eps = 1/t^2 + 3/t^4 + ... : the gap tends to 0 like
        # 1/t^2, approaching from above; the 3/t^4 margin is only resolvable
        # in float64 for moderate t
        for D in valid_discriminants(30, 3000):
            sol = pell.pell_fundamental(D)
            gap = math.log(sol.t) - pell.log_epsilon(sol)
            t2 = float(sol.t * sol.t)
            if 10 <= sol.t <= 3000:
                assert 1.0 / t2 < gap < 1.31 / t2, (D, sol.t, gap)
            elif sol.t <= 10**6:
                assert abs(gap - 1.0 / t2) < 0.31 / t2 + 1e-13, (D, sol.t, gap)

    def test_huge_t(self):
        sol = pell.pell_fundamental(1621)
        le = pell.log_epsilon(sol)
        assert le == pytest.approx(math.log(sol.t), rel=1e-12)


class TestFundamentalBelow:
    def test_agrees_with_full_walk(self):
        for D in valid_discriminants(5, 800):
            fast = pell.fundamental_below(D, 100)
            full = pell.pell_fundamental(D)
            want = full if pell.epsilon_below(full, 100) else None
            if want is None:
                assert fast is None
            else:
                assert fast is not None and (fast.t, fast.u) == (want.t, want.u)

    @given(st.integers(min_value=5, max_value=5000))
    def test_never_wrong_solution(self, D):
        if D % 4 in (2, 3) or math.isqrt(D) ** 2 == D:
            return
        sol = pell.fundamental_below(D, 1000)
        if sol is not None:
            assert sol.t * sol.t - D * sol.u * sol.u == 4
            assert pell.epsilon_below(sol, 1000)
