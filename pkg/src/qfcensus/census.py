"""Trace-ordered census of all (D, j) pairs with eps(D)^j below a cutoff,
plus the discriminant-ordered variant and the plain-text disk cache.

Enumeration is by trace t = 3, 4, ...: t^2 - 4 factors as (t-2)(t+2), its
square divisors u give candidate D = (t^2-4)/u^2, and the solution index j
is identified against the fundamental solution of D.  Since
eps = (t + sqrt(t^2-4))/2 is monotone in t, trace order is eps order and
the cutoff test stays integer-exact at the boundary.
"""

import math
import os
from dataclasses import dataclass

from .numtheory import factorize
from .pell import (
    PellSolution,
    check_discriminant,
    epsilon_below,
    fundamental_below,
    log_epsilon,
    pell_fundamental,
    pell_power,
)
from .qforms import class_numbers_batch, make_discriminant

CACHE_MAGIC = "#geodesic-census"
CACHE_VERSION = "v1"


class CorruptCacheError(Exception):
    pass


class CacheVersionError(Exception):
    pass


@dataclass(frozen=True)
class CensusRecord:
    """One (D, j) pair with eps(D)^j < x, keyed by its trace t."""

    t: int
    u: int
    D: int
    d: int
    j: int
    h: int

    @property
    def log_eps(self):
        # j * log eps(D) = log of this record's own (t + sqrt(t^2-4))/2
        return log_epsilon(PellSolution(self.D, self.j, self.t, self.u))

    def validate(self):
        if self.t * self.t - self.D * self.u * self.u != 4:
            raise ValueError(f"Pell identity fails for {self}")
        check_discriminant(self.D)
        if make_discriminant(self.D).d != self.d:
            raise ValueError(f"companion mismatch for {self}")
        if self.j < 1 or self.h < 1:
            raise ValueError(f"bad indices in {self}")


def _records_at_trace(t):
    """Candidate (u, D) pairs at trace t, ascending in u: square divisors u
    of t^2 - 4 whose D = (t^2-4)/u^2 is a valid discriminant."""
    n = t * t - 4
    # t - 2 and t + 2 stay small even when t^2 - 4 would be slow to factor
    fac = {}
    for p, e in factorize(t - 2).factors:
        fac[p] = fac.get(p, 0) + e
    for p, e in factorize(t + 2).factors:
        fac[p] = fac.get(p, 0) + e
    us = [1]
    for p, e in sorted(fac.items()):
        if e >= 2:
            us = [u * p**k for u in us for k in range(e // 2 + 1)]
    out = []
    for u in sorted(us):
        D = n // (u * u)
        if D % 4 in (0, 1) and D > 4:
            out.append((u, D))
    return out


def _identify_j(D, t, u, x_max):
    """Index j of the solution (t, u) among the positive solutions for D."""
    fund = fundamental_below(D, x_max)
    if fund is None:
        raise ArithmeticError(f"no fundamental solution below {x_max} for D={D}")
    if (fund.t, fund.u) == (t, u):
        return 1
    sol = fund
    for j in range(2, 2 * t.bit_length() + 4):
        sol = pell_power(fund, j)
        if sol.t == t:
            if sol.u != u:
                raise ArithmeticError(f"solution mismatch for D={D}, t={t}")
            return j
        if sol.t > t:
            break
    raise ArithmeticError(f"(t,u)=({t},{u}) is not a solution power for D={D}")


def census_stream(x_max, dfilter=None, chunk=2048, t_start=3):
    """Yield CensusRecords for every (D, j) with eps(D)^j < x_max, in
    nondecreasing trace order (ties ordered by ascending u).

    Works in trace chunks: each chunk's distinct discriminants get their
    class numbers in one kernel batch, memoised across chunks because the
    same D recurs at higher j.  t_start > 3 resumes a partial enumeration.
    """
    if x_max < 3:
        return
    h_memo = {}
    t = max(3, t_start)
    pending = []
    done = False
    while not done:
        pending.clear()
        hi = t + chunk
        while t < hi:
            # eps at trace t is (t + sqrt(t^2-4))/2 regardless of u
            if not epsilon_below(PellSolution(t * t - 4, 1, t, 1), x_max):
                done = True
                break
            for u, D in _records_at_trace(t):
                j = _identify_j(D, t, u, x_max)
                rec = (t, u, D, make_discriminant(D).d, j)
                if dfilter is None or dfilter(D, rec[3]):
                    pending.append(rec)
            t += 1
        need = sorted({D for (_, _, D, _, _) in pending if D not in h_memo})
        if need:
            h_memo.update(class_numbers_batch(need))
        for tt, u, D, d, j in pending:
            yield CensusRecord(tt, u, D, d, j, h_memo[D])


def census_records(x_max, dfilter=None):
    """census_stream collected into a list."""
    return list(census_stream(x_max, dfilter=dfilter))


def squarefree_census(x_max):
    """The j = 1 records whose companion d is square-free, in trace order."""
    from .numtheory import squarefree_core

    out = []
    for rec in census_stream(x_max, dfilter=lambda D, d: squarefree_core(d)[0] == d):
        if rec.j == 1:
            out.append(rec)
    return out


def census_by_discriminant(d_max):
    """One (Discriminant, fundamental PellSolution, h) per D < d_max,
    ascending in D; exact unbounded integers throughout."""
    Ds = []
    for D in range(5, d_max):
        if D % 4 in (0, 1) and math.isqrt(D) ** 2 != D:
            Ds.append(D)
    hs = class_numbers_batch(Ds)
    for D in Ds:
        disc = make_discriminant(D)
        fund = pell_fundamental(D)
        yield disc, fund, hs[D]


def cache_write(path, records, x_max):
    """Write records as plain text: header line, then t,u,D,d,j,h lines.

    ASCII, LF endings, no trailing separators; the format is diffable and
    trivially partitioned.
    """
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"{CACHE_MAGIC} {CACHE_VERSION} xmax={x_max}\n")
        for r in records:
            fh.write(f"{r.t},{r.u},{r.D},{r.d},{r.j},{r.h}\n")


def cache_read(path, x_max=None):
    """Load a census cache, validating every record invariant.

    A cache written for a larger xmax answers smaller queries by prefix
    filtering (the threshold is monotone in t).  Returns (records, xmax).
    """
    with open(path, "r", encoding="ascii", newline="\n") as fh:
        header = fh.readline().rstrip("\n")
        parts = header.split()
        if len(parts) != 3 or parts[0] != CACHE_MAGIC or not parts[2].startswith("xmax="):
            raise CorruptCacheError(f"bad header: {header!r}")
        if parts[1] != CACHE_VERSION:
            raise CacheVersionError(f"cache version {parts[1]!r}, expected {CACHE_VERSION!r}")
        try:
            cached_xmax = int(parts[2][5:])
        except ValueError as exc:
            raise CorruptCacheError(f"bad xmax in header: {header!r}") from exc
        if x_max is not None and x_max > cached_xmax:
            raise CacheVersionError(
                f"cache covers xmax={cached_xmax}, queried {x_max}"
            )
        records = []
        prev_t = 0
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            fields = line.split(",")
            if len(fields) != 6:
                raise CorruptCacheError(f"line {lineno}: expected 6 fields")
            try:
                t, u, D, d, j, h = map(int, fields)
            except ValueError as exc:
                raise CorruptCacheError(f"line {lineno}: non-integer field") from exc
            rec = CensusRecord(t, u, D, d, j, h)
            try:
                rec.validate()
            except ValueError as exc:
                raise CorruptCacheError(f"line {lineno}: {exc}") from exc
            fund = fundamental_below(D, cached_xmax)
            if fund is None or pell_power(fund, j) != PellSolution(D, j, t, u):
                raise CorruptCacheError(f"line {lineno}: (t,u) is not the j-th solution")
            if t < prev_t:
                raise CorruptCacheError(f"line {lineno}: trace order violated")
            prev_t = t
            if x_max is None or epsilon_below(PellSolution(D, j, t, u), x_max):
                records.append(rec)
    return records, cached_xmax


def load_or_build(path, x_max):
    """Reuse a cache when it covers x_max; build/extend and rewrite when not.

    Extending resumes from the last cached trace rather than recomputing
    the prefix.
    """
    if path is not None and os.path.exists(path):
        try:
            records, cached = cache_read(path)
        except (CorruptCacheError, CacheVersionError):
            records, cached = None, -1
        if records is not None:
            if cached >= x_max:
                keep = [
                    r
                    for r in records
                    if epsilon_below(PellSolution(r.D, r.j, r.t, r.u), x_max)
                ]
                return keep, False
            # resume: the cache holds every record with trace <= its last one
            t_done = records[-1].t if records else 2
            tail = list(census_stream(x_max, t_start=t_done + 1))
            merged = records + tail
            cache_write(path, merged, x_max)
            return merged, True
    records = census_records(x_max)
    if path is not None:
        cache_write(path, records, x_max)
    return records, True
