"""Hot numeric kernels: reduced-form enumeration / class-number counting,
brute-force Pell scans, and a bounded int64 continued-fraction walk.

Every kernel is written as a plain int64 loop so the same source compiles
under numba's @njit and still runs as ordinary Python.  Setting the
environment variable QFCENSUS_NO_NUMBA=1 selects the uncompiled path (plus
a vectorised numpy variant of the Pell scan); benchmarks/bench_kernels.py
compares the two.

Error codes returned by the class-number kernels (negative values):
  -1  invalid discriminant
  -2  prime table too small to certify a factorization
  -3  reduction walk left the enumerated set (internal inconsistency)
  -4  discriminant exceeds the int64 packing guard (use pure paths)
"""

import os

import numpy as np

NUMBA_ENV_FLAG = "QFCENSUS_NO_NUMBA"

numba_disabled = os.environ.get(NUMBA_ENV_FLAG, "").strip() not in ("", "0")
if not numba_disabled:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a hard dep
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

if HAVE_NUMBA:
    _jit = njit(cache=True)
else:

    def _jit(f):
        return f


# fast square rejection tables: residues mod 64 / 63 / 65 that are squares
def _square_mask(mod):
    mask = np.zeros(mod, dtype=np.bool_)
    for i in range(mod):
        mask[i * i % mod] = True
    return mask


_SQ64 = _square_mask(64)
_SQ63 = _square_mask(63)
_SQ65 = _square_mask(65)

# packing guard: forms are keyed as (a + 2^20) * 2^21 + b, so |a|, b < 2^20
_PACK_OFF = 1 << 20
_PACK_SCALE = 1 << 21
MAX_KERNEL_D = 1 << 40


@_jit
def _isqrt64(n):
    if n < 0:
        return -1
    x = int(np.sqrt(np.float64(n)))
    while x > 0 and x * x > n:
        x -= 1
    while (x + 1) * (x + 1) <= n:
        x += 1
    return x


@_jit
def _gcd64(a, b):
    while b != 0:
        a, b = b, a % b
    return a


@_jit
def _factor_into(m, primes, fp, fe):
    """Trial-divide m over the prime table into fp/fe; returns the count of
    distinct primes, or -1 if the table cannot certify the cofactor prime."""
    nf = 0
    mm = m
    certified = False
    for idx in range(len(primes)):
        p = primes[idx]
        if p * p > mm:
            certified = True
            break
        if mm % p == 0:
            e = 0
            while mm % p == 0:
                mm //= p
                e += 1
            fp[nf] = p
            fe[nf] = e
            nf += 1
    if not certified and mm > 1 and primes[len(primes) - 1] ** 2 <= mm:
        return -1
    if mm > 1:
        fp[nf] = mm
        fe[nf] = 1
        nf += 1
    return nf


@_jit
def _reduced_forms(D, primes):
    """Enumerate all reduced forms of discriminant D as (a, b) pairs
    (c is determined by c = (b*b - D) / (4a)).

    Reduced means ac < 0, 0 < b < sqrt(D), sqrt(D) - b < 2|a| < sqrt(D) + b.
    Returns (a_array, b_array, count); count < 0 is an error code.
    """
    err = np.empty(0, dtype=np.int64)
    if D <= 0 or D % 4 > 1:
        return err, err, -1
    if D >= MAX_KERNEL_D:
        return err, err, -4
    s = _isqrt64(D)
    if s * s == D:
        return err, err, -1
    cap = 256
    fa = np.empty(cap, dtype=np.int64)
    fb = np.empty(cap, dtype=np.int64)
    n = 0
    fp = np.empty(24, dtype=np.int64)
    fe = np.empty(24, dtype=np.int64)
    exps = np.empty(24, dtype=np.int64)
    b0 = 1 if D % 2 == 1 else 2
    for b in range(b0, s + 1, 2):
        m = (D - b * b) // 4
        amin = (s - b + 2) // 2
        if amin < 1:
            amin = 1
        amax = (s + b) // 2
        if amax < amin:
            continue
        nf = _factor_into(m, primes, fp, fe)
        if nf < 0:
            return err, err, -2
        for i in range(nf):
            exps[i] = 0
        d = 1
        while True:
            if amin <= d and d <= amax:
                cneg = m // d  # |c| for the form [d, b, -m/d]
                if _gcd64(_gcd64(d, b), cneg) == 1:
                    if n + 2 > cap:
                        cap *= 2
                        na = np.empty(cap, dtype=np.int64)
                        nb = np.empty(cap, dtype=np.int64)
                        na[:n] = fa[:n]
                        nb[:n] = fb[:n]
                        fa = na
                        fb = nb
                    fa[n] = d
                    fb[n] = b
                    fa[n + 1] = -d
                    fb[n + 1] = b
                    n += 2
            j = 0
            while j < nf:
                if exps[j] < fe[j]:
                    exps[j] += 1
                    d *= fp[j]
                    break
                while exps[j] > 0:
                    d //= fp[j]
                    exps[j] -= 1
                j += 1
            if j == nf:
                break
    return fa[:n].copy(), fb[:n].copy(), n


@_jit
def _count_cycles(D, fa, fb, n):
    """Partition reduced forms into cycles of the reduction step and count
    them; this count is the narrow class number."""
    s = _isqrt64(D)
    keys = np.empty(n, dtype=np.int64)
    for i in range(n):
        keys[i] = (fa[i] + _PACK_OFF) * _PACK_SCALE + fb[i]
    order = np.argsort(keys)
    skeys = keys[order]
    visited = np.zeros(n, dtype=np.uint8)
    h = 0
    for i0 in range(n):
        if visited[i0] == 1:
            continue
        h += 1
        a = fa[order[i0]]
        b = fb[order[i0]]
        visited[i0] = 1
        while True:
            c = (b * b - D) // (4 * a)
            ac = -c if c < 0 else c
            k = (s + b) // (2 * ac)
            a = c
            b = -b + 2 * ac * k
            key = (a + _PACK_OFF) * _PACK_SCALE + b
            pos = np.searchsorted(skeys, key)
            if pos >= n or skeys[pos] != key:
                return -3
            if visited[pos] == 1:
                break
            visited[pos] = 1
    return h


@_jit
def _class_number_single(D, primes):
    fa, fb, n = _reduced_forms(D, primes)
    if n < 0:
        return n
    if n == 0:
        return -3
    return _count_cycles(D, fa, fb, n)


@_jit
def _class_number_batch(Ds, primes):
    out = np.empty(len(Ds), dtype=np.int64)
    for i in range(len(Ds)):
        out[i] = _class_number_single(Ds[i], primes)
    return out


@_jit
def _pell_scan_single(D, u_max):
    """Smallest u <= u_max with D*u*u + 4 a perfect square; (0, 0) if none."""
    for u in range(1, u_max + 1):
        v = D * u * u + 4
        if not _SQ64[v % 64]:
            continue
        if not _SQ63[v % 63]:
            continue
        if not _SQ65[v % 65]:
            continue
        t = _isqrt64(v)
        if t * t == v:
            return t, u
    return 0, 0


@_jit
def _pell_scan_batch(Ds, u_max):
    ts = np.zeros(len(Ds), dtype=np.int64)
    us = np.zeros(len(Ds), dtype=np.int64)
    for i in range(len(Ds)):
        t, u = _pell_scan_single(Ds[i], u_max)
        ts[i] = t
        us[i] = u
    return ts, us


def _pell_scan_batch_np(Ds, u_max, chunk=1 << 15):
    """Vectorised numpy variant of the Pell scan (fallback-path batch)."""
    ts = np.zeros(len(Ds), dtype=np.int64)
    us = np.zeros(len(Ds), dtype=np.int64)
    for i, D in enumerate(np.asarray(Ds, dtype=np.int64)):
        for lo in range(1, u_max + 1, chunk):
            u = np.arange(lo, min(lo + chunk, u_max + 1), dtype=np.int64)
            v = D * u * u + 4
            cand = _SQ64[v % 64] & _SQ63[v % 63] & _SQ65[v % 65]
            if not cand.any():
                continue
            vv = v[cand]
            uu = u[cand]
            r = np.sqrt(vv.astype(np.float64)).astype(np.int64)
            hit = np.zeros(len(vv), dtype=np.bool_)
            for dr in (-1, 0, 1):
                rr = r + dr
                hit |= rr * rr == vv
            if hit.any():
                j = int(np.nonzero(hit)[0][0])
                vj = int(vv[j])
                tj = _isqrt64(vj)
                ts[i] = tj
                us[i] = int(uu[j])
                break
    return ts, us


@_jit
def _cf_fundamental_bounded(D, x_max):
    """Fundamental Pell solution of t^2 - D u^2 = 4 via the reduction cycle
    of the principal form, in int64.

    Returns (t, u) when the walk closes within bounds, (0, 0) once the
    accumulated transformation certifies u1 > 2*x_max (so eps(D) >= x_max),
    and (-1, -1) if the int64 guard trips (caller promotes to big ints).
    """
    s = _isqrt64(D)
    b0 = s if (s - D) % 2 == 0 else s - 1
    a = 1
    b = b0
    m11, m12, m21, m22 = 1, 0, 0, 1
    limit = 1 << 60
    while True:
        c = (b * b - D) // (4 * a)
        ac = -c if c < 0 else c
        k = (s + b) // (2 * ac)
        w = k if c > 0 else -k
        m11, m12 = m12, -m11 + m12 * w
        m21, m22 = m22, -m21 + m22 * w
        if abs(m11) > limit or abs(m12) > limit or abs(m21) > limit or abs(m22) > limit:
            return -1, -1
        a = c
        b = -b + 2 * ac * k
        if a == 1 and b == b0:
            t = m11 + m22
            u = m21
            if t < 0:
                t = -t
            if u < 0:
                u = -u
            return t, u
        # |entries| only grow; once both u-track entries pass 2*x_max the
        # fundamental u exceeds it and eps(D) is certainly >= x_max
        if abs(m21) > 2 * x_max and abs(m22) > 2 * x_max:
            return 0, 0


isqrt64 = _isqrt64
reduced_forms_kernel = _reduced_forms
class_number_kernel = _class_number_single
class_number_batch_kernel = _class_number_batch
pell_scan_kernel = _pell_scan_single
cf_fundamental_bounded = _cf_fundamental_bounded
pell_scan_batch = _pell_scan_batch if HAVE_NUMBA else _pell_scan_batch_np
