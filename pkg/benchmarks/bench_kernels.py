"""Benchmark the numba-compiled kernels against the pure-Python/numpy
fallback selected by QFCENSUS_NO_NUMBA=1.

Runs each workload in a subprocess so that both paths start from a clean
import (the JIT path pays its compile cost once, cached on disk).

    python3 benchmarks/bench_kernels.py [--quick]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOADS = {
    "class_numbers": """
import numpy as np, time
from qfcensus.numtheory import sieved_primes
from qfcensus import _kernels as K
primes = sieved_primes()
Ds = np.array([D for D in range({lo}, {hi}) if D % 4 in (0, 1)], dtype=np.int64)
K.class_number_batch_kernel(Ds[:2], primes)  # warm the JIT before timing
t0 = time.perf_counter()
hs = K.class_number_batch_kernel(Ds, primes)
dt = time.perf_counter() - t0
print(__import__('json').dumps({{"seconds": dt, "checksum": int(hs.sum()), "n": len(Ds)}}))
""",
    "pell_scan": """
import numpy as np, time
from qfcensus import _kernels as K
Ds = np.array([D for D in range(5, {nd}) if D % 4 in (0, 1)], dtype=np.int64)
K.pell_scan_batch(Ds[:2], 10)
t0 = time.perf_counter()
ts, us = K.pell_scan_batch(Ds, {umax})
dt = time.perf_counter() - t0
print(__import__('json').dumps({{"seconds": dt, "checksum": int(ts.sum() + us.sum()), "n": len(Ds)}}))
""",
}


def run(code, pure):
    env = dict(os.environ)
    if pure:
        env["QFCENSUS_NO_NUMBA"] = "1"
    else:
        env.pop("QFCENSUS_NO_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    args = ap.parse_args()
    if args.quick:
        params = {"class_numbers": dict(lo=100000, hi=102000), "pell_scan": dict(nd=200, umax=20000)}
    else:
        params = {"class_numbers": dict(lo=1000000, hi=1020000), "pell_scan": dict(nd=500, umax=200000)}
    print(f"{'workload':15s} {'numba':>10s} {'fallback':>10s} {'speedup':>8s}")
    for name, tmpl in WORKLOADS.items():
        code = tmpl.format(**params[name])
        jit = run(code, pure=False)
        py = run(code, pure=True)
        if jit["checksum"] != py["checksum"]:
            raise SystemExit(f"{name}: paths disagree ({jit['checksum']} vs {py['checksum']})")
        print(
            f"{name:15s} {jit['seconds']:9.3f}s {py['seconds']:9.3f}s "
            f"{py['seconds'] / jit['seconds']:7.1f}x   (n={jit['n']}, identical results)"
        )


if __name__ == "__main__":
    main()
