"""Benchmark the hot convolution kernels: numba JIT vs pure numpy.

Run directly:  python benchmarks/bench_kernels.py
The numpy path is selected by re-executing this script with
ACCELSUM_NO_NUMBA=1, so both timings come from clean interpreter states.
"""

import os
import subprocess
import sys
import time

import numpy as np


def bench(label, sizes=(61, 121, 241), batch=256, repeats=5):
    from accelsum import _kernels

    print(f"--- {label} (numba={_kernels.USING_NUMBA}) ---")
    rng = np.random.default_rng(0)
    for n in sizes:
        fa = rng.normal(size=(batch, n)) + 1j * rng.normal(size=(batch, n))
        ga = rng.normal(size=(batch, n)) + 1j * rng.normal(size=(batch, n))
        _kernels.conv_center_batch(fa, ga)  # warm up / compile
        t0 = time.perf_counter()
        for _ in range(repeats):
            _kernels.conv_center_batch(fa, ga)
        dt = (time.perf_counter() - t0) / repeats
        rate = batch * n * n / dt / 1e6
        print(f"M={n:4d} batch={batch}: {dt * 1e3:8.2f} ms  ({rate:8.1f} Mop/s)")


def main():
    if os.environ.get("ACCELSUM_BENCH_CHILD"):
        bench("pure numpy fallback")
        return
    bench("active path")
    env = dict(os.environ)
    env["ACCELSUM_NO_NUMBA"] = "1"
    env["ACCELSUM_BENCH_CHILD"] = "1"
    subprocess.run([sys.executable, __file__], env=env, check=True)


if __name__ == "__main__":
    main()
