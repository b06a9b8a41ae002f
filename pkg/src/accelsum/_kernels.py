"""Hot numerical kernels: uniform-grid convolutions in the Fourier variable.

The same centered convolution

    out[i] = sum_j f[i - j + c] * g[j],      c = (len(f) - 1) // 2

(entries with out-of-range index treated as zero) backs the weighted
star product, the coefficient recursions and the Picard operators, so it
is worth JIT-compiling.  Set ``ACCELSUM_NO_NUMBA=1`` to force the pure
numpy fallback; the fallback is also used when numba is not importable.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("ACCELSUM_NO_NUMBA", "").strip() not in ("", "0", "false")

USING_NUMBA = False

if not _DISABLE:
    try:
        from numba import njit

        USING_NUMBA = True
    except ImportError:  # pragma: no cover - environment dependent
        USING_NUMBA = False


def _conv_center_np(f, g):
    n = f.shape[0]
    c = (n - 1) // 2
    return np.convolve(f, g, mode="full")[c : c + n]


def _conv_center_batch_np(fa, ga):
    s, n = fa.shape
    c = (n - 1) // 2
    out = np.empty((s, n), dtype=np.complex128)
    for r in range(s):
        out[r] = np.convolve(fa[r], ga[r], mode="full")[c : c + n]
    return out


if USING_NUMBA:

    @njit(cache=True)
    def _conv_full_nb(f, g, full):  # pragma: no cover - compiled
        n = f.shape[0]
        for i in range(n):
            fi = f[i]
            if fi == 0.0:
                continue
            for j in range(n):
                full[i + j] += fi * g[j]

    @njit(cache=True)
    def _conv_center_nb(f, g):  # pragma: no cover - compiled
        n = f.shape[0]
        c = (n - 1) // 2
        full = np.zeros(2 * n - 1, dtype=np.complex128)
        _conv_full_nb(f, g, full)
        return full[c : c + n].copy()

    # serial on purpose: the JIT kernels must stay safe to call from
    # multiple Python threads (parameter points run in a thread pool)
    @njit(cache=True)
    def _conv_center_batch_nb(fa, ga):  # pragma: no cover - compiled
        s, n = fa.shape
        c = (n - 1) // 2
        out = np.zeros((s, n), dtype=np.complex128)
        full = np.zeros(2 * n - 1, dtype=np.complex128)
        for r in range(s):
            full[:] = 0.0
            _conv_full_nb(fa[r], ga[r], full)
            out[r] = full[c : c + n]
        return out

    def conv_center(f, g):
        return _conv_center_nb(
            np.ascontiguousarray(f, dtype=np.complex128),
            np.ascontiguousarray(g, dtype=np.complex128),
        )

    def conv_center_batch(fa, ga):
        return _conv_center_batch_nb(
            np.ascontiguousarray(fa, dtype=np.complex128),
            np.ascontiguousarray(ga, dtype=np.complex128),
        )

else:

    def conv_center(f, g):
        return _conv_center_np(
            np.asarray(f, dtype=np.complex128), np.asarray(g, dtype=np.complex128)
        )

    def conv_center_batch(fa, ga):
        return _conv_center_batch_np(
            np.asarray(fa, dtype=np.complex128), np.asarray(ga, dtype=np.complex128)
        )


def conv_center_reference(f, g):
    """Slow index-by-index reference used in tests against the fast paths."""
    f = np.asarray(f, dtype=np.complex128)
    g = np.asarray(g, dtype=np.complex128)
    n = f.shape[0]
    c = (n - 1) // 2
    out = np.zeros(n, dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            k = i - j + c
            if 0 <= k < n:
                out[i] += f[k] * g[j]
    return out
