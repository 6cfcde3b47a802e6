"""Integer-point enumeration kernels for the brute-force oracle.

Both kernels walk the box depth-first in lexicographic order and prune a
partial assignment as soon as some row can no longer be satisfied by the
remaining coordinates.  The numba kernel is used when available; set
GCTUF_NO_NUMBA=1 to force the vectorised numpy version.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("GCTUF_NO_NUMBA", "") not in ("", "0")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on the environment
    HAVE_NUMBA = False


def suffix_minima(T: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """S[j, i] = smallest value of sum_{l >= j} T[i, l] x_l over the box."""
    k, n = T.shape
    contrib = np.minimum(T * lo[None, :], T * hi[None, :])
    S = np.zeros((n + 1, k), dtype=np.int64)
    for j in range(n - 1, -1, -1):
        S[j] = S[j + 1] + contrib[:, j]
    return S


def _enumerate_numpy(T, b, lo, hi, limit):
    k, n = T.shape
    S = suffix_minima(T, lo, hi)
    pts = np.zeros((1, 0), dtype=np.int64)
    part = np.zeros((1, k), dtype=np.int64)
    for j in range(n):
        vals = np.arange(lo[j], hi[j] + 1, dtype=np.int64)
        m = len(vals)
        rep_pts = np.repeat(pts, m, axis=0)
        rep_part = np.repeat(part, m, axis=0)
        col = np.tile(vals, pts.shape[0])
        new_part = rep_part + col[:, None] * T[:, j][None, :]
        ok = (new_part + S[j + 1][None, :] <= b[None, :]).all(axis=1)
        pts = np.hstack([rep_pts[ok], col[ok][:, None]])
        part = new_part[ok]
        if pts.shape[0] > limit:
            return None
        if pts.shape[0] == 0:
            break
    return pts.reshape(-1, n)


if HAVE_NUMBA:

    @njit(cache=True)
    def _enumerate_jit(T, b, lo, hi, S, cap):
        k, n = T.shape
        out = np.empty((cap, n), dtype=np.int64)
        count = 0
        if n == 0:
            for i in range(k):
                if b[i] < 0:
                    return out[:0], 0
            return out[:1], 1
        x = lo.copy()
        part = np.zeros((n + 1, k), dtype=np.int64)
        j = 0
        x[0] = lo[0] - 1
        while j >= 0:
            x[j] += 1
            if x[j] > hi[j]:
                j -= 1
                continue
            ok = True
            for i in range(k):
                v = part[j, i] + T[i, j] * x[j]
                part[j + 1, i] = v
                if v + S[j + 1, i] > b[i]:
                    ok = False
            if not ok:
                continue
            if j == n - 1:
                if count >= cap:
                    return out, -1
                for l in range(n):
                    out[count, l] = x[l]
                count += 1
            else:
                j += 1
                x[j] = lo[j] - 1
        return out[:count], count


def enumerate_box(T: np.ndarray, b: np.ndarray, lo: np.ndarray, hi: np.ndarray, limit: int, use_numba: bool | None = None) -> np.ndarray | None:
    """Integer points of {Tx <= b} inside [lo, hi] in lexicographic order.

    Returns None when more than `limit` points exist.
    """
    if use_numba is None:
        use_numba = HAVE_NUMBA
    T = np.ascontiguousarray(T, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    lo = np.ascontiguousarray(lo, dtype=np.int64)
    hi = np.ascontiguousarray(hi, dtype=np.int64)
    if np.any(lo > hi):
        return np.zeros((0, T.shape[1]), dtype=np.int64)
    if not use_numba:
        return _enumerate_numpy(T, b, lo, hi, limit)
    S = suffix_minima(T, lo, hi)
    cap = 1024
    while True:
        out, count = _enumerate_jit(T, b, lo, hi, S, min(cap, limit + 1))
        if count >= 0:
            return out if count <= limit else None
        if cap > limit:
            return None
        cap *= 8
