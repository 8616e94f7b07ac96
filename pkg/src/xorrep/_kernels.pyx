# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled exact-value scoring kernel (same contract as ``_kernels_py``)."""
import numpy as np


def best_pair(long long f_lo, long long f_hi, long long K, long long nfx, long long ngy, long long nhz,
              const long long[::1] sx, const long long[::1] sy, const long long[::1] sz,
              const long long[::1] st, const long long[::1] sw, const long long[:, ::1] sub):
    cdef Py_ssize_t S = sx.shape[0]
    cdef long long ng = 1
    cdef Py_ssize_t i
    for i in range(ngy):
        ng *= K
    cdef long long[::1] f = np.zeros(max(nfx, 1), dtype=np.int64)
    cdef long long[::1] g = np.zeros(max(ngy, 1), dtype=np.int64)
    cdef long long[::1] u = np.zeros(max(S, 1), dtype=np.int64)
    cdef long long[::1] slot = np.zeros(max(S, 1), dtype=np.int64)
    cdef long long[::1] bucket = np.zeros(max(nhz * K, 1), dtype=np.int64)
    cdef long long[::1] zmax = np.zeros(max(nhz, 1), dtype=np.int64)
    cdef long long best = -1, best_f = -1, best_g = -1
    cdef long long fi, gi, tmp, score, val
    cdef Py_ssize_t s, j, z
    with nogil:
        tmp = f_lo
        for j in range(nfx):
            f[j] = tmp % K
            tmp = tmp // K
        fi = f_lo
        while fi < f_hi:
            for s in range(S):
                u[s] = sub[st[s], f[sx[s]]]
            for j in range(ngy):
                g[j] = 0
            gi = 0
            while gi < ng:
                for s in range(S):
                    slot[s] = sz[s] * K + sub[u[s], g[sy[s]]]
                    bucket[slot[s]] += sw[s]
                for s in range(S):
                    val = bucket[slot[s]]
                    if val > zmax[sz[s]]:
                        zmax[sz[s]] = val
                score = 0
                for z in range(nhz):
                    score += zmax[z]
                    zmax[z] = 0
                for s in range(S):
                    bucket[slot[s]] = 0
                if score > best:
                    best = score
                    best_f = fi
                    best_g = gi
                j = 0
                while j < ngy:
                    g[j] += 1
                    if g[j] < K:
                        break
                    g[j] = 0
                    j += 1
                gi += 1
            j = 0
            while j < nfx:
                f[j] += 1
                if f[j] < K:
                    break
                f[j] = 0
                j += 1
            fi += 1
    return best, best_f, best_g
