"""Vectorised numpy version of the exact-value scoring kernel.

Used when the compiled extension is unavailable, and as a cross-check.
"""
from __future__ import annotations

import numpy as np

# rows of second-player tables scored per numpy batch
BATCH = 4096


def best_pair(f_lo, f_hi, K, nfx, ngy, nhz, sx, sy, sz, st, sw, sub):
    """Best ``(score, f_index, g_index)`` over ``f`` in ``[f_lo, f_hi)`` and all ``g``.

    Table indices are little-endian in base ``K`` over question indices.
    Score is the total weight won when the third player best-responds.
    Ties keep the smallest ``(f_index, g_index)``.
    """
    sx, sy, sz, st = (np.asarray(a, dtype=np.int64) for a in (sx, sy, sz, st))
    sw = np.asarray(sw)
    sub = np.asarray(sub, dtype=np.int64)
    ng = K**ngy
    width = nhz * K
    dtype = sw.dtype
    powers_f = K ** np.arange(nfx, dtype=np.int64)
    powers_g = K ** np.arange(ngy, dtype=np.int64)
    best = (-1, -1, -1)
    for fi in range(f_lo, f_hi):
        f = (fi // powers_f) % K
        u = sub[st, f[sx]]
        for g_lo in range(0, ng, BATCH):
            g_idx = np.arange(g_lo, min(ng, g_lo + BATCH), dtype=np.int64)
            G = (g_idx[:, None] // powers_g[None, :]) % K
            v = sub[u[None, :], G[:, sy]]
            flat = sz[None, :] * K + v
            B = len(g_idx)
            acc = np.zeros((B, width), dtype=dtype)
            rows = np.broadcast_to(np.arange(B)[:, None], flat.shape)
            np.add.at(acc, (rows, flat), np.broadcast_to(sw, flat.shape))
            scores = acc.reshape(B, nhz, K).max(axis=2).sum(axis=1)
            j = int(np.argmax(scores))
            s = int(scores[j])
            if s > best[0]:
                best = (s, fi, int(g_idx[j]))
    return best
