"""Hot inner loops, each with a numba kernel and a numpy equivalent.

The public wrappers dispatch on :data:`fgrdp._accel.HAVE_NUMBA`. Graphs are
passed as CSR arrays (``indptr``, ``indices``) with every row sorted.
The obfuscated lower triangle is a flat ``uint8`` array where bit ``(k, j)``
with ``j < k`` lives at ``k*(k-1)//2 + j``.
"""

from __future__ import annotations

import numpy as np

from ._accel import HAVE_NUMBA, njit


def tri_offsets(n: int) -> np.ndarray:
    i = np.arange(n, dtype=np.int64)
    return i * (i - 1) // 2


# exact triangle count ------------------------------------------------------


@njit
def _forward_triangles_nb(indptr, indices):
    n = indptr.shape[0] - 1
    total = 0
    for u in range(n):
        a0 = indptr[u]
        a1 = indptr[u + 1]
        # skip to first neighbor above u
        while a0 < a1 and indices[a0] <= u:
            a0 += 1
        for p in range(a0, a1):
            v = indices[p]
            b0 = indptr[v]
            b1 = indptr[v + 1]
            while b0 < b1 and indices[b0] <= v:
                b0 += 1
            x = p + 1
            y = b0
            while x < a1 and y < b1:
                wx = indices[x]
                wy = indices[y]
                if wx == wy:
                    total += 1
                    x += 1
                    y += 1
                elif wx < wy:
                    x += 1
                else:
                    y += 1
    return total


def _forward_triangles_np(indptr, indices):
    n = indptr.shape[0] - 1
    total = 0
    for u in range(n):
        row = indices[indptr[u]:indptr[u + 1]]
        fwd = row[row > u]
        if fwd.size < 2:
            continue
        parts = []
        for v in fwd:
            nv = indices[indptr[v]:indptr[v + 1]]
            parts.append(nv[nv > v])
        total += int(np.isin(np.concatenate(parts), fwd).sum())
    return total


def forward_triangles(indptr: np.ndarray, indices: np.ndarray) -> int:
    """Count triangles by intersecting forward (higher-index) neighbor lists."""
    if HAVE_NUMBA:
        return int(_forward_triangles_nb(indptr, indices))
    return _forward_triangles_np(indptr, indices)


# round 1: randomized response on the lower triangle ------------------------


@njit
def _rr_lower_nb(indptr, indices, row_p, uniforms, perm):
    n = indptr.shape[0] - 1
    out = np.empty(uniforms.shape[0], dtype=np.uint8)
    for i in range(n):
        base = i * (i - 1) // 2
        p = row_p[i]
        a = perm[i]
        for j in range(i):
            b = perm[j]
            if a > b:
                q = a * (a - 1) // 2 + b
            else:
                q = b * (b - 1) // 2 + a
            out[base + j] = 0 if uniforms[q] < p else 1
        for q in range(indptr[i], indptr[i + 1]):
            j = indices[q]
            if j >= i:
                break
            out[base + j] ^= 1
    return out


def _rr_lower_np(indptr, indices, row_p, uniforms, perm):
    n = indptr.shape[0] - 1
    lengths = np.arange(n, dtype=np.int64)
    p = np.repeat(row_p, lengths)
    if np.array_equal(perm, np.arange(n)):
        u = uniforms
    else:
        rows = np.repeat(perm, lengths)
        cols = perm[np.arange(uniforms.shape[0]) - np.repeat(tri_offsets(n), lengths)]
        hi = np.maximum(rows, cols)
        u = uniforms[hi * (hi - 1) // 2 + np.minimum(rows, cols)]
    out = (u >= p).astype(np.uint8)
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    lower = indices < rows
    pos = rows[lower] * (rows[lower] - 1) // 2 + indices[lower]
    out[pos] ^= 1
    return out


def rr_lower_triangle(indptr, indices, row_p, uniforms, perm=None) -> np.ndarray:
    """Randomized response on every lower-triangle bit.

    ``row_p[i]`` is the retention probability used by row ``i``. The coin for
    bit ``(i, j)`` is the uniform stored at the pair ``(perm[i], perm[j])`` of
    ``uniforms`` (laid out like the output); the bit is kept iff that uniform
    is below ``row_p[i]``. With ``perm`` mapping new to original labels, each
    unordered pair of original nodes keeps its coin under any reordering.
    """
    n = indptr.shape[0] - 1
    if uniforms.shape[0] != n * (n - 1) // 2:
        raise ValueError("need exactly n(n-1)/2 uniforms")
    perm = np.arange(n, dtype=np.int64) if perm is None else np.ascontiguousarray(perm, dtype=np.int64)
    row_p = np.ascontiguousarray(row_p, dtype=np.float64)
    if HAVE_NUMBA:
        return _rr_lower_nb(indptr, indices, row_p, uniforms, perm)
    return _rr_lower_np(indptr, indices, row_p, uniforms, perm)


# round 2: local 2-path and matched counts ------------------------------------


@njit
def _round2_nb(indptr, indices, d_tilde, zone, n_levels, bits):
    n = indptr.shape[0] - 1
    s = np.zeros((n, n_levels), dtype=np.int64)
    t = np.zeros((n, n_levels), dtype=np.int64)
    for i in range(n):
        lo = indptr[i]
        hi = min(indptr[i + 1], lo + d_tilde)
        a = lo
        while a < hi and indices[a] <= i:
            a += 1
        for x in range(a, hi):
            j = indices[x]
            for y in range(x + 1, hi):
                k = indices[y]
                z = zone[k]
                s[i, z] += 1
                t[i, z] += bits[k * (k - 1) // 2 + j]
    return s, t


def _round2_np(indptr, indices, d_tilde, zone, n_levels, bits):
    n = indptr.shape[0] - 1
    s = np.zeros((n, n_levels), dtype=np.int64)
    t = np.zeros((n, n_levels), dtype=np.int64)
    for i in range(n):
        lo = indptr[i]
        row = indices[lo:min(indptr[i + 1], lo + d_tilde)]
        up = row[row > i]
        m = up.size
        if m < 2:
            continue
        a, b = np.triu_indices(m, 1)
        j = up[a]
        k = up[b]
        z = zone[k]
        s[i] = np.bincount(z, minlength=n_levels)
        t[i] = np.bincount(z, weights=bits[k * (k - 1) // 2 + j], minlength=n_levels).astype(np.int64)
    return s, t


def round2_counts(indptr, indices, d_tilde: int, zone, n_levels: int, bits):
    """Per-node (s, t) tables of shape ``(n, n_levels)``.

    For node ``i`` and each pair ``j < k`` of its clipped neighbors above ``i``:
    ``s[i, zone[k]] += 1`` and ``t[i, zone[k]] += bits(k, j)``. Clipping keeps
    the first ``d_tilde`` entries of the sorted neighbor row.
    """
    zone = np.ascontiguousarray(zone, dtype=np.int64)
    if HAVE_NUMBA:
        return _round2_nb(indptr, indices, int(d_tilde), zone, int(n_levels), bits)
    return _round2_np(indptr, indices, int(d_tilde), zone, int(n_levels), bits)
