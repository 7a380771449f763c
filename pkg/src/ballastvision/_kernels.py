"""Compiled inner loops: reconstruction sweeps, flood labeling, the
watershed priority flood, and the exact Euclidean distance transform.

All kernels are sequential so results are deterministic. Connectivity is
8-connected throughout.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def reconstruct_dilation(marker: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Morphological reconstruction by dilation (marker <= mask).

    Hybrid algorithm: one forward and one backward raster sweep, then a
    FIFO propagation queue. Equivalent to iterating 8-connected geodesic
    dilation clamped under the mask until fixpoint.
    """
    h, w = marker.shape
    out = marker.copy()

    # forward sweep: already-visited neighbors are W, NW, N, NE
    for y in range(h):
        for x in range(w):
            v = out[y, x]
            if x > 0 and out[y, x - 1] > v:
                v = out[y, x - 1]
            if y > 0:
                if out[y - 1, x] > v:
                    v = out[y - 1, x]
                if x > 0 and out[y - 1, x - 1] > v:
                    v = out[y - 1, x - 1]
                if x < w - 1 and out[y - 1, x + 1] > v:
                    v = out[y - 1, x + 1]
            if v > mask[y, x]:
                v = mask[y, x]
            out[y, x] = v

    # backward sweep (E, SE, S, SW) and queue seeding
    cap = h * w + 16
    queue = np.empty(cap, np.int64)
    qhead = 0
    qtail = 0
    for y in range(h - 1, -1, -1):
        for x in range(w - 1, -1, -1):
            v = out[y, x]
            if x < w - 1 and out[y, x + 1] > v:
                v = out[y, x + 1]
            if y < h - 1:
                if out[y + 1, x] > v:
                    v = out[y + 1, x]
                if x < w - 1 and out[y + 1, x + 1] > v:
                    v = out[y + 1, x + 1]
                if x > 0 and out[y + 1, x - 1] > v:
                    v = out[y + 1, x - 1]
            if v > mask[y, x]:
                v = mask[y, x]
            out[y, x] = v
            # enqueue if a backward neighbor could still receive from here
            enq = False
            if x < w - 1 and out[y, x + 1] < out[y, x] and out[y, x + 1] < mask[y, x + 1]:
                enq = True
            if not enq and y < h - 1:
                if out[y + 1, x] < out[y, x] and out[y + 1, x] < mask[y + 1, x]:
                    enq = True
                elif (
                    x < w - 1
                    and out[y + 1, x + 1] < out[y, x]
                    and out[y + 1, x + 1] < mask[y + 1, x + 1]
                ):
                    enq = True
                elif (
                    x > 0
                    and out[y + 1, x - 1] < out[y, x]
                    and out[y + 1, x - 1] < mask[y + 1, x - 1]
                ):
                    enq = True
            if enq:
                if qtail == cap:
                    newcap = cap * 2
                    nq = np.empty(newcap, np.int64)
                    nq[: qtail - qhead] = queue[qhead:qtail]
                    qtail -= qhead
                    qhead = 0
                    queue = nq
                    cap = newcap
                queue[qtail] = y * w + x
                qtail += 1

    # FIFO propagation
    while qhead < qtail:
        p = queue[qhead]
        qhead += 1
        y = p // w
        x = p % w
        vp = out[y, x]
        for dy in range(-1, 2):
            ny = y + dy
            if ny < 0 or ny >= h:
                continue
            for dx in range(-1, 2):
                if dy == 0 and dx == 0:
                    continue
                nx = x + dx
                if nx < 0 or nx >= w:
                    continue
                vq = out[ny, nx]
                mq = mask[ny, nx]
                if vq < vp and vq < mq:
                    out[ny, nx] = vp if vp < mq else mq
                    if qtail == cap:
                        newcap = cap * 2
                        nq = np.empty(newcap, np.int64)
                        nq[: qtail - qhead] = queue[qhead:qtail]
                        qtail -= qhead
                        qhead = 0
                        queue = nq
                        cap = newcap
                    queue[qtail] = ny * w + nx
                    qtail += 1
    return out


@njit(cache=True)
def label_binary(mask: np.ndarray) -> np.ndarray:
    """8-connected components of True pixels, labeled 1..k in the order
    their first pixel appears in a row-major scan."""
    h, w = mask.shape
    labels = np.zeros((h, w), np.int32)
    stack = np.empty(h * w, np.int64)
    next_label = 0
    for sy in range(h):
        for sx in range(w):
            if not mask[sy, sx] or labels[sy, sx] != 0:
                continue
            next_label += 1
            top = 0
            stack[top] = sy * w + sx
            top += 1
            labels[sy, sx] = next_label
            while top > 0:
                top -= 1
                p = stack[top]
                y = p // w
                x = p % w
                for dy in range(-1, 2):
                    ny = y + dy
                    if ny < 0 or ny >= h:
                        continue
                    for dx in range(-1, 2):
                        nx = x + dx
                        if nx < 0 or nx >= w:
                            continue
                        if mask[ny, nx] and labels[ny, nx] == 0:
                            labels[ny, nx] = next_label
                            stack[top] = ny * w + nx
                            top += 1
    return labels


@njit(cache=True)
def label_plateaus(img: np.ndarray) -> np.ndarray:
    """8-connected equal-value plateau labels, 1..k in scan order."""
    h, w = img.shape
    labels = np.zeros((h, w), np.int32)
    stack = np.empty(h * w, np.int64)
    next_label = 0
    for sy in range(h):
        for sx in range(w):
            if labels[sy, sx] != 0:
                continue
            next_label += 1
            level = img[sy, sx]
            top = 0
            stack[top] = sy * w + sx
            top += 1
            labels[sy, sx] = next_label
            while top > 0:
                top -= 1
                p = stack[top]
                y = p // w
                x = p % w
                for dy in range(-1, 2):
                    ny = y + dy
                    if ny < 0 or ny >= h:
                        continue
                    for dx in range(-1, 2):
                        nx = x + dx
                        if nx < 0 or nx >= w:
                            continue
                        if labels[ny, nx] == 0 and img[ny, nx] == level:
                            labels[ny, nx] = next_label
                            stack[top] = ny * w + nx
                            top += 1
    return labels


@njit(cache=True)
def watershed_flood(relief: np.ndarray, seeds: np.ndarray) -> np.ndarray:
    """Priority flood from labeled seed pixels.

    Queue is ordered by (relief value, insertion sequence); first-come
    flooding wins contested pixels. A pixel whose decided neighbors at
    pop time carry two distinct labels, or no label at all (enclosed by
    ridge), becomes ridge (-1). Every pixel ends up decided.
    """
    h, w = relief.shape
    n = h * w
    rel = relief.ravel()
    labels = seeds.ravel().copy()
    inq = np.zeros(n, np.uint8)

    cap = n + 16
    hv = np.empty(cap, np.float64)
    hs = np.empty(cap, np.int64)
    hp = np.empty(cap, np.int64)
    size = 0
    seq = 0

    # seed the queue with the unlabeled neighbors of every seed pixel
    for y in range(h):
        for x in range(w):
            p = y * w + x
            if labels[p] <= 0:
                continue
            for dy in range(-1, 2):
                ny = y + dy
                if ny < 0 or ny >= h:
                    continue
                for dx in range(-1, 2):
                    nx = x + dx
                    if nx < 0 or nx >= w:
                        continue
                    q = ny * w + nx
                    if labels[q] == 0 and inq[q] == 0:
                        inq[q] = 1
                        i = size
                        hv[i] = rel[q]
                        hs[i] = seq
                        hp[i] = q
                        seq += 1
                        size += 1
                        while i > 0:
                            par = (i - 1) >> 1
                            if hv[par] > hv[i] or (hv[par] == hv[i] and hs[par] > hs[i]):
                                hv[par], hv[i] = hv[i], hv[par]
                                hs[par], hs[i] = hs[i], hs[par]
                                hp[par], hp[i] = hp[i], hp[par]
                                i = par
                            else:
                                break

    while size > 0:
        p0 = hp[0]
        size -= 1
        hv[0] = hv[size]
        hs[0] = hs[size]
        hp[0] = hp[size]
        i = 0
        while True:
            l = 2 * i + 1
            r = l + 1
            sm = i
            if l < size and (hv[l] < hv[sm] or (hv[l] == hv[sm] and hs[l] < hs[sm])):
                sm = l
            if r < size and (hv[r] < hv[sm] or (hv[r] == hv[sm] and hs[r] < hs[sm])):
                sm = r
            if sm == i:
                break
            hv[sm], hv[i] = hv[i], hv[sm]
            hs[sm], hs[i] = hs[i], hs[sm]
            hp[sm], hp[i] = hp[i], hp[sm]
            i = sm

        y = p0 // w
        x = p0 % w
        lab = 0
        distinct = 0
        for dy in range(-1, 2):
            ny = y + dy
            if ny < 0 or ny >= h:
                continue
            for dx in range(-1, 2):
                nx = x + dx
                if nx < 0 or nx >= w:
                    continue
                lq = labels[ny * w + nx]
                if lq > 0 and lq != lab:
                    if lab == 0:
                        lab = lq
                        distinct = 1
                    else:
                        distinct = 2
        labels[p0] = lab if distinct == 1 else -1

        for dy in range(-1, 2):
            ny = y + dy
            if ny < 0 or ny >= h:
                continue
            for dx in range(-1, 2):
                nx = x + dx
                if nx < 0 or nx >= w:
                    continue
                q = ny * w + nx
                if labels[q] == 0 and inq[q] == 0:
                    inq[q] = 1
                    i = size
                    hv[i] = rel[q]
                    hs[i] = seq
                    hp[i] = q
                    seq += 1
                    size += 1
                    while i > 0:
                        par = (i - 1) >> 1
                        if hv[par] > hv[i] or (hv[par] == hv[i] and hs[par] > hs[i]):
                            hv[par], hv[i] = hv[i], hv[par]
                            hs[par], hs[i] = hs[i], hs[par]
                            hp[par], hp[i] = hp[i], hp[par]
                            i = par
                        else:
                            break
    return labels.reshape(h, w)


@njit(cache=True)
def _edt_1d(f: np.ndarray, d: np.ndarray, v: np.ndarray, z: np.ndarray) -> None:
    """Lower envelope of parabolas: 1-D squared distance transform."""
    n = f.shape[0]
    k = 0
    v[0] = 0
    z[0] = -1e30
    z[1] = 1e30
    for q in range(1, n):
        if f[q] >= 1e29:
            continue
        if f[v[k]] >= 1e29:
            v[k] = q
            continue
        s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
        while s <= z[k]:
            k -= 1
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k])
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = 1e30
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d[q] = (q - v[k]) * (q - v[k]) + f[v[k]]


@njit(cache=True)
def edt_squared(foreground: np.ndarray) -> np.ndarray:
    """Exact squared Euclidean distance to the nearest True pixel
    (two-pass separable parabola envelope)."""
    h, w = foreground.shape
    big = 1e30
    g = np.empty((h, w), np.float64)
    for y in range(h):
        for x in range(w):
            g[y, x] = 0.0 if foreground[y, x] else big
    # columns
    d = np.empty(h, np.float64)
    v = np.empty(h + 1, np.int64)
    z = np.empty(h + 2, np.float64)
    col = np.empty(h, np.float64)
    for x in range(w):
        allbig = True
        for y in range(h):
            col[y] = g[y, x]
            if col[y] < big:
                allbig = False
        if allbig:
            continue
        _edt_1d(col, d, v, z)
        for y in range(h):
            g[y, x] = d[y]
    # rows
    d2 = np.empty(w, np.float64)
    v2 = np.empty(w + 1, np.int64)
    z2 = np.empty(w + 2, np.float64)
    row = np.empty(w, np.float64)
    for y in range(h):
        allbig = True
        for x in range(w):
            row[x] = g[y, x]
            if row[x] < big:
                allbig = False
        if allbig:
            continue
        _edt_1d(row, d2, v2, z2)
        for x in range(w):
            g[y, x] = d2[x]
    return g
