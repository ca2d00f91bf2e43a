"""Compiled relaxation loops for the built-in cell-functions.

Every loop updates the working arrays in place (Gauss-Seidel style). A rule
is selected by an integer code; its neighbor sets come as a (K, 4) array of
neighbor numbers 1..9 padded with 0.
"""

import numpy as np
from numba import njit

MAXMIN = 0
WATERFALL = 1
RECONSTRUCT = 2
EXPAND = 3

BORDER_LOW = 0
BORDER_HIGH = 1
BORDER_CLAMP = 2

OK = 0
NOT_EXTENSIVE = 1

_DX = np.array([0, -1, 0, 1, -1, 0, 1, -1, 0, 1], dtype=np.int64)
_DY = np.array([0, -1, -1, -1, 0, 0, 0, 1, 1, 1], dtype=np.int64)


@njit(cache=True, inline="always")
def _value(lv, y, x, border):
    h, w = lv.shape
    if 0 <= y < h and 0 <= x < w:
        return lv[y, x]
    if border == BORDER_LOW:
        return 0
    if border == BORDER_HIGH:
        return 256
    cy = min(max(y, 0), h - 1)
    cx = min(max(x, 0), w - 1)
    return lv[cy, cx]


@njit(cache=True, inline="always")
def _apply(lv, mk, ref, y, x, rule, sets, border, dx, dy, nb):
    """New (level, mark) for element (x, y); ``nb`` is scratch space."""
    h, w = lv.shape
    e5 = lv[y, x]
    if rule == MAXMIN:
        if 0 < y < h - 1 and 0 < x < w - 1:
            for n in range(1, 10):
                nb[n] = lv[y + dy[n], x + dx[n]]
        else:
            for n in range(1, 10):
                nb[n] = _value(lv, y + dy[n], x + dx[n], border)
        best = e5
        for k in range(sets.shape[0]):
            m = 1 << 30
            for j in range(sets.shape[1]):
                n = sets[k, j]
                if n == 0:
                    break
                if nb[n] < m:
                    m = nb[n]
            if m > best:
                best = m
        if best != e5:
            return best, False
        return e5, mk[y, x]
    if rule == EXPAND:
        # Copy a higher value from the source neighbor; 256 (a stop-line)
        # is never copied, so the wave ends at the line.
        n = sets[0, 0]
        v = _value(lv, y + dy[n], x + dx[n], border)
        if e5 < v < 256:
            return v, False
        return e5, mk[y, x]
    if rule == WATERFALL:
        if not mk[y, x]:
            return e5, False
        top = -1
        for n in (2, 4, 6, 8):
            ny = y + dy[n]
            nx = x + dx[n]
            if 0 <= ny < h and 0 <= nx < w and not mk[ny, nx]:
                if lv[ny, nx] > top:
                    top = lv[ny, nx]
        if ref[y, x] <= top:
            return ref[y, x], False
        return e5, True
    # RECONSTRUCT: lower toward max(original, min of the 8 neighbors);
    # elements on the image border form the fixed frame.
    if y == 0 or x == 0 or y == h - 1 or x == w - 1:
        return e5, mk[y, x]
    m = 1 << 30
    for n in (1, 2, 3, 4, 6, 7, 8, 9):
        v = lv[y + dy[n], x + dx[n]]
        if v < m:
            m = v
    if ref[y, x] > m:
        m = ref[y, x]
    if m < e5:
        return m, False
    return e5, mk[y, x]


@njit(cache=True)
def sweep(lv, mk, ref, order, rule, sets, border, verify, dirty):
    """One in-place pass over ``order``; returns (updates, status).

    ``dirty`` flags elements whose neighborhood changed since they were last
    evaluated. A clean element would reproduce its own value, so it is
    skipped without changing the result of the pass.
    """
    h, w = lv.shape
    nb = np.empty(10, dtype=np.int64)
    updates = 0
    for i in range(order.shape[0]):
        p = order[i]
        if not dirty[p]:
            continue
        dirty[p] = False
        y = p // w
        x = p - y * w
        nv, nm = _apply(lv, mk, ref, y, x, rule, sets, border, _DX, _DY, nb)
        if nv != lv[y, x] or nm != mk[y, x]:
            if verify and nv < lv[y, x]:
                return updates, NOT_EXTENSIVE
            lv[y, x] = nv
            mk[y, x] = nm
            updates += 1
            for k in range(1, 10):
                ny = y + _DY[k]
                nx = x + _DX[k]
                if 0 <= ny < h and 0 <= nx < w:
                    dirty[ny * w + nx] = True
    return updates, OK


@njit(cache=True)
def worklist(lv, mk, ref, rule, sets, border, verify, max_rounds):
    """FIFO worklist relaxation.

    Returns (rounds, updates, converged, status). Round 1 visits every
    element in raster order; elements queued during round k form round k+1.
    """
    h, w = lv.shape
    nb = np.empty(10, dtype=np.int64)
    n = h * w
    queue = np.empty(n, dtype=np.int64)
    queued = np.ones(n, dtype=np.bool_)
    for i in range(n):
        queue[i] = i
    head = 0
    size = n
    left_in_round = n
    rounds = 1
    updates = 0
    while size > 0:
        if left_in_round == 0:
            if rounds >= max_rounds:
                return rounds, updates, False, OK
            rounds += 1
            left_in_round = size
        p = queue[head]
        head = (head + 1) % n
        size -= 1
        left_in_round -= 1
        queued[p] = False
        y = p // w
        x = p - y * w
        nv, nm = _apply(lv, mk, ref, y, x, rule, sets, border, _DX, _DY, nb)
        if nv == lv[y, x] and nm == mk[y, x]:
            continue
        if verify and nv < lv[y, x]:
            return rounds, updates, False, NOT_EXTENSIVE
        lv[y, x] = nv
        mk[y, x] = nm
        updates += 1
        for k in range(1, 10):
            ny = y + _DY[k]
            nx = x + _DX[k]
            if 0 <= ny < h and 0 <= nx < w:
                q = ny * w + nx
                if not queued[q]:
                    queued[q] = True
                    queue[(head + size) % n] = q
                    size += 1
    return rounds, updates, True, OK
