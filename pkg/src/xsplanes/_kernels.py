"""Compiled inner loops.

Every multi-lane kernel advances its lanes round-robin: one triple from
lane 0, one from lane 1, and so on. Independent lanes let the CPU overlap
the dependency chains of the xorshift recursion; the round-robin order
keeps results deterministic for a fixed lane count.
"""

import numba as nb
import numpy as np
from numba import uint64

GOLDEN = 0x9E3779B97F4A7C15
_G = uint64(GOLDEN)
_M1 = uint64(0xBF58476D1CE4E5B9)
_M2 = uint64(0x94D049BB133111EB)


@nb.njit(inline="always")
def mix64(z):
    z = (z ^ (z >> uint64(30))) * _M1
    z = (z ^ (z >> uint64(27))) * _M2
    return z ^ (z >> uint64(31))


@nb.njit(inline="always")
def xs_step(s0, s1, a, b, c):
    t = s0 ^ (s0 << a)
    t ^= t >> b
    return t ^ s1 ^ (s1 >> c)


@nb.njit(cache=True)
def xs_fill(s0, s1, a, b, c, count, linear):
    a = uint64(a)
    b = uint64(b)
    c = uint64(c)
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        out[i] = (s0 ^ s1) if linear else (s0 + s1)
        s2 = xs_step(s0, s1, a, b, c)
        s0 = s1
        s1 = s2
    return out, s0, s1


@nb.njit(cache=True)
def xs_states(s0, s1, a, b, c, count, stride):
    """States (s_i, s_i+1) at i = 0, stride, 2*stride, ..."""
    a = uint64(a)
    b = uint64(b)
    c = uint64(c)
    first = np.empty(count, dtype=np.uint64)
    second = np.empty(count, dtype=np.uint64)
    for m in range(count):
        first[m] = s0
        second[m] = s1
        for _ in range(stride):
            s2 = xs_step(s0, s1, a, b, c)
            s0 = s1
            s1 = s2
    return first, second, s0, s1


@nb.njit(cache=True)
def ctl_fill(state, count):
    out = np.empty(count, dtype=np.uint64)
    for i in range(count):
        state += _G
        out[i] = mix64(state)
    return out, state


@nb.njit(inline="always")
def _in_box(x, y, z, lo, hi):
    return (lo[0] <= x and x <= hi[0] and lo[1] <= y and y <= hi[1]
            and lo[2] <= z and z <= hi[2])


# The triple loops below run each round in two passes: a branch-free pass
# that advances every lane and flags whether any lane's coordinate passed
# the cheap first test, and a rare second pass that recomputes the flagged
# round from the saved starting states.

@nb.njit(inline="always")
def _xs_round(s0, s1, p0, p1, a, b, c, axis, lo0, hi0):
    flag = 0
    for j in range(s0.shape[0]):
        x0 = s0[j]
        x1 = s1[j]
        p0[j] = x0
        p1[j] = x1
        x2 = xs_step(x0, x1, a, b, c)
        x3 = xs_step(x1, x2, a, b, c)
        s0[j] = x3
        s1[j] = xs_step(x2, x3, a, b, c)
        o = (x0 + x1) if axis == 0 else ((x1 + x2) if axis == 1 else (x2 + x3))
        flag |= (o >= lo0) & (o <= hi0)
    return flag


@nb.njit(inline="always")
def _xs_triple(x0, x1, a, b, c):
    x2 = xs_step(x0, x1, a, b, c)
    x3 = xs_step(x1, x2, a, b, c)
    return x0 + x1, x1 + x2, x2 + x3


@nb.njit(cache=True)
def xs_box_hits(s0, s1, a, b, c, rounds, extra, lo, hi):
    """Count triples in the closed integer box [lo, hi].

    Each lane yields ``rounds`` triples; the first ``extra`` lanes yield
    one more. Lane states are updated in place.
    """
    a = uint64(a)
    b = uint64(b)
    c = uint64(c)
    lanes = s0.shape[0]
    p0 = np.empty(lanes, dtype=np.uint64)
    p1 = np.empty(lanes, dtype=np.uint64)
    hits = 0
    for _ in range(rounds):
        if _xs_round(s0, s1, p0, p1, a, b, c, 0, lo[0], hi[0]):
            for j in range(lanes):
                x, y, z = _xs_triple(p0[j], p1[j], a, b, c)
                if _in_box(x, y, z, lo, hi):
                    hits += 1
    for j in range(extra):
        x, y, z = _xs_triple(s0[j], s1[j], a, b, c)
        x2 = xs_step(s0[j], s1[j], a, b, c)
        x3 = xs_step(s1[j], x2, a, b, c)
        s0[j] = x3
        s1[j] = xs_step(x2, x3, a, b, c)
        if _in_box(x, y, z, lo, hi):
            hits += 1
    return hits


@nb.njit(inline="always")
def _ctl_round(state, prev, g, axis_off, g3, lo0, hi0):
    flag = 0
    for j in range(state.shape[0]):
        s = state[j]
        prev[j] = s
        state[j] = s + g3
        o = mix64(s + axis_off)
        flag |= (o >= lo0) & (o <= hi0)
    return flag


@nb.njit(cache=True)
def ctl_box_hits(state, rounds, extra, lo, hi):
    lanes = state.shape[0]
    g2 = _G + _G
    g3 = g2 + _G
    prev = np.empty(lanes, dtype=np.uint64)
    hits = 0
    for _ in range(rounds):
        if _ctl_round(state, prev, _G, _G, g3, lo[0], hi[0]):
            for j in range(lanes):
                s = prev[j]
                if _in_box(mix64(s + _G), mix64(s + g2), mix64(s + g3), lo, hi):
                    hits += 1
    for j in range(extra):
        s = state[j]
        state[j] = s + g3
        if _in_box(mix64(s + _G), mix64(s + g2), mix64(s + g3), lo, hi):
            hits += 1
    return hits


@nb.njit(cache=True)
def xs_magnify(s0, s1, a, b, c, axis, limit, target, max_rounds):
    """Collect triples whose coordinate ``axis`` is <= ``limit``.

    Returns the kept raw words and the number of triples consumed.
    """
    a = uint64(a)
    b = uint64(b)
    c = uint64(c)
    lanes = s0.shape[0]
    p0 = np.empty(lanes, dtype=np.uint64)
    p1 = np.empty(lanes, dtype=np.uint64)
    pts = np.empty((target, 3), dtype=np.uint64)
    got = 0
    consumed = 0
    for _ in range(max_rounds):
        if _xs_round(s0, s1, p0, p1, a, b, c, axis, uint64(0), limit):
            for j in range(lanes):
                t = _xs_triple(p0[j], p1[j], a, b, c)
                if t[axis] <= limit:
                    pts[got, 0] = t[0]
                    pts[got, 1] = t[1]
                    pts[got, 2] = t[2]
                    got += 1
                    if got == target:
                        return pts, consumed + j + 1
        consumed += lanes
    return pts[:got], consumed


@nb.njit(cache=True)
def ctl_magnify(state, axis, limit, target, max_rounds):
    lanes = state.shape[0]
    g2 = _G + _G
    g3 = g2 + _G
    ga = _G * uint64(axis + 1)
    prev = np.empty(lanes, dtype=np.uint64)
    pts = np.empty((target, 3), dtype=np.uint64)
    got = 0
    consumed = 0
    for _ in range(max_rounds):
        if _ctl_round(state, prev, _G, ga, g3, uint64(0), limit):
            for j in range(lanes):
                s = prev[j]
                if mix64(s + ga) <= limit:
                    pts[got, 0] = mix64(s + _G)
                    pts[got, 1] = mix64(s + g2)
                    pts[got, 2] = mix64(s + g3)
                    got += 1
                    if got == target:
                        return pts, consumed + j + 1
        consumed += lanes
    return pts[:got], consumed
