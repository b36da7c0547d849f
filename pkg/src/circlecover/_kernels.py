"""Hot loops behind the simulation front-ends.

Each kernel exists twice: a numba ``@njit`` version used when numba is
importable (and not disabled via ``CIRCLECOVER_NO_NUMBA``), and a pure
Python/numpy version with identical semantics.  The two are bit-identical:
all randomness is drawn outside the kernels, interval endpoints are exact
integers, and the float64 bookkeeping performs the same IEEE operations in
the same order.

Uncovered sets live on the 2^64 grid as sorted, disjoint, *inclusive*
integer intervals [s, e] (0 <= s <= e <= 2^64-1).  The inclusive convention
keeps every endpoint representable in uint64 — the full circle is
[0, 2^64-1] — so the numba path never needs a value of 2^64.
"""

from __future__ import annotations

import bisect
import math

import numpy as np

from ._accel import HAVE_NUMBA, njit

_U64_MAX = 0xFFFFFFFFFFFFFFFF
_ULP64 = 2.0 ** -64


# ---------------------------------------------------------------------------
# Interval subtraction on the uint64 circle, numba flavour.
# ---------------------------------------------------------------------------


@njit(cache=True)
def _sub1_nb(starts, ends, k, a, b):  # pragma: no cover - exercised via wrapper
    """Remove inclusive [a, b] from the sorted interval stack; return (k, removed)."""
    one = np.uint64(1)
    lo = 0
    hi = k
    while lo < hi:
        mid = (lo + hi) // 2
        if ends[mid] < a:
            lo = mid + 1
        else:
            hi = mid
    i0 = lo
    if i0 == k or starts[i0] > b:
        return k, np.uint64(0)
    i1 = i0
    while i1 < k and starts[i1] <= b:
        i1 += 1
    removed = np.uint64(0)
    for j in range(i0, i1):
        s = starts[j] if starts[j] > a else a
        e = ends[j] if ends[j] < b else b
        removed += e - s + one
    left_keep = starts[i0] < a
    right_keep = ends[i1 - 1] > b
    right_end = ends[i1 - 1]
    new = 0
    if left_keep:
        new += 1
    if right_keep:
        new += 1
    delta = new - (i1 - i0)
    if delta > 0:  # only possible as +1: one interval split into two
        t = k - 1
        while t >= i1:
            starts[t + 1] = starts[t]
            ends[t + 1] = ends[t]
            t -= 1
    elif delta < 0:
        t = i1
        while t < k:
            starts[t + delta] = starts[t]
            ends[t + delta] = ends[t]
            t += 1
    k += delta
    j = i0
    if left_keep:
        ends[j] = a - one
        j += 1
    if right_keep:
        starts[j] = b + one
        ends[j] = right_end
    return k, removed


@njit(cache=True)
def _dvoretzky_nb(centers, lens, is_full, starts, ends, step_meas):  # pragma: no cover
    """Sequentially subtract arcs [c - (L>>1), +L) from the full circle."""
    one = np.uint64(1)
    umax = np.uint64(_U64_MAX)
    n = centers.shape[0]
    k = 1
    starts[0] = np.uint64(0)
    ends[0] = umax
    total = 2.0**64
    for i in range(n):
        if k == 0:
            step_meas[i] = 0.0
            continue
        if is_full[i]:
            k = 0
            total = 0.0
            step_meas[i] = 0.0
            continue
        length = lens[i]
        if length == np.uint64(0):
            step_meas[i] = total * _ULP64
            continue
        a = centers[i] - (length >> one)
        b = a + length - one
        if b >= a:
            k, rem = _sub1_nb(starts, ends, k, a, b)
        else:
            k, rem1 = _sub1_nb(starts, ends, k, a, umax)
            k, rem2 = _sub1_nb(starts, ends, k, np.uint64(0), b)
            rem = rem1 + rem2
        total -= np.float64(rem)
        step_meas[i] = total * _ULP64
    return k


# ---------------------------------------------------------------------------
# Same algorithm on Python ints (any precision, exact; bit-identical at 64).
# ---------------------------------------------------------------------------


def _sub1_py(starts: list, ends: list, a: int, b: int) -> int:
    """Remove inclusive [a, b]; mutate the lists; return removed mass."""
    i0 = bisect.bisect_left(ends, a)
    k = len(starts)
    if i0 == k or starts[i0] > b:
        return 0
    i1 = bisect.bisect_right(starts, b, lo=i0)
    removed = 0
    for j in range(i0, i1):
        removed += min(ends[j], b) - max(starts[j], a) + 1
    left_keep = starts[i0] < a
    right_keep = ends[i1 - 1] > b
    right_end = ends[i1 - 1]
    repl_s = []
    repl_e = []
    if left_keep:
        repl_s.append(starts[i0])
        repl_e.append(a - 1)
    if right_keep:
        repl_s.append(b + 1)
        repl_e.append(right_end)
    starts[i0:i1] = repl_s
    ends[i0:i1] = repl_e
    return removed


def _dvoretzky_py(centers, lens, is_full, bits: int):
    """Pure-Python twin of :func:`_dvoretzky_nb`, generalised to any precision.

    Returns ``(starts, ends, step_meas)`` with inclusive integer endpoints.
    At ``bits == 64`` the float64 step measures replicate the numba kernel's
    arithmetic operation for operation.
    """
    modulus = 1 << bits
    mask = modulus - 1
    n = len(centers)
    starts = [0]
    ends = [mask]
    step_meas = np.empty(n, dtype=np.float64)
    if bits == 64:
        total = 2.0**64
    else:
        total_ulps = modulus
    for i in range(n):
        if not starts:
            step_meas[i] = 0.0
            continue
        if is_full[i]:
            starts.clear()
            ends.clear()
            if bits == 64:
                total = 0.0
            else:
                total_ulps = 0
            step_meas[i] = 0.0
            continue
        length = int(lens[i])
        if length == 0:
            if bits == 64:
                step_meas[i] = total * _ULP64
            else:
                step_meas[i] = _ulps_to_float(total_ulps, bits)
            continue
        a = (int(centers[i]) - (length >> 1)) & mask
        b = (a + length - 1) & mask
        if b >= a:
            rem = _sub1_py(starts, ends, a, b)
        else:
            rem = _sub1_py(starts, ends, a, mask)
            rem += _sub1_py(starts, ends, 0, b)
        if bits == 64:
            total -= np.float64(rem)
            step_meas[i] = total * _ULP64
        else:
            total_ulps -= rem
            step_meas[i] = _ulps_to_float(total_ulps, bits)
    return starts, ends, step_meas


def _ulps_to_float(u: int, bits: int) -> float:
    """float64 value of u / 2^bits for arbitrarily large integers."""
    if u == 0:
        return 0.0
    shift = max(0, u.bit_length() - 53)
    return math.ldexp(float(u >> shift), shift - bits)


# ---------------------------------------------------------------------------
# Grid-coverage bookkeeping (vectorised numpy; no numba needed).
# ---------------------------------------------------------------------------


def _grid_find_py(nxt: np.ndarray, i: int) -> int:
    """Next unmarked grid index >= i (sentinel m stays m), path-halving."""
    j = i
    while nxt[j] != j:
        nxt[j] = nxt[nxt[j]]
        j = nxt[j]
    return j


@njit(cache=True)
def _grid_find_nb(nxt, i):  # pragma: no cover - exercised via wrapper
    j = i
    while nxt[j] != j:
        nxt[j] = nxt[nxt[j]]
        j = nxt[j]
    return j


@njit(cache=True)
def _uniform_delta_nb(a, g, b, n_max, c, m, least, nxt):  # pragma: no cover
    """Fill least[i] with the first n in [2, n_max] passing at delta = i/m.

    Passing at n means n * log(n) * ||n alpha - gamma|| * ||n beta - delta||
    <= c, i.e. delta lies within r = c / (n log n ||n alpha - gamma||) of
    {n beta}.  Positions use 64-bit fixed point (a, g, b are the scaled
    fractional parts); floats only decide window edges, with the same IEEE
    operations in the same order as the pure twin.
    """
    zero = np.uint64(0)
    marked = 0
    u = a + a
    w = b + b
    for n in range(2, n_max + 1):
        v = u - g
        neg = zero - v
        d1 = v if v < neg else neg
        base = (n * math.log(n)) * (np.float64(d1) * _ULP64)
        full = False
        i0 = 0
        i1 = -1
        if base == 0.0:
            full = True
        else:
            r = c / base
            if r >= 0.5:
                full = True
            else:
                cf = np.float64(w) * _ULP64
                i0 = int(math.ceil((cf - r) * m))
                i1 = int(math.floor((cf + r) * m))
                if i1 - i0 + 1 >= m:
                    full = True
        if full:
            j = _grid_find_nb(nxt, 0)
            while j < m:
                least[j] = n
                nxt[j] = j + 1
                marked += 1
                j = _grid_find_nb(nxt, j + 1)
        elif i1 >= i0:
            s = i0 % m
            e = i1 % m
            if s > e:
                j = _grid_find_nb(nxt, s)
                while j < m:
                    least[j] = n
                    nxt[j] = j + 1
                    marked += 1
                    j = _grid_find_nb(nxt, j + 1)
                s = 0
            j = _grid_find_nb(nxt, s)
            while j <= e:
                least[j] = n
                nxt[j] = j + 1
                marked += 1
                j = _grid_find_nb(nxt, j + 1)
        if marked == m:
            return marked
        u = u + a
        w = w + b
    return marked


def _uniform_delta_py(a: int, g: int, b: int, n_max: int, c: float, m: int,
                      least: np.ndarray, nxt: np.ndarray) -> int:
    """Pure twin of :func:`_uniform_delta_nb`: chunked numpy, python marking."""
    au, gu, bu = np.uint64(a), np.uint64(g), np.uint64(b)
    marked = 0

    def mark(s: int, e: int, n: int) -> int:
        got = 0
        j = _grid_find_py(nxt, s)
        while j <= e:
            least[j] = n
            nxt[j] = j + 1
            got += 1
            j = _grid_find_py(nxt, j + 1)
        return got

    chunk = 1 << 15
    for lo in range(2, n_max + 1, chunk):
        hi = min(lo + chunk - 1, n_max)
        nn = np.arange(lo, hi + 1, dtype=np.uint64)
        u = nn * au
        w = nn * bu
        v = u - gu
        d1 = np.minimum(v, np.uint64(0) - v)
        nf = nn.astype(np.float64)
        base = (nf * np.log(nf)) * (d1.astype(np.float64) * _ULP64)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = c / base
        full = (base == 0.0) | (r >= 0.5)
        r_safe = np.where(full, 0.0, r)
        cf = w.astype(np.float64) * _ULP64
        i0 = np.ceil((cf - r_safe) * m).astype(np.int64)
        i1 = np.floor((cf + r_safe) * m).astype(np.int64)
        full |= (i1 - i0 + 1) >= m
        for idx in range(nn.size):
            n = int(nn[idx])
            if full[idx]:
                marked += mark(0, m - 1, n)
            else:
                a0 = int(i0[idx])
                a1 = int(i1[idx])
                if a1 >= a0:
                    s = a0 % m
                    e = a1 % m
                    if s > e:
                        marked += mark(s, m - 1, n)
                        s = 0
                    marked += mark(s, e, n)
            if marked == m:
                return marked
    return marked


def _ceil_scale64(a: np.ndarray, m: int) -> np.ndarray:
    """ceil(a * m / 2^64) for uint64 ``a`` and m <= 2^24, without overflow.

    Splits a = hi*2^32 + lo so every intermediate product stays below 2^57.
    """
    a = np.asarray(a, dtype=np.uint64)
    mask32 = np.uint64(0xFFFFFFFF)
    mu = np.uint64(m)
    hi = a >> np.uint64(32)
    lo = a & mask32
    u = hi * mu
    v = lo * mu
    w = u + (v >> np.uint64(32))
    floor = w >> np.uint64(32)
    frac = ((w & mask32) != 0) | ((v & mask32) != 0)
    return floor + frac.astype(np.uint64)


def _mark_window(covered: np.ndarray, a: np.ndarray, length: np.ndarray,
                 is_full: np.ndarray, m: int) -> None:
    """Set covered[i] for grid points i/m lying in any arc [a, a+length)."""
    if bool(np.any(is_full)):
        covered[:] = True
        return
    live = length > 0
    if not bool(np.any(live)):
        return
    a = a[live]
    length = length[live]
    e = a + length  # uint64 wraparound intended
    wrapped = e < a
    diff = np.zeros(m + 1, dtype=np.int64)
    first = _ceil_scale64(a, m)
    stop = _ceil_scale64(e, m)  # one past the last covered index
    plain = ~wrapped
    f = first[plain].astype(np.int64)
    s = stop[plain].astype(np.int64)
    good = f < s
    np.add.at(diff, f[good], 1)
    np.add.at(diff, s[good], -1)
    # wrapped arcs: [first, m) and [0, stop)
    fw = first[wrapped].astype(np.int64)
    sw = stop[wrapped].astype(np.int64)
    np.add.at(diff, fw.clip(max=m), 1)
    diff[m] -= fw.size
    np.add.at(diff, np.zeros(sw.size, dtype=np.int64), 1)
    np.add.at(diff, sw, -1)
    covered |= np.cumsum(diff[:m]) > 0
