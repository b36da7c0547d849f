"""Independent brute-force reference implementations.

Everything in this file is deliberately naive: Fractions, explicit loops,
per-cell scans.  Unit tests freeze expected values by running these oracles
and compare the real library (which uses fixed-point integers, interval
guards, numba kernels, ...) against them on small instances.  Nothing here
imports the package under test.
"""

from __future__ import annotations

import math
from fractions import Fraction

import mpmath


# ---------------------------------------------------------------------------
# circle arithmetic


def frac_part(t: Fraction) -> Fraction:
    return t - Fraction(math.floor(t))


def nearest_int_dist(t: Fraction) -> Fraction:
    f = frac_part(t)
    return min(f, 1 - f)


def bohr_count(alpha, gamma, N: int, eps) -> int:
    """#{1 <= n <= N : ||n*alpha - gamma|| < eps} with exact Fractions.

    alpha/gamma/eps may be Fraction or mpmath-compatible reals; for
    irrationals we evaluate at very high precision and accept that the
    oracle itself is only trustworthy away from exact boundary ties (test
    instances are chosen accordingly).
    """
    if isinstance(alpha, Fraction) and isinstance(gamma, Fraction):
        eps = Fraction(eps)
        return sum(
            1 for n in range(1, N + 1) if nearest_int_dist(n * alpha - gamma) < eps
        )
    with mpmath.workdps(120):
        a = mpmath.mpf(alpha) if not isinstance(alpha, Fraction) else mpmath.mpf(alpha.numerator) / alpha.denominator
        g = mpmath.mpf(gamma) if not isinstance(gamma, Fraction) else mpmath.mpf(gamma.numerator) / gamma.denominator
        e = mpmath.mpf(eps) if not isinstance(eps, Fraction) else mpmath.mpf(eps.numerator) / eps.denominator
        count = 0
        for n in range(1, N + 1):
            t = mpmath.frac(n * a - g)
            d = min(t, 1 - t)
            if d < e:
                count += 1
        return count


def annulus_count(alpha, gamma, N: int, eps, b) -> int:
    """#{n <= N : eps/b <= ||n*alpha - gamma|| < eps} at high precision."""
    with mpmath.workdps(120):
        a = mpmath.mpf(alpha)
        g = mpmath.mpf(gamma)
        e = mpmath.mpf(eps)
        count = 0
        for n in range(1, N + 1):
            t = mpmath.frac(n * a - g)
            d = min(t, 1 - t)
            if e / b <= d < e:
                count += 1
        return count


def continued_fraction(x, K: int) -> list[int]:
    """Partial quotients [a1..aK] of x in (0,1) by floor-and-invert at 150 dps."""
    quotients = []
    with mpmath.workdps(150):
        v = mpmath.mpf(x)
        assert 0 < v < 1
        for _ in range(K):
            v = 1 / v
            a = int(mpmath.floor(v))
            quotients.append(a)
            v = v - a
            if v == 0:
                break
    return quotients


def convergent_denominators(quotients: list[int]) -> list[int]:
    qs = []
    q_prev, q = 1, 0  # q_0 = 1, q_{-1} = 0
    for a in quotients:
        q_prev, q = q, a * q + q_prev
        qs.append(q)
    return qs


# ---------------------------------------------------------------------------
# arcs on the circle


def uncovered_after_arcs(
    centers: list[Fraction], lengths: list[Fraction]
) -> tuple[Fraction, list[tuple[Fraction, Fraction]], int]:
    """Lebesgue measure and components of [0,1) minus the union of arcs.

    Arc i is the closed-on-the-left interval [c - l/2, c + l/2) mod 1.
    Event-sweep over exact Fraction endpoints; independent of the package's
    integer interval-subtraction code.
    """
    covered: list[tuple[Fraction, Fraction]] = []
    for c, l in zip(centers, lengths):
        l = min(Fraction(1), max(Fraction(0), l))
        if l == 0:
            continue
        if l == 1:
            covered.append((Fraction(0), Fraction(1)))
            continue
        start = frac_part(c - l / 2)
        end = start + l
        if end <= 1:
            covered.append((start, end))
        else:
            covered.append((start, Fraction(1)))
            covered.append((Fraction(0), end - 1))
    covered.sort()
    merged: list[tuple[Fraction, Fraction]] = []
    for s, e in covered:
        if merged and s <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    gaps: list[tuple[Fraction, Fraction]] = []
    cursor = Fraction(0)
    for s, e in merged:
        if s > cursor:
            gaps.append((cursor, s))
        cursor = max(cursor, e)
    if cursor < 1:
        gaps.append((cursor, Fraction(1)))
    measure = sum((e - s for s, e in gaps), Fraction(0))
    # a gap touching both 0 and 1 is a single circular component
    n_components = len(gaps)
    if len(gaps) >= 2 and gaps[0][0] == 0 and gaps[-1][1] == 1:
        n_components -= 1
    return measure, gaps, n_components


def expected_uncovered(lengths: list[Fraction]) -> Fraction:
    out = Fraction(1)
    for l in lengths:
        l = min(Fraction(1), max(Fraction(0), l))
        out *= 1 - l
    return out


# ---------------------------------------------------------------------------
# colored dyadic tree


def color_level(
    survivors: set[int], level: int, point_indices: list[int], thick: bool
) -> tuple[set[int], int]:
    """Remove survivors colored at `level`; return (still alive, hit count).

    point_indices are the level-`level` dyadic interval indices containing
    the placed points.  A plain hit removes its own vertex; a thick hit also
    removes both cyclic neighbours.  The hit count is the number of distinct
    point-bearing intervals whose removal set met a survivor.
    """
    size = 1 << level
    removed: set[int] = set()
    hits = 0
    for k in set(point_indices):
        targets = {k} if not thick else {(k - 1) % size, k, (k + 1) % size}
        if targets & survivors:
            hits += 1
        removed |= targets
    return survivors - removed, hits


def spawn_children(survivors: set[int]) -> set[int]:
    out = set()
    for k in survivors:
        out.add(2 * k)
        out.add(2 * k + 1)
    return out


def run_tree(
    points_by_level: dict[int, list[Fraction]], n0: int, n_max: int, thick: bool
) -> list[tuple[int, int, int, int]]:
    """Full naive run. Returns rows (level, survivors_after, hits, placed).

    Level n0 starts with all 2^n0 vertices alive; the points listed for each
    level color that level; survivors then spawn children for the next.
    """
    alive = set(range(1 << n0))
    rows = []
    for n in range(n0, n_max + 1):
        pts = points_by_level.get(n, [])
        idx = [int(math.floor(frac_part(p) * (1 << n))) for p in pts]
        alive, hits = color_level(alive, n, idx, thick)
        rows.append((n, len(alive), hits, len(pts)))
        if n < n_max:
            alive = spawn_children(alive)
    return rows


def uncolored_path_exists(
    colored_by_level: dict[int, set[int]], n: int, R: int
) -> bool:
    """Is there a chain v_n > v_{n+1} > ... > v_{n+R}, all uncolored?"""
    reach = {k for k in range(1 << n) if k not in colored_by_level.get(n, set())}
    for lev in range(n + 1, n + R + 1):
        nxt = set()
        for k in reach:
            for child in (2 * k, 2 * k + 1):
                if child not in colored_by_level.get(lev, set()):
                    nxt.add(child)
        reach = nxt
        if not reach:
            return False
    return bool(reach)


def iid_event_bound(n: int, R: int, counts: list[int]) -> mpmath.mpf:
    """2^(n+R+1) * prod_{j=0..R} (1 - 2^-(n+j))^counts[j] at high precision."""
    with mpmath.workdps(60):
        out = mpmath.mpf(2) ** (n + R + 1)
        for j in range(R + 1):
            out *= (1 - mpmath.mpf(2) ** -(n + j)) ** counts[j]
        return out


# ---------------------------------------------------------------------------
# limsup fractal box counts


def box_hits(
    centers: list[Fraction],
    radii: list[Fraction],
    base: int,
    digits: tuple[int, ...],
    depth: int,
) -> int:
    """Count depth-`depth` base-`base` cylinders with admissible digits that
    meet the union of closed arcs B(center, radius); per-cell scan."""
    count = 0
    cells = base**depth
    for cell in range(cells):
        # admissibility: all base-`base` digits of `cell` are in `digits`
        c, ok = cell, True
        for _ in range(depth):
            c, d = divmod(c, base)
            if d not in digits:
                ok = False
                break
        if not ok:
            continue
        lo = Fraction(cell, cells)
        hi = Fraction(cell + 1, cells)
        hit = False
        for ctr, r in zip(centers, radii):
            c0 = frac_part(ctr)
            # arc [c0-r, c0+r] on the circle vs cell [lo, hi)
            a, b = c0 - r, c0 + r
            for shift in (-1, 0, 1):
                if a + shift < hi and b + shift >= lo:
                    hit = True
                    break
            if hit:
                break
        if hit:
            count += 1
    return count


def frostman_cells(base: int, digits: tuple[int, ...], n: int) -> int:
    """# of dyadic intervals [k/2^n, (k+1)/2^n) meeting the digit-set fractal.

    Point-set approximation is not used: a dyadic cell meets the fractal iff
    it is not contained in the complement, and the complement below scale
    2^-n is a finite union of removed cylinders; here we just test every
    cell against deep admissible cylinders (depth chosen so cylinders are
    finer than cells), which is exact because every admissible cylinder
    contains fractal points and every fractal point lies in admissible
    cylinders of every depth.
    """
    depth = 1
    while base ** (-depth) > Fraction(1, 1 << (n + 1)):
        depth += 1
    # collect admissible cylinder intervals at that depth
    admissible = [(Fraction(0), Fraction(1))]
    for _ in range(depth):
        nxt = []
        for lo, hi in admissible:
            w = (hi - lo) / base
            for d in digits:
                nxt.append((lo + d * w, lo + (d + 1) * w))
        admissible = nxt
    count = 0
    for k in range(1 << n):
        lo = Fraction(k, 1 << n)
        hi = Fraction(k + 1, 1 << n)
        if any(a < hi and b > lo for a, b in admissible):
            count += 1
    return count


# ---------------------------------------------------------------------------
# gcd sums and local counts


def gcd_sum(q: list[int], index_set: list[int], N: int, nu, eps, log=math.log2):
    """Naive double loop.

    Sum over N < k <= m <= 2N (positions in index_set, 1-based) of
      min( gcd(a_m, a_k)/a_m * min(log(a_m/a_k), loglog N), N^(1-nu-eps*nu) )
    where a_i = q[index_set[i-1]].
    """
    cap = float(N) ** (1 - nu - eps * nu)
    loglog = log(log(N))
    total = 0.0
    for m in range(N + 1, 2 * N + 1):
        am = q[index_set[m - 1] - 1]
        for k in range(N + 1, m + 1):
            ak = q[index_set[k - 1] - 1]
            g = math.gcd(am, ak)
            term = g / am * min(log(am / ak), loglog)
            total += min(term, cap)
    return total


def local_count(
    q: list[int], j: int, n_lo: int, n_hi: int, W: Fraction, B: Fraction
) -> Fraction:
    """Naive quadruple loop over (l, m, h, k).

    Counts pairs with |k*q_m - h*q_l - B| < W for l,m in (n_lo, n_hi],
    1 <= h,k <= 2^(2j), weighting each solution by c(h)*c(k) with
    c(h) = min(1, 2^(j+1)/h).  q is 1-based via q[i-1].
    """

    def c(h: int) -> Fraction:
        return min(Fraction(1), Fraction(1 << (j + 1), h))

    total = Fraction(0)
    hk_max = 1 << (2 * j)
    for l in range(n_lo + 1, n_hi + 1):
        ql = q[l - 1]
        for m in range(n_lo + 1, n_hi + 1):
            qm = q[m - 1]
            for h in range(1, hk_max + 1):
                for k in range(1, hk_max + 1):
                    if abs(k * qm - h * ql - B) < W:
                        total += c(h) * c(k)
    return total


# ---------------------------------------------------------------------------
# Cassels products


def product_minima(alpha, beta, gamma, delta, N: int):
    """Running strict minima of n*log2(n)*||n*alpha-gamma||*||n*beta-delta||.

    Returns list of (n, value) records at 120 dps.
    """
    with mpmath.workdps(120):
        a, b = mpmath.mpf(alpha), mpmath.mpf(beta)
        g, d = mpmath.mpf(gamma), mpmath.mpf(delta)
        best = None
        records = []
        for n in range(2, N + 1):
            ta = mpmath.frac(n * a - g)
            tb = mpmath.frac(n * b - d)
            da = min(ta, 1 - ta)
            db = min(tb, 1 - tb)
            v = n * mpmath.log(n, 2) * da * db
            if best is None or v < best:
                best = v
                records.append((n, float(v)))
        return records


def best_inhom_approx(alpha, gamma, lo: int, hi: int) -> int:
    """argmin over n in (lo, hi] of ||n*alpha - gamma|| at 120 dps."""
    with mpmath.workdps(120):
        a, g = mpmath.mpf(alpha), mpmath.mpf(gamma)
        best_n, best_v = None, None
        for n in range(lo + 1, hi + 1):
            t = mpmath.frac(n * a - g)
            d = min(t, 1 - t)
            if best_v is None or d < best_v:
                best_n, best_v = n, d
        return best_n
