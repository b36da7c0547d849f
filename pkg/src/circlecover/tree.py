"""Colored dyadic-tree percolation driven by point schedules.

Level ``n`` of the binary tree is the set of dyadic intervals
``I_{n,k} = [k/2^n, (k+1)/2^n)``.  A schedule places a batch of circle
points on each level; an interval containing a point is *colored*.  In
plain mode a colored interval leaves the surviving frontier; in thick mode
the colored interval and both cyclic neighbours leave.  Survivors spawn
both children.  The module tracks frontier statistics level by level,
answers uncolored-path queries from a retained coloring record, and
evaluates the exact i.i.d. union bound for those path events.

Frontiers are never materialised as trees: levels up to 24 use a boolean
occupancy array (16 MB at level 24), larger levels a sorted index array.
Dyadic boundary points follow the expansion that terminates (the one
ending in 1000...), i.e. interval membership is the plain floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Union

import gmpy2
import mpmath
import numpy as np

from .arith import PrecisionError, UnitPoint

__all__ = [
    "CoveringSchedule",
    "Frontier",
    "LevelStats",
    "ColoringRecord",
    "IIDPoints",
    "SequencePoints",
    "BitStreamPoints",
    "color_level",
    "run_tree",
    "uncolored_path_exists",
    "iid_event_bound",
    "thick_survival_trial",
]

ALL_COLORED = "all"
ColoredSet = Union[np.ndarray, str]  # sorted unique indices, or ALL_COLORED

_LN2 = math.log(2.0)
_BOOL_LEVEL_CAP = 24  # bool frontier up to 2^24 intervals (16 MB)
_DIRECT_DRAW_CAP = 1 << 25
_CASCADE_BINS_CAP = 1 << 24
_SHORTCUT_LOG = -40 * _LN2  # survivor expectation below 2^-40: take the shortcut


def _floor_mass_power(mass: Fraction, exp_num: int, exp_den: int) -> int:
    """Exact floor(mass * 2^(exp_num/exp_den)) for mass > 0, exponent >= 0.

    Uses floor(X^(1/d)) = floor(floor(X)^(1/d)): there is no integer in
    (floor(X)^(1/d), X^(1/d)] because m <= X^(1/d) iff m^d <= floor(X).
    """
    a, b = mass.numerator, mass.denominator
    if exp_den == 1:
        return (a << exp_num) // b
    big = ((a**exp_den) << exp_num) // (b**exp_den)
    root, _ = gmpy2.iroot(gmpy2.mpz(big), exp_den)
    return int(root)


@dataclass(frozen=True)
class CoveringSchedule:
    """Point-placement schedule: level n carries floor(mass * 2^(n/nu)) points.

    The cumulative count after level n is N_n = sum_{j=0..n} of the level
    sizes, so the points of level n are the indices in the block
    (N_{n-1}, N_n].  When ``buffer_eps`` is set, each block splits into a
    leading buffer of exactly floor(mass * 2^((1 - eps/2) n)) indices and a
    main part — consecutive intervals, buffer first, so that main-block
    indices keep a large separation from every earlier level.
    """

    mass: Fraction
    nu: Fraction = Fraction(1)
    buffer_eps: Optional[Fraction] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mass", Fraction(self.mass))
        object.__setattr__(self, "nu", Fraction(self.nu))
        if self.buffer_eps is not None:
            object.__setattr__(self, "buffer_eps", Fraction(self.buffer_eps))
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.nu < 1:
            raise ValueError("nu must be >= 1")
        if self.buffer_eps is not None and not (0 < self.buffer_eps < 2):
            raise ValueError("buffer_eps must lie in (0, 2)")
        object.__setattr__(self, "_cum_cache", [])

    def points_at_level(self, n: int) -> int:
        """Size of level n's block: floor(mass * 2^(n/nu))."""
        if n < 0:
            raise ValueError("level must be >= 0")
        return _floor_mass_power(self.mass, n * self.nu.denominator,
                                 self.nu.numerator)

    def cumulative(self, n: int) -> int:
        """N_n: total points through level n (N_{-1} = 0)."""
        if n < 0:
            return 0
        cache: list = self._cum_cache  # type: ignore[attr-defined]
        while len(cache) <= n:
            j = len(cache)
            prev = cache[j - 1] if j else 0
            cache.append(prev + self.points_at_level(j))
        return cache[n]

    def block(self, n: int) -> tuple[int, int]:
        """The half-open index range (N_{n-1}, N_n] as (lo, hi]."""
        return self.cumulative(n - 1), self.cumulative(n)

    def buffer_size(self, n: int) -> int:
        """Exact floor(mass * 2^((1 - eps/2) n)); 0 when buffers are off."""
        if self.buffer_eps is None:
            return 0
        r = (1 - self.buffer_eps / 2) * n
        size = _floor_mass_power(self.mass, r.numerator, r.denominator)
        if size > self.points_at_level(n):
            raise ValueError(
                f"buffer block at level {n} ({size}) exceeds the level size"
            )
        return size


@dataclass(frozen=True)
class Frontier:
    """Surviving dyadic intervals at one level, as sorted unique indices."""

    level: int
    survivors: tuple[int, ...]
    mode: str = "plain"

    def __post_init__(self) -> None:
        if self.mode not in ("plain", "thick"):
            raise ValueError("mode must be 'plain' or 'thick'")
        if self.level < 0:
            raise ValueError("level must be >= 0")
        size = 1 << self.level
        prev = -1
        for k in self.survivors:
            if not (0 <= k < size):
                raise ValueError(f"survivor index {k} outside level {self.level}")
            if k <= prev:
                raise ValueError("survivor indices must be strictly increasing")
            prev = k

    @classmethod
    def full(cls, level: int, mode: str = "plain") -> "Frontier":
        return cls(level=level, survivors=tuple(range(1 << level)), mode=mode)

    @property
    def count(self) -> int:
        return len(self.survivors)


@dataclass(frozen=True)
class LevelStats:
    """Per-level summary.  ``survivor_count`` is the frontier size *before*
    this level's coloring, so the thick recursion
    survivor_count(n+1) >= 2 * (survivor_count(n) - 3 * colored_hits(n))
    holds exactly step by step (plain mode: with colored_hits in place of
    3 * colored_hits, with equality).
    """

    level: int
    survivor_count: int
    colored_hits: int
    points_placed: int
    threshold_met: Optional[bool] = None


class ColoringRecord:
    """Colored interval indices per level, for path queries and dumps.

    A level is stored as a sorted unique ``np.ndarray`` of indices or the
    string ``"all"`` when every interval of the level is colored.
    """

    def __init__(self) -> None:
        self.levels: dict[int, ColoredSet] = {}

    def add(self, level: int, colored: ColoredSet) -> None:
        self.levels[level] = colored

    def colored_at(self, level: int) -> ColoredSet:
        if level not in self.levels:
            raise ValueError(f"no coloring retained for level {level}")
        return self.levels[level]

    def to_runs(self) -> dict[int, list[tuple[int, int]]]:
        """Run-length form {level: [(start, length), ...]}; compact to dump."""
        out: dict[int, list[tuple[int, int]]] = {}
        for level, colored in sorted(self.levels.items()):
            if isinstance(colored, str):
                out[level] = [(0, 1 << level)]
                continue
            runs: list[tuple[int, int]] = []
            idx = np.asarray(colored)
            if idx.size:
                breaks = np.flatnonzero(np.diff(idx.astype(np.int64)) != 1)
                starts = np.concatenate(([0], breaks + 1))
                stops = np.concatenate((breaks, [idx.size - 1]))
                runs = [
                    (int(idx[a]), int(idx[b]) - int(idx[a]) + 1)
                    for a, b in zip(starts, stops)
                ]
            out[level] = runs
        return out

    @classmethod
    def from_runs(cls, runs: dict[int, list[tuple[int, int]]]) -> "ColoringRecord":
        rec = cls()
        for level, level_runs in runs.items():
            level = int(level)
            total = sum(length for _, length in level_runs)
            if total == (1 << level):
                rec.add(level, ALL_COLORED)
                continue
            parts = [np.arange(s, s + n, dtype=np.uint64) for s, n in level_runs]
            idx = np.concatenate(parts) if parts else np.empty(0, dtype=np.uint64)
            rec.add(level, np.unique(idx))
        return rec


# ---------------------------------------------------------------------------
# Coloring primitives.
# ---------------------------------------------------------------------------


def _point_interval_index(point: UnitPoint, level: int) -> int:
    """The level-``level`` dyadic interval containing the point, exactly."""
    if point.precision < level:
        raise PrecisionError(
            f"point holds {point.precision} bits, level {level} needs more"
        )
    shift = point.precision - level
    k = point.value >> shift
    if (point.value + point.err) >> shift != k:
        raise PrecisionError(
            f"point enclosure straddles a level-{level} interval boundary"
        )
    return k


def _color_bool(bits: np.ndarray, hit_idx: ColoredSet,
                thick: bool) -> tuple[np.ndarray, int]:
    """Color a bool-array frontier; return (children bool array, hits)."""
    if isinstance(hit_idx, str):  # every interval colored
        if thick:
            hits = int(
                (bits | np.roll(bits, 1) | np.roll(bits, -1)).sum()
            )
        else:
            hits = int(bits.sum())
        return np.zeros(bits.size * 2, dtype=np.bool_), hits
    if hit_idx.size:
        size = bits.size
        if thick:
            left = (hit_idx - 1) % size
            right = (hit_idx + 1) % size
            met = bits[hit_idx] | bits[left] | bits[right]
            hits = int(met.sum())
            bits = bits.copy()
            bits[hit_idx] = False
            bits[left] = False
            bits[right] = False
        else:
            hits = int(bits[hit_idx].sum())
            bits = bits.copy()
            bits[hit_idx] = False
    else:
        hits = 0
    return np.repeat(bits, 2), hits


def _color_sparse(survivors: np.ndarray, level: int, hit_idx: ColoredSet,
                  thick: bool) -> tuple[np.ndarray, int]:
    """Color a sorted-index frontier; return (children indices, hits)."""
    if isinstance(hit_idx, str):
        if thick:
            size = np.uint64(1) << np.uint64(level)
            grown = np.concatenate(
                [survivors, (survivors - 1) % size, (survivors + 1) % size]
            )
            hits = int(np.unique(grown).size)
        else:
            hits = int(survivors.size)
        return np.empty(0, dtype=np.uint64), hits

    def member(x: np.ndarray) -> np.ndarray:
        pos = np.minimum(np.searchsorted(survivors, x), survivors.size - 1)
        return survivors[pos] == x

    if hit_idx.size and survivors.size:
        size = np.uint64(1) << np.uint64(level)
        if thick:
            left = (hit_idx - 1) % size
            right = (hit_idx + 1) % size
            met = member(hit_idx) | member(left) | member(right)
            hits = int(met.sum())
            removal = np.unique(np.concatenate([hit_idx, left, right]))
        else:
            hits = int(member(hit_idx).sum())
            removal = hit_idx
        keep = survivors[~np.isin(survivors, removal, assume_unique=True)]
    else:
        hits = 0
        keep = survivors
    children = np.empty(keep.size * 2, dtype=np.uint64)
    children[0::2] = keep << np.uint64(1)
    children[1::2] = (keep << np.uint64(1)) | np.uint64(1)
    return children, hits


def color_level(frontier: Frontier,
                points: list[UnitPoint]) -> tuple[Frontier, LevelStats]:
    """Color one level with explicit points; spawn the surviving children.

    An interval is colored when it contains at least one point (dyadic
    boundary points belong to the interval on their right).  Thick mode
    also removes the two cyclic neighbours of each colored interval from
    survivorship.  The returned stats describe this level: frontier size
    before coloring, distinct point-bearing intervals whose removal set met
    a survivor, and the number of points placed.
    """
    idx_list = sorted({_point_interval_index(p, frontier.level) for p in points})
    hit_idx = np.array(idx_list, dtype=np.uint64)
    survivors = np.array(frontier.survivors, dtype=np.uint64)
    children, hits = _color_sparse(survivors, frontier.level, hit_idx,
                                   frontier.mode == "thick")
    stats = LevelStats(
        level=frontier.level,
        survivor_count=frontier.count,
        colored_hits=hits,
        points_placed=len(points),
    )
    new_frontier = Frontier(
        level=frontier.level + 1,
        survivors=tuple(int(c) for c in children),
        mode=frontier.mode,
    )
    return new_frontier, stats


# ---------------------------------------------------------------------------
# Point sources.
# ---------------------------------------------------------------------------


@dataclass
class IIDPoints:
    """Independent uniform points; the sampler draws colored-interval sets."""

    rng: np.random.Generator


@dataclass
class SequencePoints:
    """Points {q_N * x} for an explicit integer sequence and exact x.

    ``q`` maps the 1-based index N to the integer q_N.  Raises a precision
    error when x's enclosure becomes too coarse to resolve an interval.
    """

    q: Callable[[int], int]
    x: UnitPoint

    def level_indices(self, level: int, lo: int, hi: int) -> np.ndarray:
        idx = {
            _point_interval_index(self.x.times_int(self.q(n)), level)
            for n in range(lo + 1, hi + 1)
        }
        return np.array(sorted(idx), dtype=np.uint64)


class BitStreamPoints:
    """Points {2^N * x} for a lazily generated random real x.

    x's binary digits are drawn on demand from the generator, so the source
    models an exact uniform x without a precision cap: the level-n interval
    of {2^N x} is just digits N+1 .. N+n of x.
    """

    def __init__(self, rng: np.random.Generator) -> None:
        self.rng = rng
        self._bits = np.empty(0, dtype=np.uint64)

    def _ensure(self, length: int) -> None:
        if self._bits.size < length:
            grow = max(length - self._bits.size, 1 << 16)
            fresh = self.rng.integers(0, 2, size=grow, dtype=np.uint64)
            self._bits = np.concatenate([self._bits, fresh])

    def level_indices(self, level: int, lo: int, hi: int) -> np.ndarray:
        m = hi - lo
        if m <= 0:
            return np.empty(0, dtype=np.uint64)
        self._ensure(hi + level)
        k = np.zeros(m, dtype=np.uint64)
        for t in range(level):
            # digit t+1 of {2^N x} is digit N+t+1 of x, i.e. _bits[N + t]
            k = (k << np.uint64(1)) | self._bits[lo + 1 + t : lo + 1 + t + m]
        return np.unique(k)

    def point_value(self, n_point: int, bits_out: int) -> int:
        """First ``bits_out`` binary digits of {2^N x} for N = n_point."""
        self._ensure(n_point + bits_out)
        out = 0
        for t in range(bits_out):
            out = (out << 1) | int(self._bits[n_point + t])
        return out


PointSource = Union[IIDPoints, SequencePoints, BitStreamPoints]


def _sample_hit_indices(rng: np.random.Generator, m: int,
                        level: int) -> ColoredSet:
    """The set of intervals hit by m i.i.d. uniform points on level ``level``.

    Three regimes: when the expected number of unhit intervals
    size*(1 - 1/size)^m drops below 2^-40, one uniform draw decides between
    "all colored" and the (astronomically unlikely) exact fallback — a
    shortcut with total-variation error below 2^-40.  Otherwise points are
    drawn directly when m is moderate, and for huge m over few intervals a
    binary-splitting multinomial cascade samples per-interval occupancy
    counts without materialising the points.
    """
    if m < 0:
        raise ValueError("point count must be >= 0")
    if m == 0:
        return np.empty(0, dtype=np.uint64)
    size = 1 << level
    if size == 1:
        return ALL_COLORED
    log_ew = level * _LN2 + m * math.log1p(-1.0 / size)
    if log_ew < _SHORTCUT_LOG:
        if rng.random() >= math.exp(log_ew):
            return ALL_COLORED
        return _occupancy_cascade(rng, m, level)
    if m <= _DIRECT_DRAW_CAP:
        draws = rng.integers(0, size, size=m, dtype=np.uint64)
        return np.unique(draws)
    return _occupancy_cascade(rng, m, level)


def _occupancy_cascade(rng: np.random.Generator, m: int,
                       level: int) -> np.ndarray:
    """Exact hit-set sampling by recursive binomial halving of point counts."""
    if (1 << level) > _CASCADE_BINS_CAP:
        raise ValueError(
            f"occupancy sampling at level {level} exceeds the memory budget"
        )
    counts = np.array([m], dtype=np.int64)
    for _ in range(level):
        left = rng.binomial(counts, 0.5)
        merged = np.empty(counts.size * 2, dtype=np.int64)
        merged[0::2] = left
        merged[1::2] = counts - left
        counts = merged
    return np.flatnonzero(counts).astype(np.uint64)


# ---------------------------------------------------------------------------
# Full runs.
# ---------------------------------------------------------------------------


def _meets_threshold(count: int, level: int,
                     threshold_base: Optional[Fraction],
                     threshold_log2: Optional[Fraction]) -> Optional[bool]:
    if threshold_base is not None:
        b = Fraction(threshold_base)
        return count * b.denominator**level >= b.numerator**level
    if threshold_log2 is not None:
        r = Fraction(threshold_log2) * level
        if r <= 0:
            return count >= 1
        # count >= 2^(num/den)  <=>  count^den >= 2^num
        return count ** r.denominator >= 1 << r.numerator
    return None


def run_tree(
    source: PointSource,
    schedule: CoveringSchedule,
    n0: int,
    n_max: int,
    mode: str = "plain",
    *,
    threshold_base: Optional[Fraction] = None,
    threshold_log2: Optional[Fraction] = None,
    ignore_buffer_points: Optional[bool] = None,
    record: Optional[ColoringRecord] = None,
) -> list[LevelStats]:
    """One full percolation trial from a fresh level-n0 frontier.

    Level n places the points of block (N_{n-1}, N_n] (minus the leading
    buffer when buffer points are ignored — the default in thick mode with
    buffers configured).  Returns stats for levels n0..n_max; pass a
    ``ColoringRecord`` to retain per-level colored sets for path queries.
    Deterministic given the source's seed material.
    """
    if mode not in ("plain", "thick"):
        raise ValueError("mode must be 'plain' or 'thick'")
    if not (0 <= n0 <= n_max):
        raise ValueError("need 0 <= n0 <= n_max")
    thick = mode == "thick"
    if ignore_buffer_points is None:
        ignore_buffer_points = thick and schedule.buffer_eps is not None

    use_bool = n_max <= _BOOL_LEVEL_CAP
    if use_bool:
        frontier: np.ndarray = np.ones(1 << n0, dtype=np.bool_)
    else:
        frontier = np.arange(1 << n0, dtype=np.uint64)

    stats: list[LevelStats] = []
    for n in range(n0, n_max + 1):
        blk_lo, blk_hi = schedule.block(n)
        buf = schedule.buffer_size(n) if ignore_buffer_points else 0
        used_lo = blk_lo + buf
        m_used = blk_hi - used_lo

        if isinstance(source, IIDPoints):
            colored = _sample_hit_indices(source.rng, m_used, n)
        else:
            colored = source.level_indices(n, used_lo, blk_hi)
        if record is not None:
            record.add(n, colored)

        pre_count = int(frontier.sum()) if use_bool else int(frontier.size)
        met = _meets_threshold(pre_count, n, threshold_base, threshold_log2)
        if use_bool:
            children, hits = _color_bool(frontier, colored, thick)
        else:
            children, hits = _color_sparse(frontier, n, colored, thick)
        stats.append(
            LevelStats(
                level=n,
                survivor_count=pre_count,
                colored_hits=hits,
                points_placed=m_used,
                threshold_met=met,
            )
        )
        frontier = children
    return stats


def uncolored_path_exists(record: ColoringRecord, n: int, R: int) -> bool:
    """Is there a descending chain of R+1 uncolored intervals from level n?

    Uses the per-level colored sets only (a colored interval blocks the
    chain at its own level, regardless of other levels).
    """
    if R < 0:
        raise ValueError("R must be >= 0")
    if n + R > 26:
        raise ValueError("path query beyond level 26 exceeds the memory budget")
    for level in range(n, n + R + 1):
        if level not in record.levels:
            raise ValueError(
                f"coloring record window too short: level {level} missing"
            )
    colored = record.colored_at(n)
    if isinstance(colored, str):
        return False
    alive = np.ones(1 << n, dtype=np.bool_)
    alive[colored.astype(np.int64)] = False
    if not alive.any():
        return False
    for level in range(n + 1, n + R + 1):
        colored = record.colored_at(level)
        if isinstance(colored, str):
            return False
        alive = np.repeat(alive, 2)
        alive[colored.astype(np.int64)] = False
        if not alive.any():
            return False
    return bool(alive.any())


def iid_event_bound(n: int, R: int, mass: Fraction, dps: int = 60) -> mpmath.mpf:
    """Union bound for an uncolored path of length R+1 from level n under
    i.i.d. points: 2^(n+R+1) * prod_{j=0..R} (1 - 2^-(n+j))^floor(mass*2^(n+j)).
    """
    if n < 0 or R < 0:
        raise ValueError("n and R must be >= 0")
    mass = Fraction(mass)
    if mass < 0:
        raise ValueError("mass must be >= 0")
    with mpmath.workdps(dps):
        out = mpmath.mpf(2) ** (n + R + 1)
        for j in range(R + 1):
            count = (mass.numerator << (n + j)) // mass.denominator
            out *= (1 - mpmath.mpf(2) ** -(n + j)) ** count
        return +out


def thick_survival_trial(
    source: PointSource,
    schedule: CoveringSchedule,
    n0: int,
    n_max: int,
    threshold_base: Optional[Fraction] = None,
    threshold_log2: Optional[Fraction] = None,
) -> tuple[bool, list[LevelStats]]:
    """Thick-mode run judged against a growth threshold.

    Survival means the frontier size at every level n0..n_max stays at or
    above threshold_base^n (or 2^(threshold_log2 * n)).  Give at most one
    of the two threshold forms (default: base 6/5); comparisons are exact
    rational arithmetic, no floating point.
    """
    if threshold_base is not None and threshold_log2 is not None:
        raise ValueError("give only one of threshold_base, threshold_log2")
    if threshold_base is None and threshold_log2 is None:
        threshold_base = Fraction(6, 5)
    if threshold_base is not None and not (1 < Fraction(threshold_base) < 2):
        raise ValueError("threshold_base must lie in (1, 2)")
    stats = run_tree(
        source,
        schedule,
        n0,
        n_max,
        mode="thick",
        threshold_base=threshold_base,
        threshold_log2=threshold_log2,
    )
    survived = all(s.threshold_met for s in stats)
    return survived, stats
