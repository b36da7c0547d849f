"""Random-arc coverings of the unit circle.

The core experiment: drop arcs of prescribed lengths ``l_1, l_2, ...`` at
independent uniform centers and track the uncovered set.  The circle is the
dyadic grid at a fixed precision (64 bits by default), arc centers are drawn
exactly on that grid, and arc lengths are quantised to it once, so every
trial is integer-exact: the uncovered set after N arcs is a finite union of
grid intervals whose total measure is an exact rational.  At 64 bits the
quantisation perturbs each length by at most 2^-64, which shifts expected
uncovered measure by well under 1e-15 — negligible against Monte Carlo noise.

The summability diagnostic (`shepp_terms`) evaluates the series whose
divergence is equivalent to almost-sure full coverage for non-increasing
lengths: sum over n of n^-2 * exp(l_1 + ... + l_n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import _kernels
from ._accel import HAVE_NUMBA, backend_name
from ._seeding import trial_rng
from .arith import UnitPoint

__all__ = [
    "Arc",
    "ArcSet",
    "LengthSequence",
    "harmonic",
    "shepp_critical",
    "psi_driven",
    "explicit_lengths",
    "subtract_arc",
    "dvoretzky_trial",
    "run_trials",
    "TrialResult",
    "expected_uncovered",
    "shepp_terms",
    "SheppReport",
    "Verdict",
    "grid_covered_infinitely_often",
]

LengthLike = Union[Fraction, float, int]


def _quantize_length(length: LengthLike, bits: int) -> int:
    """Nearest-integer number of 2^-bits ulps in ``length`` (>= 0), half-up."""
    frac = Fraction(length)
    if frac <= 0:
        return 0
    num, den = frac.numerator, frac.denominator
    return ((num << (bits + 1)) + den) // (2 * den)


@dataclass(frozen=True)
class Arc:
    """An arc of the circle: ``[center - length/2, center + length/2)``.

    ``length`` is held exactly as a Fraction (floats convert exactly) and
    clipped into [0, 1].  On a grid of ``bits`` precision the arc occupies
    the half-open ulp interval ``[c - (L >> 1), c - (L >> 1) + L)`` where
    ``L`` is the length rounded to the nearest ulp — so an odd-L arc is a
    half-ulp asymmetric around its center, and the quantised measure is
    exactly ``L`` ulps.
    """

    center: UnitPoint
    length: Fraction

    def __post_init__(self) -> None:
        frac = Fraction(self.length)
        if frac < 0:
            frac = Fraction(0)
        elif frac > 1:
            frac = Fraction(1)
        object.__setattr__(self, "length", frac)

    def to_interval(self, bits: int) -> tuple[int, int, bool]:
        """Quantise to ``(start_ulp, length_ulps, covers_everything)``."""
        length_ulps = _quantize_length(self.length, bits)
        modulus = 1 << bits
        if length_ulps >= modulus:
            return 0, modulus, True
        if self.center.precision == bits:
            c = self.center.value
        elif self.center.precision > bits:
            c = self.center.value >> (self.center.precision - bits)
        else:
            c = self.center.value << (bits - self.center.precision)
        start = (c - (length_ulps >> 1)) % modulus
        return start, length_ulps, False


@dataclass(frozen=True)
class ArcSet:
    """A finite union of half-open grid intervals ``[s, e)`` on the circle.

    Intervals are sorted, pairwise disjoint, and non-adjacent (touching
    intervals are merged), with ``0 <= s < e <= 2^precision``.  An interval
    pair that meets the top and bottom of the grid represents a single
    circular component; :attr:`components` accounts for that.
    """

    intervals: tuple[tuple[int, int], ...]
    precision: int = 64

    def __post_init__(self) -> None:
        modulus = 1 << self.precision
        prev_end = -1
        for s, e in self.intervals:
            if not (0 <= s < e <= modulus):
                raise ValueError(f"interval ({s}, {e}) outside grid range")
            if s <= prev_end:
                raise ValueError("intervals must be sorted, disjoint, non-adjacent")
            prev_end = e

    @classmethod
    def full(cls, precision: int = 64) -> "ArcSet":
        return cls(intervals=((0, 1 << precision),), precision=precision)

    @classmethod
    def empty(cls, precision: int = 64) -> "ArcSet":
        return cls(intervals=(), precision=precision)

    @property
    def measure_ulps(self) -> int:
        return sum(e - s for s, e in self.intervals)

    @property
    def measure(self) -> Fraction:
        return Fraction(self.measure_ulps, 1 << self.precision)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def components(self) -> int:
        """Number of connected components as subsets of the circle."""
        k = len(self.intervals)
        if k >= 2 and self.intervals[0][0] == 0 and self.intervals[-1][1] == (
            1 << self.precision
        ):
            return k - 1
        return k

    def contains(self, point: UnitPoint) -> bool:
        """Whether the (exact dyadic) point lies in the union."""
        if point.err:
            raise ValueError("membership test requires an exact point")
        if point.precision >= self.precision:
            p = point.value >> (point.precision - self.precision)
        else:
            p = point.value << (self.precision - point.precision)
        import bisect

        i = bisect.bisect_right([s for s, _ in self.intervals], p) - 1
        return i >= 0 and p < self.intervals[i][1]

    def subtract(self, arc: Arc) -> "ArcSet":
        """This set minus the (quantised) arc; exact at any precision."""
        start, length_ulps, is_full = arc.to_interval(self.precision)
        if is_full or self.is_empty:
            return ArcSet.empty(self.precision) if is_full else self
        if length_ulps == 0:
            return self
        modulus = 1 << self.precision
        mask = modulus - 1
        starts = [s for s, _ in self.intervals]
        ends = [e - 1 for _, e in self.intervals]
        b_incl = (start + length_ulps - 1) & mask
        if b_incl >= start:
            _kernels._sub1_py(starts, ends, start, b_incl)
        else:
            _kernels._sub1_py(starts, ends, start, mask)
            _kernels._sub1_py(starts, ends, 0, b_incl)
        return ArcSet(
            intervals=tuple((s, e + 1) for s, e in zip(starts, ends)),
            precision=self.precision,
        )


def subtract_arc(arcset: ArcSet, arc: Arc) -> ArcSet:
    """Remove one arc from an uncovered set, exactly."""
    return arcset.subtract(arc)


# ---------------------------------------------------------------------------
# Length sequences.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LengthSequence:
    """A rule ``n -> l_n`` (1-based) with family metadata.

    Values may exceed [0, 1]; all consumers clip.  ``family`` and ``params``
    let the summability classifier recognise closed-form cases, and
    ``claims_monotone`` switches on a construction-time spot check that the
    rule is non-increasing on a coarse grid.
    """

    rule: Callable[[int], LengthLike]
    family: str = "custom"
    params: tuple = ()
    claims_monotone: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "_ulps_cache", {})
        if self.claims_monotone:
            grid = [1, 2, 3, 4, 6, 8, 12, 16, 32, 64, 256, 1024, 4096]
            vals = [Fraction(self.rule(n)) for n in grid]
            for i in range(len(vals) - 1):
                if vals[i] < vals[i + 1]:
                    raise ValueError(
                        f"rule claims monotone but l_{grid[i]} < l_{grid[i+1]}"
                    )

    def values(self, count: int) -> list:
        """Raw (unclipped) l_1 .. l_count."""
        return [self.rule(n) for n in range(1, count + 1)]

    def clipped(self, count: int) -> list[Fraction]:
        out = []
        for v in self.values(count):
            f = Fraction(v)
            out.append(Fraction(0) if f < 0 else Fraction(1) if f > 1 else f)
        return out

    def ulps(self, count: int, bits: int) -> tuple[np.ndarray, np.ndarray]:
        """Quantised lengths for simulation: (uint64 ulps, full-circle flags).

        Only valid for ``bits <= 64``.  Lengths of one full circle or more
        are flagged rather than stored (2^64 does not fit in uint64).
        Results are cached per (count, bits) and returned read-only, so
        repeated trials do not re-quantise the sequence.
        """
        if bits > 64:
            raise ValueError("vectorised quantisation supports bits <= 64 only")
        cache = self._ulps_cache  # type: ignore[attr-defined]
        key = (count, bits)
        if key not in cache:
            lens = np.zeros(count, dtype=np.uint64)
            full = np.zeros(count, dtype=np.bool_)
            modulus = 1 << bits
            for i, v in enumerate(self.values(count)):
                q = _quantize_length(v, bits)
                if q >= modulus:
                    full[i] = True
                else:
                    lens[i] = q
            lens.flags.writeable = False
            full.flags.writeable = False
            cache[key] = (lens, full)
        return cache[key]


def harmonic(c: LengthLike) -> LengthSequence:
    """Lengths c/n — the family whose coverage threshold sits at c = 1."""
    c_frac = Fraction(c)
    return LengthSequence(
        rule=lambda n: c_frac / n,
        family="harmonic",
        params=(c_frac,),
        claims_monotone=c_frac >= 0,
    )


def shepp_critical(p: float = 1.0) -> LengthSequence:
    """Lengths 1/n - 1/(n * (log2 n)^p) for n >= 2 (l_1 = 0).

    Sits just inside/outside the coverage threshold depending on p: the
    classifier puts p >= 1 on the covering side and p < 1 on the other.
    Binary logarithms matter at p = 1: with log base b the p = 1 family
    covers exactly when ln(b) <= 1, and base 2 satisfies that.
    """

    def rule(n: int) -> float:
        if n < 2:
            return 0.0
        return 1.0 / n - 1.0 / (n * math.log2(n) ** p)

    return LengthSequence(rule=rule, family="shepp_critical", params=(float(p),))


def psi_driven(psi: Callable[[int], float], tag: str = "psi") -> LengthSequence:
    """Lengths given by an arbitrary density function psi(n)."""
    return LengthSequence(rule=psi, family=tag)


def explicit_lengths(values: Sequence[LengthLike]) -> LengthSequence:
    """A finite, explicitly listed length sequence (l_n = 0 past the end)."""
    vals = tuple(Fraction(v) for v in values)

    def rule(n: int) -> Fraction:
        return vals[n - 1] if 1 <= n <= len(vals) else Fraction(0)

    return LengthSequence(rule=rule, family="explicit", params=(len(vals),))


# ---------------------------------------------------------------------------
# Monte Carlo trials.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialResult:
    """One covering trial: the final uncovered set plus per-step summaries."""

    uncovered: ArcSet
    step_measures: np.ndarray  # float64 uncovered measure after each arc
    n_arcs: int
    precision: int

    @property
    def uncovered_measure(self) -> Fraction:
        return self.uncovered.measure

    @property
    def components(self) -> int:
        return self.uncovered.components


def dvoretzky_trial(
    lengths: LengthSequence,
    n_arcs: int,
    rng: np.random.Generator,
    precision: int = 64,
    backend: Optional[str] = None,
) -> TrialResult:
    """Drop ``n_arcs`` uniformly centred arcs and return what survives.

    Centers are drawn as exact ``precision``-bit grid points; lengths are
    quantised to the same grid.  The result is bit-exact for a given rng
    state regardless of backend ("numba" or "python"; default picks numba
    when available and the precision is 64).
    """
    if backend not in (None, "numba", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is unavailable")
    if backend == "numba" and precision != 64:
        raise ValueError("numba backend requires precision=64")
    use_numba = HAVE_NUMBA and precision == 64 and backend != "python"

    if precision == 64:
        centers = rng.integers(0, 1 << 64, size=n_arcs, dtype=np.uint64)
    else:
        # one UnitPoint-style draw per arc, precision bits each
        nbytes = (precision + 7) // 8
        raw = rng.bytes(nbytes * n_arcs) if n_arcs else b""
        excess = nbytes * 8 - precision
        centers = np.array(
            [
                int.from_bytes(raw[i * nbytes : (i + 1) * nbytes], "big") >> excess
                for i in range(n_arcs)
            ],
            dtype=object,
        )
    lens, full = lengths.ulps(n_arcs, min(precision, 64)) if precision <= 64 else (None, None)
    if precision > 64:
        lens = np.empty(n_arcs, dtype=object)
        full = np.zeros(n_arcs, dtype=np.bool_)
        modulus = 1 << precision
        for i, v in enumerate(lengths.values(n_arcs)):
            q = _quantize_length(v, precision)
            if q >= modulus:
                full[i] = True
                lens[i] = 0
            else:
                lens[i] = q

    if use_numba:
        starts = np.empty(n_arcs + 4, dtype=np.uint64)
        ends = np.empty(n_arcs + 4, dtype=np.uint64)
        step = np.empty(n_arcs, dtype=np.float64)
        k = _kernels._dvoretzky_nb(centers, lens, full, starts, ends, step)
        intervals = tuple(
            (int(starts[i]), int(ends[i]) + 1) for i in range(k)
        )
    else:
        s_list, e_list, step = _kernels._dvoretzky_py(centers, lens, full, precision)
        intervals = tuple((s, e + 1) for s, e in zip(s_list, e_list))
    return TrialResult(
        uncovered=ArcSet(intervals=intervals, precision=precision),
        step_measures=step,
        n_arcs=n_arcs,
        precision=precision,
    )


def run_trials(
    lengths: LengthSequence,
    n_arcs: int,
    n_trials: int,
    master_seed: int,
    precision: int = 64,
    backend: Optional[str] = None,
) -> list[TrialResult]:
    """Independent trials with counter-based seeding (trial k reproducible alone)."""
    return [
        dvoretzky_trial(
            lengths, n_arcs, trial_rng(master_seed, t), precision=precision,
            backend=backend,
        )
        for t in range(n_trials)
    ]


def expected_uncovered(lengths: LengthSequence, n_arcs: int, dps: int = 50):
    """The exact expected uncovered measure: product of (1 - l_n), clipped.

    Returns a Fraction when every length is rational (exact), otherwise an
    mpmath float at ``dps`` digits.  This is the unquantised expectation;
    simulated trials see lengths quantised to the working grid, which moves
    the expectation by < n_arcs * 2^-64 at the default precision.
    """
    vals = lengths.values(n_arcs)
    if all(isinstance(v, (Fraction, int)) for v in vals):
        prod = Fraction(1)
        for v in vals:
            f = Fraction(v)
            f = Fraction(0) if f < 0 else Fraction(1) if f > 1 else f
            prod *= 1 - f
            if prod == 0:
                break
        return prod
    import mpmath

    with mpmath.workdps(dps):
        prod = mpmath.mpf(1)
        for v in vals:
            f = Fraction(v)
            f = Fraction(0) if f < 0 else Fraction(1) if f > 1 else f
            prod *= 1 - mpmath.mpf(f.numerator) / f.denominator
        return +prod


# ---------------------------------------------------------------------------
# Summability diagnostic.
# ---------------------------------------------------------------------------


class Verdict(Enum):
    DIVERGES = "DIVERGES"
    CONVERGES = "CONVERGES"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class SheppReport:
    """Summability of sum n^-2 exp(l_1 + ... + l_n), with a power-law fit.

    ``log_terms[n-1]`` is the natural log of the n-th term.  The numeric
    verdict fits terms ~ C * n^-s over the last two decades of n and calls
    s <= 1.02 divergent, s >= 1.2 convergent, anything between inconclusive
    (near-critical families legitimately land there).  ``closed_form`` is
    the analytic classification when the family is recognised.
    """

    n_terms: int
    log_terms: np.ndarray
    fitted_exponent: float
    numeric_verdict: Verdict
    closed_form: Optional[Verdict]
    family: str

    @property
    def verdict(self) -> Verdict:
        return self.closed_form if self.closed_form is not None else self.numeric_verdict

    @property
    def terms(self) -> np.ndarray:
        return np.exp(self.log_terms)


def _closed_form_verdict(lengths: LengthSequence) -> Optional[Verdict]:
    if lengths.family == "harmonic":
        c = lengths.params[0]
        return Verdict.DIVERGES if c >= 1 else Verdict.CONVERGES
    if lengths.family == "shepp_critical":
        p = lengths.params[0]
        # with binary logs the p = 1 term sum grows like ln(2) * lnln(n),
        # leaving sum 1/(n (ln n)^ln 2) — divergent since ln 2 <= 1.
        return Verdict.DIVERGES if p >= 1 else Verdict.CONVERGES
    return None


def shepp_terms(lengths: LengthSequence, n_terms: int) -> SheppReport:
    """Evaluate the coverage series and classify its tail behaviour."""
    if n_terms < 100:
        raise ValueError("need at least 100 terms for a meaningful tail fit")
    vals = np.array(
        [min(1.0, max(0.0, float(v))) for v in lengths.values(n_terms)],
        dtype=np.float64,
    )
    n = np.arange(1, n_terms + 1, dtype=np.float64)
    log_terms = np.cumsum(vals) - 2.0 * np.log(n)
    lo = max(1, n_terms // 100)
    window = slice(lo - 1, n_terms)
    x = np.log(n[window])
    y = log_terms[window]
    slope, _ = np.polyfit(x, y, 1)
    s = -float(slope)
    if s <= 1.02:
        numeric = Verdict.DIVERGES
    elif s >= 1.2:
        numeric = Verdict.CONVERGES
    else:
        numeric = Verdict.INCONCLUSIVE
    return SheppReport(
        n_terms=n_terms,
        log_terms=log_terms,
        fitted_exponent=s,
        numeric_verdict=numeric,
        closed_form=_closed_form_verdict(lengths),
        family=lengths.family,
    )


# ---------------------------------------------------------------------------
# Dyadic-window coverage counts on a finite grid.
# ---------------------------------------------------------------------------


def grid_covered_infinitely_often(
    lengths: LengthSequence,
    n_arcs: int,
    grid_size: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-grid-point counts of dyadic arc windows that cover the point.

    Window k holds the arcs with index n in (2^k, 2^(k+1)], for every k with
    2^(k+1) <= n_arcs.  A grid point i/grid_size scores one for each window
    in which at least one arc covers it; a point every window covers is a
    finite-scale witness of "covered infinitely often".  Returns an int64
    array of length ``grid_size``.
    """
    if grid_size < 1 or grid_size > (1 << 24):
        raise ValueError("grid_size must be in [1, 2^24]")
    n_windows = 0
    while (2 << n_windows) <= n_arcs:
        n_windows += 1
    counts = np.zeros(grid_size, dtype=np.int64)
    if n_windows == 0:
        return counts
    total_arcs = 2 << (n_windows - 1)
    centers = rng.integers(0, 1 << 64, size=total_arcs, dtype=np.uint64)
    lens, full = lengths.ulps(total_arcs, 64)
    starts = centers - (lens >> np.uint64(1))  # uint64 wraparound intended
    for k in range(n_windows):
        lo, hi = (1 << k), (2 << k)  # arcs n in (lo, hi] -> slice [lo, hi)
        covered = np.zeros(grid_size, dtype=np.bool_)
        _kernels._mark_window(
            covered, starts[lo:hi], lens[lo:hi], full[lo:hi], grid_size
        )
        counts += covered
    return counts
