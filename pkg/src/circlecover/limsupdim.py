"""Shrinking-target limsup sets, digit fractals, and box dimension.

The limsup set of interest collects the points delta hit by infinitely many
arcs B({q_n x}, n^-nu).  Its almost-sure Hausdorff dimension inside a
digit-restricted fractal of dimension s is 1/nu + s - 1 when nonnegative,
and the intersection is empty when nu > 1/(1-s).  This module provides the
prediction, exact grid counting of digit fractals, exact counting of grid
cells hit by a finite tail of arcs, and a box-dimension estimator that
regresses those counts across scales and random sample points x.

Counting conventions (shared with the reference implementations in the
test suite): grid cells are half-open [k/g^j, (k+1)/g^j), arcs are closed,
and a digit fractal meets a cell when an admissible cylinder overlaps the
open cell.  All cell arithmetic is exact integer/rational work; randomness
enters only through the sampled x, drawn with enough fractional bits to
stay exact through the deepest counted scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from statistics import fmean, pstdev
from typing import Optional, Sequence, Union

import gmpy2
import numpy as np

from ._seeding import trial_rng
from .arith import PrecisionError, UnitPoint
from .sequences import GeometricReal, SequenceSpec, Variant, generate

__all__ = [
    "DigitSet",
    "FrostmanCount",
    "frostman_grid",
    "LimsupConfig",
    "box_hits",
    "resolvability_band",
    "default_scales",
    "DimensionEstimate",
    "estimate_dimension",
    "EMPTY",
    "Emptiness",
    "predicted_dimension",
    "emptiness_threshold",
]


# ---------------------------------------------------------------------------
# Digit fractals and their grid counts.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DigitSet:
    """Points of [0, 1] all of whose base-``base`` digits lie in ``digits``.

    The dimension is s = log|digits| / log base, in (0, 1] with s = 1
    exactly for the full digit set.
    """

    base: int
    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        base = int(self.base)
        if base < 2:
            raise ValueError("base must be >= 2")
        digits = tuple(sorted({int(d) for d in self.digits}))
        if not digits:
            raise ValueError("digit set must be nonempty")
        if digits[0] < 0 or digits[-1] >= base:
            raise ValueError(f"digits must lie in 0..{base - 1}")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "digits", digits)

    @property
    def s(self) -> float:
        return math.log(len(self.digits)) / math.log(self.base)

    @property
    def is_full(self) -> bool:
        return len(self.digits) == self.base

    @classmethod
    def full(cls, base: int = 2) -> "DigitSet":
        return cls(base, tuple(range(base)))

    @classmethod
    def cantor_middle_thirds(cls) -> "DigitSet":
        return cls(3, (0, 2))


@dataclass(frozen=True)
class FrostmanCount:
    """Grid cells meeting the fractal, with the Ahlfors normalization
    ratio = count / (grid_base^depth)^s."""

    count: int
    depth: int
    grid_base: int
    ratio: float


def frostman_grid(
    digit_set: DigitSet, depth: int, grid_base: int = 2
) -> FrostmanCount:
    """Exact number of depth-``depth`` grid cells whose open interior meets
    the digit fractal.

    Works by walking admissible cylinders down to a level finer than half a
    grid cell and marking the cells each cylinder overlaps; every admissible
    cylinder contains fractal points, so at that granularity cylinder
    overlap and fractal membership agree (single-point touches at shared
    boundaries are not counted).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if grid_base < 2:
        raise ValueError("grid base must be >= 2")
    cells = grid_base**depth
    if cells > 1 << 26:
        raise ValueError("grid too fine: depth exceeds the counting budget")
    b = digit_set.base
    cyl_depth = 1
    while b**cyl_depth < 2 * cells:
        cyl_depth += 1
    pows = [b**m for m in range(cyl_depth + 1)]
    marks = bytearray(cells)
    count = 0
    stack: list[tuple[int, int]] = [(0, 0)]
    digits = digit_set.digits
    while stack:
        num, m = stack.pop()
        lo_scaled = num * cells
        hi_scaled = (num + 1) * cells
        kmin = lo_scaled // pows[m]
        kmax, rem = divmod(hi_scaled, pows[m])
        if rem == 0:
            kmax -= 1
        if m == cyl_depth:
            for k in range(kmin, kmax + 1):
                if not marks[k]:
                    marks[k] = 1
                    count += 1
        else:
            if kmax - kmin <= 2 and all(
                marks[k] for k in range(kmin, kmax + 1)
            ):
                continue
            base_num = num * b
            for d in digits:
                stack.append((base_num + d, m + 1))
        if count == cells:
            break
    ratio = count / float(cells) ** digit_set.s
    return FrostmanCount(count, depth, grid_base, ratio)


# ---------------------------------------------------------------------------
# Dimension prediction.
# ---------------------------------------------------------------------------


class Emptiness(Enum):
    EMPTY = "empty"


EMPTY = Emptiness.EMPTY


def predicted_dimension(
    nu: Fraction, s: float
) -> Union[float, Emptiness]:
    """Almost-sure dimension 1/nu + s - 1 of the intersection, or EMPTY.

    The value is returned when nonnegative; beyond nu = 1/(1-s) the
    intersection is almost surely empty and EMPTY is returned.
    """
    nu = Fraction(nu)
    if nu < 1:
        raise ValueError("nu must be >= 1")
    s = float(s)
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    value = 1 / float(nu) + s - 1
    return value if value >= 0 else EMPTY


def emptiness_threshold(s: float) -> float:
    """The nu beyond which the intersection is almost surely empty."""
    s = float(s)
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    return math.inf if s == 1 else 1 / (1 - s)


# ---------------------------------------------------------------------------
# Arc-union box counts.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimsupConfig:
    """A finite proxy for the limsup set: arcs B({q_n x}, n^-nu) for the
    tail indices n in (tail[0], tail[1]].

    ``scales`` is the inclusive dyadic-depth range used by the estimator.
    ``x`` is the sample point; estimators draw it per seed, so it may be
    left unset until then.
    """

    seq: Union[SequenceSpec, Variant]
    nu: Fraction
    tail: tuple[int, int]
    scales: tuple[int, int]
    x: Optional[UnitPoint] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "nu", Fraction(self.nu))
        if self.nu < 1:
            raise ValueError("nu must be >= 1")
        n0, n1 = (int(v) for v in self.tail)
        if n0 < 1 or n1 < n0:
            raise ValueError("tail must satisfy 1 <= start <= end")
        object.__setattr__(self, "tail", (n0, n1))
        j0, j1 = (int(v) for v in self.scales)
        if j0 < 1 or j1 < j0:
            raise ValueError("scales must satisfy 1 <= first <= last")
        object.__setattr__(self, "scales", (j0, j1))


def _variant_of(seq: Union[SequenceSpec, Variant]) -> Variant:
    return seq.variant if isinstance(seq, SequenceSpec) else seq


def _pow2_exponent(variant: Variant) -> Optional[int]:
    """a such that q_n = 2^(a + n - 1) exactly, else None."""
    if isinstance(variant, GeometricReal) and variant.r == 2:
        q0 = variant.q0
        if q0.denominator == 1 and q0.numerator & (q0.numerator - 1) == 0:
            return q0.numerator.bit_length() - 1
    return None


def _radius(n: int, nu: Fraction, bits: int) -> Fraction:
    """n^-nu when nu is an integer; otherwise the largest multiple of
    2^-bits not exceeding n^-nu (exact, deterministic)."""
    p, q = nu.numerator, nu.denominator
    if q == 1:
        return Fraction(1, n**p)
    scaled = (gmpy2.mpz(1) << (bits * q)) // gmpy2.mpz(n) ** p
    root, _ = gmpy2.iroot(scaled, q)
    return Fraction(int(root), 1 << bits)


def _bit_window(xbytes: bytes, pad: int, offset: int, width: int) -> int:
    """Fractional bits offset+1 .. offset+width as an integer."""
    start = pad + offset
    end = start + width
    b0, b1 = start // 8, (end + 7) // 8
    chunk = int.from_bytes(xbytes[b0:b1], "big")
    return (chunk >> (b1 * 8 - end)) & ((1 << width) - 1)


def _merge_ranges(ranges: list[tuple[int, int]]) -> list[tuple[int, int]]:
    ranges.sort()
    merged: list[tuple[int, int]] = []
    for lo, hi in ranges:
        if merged and lo <= merged[-1][1] + 1:
            if hi > merged[-1][1]:
                merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged


def _admissible_counter(digit_set: DigitSet, depth: int):
    """Returns rank(x) = number of admissible cell indices in [0, x)."""
    base = digit_set.base
    allowed = [False] * base
    for d in digit_set.digits:
        allowed[d] = True
    less_than = [0] * (base + 1)
    for d in range(base):
        less_than[d + 1] = less_than[d] + (1 if allowed[d] else 0)
    k = len(digit_set.digits)
    kpow = [k**m for m in range(depth + 1)]
    bpow = [base**m for m in range(depth + 1)]

    def rank(x: int) -> int:
        if x <= 0:
            return 0
        if x >= bpow[depth]:
            return kpow[depth]
        res = 0
        for pos in range(depth):
            d = (x // bpow[depth - pos - 1]) % base
            res += less_than[d] * kpow[depth - pos - 1]
            if not allowed[d]:
                return res
        return res

    return rank


def box_hits(
    cfg: LimsupConfig,
    digit_set: DigitSet,
    depth: int,
    *,
    terms: Optional[Sequence] = None,
) -> int:
    """Exact count of admissible depth-``depth`` cells meeting the arc union.

    Cells are half-open base-b intervals (b = digit_set.base) restricted to
    indices whose digits are all admissible; the arcs are closed circles
    arcs [{q_n x} - r_n, {q_n x} + r_n] with r_n = n^-nu, for tail indices
    n.  For power-of-two sequences the center is read as a bit window of x
    and carried as a one-sided enclosure of width 2^-(cell bits + 48);
    otherwise centers are exact rationals.  Raises PrecisionError when x
    carries too few fractional bits for the deepest window or when its
    uncertainty is not far below the smallest radius.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    n0, n1 = cfg.tail
    if n1 == n0:
        return 0
    if cfg.x is None:
        raise ValueError("config has no sample point x; set one or use the "
                         "estimator, which draws x per seed")
    variant = _variant_of(cfg.seq)
    base = digit_set.base
    cells = base**depth
    if depth * math.log2(base) > 8000:
        raise ValueError("depth exceeds the counting budget")
    tbits = cells.bit_length() + 48
    v, K, err = cfg.x.value, cfg.x.precision, cfg.x.err

    admissible_total = len(digit_set.digits) ** depth
    ranges: list[tuple[int, int]] = []
    exponent = _pow2_exponent(variant)

    if exponent is not None:
        top = exponent + n1 - 1
        if K < top + tbits:
            raise PrecisionError(
                f"x has {K} fractional bits; depth {depth} with tail end "
                f"{n1} needs {top + tbits}"
            )
        xbytes = v.to_bytes((K + 7) // 8, "big")
        pad = len(xbytes) * 8 - K
        enclosure = Fraction(1, 1 << tbits)
        for n in range(n0 + 1, n1 + 1):
            e = exponent + n - 1
            r = _radius(n, cfg.nu, tbits)
            if err:
                slack = Fraction(err, 1 << (K - e))
                if 16 * slack > r:
                    raise PrecisionError(
                        f"x uncertainty at index {n} exceeds a sixteenth "
                        f"of the arc radius"
                    )
                r = r + slack
            c = Fraction(_bit_window(xbytes, pad, e, tbits), 1 << tbits)
            lo, hi = c - r, c + r + enclosure
            if hi - lo >= 1:
                return admissible_total
            _arc_to_ranges(lo, hi, cells, ranges)
    else:
        if terms is None:
            if isinstance(variant, GeometricReal):
                est_bits = n1 * (
                    math.log2(float(variant.r.numerator))
                    - math.log2(float(variant.r.denominator))
                ) + abs(math.log2(float(variant.q0)))
                if est_bits > 1 << 20:
                    raise ValueError(
                        "sequence terms too large to materialize; use "
                        "power-of-two terms or a shorter tail"
                    )
            terms = generate(variant, n1)
        if len(terms) < n1:
            raise ValueError(f"need {n1} sequence terms, got {len(terms)}")
        qmax = terms[n1 - 1]
        qbits = (
            qmax.numerator.bit_length()
            if isinstance(qmax, Fraction)
            else int(qmax).bit_length()
        )
        if K < qbits + tbits:
            raise PrecisionError(
                f"x has {K} fractional bits; depth {depth} with terms of "
                f"{qbits} bits needs {qbits + tbits}"
            )
        xfrac = Fraction(v, 1 << K)
        for n in range(n0 + 1, n1 + 1):
            q = terms[n - 1]
            r = _radius(n, cfg.nu, tbits)
            if err:
                slack = q * Fraction(err, 1 << K)
                if 16 * slack > r:
                    raise PrecisionError(
                        f"x uncertainty at index {n} exceeds a sixteenth "
                        f"of the arc radius"
                    )
                r = r + slack
            val = q * xfrac
            c = val - math.floor(val)
            lo, hi = c - r, c + r
            if hi - lo >= 1:
                return admissible_total
            _arc_to_ranges(lo, hi, cells, ranges)

    if not ranges:
        return 0
    rank = _admissible_counter(digit_set, depth)
    return sum(rank(hi + 1) - rank(lo) for lo, hi in _merge_ranges(ranges))


def _arc_to_ranges(
    lo: Fraction, hi: Fraction, cells: int, out: list[tuple[int, int]]
) -> None:
    """Cell-index ranges met by the closed arc [lo, hi] on the circle.

    A half-open cell [k/cells, (k+1)/cells) meets the arc exactly when
    k is in [floor(lo*cells), floor(hi*cells)], taken modulo wraparound.
    """
    shift = math.floor(lo)
    lo -= shift
    hi -= shift
    kmin = (lo.numerator * cells) // lo.denominator
    kmax = (hi.numerator * cells) // hi.denominator
    if kmax >= cells:
        out.append((kmin, cells - 1))
        out.append((0, kmax - cells))
    else:
        out.append((kmin, kmax))


# ---------------------------------------------------------------------------
# Dimension estimation.
# ---------------------------------------------------------------------------


def resolvability_band(depth: int, nu: Fraction, base: int) -> tuple[int, int]:
    """Index range whose arc radii n^-nu lie within a factor 8 of the
    depth-``depth`` cell width: n in [(base^depth/8)^(1/nu),
    (8*base^depth)^(1/nu)], bounds exact."""
    nu = Fraction(nu)
    p, q = nu.numerator, nu.denominator
    big = gmpy2.mpz(base) ** depth
    n_hi = int(gmpy2.iroot((8 * big) ** q, p)[0])
    target = big**q
    scale = gmpy2.mpz(8) ** q
    t = int(gmpy2.iroot(target // scale, p)[0])
    while scale * gmpy2.mpz(t) ** p < target:
        t += 1
    return max(t, 1), n_hi


def default_scales(
    nu: Fraction, tail: tuple[int, int], base: int = 2
) -> tuple[int, int]:
    """Deepest usable scale range for a tail: the last depth keeps the
    smallest arcs at least 4 cells wide (4*base^j1 <= N1^nu) and the first
    keeps the resolvability band past the tail start (base^j0 > 8*N0^nu)."""
    nu = Fraction(nu)
    p, q = nu.numerator, nu.denominator
    n0, n1 = tail
    j1 = 1
    while (4 * gmpy2.mpz(base) ** (j1 + 1)) ** q <= gmpy2.mpz(n1) ** p:
        j1 += 1
    j0 = 1
    while (gmpy2.mpz(base) ** j0) ** q <= gmpy2.mpz(8) ** q * gmpy2.mpz(n0) ** p:
        j0 += 1
    if j1 < j0 + 2:
        raise ValueError(
            f"tail {tail} leaves fewer than 3 usable scales at nu={nu}; "
            f"widen the tail"
        )
    return j0, j1


@dataclass(frozen=True)
class DimensionEstimate:
    """Box-count regression across scales and sample points.

    ``slope`` is the mean of per-seed least-squares slopes of log count
    against depth * log(grid_base); ``intercept`` and ``residual`` (RMS)
    come from the pooled fit over every positive count.  ``counts`` holds
    the raw (seed, depth, count) table.  ``verdict`` is "empty" when no
    seed produced two positive scales to regress on.
    """

    slope: float
    intercept: float
    residual: float
    scale_range: tuple[int, int]
    grid_base: int
    counts: tuple[tuple[int, int, int], ...]
    per_seed_slopes: tuple[float, ...]
    slope_spread: float
    verdict: str


def estimate_dimension(
    cfg: LimsupConfig,
    digit_set: DigitSet,
    *,
    seeds: int = 8,
    master_seed: int = 0,
) -> DimensionEstimate:
    """Estimate the box dimension of the limsup proxy inside the fractal.

    For each scale j only the tail indices in the resolvability band
    (arc radius within a factor 8 of the cell width) are counted: arcs far
    wider than cells saturate toward slope 1 and far narrower ones count
    single cells, so the per-scale band is what exposes the asymptotic
    slope 1/nu + s - 1.  Each seed draws a fresh x with enough fractional
    bits for the deepest window; the per-seed slopes are averaged and their
    spread reported.
    """
    if seeds < 5:
        raise ValueError("need at least 5 seeds")
    j0, j1 = cfg.scales
    if j1 - j0 + 1 < 3:
        raise ValueError("need at least 3 scales")
    n0, n1 = cfg.tail
    base = digit_set.base

    windows: dict[int, tuple[int, int]] = {}
    for j in range(j0, j1 + 1):
        lo, hi = resolvability_band(j, cfg.nu, base)
        wlo, whi = max(n0, lo - 1), min(n1, hi)
        if whi <= wlo:
            raise ValueError(
                f"depth {j}: no tail indices have arcs near the cell size; "
                f"use default_scales or widen the tail"
            )
        windows[j] = (wlo, whi)

    variant = _variant_of(cfg.seq)
    exponent = _pow2_exponent(variant)
    if exponent is None:
        terms = generate(variant, n1)
        qmax = terms[-1]
        qbits = (
            qmax.numerator.bit_length()
            if isinstance(qmax, Fraction)
            else int(qmax).bit_length()
        )
    else:
        terms = None
        qbits = exponent + n1
    tbits = (base**j1).bit_length() + 48
    need = qbits + tbits + 16
    if need > 1 << 22:
        raise ValueError("tail and depth exceed the precision budget")

    rows: list[tuple[int, int, int]] = []
    for trial in range(seeds):
        rng = trial_rng(master_seed, trial)
        nbytes = (need + 7) // 8
        x = UnitPoint(
            value=int.from_bytes(rng.bytes(nbytes), "big"),
            precision=nbytes * 8,
        )
        seeded = replace(cfg, x=x)
        for j in range(j0, j1 + 1):
            count = box_hits(
                replace(seeded, tail=windows[j]), digit_set, j, terms=terms
            )
            rows.append((trial, j, count))

    lnb = math.log(base)
    per_seed: list[float] = []
    for trial in range(seeds):
        pts = [
            (j * lnb, math.log(c)) for t, j, c in rows if t == trial and c > 0
        ]
        if len(pts) >= 2:
            xs, ys = zip(*pts)
            per_seed.append(float(np.polyfit(xs, ys, 1)[0]))
    if not per_seed:
        return DimensionEstimate(
            slope=float("nan"),
            intercept=float("nan"),
            residual=float("nan"),
            scale_range=(j0, j1),
            grid_base=base,
            counts=tuple(rows),
            per_seed_slopes=(),
            slope_spread=float("nan"),
            verdict="empty",
        )
    pooled = [(j * lnb, math.log(c)) for _, j, c in rows if c > 0]
    xs = np.array([p[0] for p in pooled])
    ys = np.array([p[1] for p in pooled])
    pslope, intercept = np.polyfit(xs, ys, 1)
    residual = float(np.sqrt(np.mean((ys - (pslope * xs + intercept)) ** 2)))
    return DimensionEstimate(
        slope=fmean(per_seed),
        intercept=float(intercept),
        residual=residual,
        scale_range=(j0, j1),
        grid_base=base,
        counts=tuple(rows),
        per_seed_slopes=tuple(per_seed),
        slope_spread=pstdev(per_seed) if len(per_seed) > 1 else 0.0,
        verdict="ok",
    )
