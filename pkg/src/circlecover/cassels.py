"""Two-factor product searches on the circle and derived covering models.

The objects here probe, at desk scale, statements of the shape
"n * log(n) * ||n*alpha - gamma|| * ||n*beta - delta|| <= C for infinitely
many n": record tables of the normalized product (:func:`product_minima`),
best inhomogeneous approximations on doubling blocks
(:func:`best_inhom_approx`, :func:`chained_best_approx`), a uniform sweep
of the delta parameter over a grid (:func:`uniform_delta_check`), random
coverings driven by lengths psi(n)/||n*alpha - gamma||
(:func:`random_model_trial`), and a regime classifier that buckets indices
by that ratio and bounds the window sums of psi (:func:`psi_regime`).

Conventions: log means the natural logarithm; products are scanned from
n = 2 because n * log(n) vanishes identically at n = 1 and would make
every report trivially zero there.  Positions are evaluated in fixed
point — exact dyadic arithmetic with tracked one-ulp enclosures for
descriptor inputs — while thresholds, ratios, and window sums are floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Union

import numpy as np

from . import _kernels
from ._accel import HAVE_NUMBA
from ._psirules import PsiFamily, WindowBounds, analytic_ladder, callable_window_sum
from .arith import PrecisionError, Real, UnitPoint, enclosure
from .coverset import LengthSequence, TrialResult, dvoretzky_trial

__all__ = [
    "CasselsInstance",
    "ProductRecord",
    "ProductMinimaReport",
    "product_minima",
    "BestApprox",
    "best_inhom_approx",
    "ChainedApprox",
    "chained_best_approx",
    "UniformDeltaReport",
    "uniform_delta_check",
    "derived_lengths",
    "random_model_trial",
    "RegimeClass",
    "RegimeDiagnostics",
    "psi_regime",
    "PsiFamily",
]

_M64 = 1 << 64


# ---------------------------------------------------------------------------
# instance descriptor
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CasselsInstance:
    """A two-rotation product problem: pair (alpha, gamma) x (beta, delta).

    ``alpha`` and ``beta`` are the rotation numbers, ``gamma`` and ``delta``
    the circle targets, and ``N`` the scan horizon.  ``N >= 2`` keeps the
    scanned range nonempty (log n is zero at n = 1).
    """

    alpha: Real
    beta: Real
    gamma: Real
    delta: Real
    N: int

    def __post_init__(self) -> None:
        if not isinstance(self.N, int) or self.N < 2:
            raise ValueError("N must be an integer >= 2")


# ---------------------------------------------------------------------------
# record tables of the normalized product
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProductRecord:
    """One record row: n, both circle distances, and the normalized product."""

    n: int
    dist_alpha: float
    dist_beta: float
    normalized: float  # n * log(n) * dist_alpha * dist_beta


@dataclass(frozen=True)
class ProductMinimaReport:
    """All record-setting n (strictly decreasing normalized product)."""

    records: tuple
    minimum: float
    N: int
    bits: int


def _ln_interval(n: int) -> tuple[Fraction, Fraction]:
    """A two-ulp bracket of log(n), absorbing any last-ulp libm slack."""
    f = math.log(n)
    lo = math.nextafter(math.nextafter(f, 0.0), 0.0)
    hi = math.nextafter(math.nextafter(f, math.inf), math.inf)
    return Fraction(lo), Fraction(hi)


def product_minima(inst: CasselsInstance, bits: int = 192) -> ProductMinimaReport:
    """Scan n = 2..N for records of n * log(n) * ||n a - g|| * ||n b - d||.

    A row enters the table only when its normalized product is *certainly*
    strictly below the current record: distances carry exact enclosure
    intervals and log(n) a two-ulp bracket, and an overlap between the
    candidate's interval and the record's raises :class:`PrecisionError`
    (raise ``bits`` to resolve).  The reported floats are rounded from the
    interval endpoints.
    """
    a_pt = UnitPoint.from_real(inst.alpha, bits)
    b_pt = UnitPoint.from_real(inst.beta, bits)
    g_pt = UnitPoint.from_real(inst.gamma, bits)
    d_pt = UnitPoint.from_real(inst.delta, bits)
    scale = Fraction(1, 1 << (2 * bits))
    records = []
    cur_lo: Optional[Fraction] = None
    cur_hi: Optional[Fraction] = None
    for n in range(2, inst.N + 1):
        d1_lo, d1_hi = a_pt.times_int(n).dist_interval(g_pt)
        d2_lo, d2_hi = b_pt.times_int(n).dist_interval(d_pt)
        ln_lo, ln_hi = _ln_interval(n)
        lo = n * d1_lo * d2_lo * scale * ln_lo
        hi = n * d1_hi * d2_hi * scale * ln_hi
        if cur_lo is not None:
            if lo >= cur_hi:
                continue  # certainly not an improvement
            if not hi < cur_lo:
                raise PrecisionError(
                    f"record comparison at n={n} is ambiguous at {bits} bits"
                )
        d1f = _kernels._ulps_to_float(d1_lo, bits)
        d2f = _kernels._ulps_to_float(d2_lo, bits)
        records.append(
            ProductRecord(
                n=n,
                dist_alpha=d1f,
                dist_beta=d2f,
                normalized=n * math.log(n) * d1f * d2f,
            )
        )
        cur_lo, cur_hi = lo, hi
    return ProductMinimaReport(
        records=tuple(records),
        minimum=records[-1].normalized,
        N=inst.N,
        bits=bits,
    )


# ---------------------------------------------------------------------------
# best inhomogeneous approximations on doubling blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BestApprox:
    """argmin of ||n alpha - gamma|| over a doubling block (A, 2A]."""

    n: int
    distance: Fraction  # lower enclosure endpoint, exact to one ulp
    block: tuple


@dataclass(frozen=True)
class ChainedApprox:
    """Per-block minimizers over (2^k, 2^{k+1}], k = 0..depth-1."""

    picks: tuple
    sup_scaled: float  # max over picks of n * distance

    @property
    def ratios(self) -> tuple:
        ns = [p.n for p in self.picks]
        return tuple(b / a for a, b in zip(ns, ns[1:]))


def best_inhom_approx(
    alpha: Real, gamma: Real, block: tuple, bits: int = 192
) -> BestApprox:
    """Minimize ||n alpha - gamma|| over the doubling block (A, 2A].

    ``block`` must be a pair (A, 2A) with A >= 1; the scan covers
    n = A+1 .. 2A and ties break toward the smallest n.  The distance is
    reported as the lower enclosure endpoint (exact for exact inputs,
    within one ulp of 2^-bits otherwise).
    """
    lo, hi = block
    if lo < 1 or hi != 2 * lo:
        raise ValueError("block must be (A, 2A) with A >= 1")
    a_pt = UnitPoint.from_real(alpha, bits)
    g_pt = UnitPoint.from_real(gamma, bits)
    best_n = 0
    best_lo = None
    for n in range(lo + 1, hi + 1):
        d_lo, _d_hi = a_pt.times_int(n).dist_interval(g_pt)
        if best_lo is None or d_lo < best_lo:
            best_lo = d_lo
            best_n = n
    return BestApprox(
        n=best_n,
        distance=Fraction(best_lo, 1 << bits),
        block=(lo, hi),
    )


def chained_best_approx(
    alpha: Real, gamma: Real, depth: int, bits: int = 192
) -> ChainedApprox:
    """Chain :func:`best_inhom_approx` over (2^k, 2^{k+1}], k < depth.

    Consecutive picks have ratio in (1, 4) by construction; ``sup_scaled``
    reports max_k n_k * ||n_k alpha - gamma|| as the boundedness statistic.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    picks = []
    sup_scaled = 0.0
    for k in range(depth):
        pick = best_inhom_approx(alpha, gamma, (2**k, 2 ** (k + 1)), bits)
        picks.append(pick)
        sup_scaled = max(sup_scaled, pick.n * float(pick.distance))
    return ChainedApprox(picks=tuple(picks), sup_scaled=sup_scaled)


# ---------------------------------------------------------------------------
# uniform delta sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UniformDeltaReport:
    """Per-delta least passing n over the grid delta = i/m, and the worst."""

    N: int
    C: float
    m: int
    least_n: np.ndarray  # int64; -1 marks FAIL (no n <= N passes)
    fail_count: int
    worst_index: int
    worst_least_n: Optional[int]  # None when the worst delta FAILs

    @property
    def all_pass(self) -> bool:
        return self.fail_count == 0

    @property
    def worst_delta(self) -> Fraction:
        return Fraction(self.worst_index, self.m)


def _frac64(x: Real) -> int:
    """Fractional part of x in 64-bit fixed point (lower enclosure end)."""
    lo, _hi = enclosure(x, 64)
    return lo % _M64


def uniform_delta_check(
    alpha: Real,
    gamma: Real,
    beta: Real,
    N: int,
    C: float,
    m: int,
    backend: Optional[str] = None,
) -> UniformDeltaReport:
    """For each delta = i/m find the least n <= N passing the product bound.

    Passing at n means n * log(n) * ||n alpha - gamma|| * ||n beta - delta||
    <= C.  The scan starts at n = 2 (at n = 1 the product is identically
    zero) and records, per grid point, the first passing n or FAIL.  The
    result is bit-identical across the "numba" and "python" backends.
    """
    if not isinstance(m, int) or not 1 <= m <= 1 << 20:
        raise ValueError("grid size m must be an integer in [1, 2^20]")
    if N < 2:
        raise ValueError("N must be >= 2")
    if C < 0:
        raise ValueError("C must be nonnegative")
    if backend not in (None, "numba", "python"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is unavailable")
    a64 = _frac64(alpha)
    g64 = _frac64(gamma)
    b64 = _frac64(beta)
    least = np.full(m, -1, dtype=np.int64)
    nxt = np.arange(m + 1, dtype=np.int64)
    if HAVE_NUMBA and backend != "python":
        _kernels._uniform_delta_nb(
            np.uint64(a64), np.uint64(g64), np.uint64(b64),
            np.int64(N), np.float64(C), np.int64(m), least, nxt,
        )
    else:
        _kernels._uniform_delta_py(a64, g64, b64, N, float(C), m, least, nxt)
    fails = np.flatnonzero(least < 0)
    if fails.size:
        worst_index = int(fails[0])
        worst_least_n: Optional[int] = None
    else:
        worst_index = int(np.argmax(least))
        worst_least_n = int(least[worst_index])
    least.flags.writeable = False
    return UniformDeltaReport(
        N=N,
        C=float(C),
        m=m,
        least_n=least,
        fail_count=int(fails.size),
        worst_index=worst_index,
        worst_least_n=worst_least_n,
    )


# ---------------------------------------------------------------------------
# randomized covering model with derived lengths
# ---------------------------------------------------------------------------


def _eval_psi_array(psi: Callable, n_max: int, start: int = 1) -> np.ndarray:
    """psi(start..n_max) as a float array indexed by n; vectorized when psi allows.

    Entries below ``start`` stay zero so callables that are singular at
    small n (e.g. 1/(n log^2 n) at n=1) can still drive scans that only
    read from ``start`` upward.
    """
    out = np.zeros(n_max + 1, dtype=np.float64)
    chunk = 1 << 16
    for lo in range(start, n_max + 1, chunk):
        hi = min(lo + chunk - 1, n_max)
        ns = np.arange(lo, hi + 1, dtype=np.float64)
        try:
            vals = np.asarray(psi(ns), dtype=np.float64)
            if vals.shape != ns.shape:
                raise ValueError
        except (TypeError, ValueError):
            vals = np.array([float(psi(int(n))) for n in ns])
        out[lo : hi + 1] = vals
    return out


def derived_lengths(
    alpha: Real, gamma: Real, psi: Callable, N: int, bits: int = 128
) -> LengthSequence:
    """Arc lengths l_n = psi(n) / ||n alpha - gamma|| for n = 1..N.

    An exact zero distance makes the arc the full circle (the stored value
    2.0 clips to one full turn downstream).  Distances use ``bits``-bit
    fixed point; lengths are floats.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    a = _frac_bits(alpha, bits)
    g = _frac_bits(gamma, bits)
    mask = (1 << bits) - 1
    ulp = 2.0 ** float(-bits)
    psi_vals = _eval_psi_array(psi, N)
    vals = np.empty(N, dtype=np.float64)
    u = 0
    for n in range(1, N + 1):
        u = (u + a) & mask
        v = (u - g) & mask
        d = min(v, (1 << bits) - v) if v else 0
        vals[n - 1] = 2.0 if d == 0 else psi_vals[n] / (float(d) * ulp)
    vals.flags.writeable = False

    def rule(n: int):
        return float(vals[n - 1]) if 1 <= n <= N else 0.0

    return LengthSequence(rule=rule, family="derived", params=(N, bits))


def _frac_bits(x: Real, bits: int) -> int:
    lo, _hi = enclosure(x, bits)
    return lo % (1 << bits)


def random_model_trial(
    alpha: Real,
    gamma: Real,
    psi: Callable,
    N: int,
    rng: np.random.Generator,
    precision: int = 64,
    bits: int = 128,
    backend: Optional[str] = None,
) -> TrialResult:
    """One covering trial with lengths psi(n) / ||n alpha - gamma||.

    Delegates to :func:`circlecover.coverset.dvoretzky_trial` on the
    derived sequence, so a fixed rng state reproduces that call bit for
    bit.
    """
    lengths = derived_lengths(alpha, gamma, psi, N, bits)
    return dvoretzky_trial(lengths, N, rng, precision=precision, backend=backend)


# ---------------------------------------------------------------------------
# regime diagnostics
# ---------------------------------------------------------------------------


class RegimeClass(Enum):
    COVERING_LIKE = "COVERING-LIKE"
    NONCOVERING_LIKE = "NONCOVERING-LIKE"
    INDETERMINATE = "INDETERMINATE"


@dataclass(frozen=True)
class RegimeDiagnostics:
    """Bucket counts and window-sum classification for one (alpha, gamma, psi).

    ``S_ell_sizes[ell-1]`` counts indices n with b^{2 ell} < n <=
    min(b^{b^ell}, horizon) whose ratio psi(n) / ||n alpha - gamma|| lies
    in [b^-ell, b^{-(ell-1)}); the buckets are pairwise disjoint by
    construction.  ``T1`` sums the sizes and ``T2`` sums size/b^{ell-1}
    (exact; a covering-normalized variant dividing by b^ell instead is
    recoverable from the sizes).  ``windows`` holds bounds on the sums
    W(N) = sum of psi over (N, 2^N] at the tested window starts, and
    ``classification`` applies the thresholds C (exceed: covering-like)
    and eps (stay below, together with psi <= 1/(n log n) eventually:
    noncovering-like).
    """

    b: int
    L: int
    S_ell_sizes: tuple
    T1: int
    T2: Fraction
    classification: RegimeClass
    C: float
    eps: float
    horizon: int
    capped: bool
    snapped: bool
    analytic: bool
    windows: tuple
    below_threshold: bool
    below_from: Optional[int]
    first_exceeding: Optional[float]  # log2 of first window start with lower > C
    first_below: Optional[float]  # log2 of first window start with upper < eps

    def recomputed_t1(self) -> int:
        return sum(self.S_ell_sizes)

    def recomputed_t2(self) -> Fraction:
        return sum(
            (Fraction(size, self.b ** (ell - 1))
             for ell, size in enumerate(self.S_ell_sizes, start=1)),
            Fraction(0),
        )


def _spot_check_monotone(psi: Callable, horizon: int) -> None:
    grid = [n for n in (2, 3, 4, 6, 8, 12, 16, 32, 64, 256, 1024, 4096) if n <= horizon]
    vals = [float(psi(n)) for n in grid]
    for i in range(len(vals) - 1):
        if vals[i] < vals[i + 1]:
            raise ValueError(
                f"psi must be monotone nonincreasing but psi({grid[i]}) < psi({grid[i+1]})"
            )


def _numeric_below_harmonic_log(psi: Callable, horizon: int) -> tuple[bool, Optional[int]]:
    """Scan psi(n) * n * log(n) <= 1 over [2, horizon]; credible-tail verdict.

    Returns (holds, n0) with n0 one past the last violation.  The flag is
    set only when the bound holds on the top fifteen sixteenths of the
    range, so a tail too short to be believable stays unclassified.
    """
    last_bad = None
    chunk = 1 << 16
    for lo in range(2, horizon + 1, chunk):
        ns = np.arange(lo, min(lo + chunk - 1, horizon) + 1, dtype=np.float64)
        try:
            vals = np.asarray(psi(ns), dtype=np.float64)
            if vals.shape != ns.shape:
                raise ValueError
        except (TypeError, ValueError):
            vals = np.array([float(psi(int(n))) for n in ns])
        ratio = vals * ns * np.log(ns)
        bad = np.flatnonzero(ratio > 1.0 + 1e-9)
        if bad.size:
            last_bad = int(ns[bad[-1]])
    if last_bad is None:
        return True, 2
    if last_bad <= horizon // 16:
        return True, last_bad + 1
    return False, None


def _snapped_blocks(psi: Callable, b: int, n_max: int) -> np.ndarray:
    """psi snapped to b-adic blocks with power-of-two values, for n <= n_max.

    On each block b^j <= n < b^{j+1} the snapped value is the largest
    2^-t <= psi(b^j) (zero when psi(b^j) <= 0).  The two lowest blocks
    stay zero: bucket scans only read n > b^2, and skipping them keeps
    callables that are singular at small n usable.
    """
    out = np.zeros(n_max + 1, dtype=np.float64)
    p = b * b
    while p <= n_max:
        v = float(psi(p))
        if v > 0:
            snapped = 2.0 ** -math.ceil(-math.log2(v))
            while snapped > v:
                snapped /= 2.0
            while snapped * 2.0 <= v:
                snapped *= 2.0
        else:
            snapped = 0.0
        out[p : min(p * b, n_max + 1)] = snapped
        p *= b
    return out


def psi_regime(
    alpha: Real,
    gamma: Real,
    psi: Union[PsiFamily, Callable],
    b: int,
    L: int,
    C: float = 8.0,
    eps: float = 0.125,
    horizon: int = 10**6,
    snap_badic: bool = False,
    bits: int = 128,
) -> RegimeDiagnostics:
    """Bucket the ratio psi(n)/||n alpha - gamma|| and classify psi's regime.

    Bucket ell collects n with b^{2 ell} < n <= b^{b^ell} (capped at
    ``horizon``, with the cap reported) whose ratio falls in
    [b^-ell, b^{-(ell-1)}); enumeration is exhaustive over the capped
    ranges.  Classification looks at the window sums W(N) over (N, 2^N]:
    COVERING-LIKE when the lower bounds exceed ``C`` at the largest tested
    window, NONCOVERING-LIKE when psi(n) <= 1/(n log n) from some point on
    and the upper bounds fall below ``eps``, INDETERMINATE otherwise —
    including when no window completes within the horizon.  A
    :class:`~circlecover._psirules.PsiFamily` is classified in closed form
    on a ladder of window starts up to log2 N ~ 1e280; a plain callable by
    direct summation of the windows with 2^N <= horizon.
    """
    if not isinstance(b, int) or b < 2:
        raise ValueError("block base b must be an integer >= 2")
    if not isinstance(L, int) or L < 1:
        raise ValueError("depth L must be an integer >= 1")
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    if C <= 0 or eps <= 0:
        raise ValueError("C and eps must be positive")
    analytic = isinstance(psi, PsiFamily)
    if not analytic:
        _spot_check_monotone(psi, horizon)

    # bucket ranges, capped at the horizon
    range_lo = []
    range_hi = []
    capped = False
    for ell in range(1, L + 1):
        lo = b ** (2 * ell)
        exp = b**ell
        if exp * math.log2(b) > 63:
            hi = horizon
            if lo < horizon:
                capped = True
        else:
            full_hi = b**exp
            hi = min(full_hi, horizon)
            if lo < horizon < full_hi:
                capped = True
        range_lo.append(lo)
        range_hi.append(hi)
    n_max = max((hi for lo, hi in zip(range_lo, range_hi) if hi > lo), default=1)

    if snap_badic:
        psi_vals = _snapped_blocks(psi, b, n_max)
    else:
        psi_vals = _eval_psi_array(psi, n_max, start=2)

    a_fix = _frac_bits(alpha, bits)
    g_fix = _frac_bits(gamma, bits)
    mask = (1 << bits) - 1
    modulus = 1 << bits
    ulp = 2.0 ** float(-bits)
    ln_b = math.log(b)
    pw = [1.0] * (L + 2)  # float powers of b; rounding-safe via adjust loops
    for e in range(1, L + 2):
        pw[e] = pw[e - 1] * b
    sizes = [0] * (L + 1)  # index ell, 1-based
    t1 = 0
    t2 = Fraction(0)
    u = a_fix  # {1 * alpha}
    for n in range(2, n_max + 1):
        u = (u + a_fix) & mask
        v = (u - g_fix) & mask
        d = min(v, modulus - v) if v else 0
        if d == 0:
            continue
        p = psi_vals[n]
        if p <= 0:
            continue
        ratio = p / (float(d) * ulp)
        ell = math.ceil(-math.log(ratio) / ln_b - 1e-12)
        if ell < 0 or ell > L + 1:
            continue
        while ell <= L + 1 and ratio * pw[ell] < 1.0:
            ell += 1
        while ell > 0 and ratio * pw[ell - 1] >= 1.0:
            ell -= 1
        if not 1 <= ell <= L:
            continue
        if range_lo[ell - 1] < n <= range_hi[ell - 1]:
            sizes[ell] += 1
            t1 += 1
            t2 += Fraction(1, b ** (ell - 1))

    # window sums and classification
    windows: list[WindowBounds] = []
    if analytic:
        below, below_from = psi.eventually_below_harmonic_log()
        for lam in analytic_ladder():
            try:
                windows.append(psi.window_sum_bounds(lam))
            except ValueError:
                continue
    else:
        below, below_from = _numeric_below_harmonic_log(psi, horizon)
        start = 2
        while start < 64 and 2**start <= horizon:
            wb = callable_window_sum(psi, start, horizon)
            if wb is not None:
                windows.append(wb)
            start += 1

    first_exceeding = next((w.log2_start for w in windows if w.lower > C), None)
    first_below = next((w.log2_start for w in windows if w.upper < eps), None)
    if windows and windows[-1].lower > C:
        classification = RegimeClass.COVERING_LIKE
    elif windows and below and windows[-1].upper < eps:
        classification = RegimeClass.NONCOVERING_LIKE
    else:
        classification = RegimeClass.INDETERMINATE

    return RegimeDiagnostics(
        b=b,
        L=L,
        S_ell_sizes=tuple(sizes[1:]),
        T1=t1,
        T2=t2,
        classification=classification,
        C=float(C),
        eps=float(eps),
        horizon=horizon,
        capped=capped,
        snapped=snap_badic,
        analytic=analytic,
        windows=tuple(windows),
        below_threshold=below,
        below_from=below_from,
        first_exceeding=first_exceeding,
        first_below=first_below,
    )
