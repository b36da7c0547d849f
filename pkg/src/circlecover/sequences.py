"""Sequence generation and the arithmetic side of the covering machinery.

Provides the sequence families driving the covering experiments; exact
lacunary thinning to a target ratio; the block-append/skip level-separation
construction together with its exact cross-level growth verification
(q_N / q_M >= N^100 across level boundaries); gcd-sum hypothesis evaluation
with a trend verdict over an N-grid; exact local pair-counting with weights
c(h) = min(1, 2^(j+1)/h); divisor and polynomial-root counting; and
Piatetski-Shapiro prime statistics (reported descriptively, never asserted).

All combinatorial counts and comparisons are exact integer/rational
arithmetic; floating point enters only in logarithmic report values, where
every sum has a fixed reduction order so results are deterministic.
Logarithms are binary unless a docstring says otherwise.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import gmpy2
import numpy as np
import sympy

from .arith import _log2_int
from .tree import CoveringSchedule

__all__ = [
    "GeometricReal",
    "IntegerLacunary",
    "Polynomial",
    "PrimePower",
    "PiatetskiShapiro",
    "Explicit",
    "SequenceSpec",
    "generate",
    "load_explicit",
    "ThinningResult",
    "thin_to_ratio",
    "LevelSkip",
    "SeparationResult",
    "SeparationError",
    "separate_levels",
    "GapProfile",
    "gap_profile",
    "TrendVerdict",
    "GcdSumHypothesis",
    "GcdSumResult",
    "gcd_sum",
    "GcdSumTrend",
    "gcd_sum_verdict",
    "divisor_count",
    "root_count",
    "LocalCountInstance",
    "LocalCountResult",
    "local_count_sum",
    "PrimeStatistics",
    "piatetski_shapiro_prime_report",
]

Number = Union[int, Fraction]


# ---------------------------------------------------------------------------
# Polynomial helpers (exact integer arithmetic throughout).
# ---------------------------------------------------------------------------


def _poly_eval(coeffs: Sequence[int], x: int) -> int:
    """P(x) by Horner; ``coeffs`` ascend from the constant term."""
    out = 0
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _poly_eval_mod(coeffs: Sequence[int], x: int, e: int) -> int:
    out = 0
    for c in reversed(coeffs):
        out = (out * x + c) % e
    return out


def _poly_root_bound(coeffs: Sequence[int]) -> int:
    """Integer Cauchy bound: no real root of P at or beyond this value."""
    lead = coeffs[-1]
    rest = max((abs(c) for c in coeffs[:-1]), default=0)
    return 1 + -(-rest // lead)


def _poly_start(coeffs: tuple[int, ...]) -> int:
    """Smallest n >= 1 from which P is positive and strictly increasing.

    Uses the forward difference D(n) = P(n+1) - P(n): beyond the Cauchy
    root bounds of P and D both are positive, and a scan below the bound
    finds the last violation exactly.
    """
    d = len(coeffs) - 1
    diff = [0] * d
    for i in range(1, d + 1):
        for j in range(i):
            diff[j] += coeffs[i] * math.comb(i, j)
    limit = max(_poly_root_bound(coeffs), _poly_root_bound(diff))
    if limit > 10**6:
        return limit  # certified positive and increasing past the root bound
    start = 1
    for n in range(1, limit + 1):
        if _poly_eval(coeffs, n) <= 0 or _poly_eval(diff, n) <= 0:
            start = n + 1
    return start


def _first_primes(count: int) -> list[int]:
    if count < 1:
        return []
    if count < 6:
        hi = 15
    else:
        hi = int(count * (math.log(count) + math.log(math.log(count)))) + 10
    while True:
        primes = list(sympy.primerange(2, hi + 1))
        if len(primes) >= count:
            return primes[:count]
        hi *= 2


# ---------------------------------------------------------------------------
# Sequence variants.
# ---------------------------------------------------------------------------


def _as_exact(v: Fraction) -> Number:
    return int(v) if v.denominator == 1 else v


@dataclass(frozen=True)
class GeometricReal:
    """q_n = q0 * r^(n-1) with exact rational q0 > 0 and ratio r > 1."""

    q0: Fraction
    r: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "q0", Fraction(self.q0))
        object.__setattr__(self, "r", Fraction(self.r))
        if self.q0 <= 0:
            raise ValueError("q0 must be positive")
        if self.r <= 1:
            raise ValueError("growth ratio r must exceed 1")

    def terms(self, count: int) -> list[Number]:
        out: list[Number] = []
        v = self.q0
        for _ in range(count):
            out.append(_as_exact(v))
            v *= self.r
        return out


@dataclass(frozen=True)
class IntegerLacunary:
    """Custom integer rule n -> q_n (1-based); growth validated on use."""

    rule: Callable[[int], int]

    def terms(self, count: int) -> list[int]:
        out = []
        for n in range(1, count + 1):
            v = self.rule(n)
            if not isinstance(v, (int, np.integer)):
                raise ValueError(f"rule produced a non-integer at index {n}")
            out.append(int(v))
        return out


@dataclass(frozen=True)
class Polynomial:
    """q_n = P(start + n - 1) for integer P with positive leading coefficient.

    ``coeffs`` ascend from the constant term.  The start index is shifted to
    the smallest argument from which P is positive and strictly increasing.
    """

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        coeffs = tuple(int(c) for c in self.coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) < 2:
            raise ValueError("polynomial must have degree at least 1")
        if coeffs[-1] <= 0:
            raise ValueError("leading coefficient must be positive")
        object.__setattr__(self, "_start", _poly_start(coeffs))

    @property
    def start_index(self) -> int:
        return self._start  # type: ignore[attr-defined]

    def terms(self, count: int) -> list[int]:
        s = self.start_index
        return [_poly_eval(self.coeffs, s + i) for i in range(count)]


@dataclass(frozen=True)
class PrimePower:
    """q_n = p_n^d: the d-th powers of the primes in order."""

    d: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "d", int(self.d))
        if self.d < 1:
            raise ValueError("exponent d must be >= 1")

    def terms(self, count: int) -> list[int]:
        return [p**self.d for p in _first_primes(count)]


@dataclass(frozen=True)
class PiatetskiShapiro:
    """q_n = floor(n^c) for rational non-integer c > 1, computed exactly."""

    c: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "c", Fraction(self.c))
        if self.c <= 1:
            raise ValueError("exponent c must exceed 1")
        if self.c.denominator == 1:
            raise ValueError("integer exponent: use a polynomial sequence")

    def terms(self, count: int) -> list[int]:
        p, q = self.c.numerator, self.c.denominator
        out = []
        for n in range(1, count + 1):
            root, _ = gmpy2.iroot(gmpy2.mpz(n) ** p, q)
            out.append(int(root))
        return out


@dataclass(frozen=True)
class Explicit:
    """A literal list of terms; must be positive and strictly increasing."""

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", values)
        prev = 0
        for i, v in enumerate(values, start=1):
            if v <= prev:
                raise ValueError(
                    f"explicit sequence not strictly increasing and positive "
                    f"at index {i}"
                )
            prev = v

    def terms(self, count: int) -> list[int]:
        if count > len(self.values):
            raise ValueError(
                f"explicit sequence has {len(self.values)} terms, "
                f"{count} requested"
            )
        return list(self.values[:count])


Variant = Union[
    GeometricReal, IntegerLacunary, Polynomial, PrimePower, PiatetskiShapiro,
    Explicit,
]


@dataclass(frozen=True)
class SequenceSpec:
    """A sequence family plus its claimed lower bound on q_{n+1}/q_n."""

    variant: Variant
    claimed_ratio: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if self.claimed_ratio is not None:
            r = Fraction(self.claimed_ratio)
            if r <= 1:
                raise ValueError("claimed_ratio must exceed 1")
            object.__setattr__(self, "claimed_ratio", r)


def _check_min_ratio(terms: Sequence[Number], r: Fraction, what: str) -> None:
    """Exact check q_{i+1} >= r * q_i for every i; 1-based error index."""
    for i in range(1, len(terms)):
        if terms[i] < r * terms[i - 1]:
            raise ValueError(
                f"{what}: consecutive ratio below {r} at index {i}"
            )


def generate(spec: Union[SequenceSpec, Variant], count: int) -> list[Number]:
    """First ``count`` terms, exact; strict increase and positivity enforced.

    Integer families yield ints; the geometric family yields exact rationals
    (ints when integral).  A claimed ratio on the spec is verified on the
    generated prefix.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    variant = spec.variant if isinstance(spec, SequenceSpec) else spec
    terms = variant.terms(count)
    prev: Number = 0
    for i, t in enumerate(terms, start=1):
        if t <= prev:
            raise ValueError(
                f"sequence not strictly increasing and positive at index {i}"
            )
        prev = t
    if isinstance(spec, SequenceSpec) and spec.claimed_ratio is not None:
        _check_min_ratio(terms, spec.claimed_ratio, "claimed ratio")
    return terms


def load_explicit(path: Union[str, Path]) -> Explicit:
    """Explicit sequence from a newline-delimited decimal-integer file.

    Blank lines and lines starting with ``#`` are ignored.
    """
    values = []
    for line_no, line in enumerate(
        Path(path).read_text().splitlines(), start=1
    ):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            values.append(int(s, 10))
        except ValueError:
            raise ValueError(
                f"{path}: line {line_no} is not a decimal integer: {s!r}"
            ) from None
    return Explicit(tuple(values))


# ---------------------------------------------------------------------------
# Thinning and level separation.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThinningResult:
    """Strided subsequence a_N = q_{N*stride} with every ratio > r_target."""

    terms: tuple[Number, ...]
    stride: int


def _floor_log_ratio(r_target: Fraction, r: Fraction) -> int:
    """Largest integer s >= 0 with r^s <= r_target, exactly."""
    s = 0
    acc = Fraction(1)
    while acc * r <= r_target:
        acc *= r
        s += 1
    return s


def thin_to_ratio(
    terms: Sequence[Number], r_target: Fraction, ratio: Fraction
) -> ThinningResult:
    """Keep every ``stride``-th term so consecutive ratios exceed r_target.

    ``ratio`` is the guaranteed lower bound r > 1 on the input's consecutive
    ratios (validated exactly; a violation reports its index).  The stride
    is floor(log r_target / log r) + 1, evaluated exactly; when r already
    exceeds r_target the stride is 1 and the sequence is unchanged.
    """
    r_target = Fraction(r_target)
    r = Fraction(ratio)
    if r <= 1:
        raise ValueError("input ratio bound must exceed 1")
    if r_target <= 1:
        raise ValueError("target ratio must exceed 1")
    _check_min_ratio(terms, r, "ratio hypothesis")
    stride = _floor_log_ratio(r_target, r) + 1
    out = [terms[k * stride - 1] for k in range(1, len(terms) // stride + 1)]
    for i in range(1, len(out)):  # certain by construction; keep it exact
        if out[i] <= r_target * out[i - 1]:
            raise AssertionError("thinned ratio fell below the target")
    return ThinningResult(tuple(out), stride)


class SeparationError(ValueError):
    """Cross-level growth verification failed; ``violation`` is (M, N)."""

    def __init__(self, message: str, violation: tuple[int, int]) -> None:
        super().__init__(message)
        self.violation = violation


@dataclass(frozen=True)
class LevelSkip:
    """One construction step: input block [source_start, source_end]
    (1-based, inclusive) kept, then ``skipped`` input terms dropped."""

    level: int
    source_start: int
    source_end: int
    skipped: int


@dataclass(frozen=True)
class SeparationResult:
    terms: tuple[Number, ...]
    skip_log: tuple[LevelSkip, ...]
    levels: int


def _floor_hundred_log10(x: int) -> int:
    """Exact floor(100 * log10(x)) for integer x >= 1."""
    if x < 1:
        raise ValueError("positive integer required")
    return len(str(x**100)) - 1


def separate_levels(
    terms: Sequence[Number], schedule: CoveringSchedule, n_levels: int
) -> SeparationResult:
    """Block-append/skip construction separating schedule levels.

    For each level k in turn, the next N_k - N_{k-1} unused input terms are
    appended to the output, then floor(100 * log10(N_k)) input terms are
    skipped.  The input must have consecutive ratios >= 10 (exact check; a
    strict-ratio input only strengthens the outcome).  After building, the
    cross-level growth property is verified exactly: whenever M <= N_n < N
    for some level n, out_N / out_M >= N^100.  Since the output increases,
    checking the largest boundary below each N against M at that boundary
    covers every pair; a failure raises :class:`SeparationError` carrying a
    genuinely violating (M, N).  ``n_levels = 0`` returns the input
    unchanged.
    """
    if n_levels < 0:
        raise ValueError("n_levels must be >= 0")
    if n_levels == 0:
        return SeparationResult(tuple(terms), (), 0)
    out: list[Number] = []
    log: list[LevelSkip] = []
    i = 0  # next unused input position, 0-based
    for lev in range(n_levels):
        lo, hi = schedule.block(lev)
        if hi < 1:
            raise ValueError(f"schedule places no points through level {lev}")
        size = hi - lo
        if i + size > len(terms):
            raise ValueError(
                f"need at least {i + size} input terms to build level {lev}, "
                f"got {len(terms)}"
            )
        out.extend(terms[i : i + size])
        skip = _floor_hundred_log10(hi)
        log.append(LevelSkip(lev, i + 1, i + size, skip))
        i += size + skip
    consumed = log[-1].source_end
    _check_min_ratio(terms[:consumed], Fraction(10), "separation input")

    boundaries = [schedule.cumulative(n) for n in range(n_levels)]
    for big in range(boundaries[0] + 1, boundaries[-1] + 1):
        n_star = bisect.bisect_left(boundaries, big) - 1
        small = boundaries[n_star]
        if out[big - 1] < big**100 * out[small - 1]:
            raise SeparationError(
                f"cross-level growth fails: term {big} is below "
                f"{big}^100 times term {small}",
                (small, big),
            )
    return SeparationResult(tuple(out), tuple(log), n_levels)


# ---------------------------------------------------------------------------
# Gap profiles.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapProfile:
    """Consecutive-ratio diagnostics for a generated prefix.

    ``satisfies_power_gap``: every tail ratio exceeds 1 + 1/n^(1-eps).
    ``phi`` is the implied gap function 1/(q_{n+1}/q_n - 1), with its
    fitted log-log growth exponent over the tail half;
    ``phi_subpolynomial`` flags a near-flat fit (exponent < 0.25), the
    empirical stand-in for phi growing slower than any power.
    """

    eps: Fraction
    ratios: tuple[float, ...]
    min_normalized_gap: float
    tail_min_normalized_gap: float
    phi: tuple[float, ...]
    phi_fitted_exponent: float
    satisfies_power_gap: bool
    phi_increasing: bool
    phi_subpolynomial: bool


def gap_profile(
    terms: Sequence[Number], eps: Fraction = Fraction(1, 10)
) -> GapProfile:
    """Per-index ratio report with gap-condition flags; needs >= 2 terms.

    With fewer than two tail ratios the fitted exponent is NaN and the
    subpolynomial flag is conservatively False.
    """
    if len(terms) < 2:
        raise ValueError("need at least 2 terms for a gap profile")
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    excesses: list[Fraction] = []  # exact q_{n+1}/q_n - 1 > 0
    for i in range(1, len(terms)):
        a, b = terms[i - 1], terms[i]
        rho = (
            Fraction(b) / Fraction(a)
            if isinstance(a, Fraction) or isinstance(b, Fraction)
            else Fraction(b, a)
        )
        excesses.append(rho - 1)
    one_m_eps = float(1 - eps)
    normalized = [
        float(x) * float(n) ** one_m_eps
        for n, x in enumerate(excesses, start=1)
    ]
    phi = [float(1 / x) for x in excesses]
    tail_from = max(1, len(excesses) // 2)
    tail_norm = normalized[tail_from - 1 :]
    tail_phi = phi[tail_from - 1 :]
    if len(tail_phi) >= 2:
        logs_n = np.log2(
            np.arange(tail_from, len(excesses) + 1, dtype=np.float64)
        )
        fitted = float(np.polyfit(logs_n, np.log2(np.array(tail_phi)), 1)[0])
    else:
        fitted = float("nan")
    increasing = all(
        b >= a * (1 - 1e-12) for a, b in zip(tail_phi, tail_phi[1:])
    )
    return GapProfile(
        eps=eps,
        ratios=tuple(float(x + 1) for x in excesses),
        min_normalized_gap=min(normalized),
        tail_min_normalized_gap=min(tail_norm),
        phi=tuple(phi),
        phi_fitted_exponent=fitted,
        satisfies_power_gap=min(tail_norm) > 1.0,
        phi_increasing=increasing,
        phi_subpolynomial=fitted < 0.25,
    )


# ---------------------------------------------------------------------------
# gcd sums.
# ---------------------------------------------------------------------------


class TrendVerdict(Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


def _one(_: float) -> float:
    return 1.0


def _default_psi(x: float) -> float:
    return math.log2(max(x, 2.0))


@dataclass(frozen=True)
class GcdSumHypothesis:
    """Parameters of the gcd-sum growth hypothesis.

    ``f`` is the slowly varying density normalizer with doubling constant
    ``f_doubling`` (f(2x) <= c * f(x)); the index set has n_k given by
    ``index_rule`` ("all", "primes", or a callable) and must satisfy
    #(indices <= X) ~ X / f(X) within ``density_band``.  ``psi`` is the
    slowly growing factor in the reference bound
    N^(2-nu) / (psi(N) * f(N)^nu).
    """

    nu: Fraction
    eps: Fraction
    f: Callable[[float], float] = _one
    f_doubling: float = 1.0
    psi: Callable[[float], float] = _default_psi
    index_rule: Union[str, Callable[[int], int]] = "all"
    density_band: tuple[float, float] = (0.25, 4.0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nu", Fraction(self.nu))
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.nu < 1:
            raise ValueError("nu must be >= 1")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        lo, hi = self.density_band
        if not 0 < lo < hi:
            raise ValueError("density_band must be 0 < lo < hi")
        if isinstance(self.index_rule, str) and self.index_rule not in (
            "all",
            "primes",
        ):
            raise ValueError('index_rule must be "all", "primes", or callable')

    def indices(self, count: int) -> list[int]:
        """n_1 < n_2 < ... < n_count."""
        if self.index_rule == "all":
            return list(range(1, count + 1))
        if self.index_rule == "primes":
            return _first_primes(count)
        idx = [int(self.index_rule(k)) for k in range(1, count + 1)]
        prev = 0
        for k, n in enumerate(idx, start=1):
            if n <= prev:
                raise ValueError(
                    f"index rule not strictly increasing at position {k}"
                )
            prev = n
        return idx


def _check_density(hyp: GcdSumHypothesis, idx: list[int]) -> tuple[float, float]:
    """Validate f's regularity and the index density on halving probes."""
    probes = []
    x = idx[-1]
    while x >= 8:
        probes.append(x)
        x //= 2
    if not probes:
        probes = [idx[-1]]
    ratios = []
    for X in probes:
        f1 = hyp.f(float(X))
        if f1 <= 0:
            raise ValueError("f must be positive")
        f2 = hyp.f(2.0 * X)
        if f2 < f1 * (1 - 1e-12):
            raise ValueError("f must be nondecreasing")
        if f2 > hyp.f_doubling * f1 * (1 + 1e-9):
            raise ValueError(
                f"f doubling constant {hyp.f_doubling} violated at {X}"
            )
        count = bisect.bisect_right(idx, X)
        ratios.append(count * f1 / X)
    lo, hi = min(ratios), max(ratios)
    band_lo, band_hi = hyp.density_band
    if lo < band_lo or hi > band_hi:
        raise ValueError(
            f"index density ratio range ({lo:.3g}, {hi:.3g}) leaves the "
            f"configured band {hyp.density_band}"
        )
    return lo, hi


@dataclass(frozen=True)
class GcdSumResult:
    """One evaluation of the capped gcd sum at window (N, 2N].

    ``per_m`` holds the (nonnegative) contribution of each outer index m in
    increasing order, so partial sums are nondecreasing; ``ratio`` is
    value / rhs for the reference bound rhs = N^(2-nu)/(psi(N) f(N)^nu).
    """

    n: int
    value: float
    cap: float
    rhs: float
    ratio: float
    per_m: tuple[float, ...]
    density_ratio: tuple[float, float]


def gcd_sum(
    terms: Sequence[Number], hyp: GcdSumHypothesis, N: int
) -> GcdSumResult:
    """Capped gcd sum over index positions N < k <= m <= 2N.

    Each pair contributes
    min[gcd(Q_m, Q_k)/Q_m * min(log2(Q_m/Q_k), log2 log2 N), N^(1-nu-eps*nu)]
    with Q_i the sequence value at the i-th index of the hypothesis' index
    set.  The sequence must be integer-valued.  Deterministic: gcds are
    exact and the float reduction order is fixed.
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    if N == 0:
        return GcdSumResult(0, 0.0, 0.0, float("nan"), float("nan"), (),
                            (1.0, 1.0))
    idx = hyp.indices(2 * N)
    if len(terms) < idx[-1]:
        raise ValueError(
            f"need {idx[-1]} sequence terms for N={N}, got {len(terms)}"
        )
    block: list[int] = []
    for i in idx[N : 2 * N]:
        t = terms[i - 1]
        if isinstance(t, Fraction):
            if t.denominator != 1:
                raise ValueError("integer-valued sequence required")
            t = int(t)
        block.append(int(t))
    cap = float(N) ** float(1 - hyp.nu - hyp.eps * hyp.nu)
    llN = math.log2(math.log2(N)) if N >= 2 else 0.0

    if block[-1] < (1 << 62):
        q_arr = np.array(block, dtype=np.int64)
        g = np.gcd.outer(q_arr, q_arr).astype(np.float64)
        logq = np.log2(q_arr.astype(np.float64))
        main = (g / q_arr[:, None].astype(np.float64)) * np.minimum(
            logq[:, None] - logq[None, :], llN
        )
        vals = np.where(
            np.tril(np.ones((N, N), dtype=np.bool_)),
            np.minimum(main, cap),
            0.0,
        )
        per_m = tuple(float(v) for v in vals.sum(axis=1))
        value = float(np.sum(vals.sum(axis=1)))
    else:
        rows = []
        logs = [_log2_int(q) for q in block]
        for i, qm in enumerate(block):
            row = [
                min(
                    float(Fraction(math.gcd(qm, qk), qm))
                    * min(logs[i] - logs[ik], llN),
                    cap,
                )
                for ik, qk in enumerate(block[: i + 1])
            ]
            rows.append(math.fsum(row))
        per_m = tuple(rows)
        value = math.fsum(rows)

    fN = hyp.f(float(N))
    psiN = hyp.psi(float(N))
    rhs = float(N) ** float(2 - hyp.nu) / (psiN * fN ** float(hyp.nu))
    density = _check_density(hyp, idx)
    return GcdSumResult(
        n=N,
        value=value,
        cap=cap,
        rhs=rhs,
        ratio=value / rhs,
        per_m=per_m,
        density_ratio=density,
    )


@dataclass(frozen=True)
class GcdSumTrend:
    grid: tuple[int, ...]
    ratios: tuple[float, ...]
    verdict: TrendVerdict


def gcd_sum_verdict(
    terms: Sequence[Number], hyp: GcdSumHypothesis, grid: Sequence[int]
) -> GcdSumTrend:
    """Trend of value/rhs across an increasing N-grid.

    The reference bound tolerates any slowly growing psi, so a single-N
    comparison is meaningless; instead the ratio trend decides: strictly
    growing ratios that at least double over the grid FAIL, a bounded band
    (max/min <= 4) PASSES, anything else is INCONCLUSIVE.
    """
    grid = sorted(int(n) for n in grid)
    if len(grid) < 2 or grid[0] < 2:
        raise ValueError("grid needs >= 2 entries, all >= 2")
    ratios = [gcd_sum(terms, hyp, n).ratio for n in grid]
    growing = all(b > a for a, b in zip(ratios, ratios[1:]))
    if growing and ratios[-1] >= 2 * ratios[0]:
        verdict = TrendVerdict.FAIL
    elif min(ratios) > 0 and max(ratios) / min(ratios) <= 4.0:
        verdict = TrendVerdict.PASS
    elif max(ratios) == 0.0:
        verdict = TrendVerdict.PASS
    else:
        verdict = TrendVerdict.INCONCLUSIVE
    return GcdSumTrend(tuple(grid), tuple(ratios), verdict)


# ---------------------------------------------------------------------------
# Divisor and root counting.
# ---------------------------------------------------------------------------


def divisor_count(n: int) -> int:
    """tau(n): the number of positive divisors."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return int(sympy.divisor_count(n))


def root_count(poly: Union[Polynomial, Sequence[int]], e: int) -> int:
    """rho_P(e): residues a mod e with P(a) = 0 mod e, by enumeration."""
    if e < 1:
        raise ValueError("modulus must be >= 1")
    coeffs = poly.coeffs if isinstance(poly, Polynomial) else tuple(
        int(c) for c in poly
    )
    return sum(1 for a in range(e) if _poly_eval_mod(coeffs, a, e) == 0)


# ---------------------------------------------------------------------------
# Local pair counts.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalCountInstance:
    """Weighted count of near-resonances k*q_m - h*q_l near a shift B.

    The indices l, m run over the schedule block (N_{j-1}, N_j]; the
    frequencies h, k run to 2^(2j) with weights c(h) = min(1, 2^(j+1)/h);
    a solution requires |k*q_m - h*q_l - B| < q_{N_{j-1}}/4.  The default
    schedule mass is 1000; exhaustive evaluation needs the small-mass
    override for all but tiny blocks.
    """

    j: int
    B: Fraction = Fraction(0)
    schedule: CoveringSchedule = CoveringSchedule(mass=Fraction(1000))
    budget: int = 10**7

    def __post_init__(self) -> None:
        if self.j < 1:
            raise ValueError("j must be >= 1")
        object.__setattr__(self, "B", Fraction(self.B))
        if self.budget < 1:
            raise ValueError("budget must be >= 1")

    @property
    def frequency_cap(self) -> int:
        return 1 << (2 * self.j)

    def weight(self, h: int) -> Fraction:
        return min(Fraction(1), Fraction(1 << (self.j + 1), h))


@dataclass(frozen=True)
class LocalCountResult:
    value: Fraction
    bound: int
    within_bound: bool
    solutions: int
    block: tuple[int, int]
    j: int


def local_count_sum(
    inst: LocalCountInstance, terms: Sequence[Number]
) -> LocalCountResult:
    """Exact weighted near-resonance count against the bound 20 * N_j * 2^j.

    Enumerates (l, m, k) and solves the open window for h exactly in
    rational arithmetic; the ratio >= 10 precondition on the block keeps
    the window narrower than one integer.  Raises when the block size
    exceeds the enumeration budget (use a smaller schedule mass).
    """
    lo, hi = inst.schedule.block(inst.j)
    bound = 20 * hi * (1 << inst.j)
    if hi == lo:
        return LocalCountResult(Fraction(0), bound, True, 0, (lo, hi), inst.j)
    if lo < 1:
        raise ValueError("schedule places no points before the block")
    size = hi - lo
    cost = size * size * inst.frequency_cap
    if cost > inst.budget:
        raise ValueError(
            f"enumeration cost {cost} exceeds budget {inst.budget}; "
            f"use a smaller schedule mass override"
        )
    if len(terms) < hi:
        raise ValueError(f"need {hi} sequence terms, got {len(terms)}")
    _check_min_ratio(terms[lo - 1 : hi], Fraction(10), "local-count block")

    H = inst.frequency_cap
    weights = [Fraction(0)] + [inst.weight(h) for h in range(1, H + 1)]
    threshold = Fraction(terms[lo - 1]) / 4
    B = inst.B
    total = Fraction(0)
    solutions = 0
    for l_idx in range(lo + 1, hi + 1):
        ql = terms[l_idx - 1]
        for m_idx in range(lo + 1, hi + 1):
            qm = terms[m_idx - 1]
            for k in range(1, H + 1):
                center = k * qm - B
                h_lo = math.floor((center - threshold) / ql) + 1
                h_hi = math.ceil((center + threshold) / ql) - 1
                for h in range(max(h_lo, 1), min(h_hi, H) + 1):
                    total += weights[h] * weights[k]
                    solutions += 1
    return LocalCountResult(
        value=total,
        bound=bound,
        within_bound=total <= bound,
        solutions=solutions,
        block=(lo, hi),
        j=inst.j,
    )


# ---------------------------------------------------------------------------
# Prime statistics for floor-power sequences (descriptive only).
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrimeStatistics:
    """Primes among floor(n^c) up to ``bound``, next to the heuristic
    expectation bound^(1/c)/ln(bound).  Reported, never asserted: whether
    the heuristic holds is an open question."""

    exponent: Fraction
    bound: int
    count: int
    heuristic: float


def piatetski_shapiro_prime_report(
    c: Fraction, bound: int
) -> PrimeStatistics:
    """Descriptive prime count for the floor-power sequence with exponent c."""
    variant = PiatetskiShapiro(c)
    if bound < 2:
        raise ValueError("bound must be >= 2")
    p, q = variant.c.numerator, variant.c.denominator
    count = 0
    n = 1
    while True:
        v, _ = gmpy2.iroot(gmpy2.mpz(n) ** p, q)
        v = int(v)
        if v > bound:
            break
        if sympy.isprime(v):
            count += 1
        n += 1
    heuristic = float(bound) ** (1 / float(variant.c)) / math.log(bound)
    return PrimeStatistics(variant.c, bound, count, heuristic)
