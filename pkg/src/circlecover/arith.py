"""Exact circle arithmetic, continued fractions, and Bohr-set counting.

A point on the circle is a fixed-point fraction: an integer numerator at a
bit precision B, meaning ``value / 2**B``.  Real inputs (quadratic surds,
rationals, decimal strings) enter as *descriptors* and are evaluated lazily
to an enclosure — a pair of integers ``lo <= x * 2**B <= hi`` with
``hi - lo <= 1`` — so every downstream quantity carries an explicit error
interval.  Comparisons that the current precision cannot decide raise
:class:`PrecisionError` instead of silently rounding; callers either retry
with more bits or treat the instance as out of budget.

Logs are binary throughout (``log`` means ``log2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

DEFAULT_BITS = 4096

__all__ = [
    "DEFAULT_BITS",
    "PrecisionError",
    "BohrPreconditionError",
    "QuadraticSurd",
    "golden_ratio",
    "UnitPoint",
    "enclosure",
    "as_fraction",
    "nearest_int_dist",
    "ContinuedFractionExpansion",
    "continued_fraction",
    "BohrQuery",
    "bohr_count",
    "bohr_bracket",
    "AnnulusReport",
    "annulus_count",
    "WindowSum",
    "exp_window_sum",
]


class PrecisionError(ArithmeticError):
    """A comparison or floor could not be decided at the working precision."""


class BohrPreconditionError(ValueError):
    """A Bohr-set lemma precondition failed; the message names the side."""


def _log2_int(n: int) -> float:
    """log2 of a positive integer that may exceed float range."""
    if n <= 0:
        raise ValueError("positive integer required")
    shift = max(0, n.bit_length() - 53)
    return math.log2(n >> shift) + shift


# ---------------------------------------------------------------------------
# real descriptors and enclosures


@dataclass(frozen=True)
class QuadraticSurd:
    """The real number (p + q*sqrt(d)) / r with integer fields, r != 0.

    >>> golden_ratio().to_float()
    0.6180339887498949
    """

    p: int
    q: int
    d: int
    r: int

    def __post_init__(self):
        if self.r == 0:
            raise ZeroDivisionError("surd denominator r must be nonzero")
        if self.d < 0:
            raise ValueError("sqrt argument d must be nonnegative")
        if self.r < 0:
            object.__setattr__(self, "p", -self.p)
            object.__setattr__(self, "q", -self.q)
            object.__setattr__(self, "r", -self.r)

    def is_rational(self) -> bool:
        s = math.isqrt(self.d)
        return self.q == 0 or s * s == self.d

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("irrational surd has no exact Fraction")
        return Fraction(self.p + self.q * math.isqrt(self.d), self.r)

    def enclosure(self, bits: int) -> tuple[int, int]:
        """(lo, hi) with lo <= value * 2**bits <= hi and hi - lo <= 1."""
        if self.is_rational():
            return _fraction_enclosure(self.as_fraction(), bits)
        slack = 48
        while True:
            wb = bits + slack
            s = math.isqrt(self.d << (2 * wb))  # s <= sqrt(d)*2^wb < s+1
            if self.q >= 0:
                num_lo = (self.p << wb) + self.q * s
                num_hi = (self.p << wb) + self.q * (s + 1)
            else:
                num_lo = (self.p << wb) + self.q * (s + 1)
                num_hi = (self.p << wb) + self.q * s
            den = self.r << slack
            lo = num_lo // den
            hi = -((-num_hi) // den)
            if hi - lo <= 1:
                return lo, hi
            slack *= 2

    def to_float(self) -> float:
        lo, hi = self.enclosure(64)
        return lo / 2.0**64


def golden_ratio() -> QuadraticSurd:
    """(sqrt(5) - 1) / 2, the all-ones continued fraction."""
    return QuadraticSurd(-1, 1, 5, 2)


Real = Union[int, float, str, Fraction, QuadraticSurd, "UnitPoint"]


def as_fraction(x: Real) -> Fraction:
    """Exact Fraction for exactly-representable inputs.

    Floats mean their exact binary value; decimal strings are exact decimals.
    """
    if isinstance(x, UnitPoint):
        if x.err:
            raise PrecisionError("UnitPoint with nonzero error has no exact value")
        return Fraction(x.value, 1 << x.precision)
    if isinstance(x, QuadraticSurd):
        return x.as_fraction()
    return Fraction(x)


def _fraction_enclosure(f: Fraction, bits: int) -> tuple[int, int]:
    t = f.numerator << bits
    lo = t // f.denominator
    hi = lo if lo * f.denominator == t else lo + 1
    return lo, hi


def enclosure(x: Real, bits: int) -> tuple[int, int]:
    """Integers lo <= x * 2**bits <= hi with hi - lo <= 1 (equal iff exact)."""
    if isinstance(x, QuadraticSurd):
        return x.enclosure(bits)
    if isinstance(x, UnitPoint):
        if bits >= x.precision:
            sh = bits - x.precision
            return x.value << sh, (x.value + x.err) << sh
        sh = x.precision - bits
        lo = x.value >> sh
        hi = -((-(x.value + x.err)) >> sh)
        return lo, hi
    return _fraction_enclosure(Fraction(x), bits)


# ---------------------------------------------------------------------------
# fixed-point circle points


@dataclass(frozen=True)
class UnitPoint:
    """A circle point known to lie in [value, value + err] / 2**precision.

    ``err == 0`` means the point is exactly the dyadic rational
    ``value / 2**precision`` (all randomly drawn points are of this kind);
    descriptors evaluate with ``err == 1``.  Arithmetic widens ``err`` and
    comparisons are guarded: the helpers raise :class:`PrecisionError` when
    an interval straddles the threshold.
    """

    value: int
    precision: int = DEFAULT_BITS
    err: int = 0

    def __post_init__(self):
        if self.precision < 64:
            raise ValueError("precision must be at least 64 bits")
        if not 0 <= self.value < (1 << self.precision):
            object.__setattr__(self, "value", self.value % (1 << self.precision))
        if self.err < 0:
            raise ValueError("err must be nonnegative")

    @classmethod
    def from_real(cls, x: Real, bits: int = DEFAULT_BITS) -> "UnitPoint":
        """Fractional part of x as a fixed-point enclosure."""
        if isinstance(x, UnitPoint) and x.precision == bits:
            return x
        lo, hi = enclosure(x, bits)
        return cls(value=lo % (1 << bits), precision=bits, err=hi - lo)

    @classmethod
    def random(cls, rng: np.random.Generator, bits: int = 64) -> "UnitPoint":
        """Uniform exact dyadic point: `bits` independent random bits."""
        nbytes = (bits + 7) // 8
        v = int.from_bytes(rng.bytes(nbytes), "little") % (1 << bits)
        return cls(value=v, precision=bits, err=0)

    @property
    def modulus(self) -> int:
        return 1 << self.precision

    def times_int(self, n: int) -> "UnitPoint":
        """{n * x} with the error interval scaled accordingly (exact for err=0)."""
        if n < 0:
            lo = (-n) * self.value + (-n) * self.err
            return UnitPoint((-lo) % self.modulus, self.precision, (-n) * self.err)
        return UnitPoint((n * self.value) % self.modulus, self.precision, n * self.err)

    def plus(self, other: "UnitPoint") -> "UnitPoint":
        if other.precision != self.precision:
            other = UnitPoint.from_real(other, self.precision)
        return UnitPoint(
            (self.value + other.value) % self.modulus,
            self.precision,
            self.err + other.err,
        )

    def dist_interval(self, other: "UnitPoint") -> tuple[int, int]:
        """Range of the circle distance ||self - other|| in ulps of 2**-B."""
        if other.precision != self.precision:
            other = UnitPoint.from_real(other, self.precision)
        delta_lo = self.value - other.value - other.err
        width = self.err + other.err
        return _dist_range(delta_lo, width, self.modulus)

    def to_float(self) -> float:
        return self.value / float(self.modulus)

    def to_fraction(self) -> Fraction:
        if self.err:
            raise PrecisionError("inexact point; use dist_interval/enclosure")
        return Fraction(self.value, self.modulus)


def _dist_range(delta_lo: int, width: int, M: int) -> tuple[int, int]:
    """Range of min(t mod M, M - t mod M) for t in [delta_lo, delta_lo+width]."""
    if width >= M:
        return 0, M // 2
    a = delta_lo % M
    b = a + width  # < 2M
    half = M // 2
    contains0 = a == 0 or b >= M
    contains_half = a <= half <= b or a <= half + M <= b
    ra = a
    fa = min(ra, M - ra) if ra else 0
    rb = b % M
    fb = min(rb, M - rb) if rb else 0
    lo = 0 if contains0 else min(fa, fb)
    hi = half if contains_half else max(fa, fb)
    return lo, hi


def _lt_threshold(threshold: Fraction) -> int:
    """Largest integer strictly below `threshold`."""
    c = -((-threshold.numerator) // threshold.denominator)  # ceil
    return c - 1


def _decide_lt(dlo: int, dhi: int, t_lt: int, bits: int) -> bool:
    """Whether dist < thr, given integer dist range; guarded."""
    if dhi <= t_lt:
        return True
    if dlo > t_lt:
        return False
    raise PrecisionError(
        f"comparison inconclusive at precision {bits} bits; "
        f"distance in [{dlo}, {dhi}] vs threshold index {t_lt}"
    )


# ---------------------------------------------------------------------------
# distance to the nearest integer


def nearest_int_dist(t: Real):
    """||t|| = min({t}, 1 - {t}).

    Exact Fraction for int/Fraction/decimal-string/exact-UnitPoint input;
    float in/float out (the float means its exact binary value); descriptor
    input is evaluated at DEFAULT_BITS and the result is exact to one ulp.

    >>> nearest_int_dist(3.25)
    0.25
    """
    if isinstance(t, float):
        if not math.isfinite(t):
            raise ValueError("non-finite input")
        # |t - round(t)| is exact in binary floating point (the operands are
        # within a factor of two), unlike min({t}, 1-{t}) which rounds twice
        return abs(t - round(t))
    if isinstance(t, QuadraticSurd) and not t.is_rational():
        lo, _hi = t.enclosure(DEFAULT_BITS)
        f = Fraction(lo % (1 << DEFAULT_BITS), 1 << DEFAULT_BITS)
        return min(f, 1 - f)
    f = as_fraction(t)
    f -= math.floor(f)
    return min(f, 1 - f)


# ---------------------------------------------------------------------------
# continued fractions


@dataclass(frozen=True)
class ContinuedFractionExpansion:
    """Partial quotients a_1..a_K and convergents p_k/q_k of a real number.

    ``int_part`` is a_0; convergents approximate the full value.  For
    rational input that terminates before depth K, ``terminated`` is set and
    the fields hold the full finite expansion.
    """

    alpha: object
    int_part: int
    partial_quotients: tuple[int, ...]
    numerators: tuple[int, ...]
    denominators: tuple[int, ...]
    levy_sup: float
    terminated: bool

    def __post_init__(self):
        q = self.denominators
        a = self.partial_quotients
        p = self.numerators
        for k in range(2, len(q)):
            if q[k] != a[k] * q[k - 1] + q[k - 2]:
                raise ValueError("denominator recursion violated")
            if p[k] != a[k] * p[k - 1] + p[k - 2]:
                raise ValueError("numerator recursion violated")

    def depth(self) -> int:
        return len(self.partial_quotients)

    def convergent(self, k: int) -> Fraction:
        """p_k / q_k, 1-based."""
        return Fraction(self.numerators[k - 1], self.denominators[k - 1])

    def max_quotient(self) -> int:
        return max(self.partial_quotients)


def _cf_quotients_rational(x: Fraction, K: Optional[int]):
    a0 = math.floor(x)
    num = x.numerator - a0 * x.denominator
    den = x.denominator
    quotients: list[int] = []
    # x - a0 = num/den in [0,1); continued fraction by Euclid on (den, num)
    while num != 0 and (K is None or len(quotients) < K):
        a, rem = divmod(den, num)
        quotients.append(a)
        den, num = num, rem
    terminated = num == 0
    return a0, quotients, terminated


def _cf_quotients_surd(x: QuadraticSurd, K: int):
    # exact periodic algorithm for (P + sqrt(D)) / Q; requires q > 0
    P = x.p
    Q = x.r
    D = x.q * x.q * x.d
    if (D - P * P) % Q != 0:
        P *= abs(Q)
        D *= Q * Q
        Q *= abs(Q)
    s = math.isqrt(D)
    quotients: list[int] = []
    a0 = None
    for _ in range(K + 1):
        if Q > 0:
            a = (P + s) // Q
        else:
            a = -((P + s) // (-Q)) - 1
        if a0 is None:
            a0 = a
        else:
            quotients.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
    return a0, quotients, False


def _cf_quotients_interval(lo: Fraction, hi: Fraction, K: int, bits: int):
    a0 = math.floor(lo)
    if a0 != math.floor(hi):
        raise PrecisionError(f"integer part undecidable at {bits} bits")
    quotients: list[int] = []
    xlo, xhi = lo - a0, hi - a0
    while len(quotients) < K:
        if xlo == 0 or xhi == 0:
            return a0, quotients, True  # hit an exact rational tail
        ylo, yhi = 1 / xhi, 1 / xlo
        a = math.floor(ylo)
        if a != math.floor(yhi):
            raise PrecisionError(
                f"partial quotient {len(quotients) + 1} undecidable at {bits} bits"
            )
        quotients.append(a)
        xlo, xhi = ylo - a, yhi - a
    return a0, quotients, False


def continued_fraction(
    alpha: Real, K: int = 40, bits: int = DEFAULT_BITS
) -> ContinuedFractionExpansion:
    """Expansion of `alpha` to depth K (or its full finite expansion).

    Quadratic surds with positive sqrt coefficient use the exact integer
    recursion (no precision limit); rationals use Euclid; anything else is
    expanded from its enclosure at `bits` bits and raises
    :class:`PrecisionError` when a quotient is undecidable.
    """
    if K < 1:
        raise ValueError("depth K must be >= 1")
    x: Real = alpha
    if isinstance(x, QuadraticSurd) and x.is_rational():
        x = x.as_fraction()
    elif isinstance(x, UnitPoint) and x.err == 0:
        x = x.to_fraction()
    if isinstance(x, QuadraticSurd) and x.q > 0:
        a0, quotients, terminated = _cf_quotients_surd(x, K)
    elif isinstance(x, (int, float, str, Fraction)):
        a0, quotients, terminated = _cf_quotients_rational(Fraction(x), K)
    else:
        lo, hi = enclosure(x, bits)
        a0, quotients, terminated = _cf_quotients_interval(
            Fraction(lo, 1 << bits), Fraction(hi, 1 << bits), K, bits
        )
    if not quotients:
        raise ValueError("no partial quotients: alpha is an integer")
    ps, qs = [], []
    p_prev, p_cur = 1, a0  # p_{-1}, p_0
    q_prev, q_cur = 0, 1  # q_{-1}, q_0
    for a in quotients:
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        ps.append(p_cur)
        qs.append(q_cur)
    levy = max(_log2_int(q) / (k + 1) for k, q in enumerate(qs))
    return ContinuedFractionExpansion(
        alpha=alpha,
        int_part=a0,
        partial_quotients=tuple(quotients),
        numerators=tuple(ps),
        denominators=tuple(qs),
        levy_sup=levy,
        terminated=terminated,
    )


def _cf_until_q_exceeds(alpha: Real, limit: int, bits: int):
    """Expand until some q_k > limit (or the expansion terminates)."""
    K = 8
    while True:
        cf = continued_fraction(alpha, K, bits)
        if cf.terminated or cf.denominators[-1] > limit:
            return cf
        K *= 2


# ---------------------------------------------------------------------------
# Bohr sets


@dataclass(frozen=True)
class BohrQuery:
    """Inputs for counting {n <= N : ||n*alpha - gamma|| < eps}.

    ``eps`` accepts Fraction/int/decimal-string/float; floats mean their
    exact binary value.  ``b`` is the annulus ratio (corollary hypothesis
    b >= 300); c1/c2/K_const are the calibration constants for the annulus
    bounds — the source result asserts absolute constants exist without
    naming values, so they are parameters with the documented defaults.
    """

    alpha: Real
    N: int
    eps: Fraction
    gamma: Real = 0
    b: int = 300
    precision: int = DEFAULT_BITS
    c1: Fraction = Fraction(1, 4)
    c2: Fraction = Fraction(65)
    K_const: Optional[Fraction] = None
    bad_cap: int = 100

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps))
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.eps <= 0:
            raise ValueError("eps must be positive")


def _bohr_scan(q: BohrQuery, lower: Optional[Fraction], upper: Fraction) -> int:
    """Exact #{n <= N : (lower <=) ||n*alpha - gamma|| < upper}."""
    bits = q.precision
    M = 1 << bits
    a_lo, a_hi = enclosure(q.alpha, bits)
    g_lo, g_hi = enclosure(q.gamma, bits)
    t_up = _lt_threshold(upper * M)
    t_lo = _lt_threshold(lower * M) if lower is not None else None
    count = 0
    na_lo = 0
    err_a = a_hi - a_lo
    g_err = g_hi - g_lo
    for n in range(1, q.N + 1):
        na_lo += a_lo
        delta_lo = na_lo - g_lo - g_err
        w = n * err_a + g_err
        dlo, dhi = _dist_range(delta_lo, w, M)
        if not _decide_lt(dlo, dhi, t_up, bits):
            continue
        if t_lo is not None and _decide_lt(dlo, dhi, t_lo, bits):
            continue  # below the annulus floor
        count += 1
    return count


def bohr_count(q: BohrQuery) -> int:
    """Exact #{n <= N : ||n*alpha - gamma|| < eps} by guarded enumeration."""
    return _bohr_scan(q, None, q.eps)


def bohr_bracket(q: BohrQuery) -> tuple[int, Fraction]:
    """(floor(M), 32*M) bracketing the homogeneous count #{||n*alpha|| < eps}.

    M = max(eps*N, min(eps*q_{K+1}, N/(2*q_K))) with q_K <= N < q_{K+1}.
    Preconditions 1/N < 2*eps < ||q_2*alpha|| are checked exactly; the error
    names the failed side.
    """
    eps = q.eps
    if Fraction(1, q.N) >= 2 * eps:
        raise BohrPreconditionError("lower side failed: 1/N >= 2*eps")
    cf = _cf_until_q_exceeds(q.alpha, q.N, q.precision)
    if cf.terminated and cf.denominators[-1] <= q.N:
        raise BohrPreconditionError(
            "alpha is rational with q_max <= N; no K with q_K <= N < q_{K+1}"
        )
    qs = cf.denominators
    if len(qs) < 2:
        raise BohrPreconditionError("expansion too short to reach q_2")
    # ||q_2 * alpha|| > 2*eps, guarded exact comparison
    ap = UnitPoint.from_real(q.alpha, q.precision)
    zero = UnitPoint(0, q.precision)
    dlo, dhi = ap.times_int(qs[1]).dist_interval(zero)
    two_eps = 2 * eps * (1 << q.precision)
    t_le = math.floor(two_eps)  # largest integer <= 2*eps in ulps
    if dhi <= t_le:
        raise BohrPreconditionError("upper side failed: 2*eps >= ||q_2*alpha||")
    if dlo <= t_le:
        raise PrecisionError(
            f"||q_2*alpha|| vs 2*eps undecidable at {q.precision} bits"
        )
    K_idx = None
    for i in range(len(qs) - 1):
        if qs[i] <= q.N < qs[i + 1]:
            K_idx = i
            break
    if K_idx is None:
        raise BohrPreconditionError("could not locate q_K <= N < q_{K+1}")
    qK, qK1 = qs[K_idx], qs[K_idx + 1]
    M = max(eps * q.N, min(eps * qK1, Fraction(q.N, 2 * qK)))
    return math.floor(M), 32 * M


@dataclass(frozen=True)
class AnnulusReport:
    """Exact annulus count with the calibrated-bound verdict."""

    count: int
    ratio: Fraction
    in_range: bool
    precondition_ok: bool
    bad_proxy_ok: bool
    K_used: Fraction
    max_quotient: int
    c1: Fraction
    c2: Fraction


def annulus_count(q: BohrQuery) -> AnnulusReport:
    """Exact #{n <= N : eps/b <= ||n*alpha - gamma|| < eps} plus bounds report.

    The ratio count/(N*eps) is compared against the calibration constants
    [c1, c2].  The hypothesis eps >= K(alpha, b)/N is a flag in the report
    (instances below the gate still count; the corollary just does not
    promise anything there).  b < 300 is rejected outright.
    """
    if q.b < 300:
        raise ValueError("annulus ratio b must be >= 300")
    cf = _cf_until_q_exceeds(q.alpha, q.N, q.precision)
    max_a = cf.max_quotient()
    K_used = Fraction(q.K_const) if q.K_const is not None else Fraction(10 * q.b * max_a)
    precondition_ok = q.eps >= K_used / q.N
    bad_proxy_ok = max_a <= q.bad_cap
    count = _bohr_scan(q, q.eps / q.b, q.eps)
    ratio = Fraction(count) / (q.N * q.eps)
    return AnnulusReport(
        count=count,
        ratio=ratio,
        in_range=bool(q.c1 <= ratio <= q.c2),
        precondition_ok=bool(precondition_ok),
        bad_proxy_ok=bool(bad_proxy_ok),
        K_used=K_used,
        max_quotient=max_a,
        c1=q.c1,
        c2=q.c2,
    )


# ---------------------------------------------------------------------------
# exponential-window sums


@dataclass(frozen=True)
class WindowSum:
    """Sum of psi over [2^N, 2^(c^N)], possibly truncated at `cap`."""

    value: float
    lo: int
    hi: int
    capped: bool
    cap: int


def exp_window_sum(
    psi: Callable,
    N: int,
    c: float,
    horizon: int = 10**7,
) -> WindowSum:
    """Sum of psi(n) for 2^N <= n <= 2^(c^N), capped at `horizon`.

    psi must be nonnegative and nonincreasing (spot-checked on samples);
    it is applied to numpy arrays in chunks, with a scalar fallback.
    """
    if c <= 1:
        raise ValueError("c must be > 1")
    lo = 1 << N
    exponent = float(c) ** N
    capped = exponent > math.log2(horizon) or (2.0**exponent) > horizon
    hi = horizon if capped else int(2.0**exponent)
    if hi < lo:
        return WindowSum(0.0, lo, hi, capped, horizon)
    samples = [lo, (lo + hi) // 2, hi]
    vals = [_psi_scalar(psi, s) for s in samples]
    if any(v < 0 for v in vals):
        raise ValueError("psi must be nonnegative")
    if not (vals[0] >= vals[1] >= vals[2]):
        raise ValueError("psi must be nonincreasing (sampled violation)")
    total = 0.0
    chunk = 1 << 20
    parts = []
    for start in range(lo, hi + 1, chunk):
        ns = np.arange(start, min(start + chunk, hi + 1), dtype=np.float64)
        try:
            out = np.asarray(psi(ns), dtype=np.float64)
        except (TypeError, ValueError):
            out = np.array([_psi_scalar(psi, int(n)) for n in ns])
        parts.append(float(out.sum()))
    total = math.fsum(parts)
    return WindowSum(total, lo, hi, capped, horizon)


def _psi_scalar(psi: Callable, n: int) -> float:
    v = psi(np.array([float(n)]))
    try:
        return float(np.asarray(v).ravel()[0])
    except (TypeError, ValueError):
        return float(psi(n))
