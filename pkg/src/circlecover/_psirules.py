"""Iterated-logarithm density families and their window sums.

The regime classifier needs the sums W(N) = sum of psi(n) over N < n <= 2^N
at window starts N far beyond anything enumerable: the families of interest
(1/(n log n), 1/(n log n log log n), ...) change so slowly that the
classifying thresholds only resolve around N = 2^(10^5) and beyond.  For
those families the sums have elementary antiderivatives, so W(N) is
computed in closed form with two-sided bounds from monotonicity.  All
logarithms are evaluated from lam = log2(N) (a float, possibly enormous),
never from N itself, so windows with N ~ 2^(1e200) stay representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

__all__ = [
    "PsiFamily",
    "WindowBounds",
    "callable_window_sum",
    "analytic_ladder",
]

_LN2 = math.log(2.0)
_LN_LN2 = math.log(_LN2)


def _tower_from_log2(lam: float, j: int) -> float:
    """log^(j)(t) for the point t with log2 t = lam; log^(0) t = t."""
    if j == 0:
        return math.inf if lam >= 1024 else 2.0**lam
    v = lam * _LN2
    for _ in range(j - 1):
        if v == math.inf:
            return math.inf
        if v <= 0:
            return -math.inf
        v = math.log(v)
    return v


def _tower_at_window_end(lam: float, j: int) -> float:
    """log^(j)(2^N) where N = 2^lam: the end of the window starting at N.

    The end's own base-2 logarithm is N = 2^lam, far beyond float range
    for large lam, but from the second logarithm down everything is
    moderate: log log 2^N = log(N log 2) = lam*log(2) + log(log(2)).
    """
    if j == 0:
        return math.inf
    if j == 1:
        return math.inf if lam >= 1024 else (2.0**lam) * _LN2
    v = lam * _LN2 + _LN_LN2
    for _ in range(j - 2):
        if v <= 0:
            return -math.inf
        v = math.log(v)
    return v


@dataclass(frozen=True)
class PsiFamily:
    """psi(n) = scale / (n * log n * ... * log^(k-1) n * (log^(k) n)^power).

    ``k = 0`` means psi(n) = scale / n^power and ``k = 1`` means
    psi(n) = scale / (n (log n)^power); all logarithms are natural.
    Values at small n where the innermost logarithm is not yet positive
    are clamped to the first index where it is, keeping psi positive and
    nonincreasing on all positive integers.
    """

    k: int
    power: float = 1.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("k must be >= 0")
        if not self.power > 0:
            raise ValueError("power must be positive")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def floor_index(self) -> int:
        """First n at which log^(k) n is positive (a tower of e's)."""
        if self.k == 0:
            return 1
        lo, hi = 1, 2
        while _tower_from_log2(math.log2(hi), self.k) <= 0:
            lo, hi = hi, hi * hi
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _tower_from_log2(math.log2(mid), self.k) <= 0:
                lo = mid
            else:
                hi = mid
        return hi

    def __call__(self, n) -> Union[float, np.ndarray]:
        arr = np.asarray(n, dtype=np.float64)
        arr = np.maximum(arr, float(self.floor_index))
        v = arr.copy()
        den = np.ones_like(arr)
        for _ in range(self.k):
            den = den * v
            v = np.log(v)
        out = self.scale / (den * v**self.power)
        return float(out) if np.ndim(n) == 0 else out

    def _eval_log2(self, lam: float) -> float:
        """psi at the point whose base-2 logarithm is lam (no clamping)."""
        prod = 1.0
        for i in range(self.k):
            prod *= _tower_from_log2(lam, i)
            if prod == math.inf:
                return 0.0
        top = _tower_from_log2(lam, self.k)
        if not top > 0:
            raise ValueError("evaluation below the family floor")
        total = prod * top**self.power
        return 0.0 if total == math.inf else self.scale / total

    def _phi_from_log2(self, lam: float) -> float:
        """Antiderivative of psi at the point t with log2 t = lam.

        Phi = scale * log^(k+1) t                          (power = 1)
        Phi = scale * (log^(k) t)^(1-power) / (1-power)    (otherwise)
        """
        if self.power == 1.0:
            return self.scale * _tower_from_log2(lam, self.k + 1)
        t = _tower_from_log2(lam, self.k)
        e = 1.0 - self.power
        return self.scale * t**e / e

    def _phi_at_window_end(self, lam: float) -> float:
        """The antiderivative at the window end 2^(2^lam)."""
        if self.power == 1.0:
            return self.scale * _tower_at_window_end(lam, self.k + 1)
        t = _tower_at_window_end(lam, self.k)
        e = 1.0 - self.power
        return self.scale * t**e / e

    def window_sum_bounds(self, log2_start: float) -> "WindowBounds":
        """Bounds on W(N) = sum of psi(n), N < n <= 2^N, with log2 N given.

        psi is nonincreasing, so the integral comparison sandwiches the
        sum over the integers in (N, 2^N] for any real N:
        Phi(2^N) - Phi(N+1) <= W(N) <= Phi(2^N) - Phi(N-1), with Phi the
        closed-form antiderivative.  N +- 1 is handled in log space, so
        window starts far beyond float range degrade gracefully to
        Phi(2^N) - Phi(N).
        """
        lam = float(log2_start)
        shift = 2.0 ** (-lam) if lam < 1100 else 0.0
        lam_lo = lam + math.log1p(-shift) / _LN2  # log2(N - 1)
        lam_hi = lam + math.log1p(shift) / _LN2  # log2(N + 1)
        if not _tower_from_log2(lam_lo, self.k) > 0:
            raise ValueError("window start below the family floor")
        phi_end = self._phi_at_window_end(lam)
        upper = phi_end - self._phi_from_log2(lam_lo)
        lower = phi_end - self._phi_from_log2(lam_hi)
        if math.isnan(upper):
            upper = math.inf
        if math.isnan(lower):
            lower = math.inf
        return WindowBounds(
            log2_start=lam, lower=max(lower, 0.0), upper=max(upper, 0.0)
        )

    def _harmonic_log_ratio(self, lam: float) -> float:
        """psi(n) * n * log(n) at the point with log2 n = lam."""
        if self.k == 0:
            if self.power == 1.0:
                return self.scale * lam * _LN2
            return self.scale * lam * _LN2 * 2.0 ** (-lam * (self.power - 1.0))
        if self.k == 1:
            return self.scale * (lam * _LN2) ** (1.0 - self.power)
        prod = 1.0
        for i in range(2, self.k):
            prod *= _tower_from_log2(lam, i)
        top = _tower_from_log2(lam, self.k)
        if not top > 0:
            raise ValueError("ratio evaluated below the family floor")
        return self.scale / (prod * top**self.power)

    def eventually_below_harmonic_log(self) -> tuple[bool, Optional[int]]:
        """Whether psi(n) <= 1/(n log n) for all large n, with a start index.

        Returns (holds, n0).  When the bound holds, psi(n) <= 1/(n log n)
        for every n >= n0; n0 is the exact least such index when it fits
        comfortably in floats, a certified (possibly non-minimal) index
        when it is astronomically large, or None when the bound only sets
        in beyond float range.
        """
        if self.k == 0 and self.power <= 1.0:
            return (False, None)
        if self.k == 1:
            if self.power < 1.0:
                return (False, None)
            if self.power == 1.0:
                return (True, 2) if self.scale <= 1.0 else (False, None)
        # Remaining families have psi * n * log n -> 0; locate the crossing.
        lam_lo = math.log2(self.floor_index) + 1e-9
        if self.k == 0:
            # ratio = scale * log(n) / n^(power-1) peaks at log n = 1/(power-1)
            lam_lo = max(lam_lo, 1.0 / ((self.power - 1.0) * _LN2))
        lam_hi = max(2.0 * lam_lo, 2.0)
        while self._harmonic_log_ratio(lam_hi) > 1.0:
            lam_hi *= 2.0
            if lam_hi >= 8.9e307:
                return (True, None)
        if self._harmonic_log_ratio(lam_lo) <= 1.0:
            lam0 = lam_lo
        else:
            lo, hi = lam_lo, lam_hi
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if self._harmonic_log_ratio(mid) <= 1.0:
                    hi = mid
                else:
                    lo = mid
            lam0 = hi
        if lam0 < 48:
            harmonic_log = PsiFamily(k=1, power=1.0, scale=1.0)
            n0 = max(int(math.ceil(2.0**lam0)), 2)
            for _ in range(64):
                if n0 > 2 and self(n0 - 1) <= harmonic_log(n0 - 1):
                    n0 -= 1
                else:
                    break
            for _ in range(64):
                if self(n0) > harmonic_log(n0):
                    n0 += 1
                else:
                    break
            return (True, n0)
        margin = lam0 * (1.0 + 1e-9) + 1.0
        if margin >= 1023:
            return (True, None)
        return (True, int(2.0**margin) + 1)


@dataclass(frozen=True)
class WindowBounds:
    """Two-sided bounds on the sum of psi over (N, 2^N], N given by log2."""

    log2_start: float
    lower: float
    upper: float


def callable_window_sum(
    psi: Callable, start: int, horizon: int
) -> Optional[WindowBounds]:
    """Exact sum of psi(n) over start < n <= 2^start for a plain callable.

    Returns None when the window end 2^start exceeds the horizon, i.e.
    the window cannot be completed by direct summation.
    """
    if start < 2:
        raise ValueError("window start must be >= 2")
    if start >= 64 or 2**start > horizon:
        return None
    end = 2**start
    parts = []
    chunk = 1 << 20
    for lo in range(start + 1, end + 1, chunk):
        ns = np.arange(lo, min(lo + chunk, end + 1), dtype=np.float64)
        try:
            vals = np.asarray(psi(ns), dtype=np.float64)
            if vals.shape != ns.shape:
                raise ValueError
        except (TypeError, ValueError):
            vals = np.array([float(psi(int(m))) for m in ns])
        parts.append(float(vals.sum()))
    total = math.fsum(parts)
    return WindowBounds(log2_start=math.log2(start), lower=total, upper=total)


def analytic_ladder(max_log2: float = 1e280) -> tuple[float, ...]:
    """Window starts N, as log2 N, climbing geometrically in log-log scale."""
    rungs = []
    value = 16.0
    while value <= max_log2:
        rungs.append(value)
        value *= 4.0
    return tuple(rungs)
