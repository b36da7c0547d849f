"""Tests for digit fractals, arc box counts, and dimension estimation."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

import oracles
from circlecover._seeding import trial_rng
from circlecover.arith import PrecisionError, UnitPoint
from circlecover.limsupdim import (
    EMPTY,
    DigitSet,
    DimensionEstimate,
    LimsupConfig,
    _radius,
    box_hits,
    default_scales,
    emptiness_threshold,
    estimate_dimension,
    frostman_grid,
    predicted_dimension,
    resolvability_band,
)
from circlecover.sequences import Explicit, GeometricReal, Polynomial

S3 = math.log(2) / math.log(3)
POW2 = GeometricReal(Fraction(2), Fraction(2))
FULL2 = DigitSet.full(2)
CANTOR = DigitSet.cantor_middle_thirds()


def _dyadic_point(nbits: int, fill: int = 0xA7) -> UnitPoint:
    value = int.from_bytes(bytes((fill * (i + 3)) % 255 + 1 for i in range(nbits // 8)), "big")
    return UnitPoint(value=value, precision=nbits)


def _sampled_point(bits_needed: int, master: int, trial: int) -> UnitPoint:
    rng = trial_rng(master, trial)
    nbytes = (bits_needed + 7) // 8
    return UnitPoint(
        value=int.from_bytes(rng.bytes(nbytes), "big"), precision=nbytes * 8
    )


class TestDigitSet:
    def test_full_and_cantor(self):
        assert FULL2.digits == (0, 1)
        assert FULL2.is_full
        assert FULL2.s == 1.0
        assert CANTOR.base == 3
        assert CANTOR.digits == (0, 2)
        assert not CANTOR.is_full
        assert CANTOR.s == pytest.approx(S3, rel=1e-15)

    def test_digits_sorted_and_deduped(self):
        d = DigitSet(5, (4, 0, 4, 2))
        assert d.digits == (0, 2, 4)

    def test_validation(self):
        with pytest.raises(ValueError):
            DigitSet(1, (0,))
        with pytest.raises(ValueError):
            DigitSet(3, ())
        with pytest.raises(ValueError):
            DigitSet(3, (0, 3))
        with pytest.raises(ValueError):
            DigitSet(3, (-1,))


class TestPredictedDimension:
    def test_half(self):
        assert predicted_dimension(Fraction(2), 1.0) == pytest.approx(0.5)

    def test_cantor_nu_one(self):
        assert predicted_dimension(Fraction(1), S3) == pytest.approx(S3, rel=1e-12)

    def test_cantor_nu_three_is_empty(self):
        assert predicted_dimension(Fraction(3), S3) is EMPTY

    def test_boundary_value_is_zero_not_empty(self):
        # at nu = 1/(1-s) the formula gives exactly 0, which still counts
        assert predicted_dimension(Fraction(2), 0.5) == pytest.approx(0.0, abs=1e-12)

    def test_threshold(self):
        assert emptiness_threshold(S3) == pytest.approx(2.709511, abs=1e-5)
        assert emptiness_threshold(1.0) == math.inf
        assert predicted_dimension(Fraction(27, 10), S3) != EMPTY
        assert predicted_dimension(Fraction(271, 100), S3) is EMPTY

    def test_validation(self):
        with pytest.raises(ValueError):
            predicted_dimension(Fraction(1, 2), 0.5)
        with pytest.raises(ValueError):
            predicted_dimension(Fraction(2), 0.0)
        with pytest.raises(ValueError):
            predicted_dimension(Fraction(2), 1.5)
        with pytest.raises(ValueError):
            emptiness_threshold(-0.1)


class TestFrostmanGrid:
    def test_full_set_fills_every_cell(self):
        for n in (1, 5, 10):
            fc = frostman_grid(FULL2, n)
            assert fc.count == 2**n
            assert fc.ratio == pytest.approx(1.0)

    def test_cantor_in_its_own_base(self):
        for m in (1, 4, 8):
            fc = frostman_grid(CANTOR, m, grid_base=3)
            assert fc.count == 2**m
            assert fc.ratio == pytest.approx(1.0)

    def test_cantor_dyadic_ahlfors_sandwich(self):
        # one constant works across two decades of scales
        ratios = [frostman_grid(CANTOR, n).ratio for n in range(4, 21)]
        assert all(0.125 <= r <= 8 for r in ratios)
        # empirically the ratio hovers around 2; pin the window loosely
        assert all(1.5 <= r <= 2.5 for r in ratios)

    def test_counts_grow_with_depth(self):
        counts = [frostman_grid(CANTOR, n).count for n in range(2, 16)]
        assert all(b > a for a, b in zip(counts, counts[1:]))

    def test_matches_reference_cantor(self):
        for n in range(1, 11):
            assert frostman_grid(CANTOR, n).count == oracles.frostman_cells(
                3, (0, 2), n
            )

    def test_matches_reference_base4_endpoint_digits(self):
        # digits {0, 3}: cylinder endpoints may be dyadic, exercising the
        # open-cell overlap convention
        d = DigitSet(4, (0, 3))
        for n in range(1, 9):
            assert frostman_grid(d, n).count == oracles.frostman_cells(
                4, (0, 3), n
            )

    def test_validation(self):
        with pytest.raises(ValueError):
            frostman_grid(CANTOR, 0)
        with pytest.raises(ValueError):
            frostman_grid(CANTOR, 5, grid_base=1)
        with pytest.raises(ValueError):
            frostman_grid(CANTOR, 40)


class TestRadius:
    def test_integer_nu_is_exact(self):
        assert _radius(5, Fraction(2), 99) == Fraction(1, 25)
        assert _radius(7, Fraction(1), 10) == Fraction(1, 7)

    def test_non_integer_golden(self):
        # 2^(-3/2) truncated to 20 fractional bits
        assert _radius(2, Fraction(3, 2), 20) == Fraction(370727, 1 << 20)

    @given(
        n=st.integers(2, 10**6),
        p=st.integers(1, 7),
        qm1=st.integers(1, 4),
        bits=st.integers(8, 80),
    )
    def test_truncation_brackets_true_radius(self, n, p, qm1, bits):
        q = qm1 + 1
        nu = Fraction(p * q + 1, q)  # never an integer
        r = _radius(n, nu, bits)
        m = r.numerator * ((1 << bits) // r.denominator)
        pn, qn = nu.numerator, nu.denominator
        # m/2^bits <= n^-nu < (m+1)/2^bits, checked in integers
        assert m**qn * n**pn <= (1 << (bits * qn))
        assert (m + 1) ** qn * n**pn > (1 << (bits * qn))


class TestBoxHits:
    def _oracle_case(self, terms, n0, n1, nu_int, x, base, digits, depth):
        cfg = LimsupConfig(
            Explicit(tuple(terms)), Fraction(nu_int), (n0, n1), (1, 8), x=x
        )
        mine = box_hits(cfg, DigitSet(base, digits), depth)
        xf = Fraction(x.value, 1 << x.precision)
        centers = [
            Fraction((terms[n - 1] * x.value) % (1 << x.precision), 1 << x.precision)
            for n in range(n0 + 1, n1 + 1)
        ]
        radii = [Fraction(1, n**nu_int) for n in range(n0 + 1, n1 + 1)]
        assert mine == oracles.box_hits(centers, radii, base, digits, depth)

    def test_matches_reference_linear_sequence(self):
        x = UnitPoint(value=0xDEADBEEFCAFEBABE1234567890ABCDEF, precision=128)
        terms = [3 * n + 1 for n in range(1, 13)]
        for n0, n1 in [(2, 12), (1, 6)]:
            for base, digits in [(2, (0, 1)), (3, (0, 2)), (4, (0, 2, 3))]:
                for depth in range(1, 7):
                    self._oracle_case(terms, n0, n1, 1, x, base, digits, depth)

    def test_matches_reference_quadratic_radius(self):
        x = UnitPoint(value=0xDEADBEEFCAFEBABE1234567890ABCDEF, precision=128)
        terms = [3 * n + 1 for n in range(1, 13)]
        for base, digits in [(2, (0, 1)), (3, (0, 2))]:
            for depth in range(1, 8):
                self._oracle_case(terms, 1, 12, 2, x, base, digits, depth)

    def test_power_of_two_path_matches_reference(self):
        v = int.from_bytes(bytes(range(1, 33)), "big")
        x = UnitPoint(value=v, precision=256)
        cfg = LimsupConfig(POW2, Fraction(1), (2, 10), (1, 8), x=x)
        centers = [
            Fraction((v << n) % (1 << 256), 1 << 256) for n in range(3, 11)
        ]
        radii = [Fraction(1, n) for n in range(3, 11)]
        for base, digits in [(2, (0, 1)), (3, (0, 2))]:
            for depth in range(1, 7):
                mine = box_hits(cfg, DigitSet(base, digits), depth)
                assert mine == oracles.box_hits(centers, radii, base, digits, depth)

    @given(
        data=st.data(),
        vbits=st.integers(1, (1 << 96) - 1),
        depth=st.integers(1, 4),
        base=st.integers(2, 4),
        nu_int=st.integers(1, 2),
    )
    def test_matches_reference_randomized(self, data, vbits, depth, base, nu_int):
        digits = tuple(
            sorted(
                data.draw(
                    st.sets(
                        st.integers(0, base - 1), min_size=1, max_size=base
                    )
                )
            )
        )
        terms = sorted(
            data.draw(st.sets(st.integers(1, 60), min_size=2, max_size=8))
        )
        x = UnitPoint(value=vbits, precision=96)
        n1 = len(terms)
        n0 = data.draw(st.integers(1, n1 - 1))
        self._oracle_case(terms, n0, n1, nu_int, x, base, digits, depth)

    def test_empty_tail_counts_nothing(self):
        x = _dyadic_point(128)
        cfg = LimsupConfig(Explicit((2, 5, 9)), Fraction(1), (2, 2), (1, 8), x=x)
        assert box_hits(cfg, FULL2, 6) == 0

    def test_saturating_arcs_hit_every_admissible_cell(self):
        x = _dyadic_point(128)
        cfg = LimsupConfig(Explicit((2, 3, 5)), Fraction(1), (1, 3), (1, 8), x=x)
        assert box_hits(cfg, FULL2, 7) == 128
        assert box_hits(cfg, CANTOR, 5) == 32

    def test_cantor_saturated_tail_count(self):
        # q_n = 2^n, nu = 1, tail (2^8, 2^16]: the union covers the circle
        # about 11-fold at depth 10, so every admissible cell is hit
        need = (1 + 2**16) + (3**10).bit_length() + 64
        for trial in (0, 1):
            x = _sampled_point(need, 0, trial)
            cfg = LimsupConfig(POW2, Fraction(1), (2**8, 2**16), (1, 10), x=x)
            assert box_hits(cfg, CANTOR, 10) == 2**10

    def test_monotone_in_tail_start(self):
        x = _dyadic_point(312, fill=7)
        seq = Explicit(tuple(n * n + 3 for n in range(1, 25)))
        counts = []
        for n0 in (1, 3, 6, 10, 14):
            cfg = LimsupConfig(seq, Fraction(1), (n0, 18), (1, 6), x=x)
            counts.append(box_hits(cfg, CANTOR, 6))
        assert all(b <= a for a, b in zip(counts, counts[1:]))

    def test_monotone_in_tail_end(self):
        x = _dyadic_point(312, fill=7)
        seq = Explicit(tuple(n * n + 3 for n in range(1, 25)))
        counts = []
        for n1 in (4, 8, 12, 18, 24):
            cfg = LimsupConfig(seq, Fraction(1), (2, n1), (1, 6), x=x)
            counts.append(box_hits(cfg, FULL2, 6))
        assert all(b >= a for a, b in zip(counts, counts[1:]))

    def test_full_digit_set_dominates_restricted(self):
        x = _dyadic_point(312, fill=7)
        seq = Explicit(tuple(n * n + 3 for n in range(1, 25)))
        cfg = LimsupConfig(seq, Fraction(1), (2, 20), (1, 6), x=x)
        assert box_hits(cfg, FULL2, 6) >= box_hits(cfg, DigitSet(2, (0,)), 6)
        assert box_hits(cfg, DigitSet(3, (0, 1, 2)), 5) >= box_hits(cfg, CANTOR, 5)

    def test_count_shrinks_as_nu_grows(self):
        x = _dyadic_point(312, fill=13)
        seq = Explicit(tuple(2 * n + 1 for n in range(1, 30)))
        cfg = lambda nu: LimsupConfig(seq, nu, (2, 29), (1, 8), x=x)
        c1 = box_hits(cfg(Fraction(1)), FULL2, 8)
        c32 = box_hits(cfg(Fraction(3, 2)), FULL2, 8)
        c2 = box_hits(cfg(Fraction(2)), FULL2, 8)
        assert c1 >= c32 >= c2 > 0

    def test_precision_error_power_of_two(self):
        x = UnitPoint(value=(1 << 63) | 12345, precision=64)
        cfg = LimsupConfig(POW2, Fraction(1), (16, 4096), (1, 9), x=x)
        with pytest.raises(PrecisionError, match="fractional bits"):
            box_hits(cfg, FULL2, 9)

    def test_precision_error_general(self):
        x = UnitPoint(value=(1 << 63) | 12345, precision=64)
        cfg = LimsupConfig(
            Explicit((10**30, 2 * 10**30)), Fraction(1), (1, 2), (1, 9), x=x
        )
        with pytest.raises(PrecisionError, match="fractional bits"):
            box_hits(cfg, FULL2, 9)

    def test_precision_error_uncertain_point(self):
        v = (1 << 192) // 3
        x = UnitPoint(value=v, precision=192, err=1 << 185)
        cfg = LimsupConfig(
            Explicit((3, 7, 11, 19)), Fraction(4), (1, 4), (1, 9), x=x
        )
        with pytest.raises(PrecisionError, match="uncertainty"):
            box_hits(cfg, FULL2, 8)

    def test_small_uncertainty_inflates_without_changing_count(self):
        v = (1 << 192) // 3
        seq = Explicit((3, 7, 11, 19))
        with_err = LimsupConfig(
            seq, Fraction(1), (1, 4), (1, 9),
            x=UnitPoint(value=v, precision=192, err=1),
        )
        exact = LimsupConfig(
            seq, Fraction(1), (1, 4), (1, 9),
            x=UnitPoint(value=v, precision=192),
        )
        assert box_hits(with_err, FULL2, 8) == box_hits(exact, FULL2, 8) == 256

    def test_missing_point_rejected(self):
        cfg = LimsupConfig(POW2, Fraction(1), (1, 8), (1, 4))
        with pytest.raises(ValueError, match="sample point"):
            box_hits(cfg, FULL2, 3)

    def test_bad_depth_rejected(self):
        cfg = LimsupConfig(POW2, Fraction(1), (1, 8), (1, 4), x=_dyadic_point(128))
        with pytest.raises(ValueError, match="depth"):
            box_hits(cfg, FULL2, 0)

    def test_config_validation(self):
        with pytest.raises(ValueError, match="nu"):
            LimsupConfig(POW2, Fraction(1, 2), (1, 8), (1, 4))
        with pytest.raises(ValueError, match="tail"):
            LimsupConfig(POW2, Fraction(1), (0, 8), (1, 4))
        with pytest.raises(ValueError, match="tail"):
            LimsupConfig(POW2, Fraction(1), (8, 2), (1, 4))
        with pytest.raises(ValueError, match="scales"):
            LimsupConfig(POW2, Fraction(1), (1, 8), (4, 1))


class TestResolvabilityBand:
    def test_goldens(self):
        assert resolvability_band(5, Fraction(1), 2) == (4, 256)
        assert resolvability_band(8, Fraction(2), 2) == (6, 45)
        assert resolvability_band(10, Fraction(1), 3) == (7382, 472392)

    @given(
        depth=st.integers(1, 30),
        p=st.integers(1, 5),
        q=st.integers(1, 3),
        base=st.integers(2, 5),
    )
    def test_band_bounds_are_tight(self, depth, p, q, base):
        nu = Fraction(p, q)
        if nu < 1:
            nu = 1 / nu
        p, q = nu.numerator, nu.denominator
        lo, hi = resolvability_band(depth, nu, base)
        big = base**depth
        # n_lo is the first index whose radius drops to cell*8 or below
        assert 8**q * lo**p >= big**q
        if lo > 1:
            assert 8**q * (lo - 1) ** p < big**q
        # n_hi is the last index whose radius is at least cell/8
        assert hi**p <= (8 * big) ** q
        assert (hi + 1) ** p > (8 * big) ** q


class TestDefaultScales:
    def test_goldens(self):
        assert default_scales(Fraction(1), (16, 65536)) == (8, 14)
        assert default_scales(Fraction(1), (16, 16384)) == (8, 12)
        assert default_scales(Fraction(2), (4, 4096)) == (8, 22)
        assert default_scales(Fraction(1), (16, 16384), base=3) == (5, 7)

    def test_thin_tail_rejected(self):
        with pytest.raises(ValueError, match="usable scales"):
            default_scales(Fraction(1), (100, 500))


class TestEstimateDimension:
    def test_lacunary_nu_one_slope(self):
        cfg = LimsupConfig(POW2, Fraction(1), (16, 16384), (8, 12))
        est = estimate_dimension(cfg, FULL2, seeds=5)
        assert est.verdict == "ok"
        assert est.slope == pytest.approx(1.0, abs=0.01)
        assert est.slope_spread < 0.01
        assert est.scale_range == (8, 12)
        assert est.grid_base == 2
        assert len(est.counts) == 5 * 5
        assert len(est.per_seed_slopes) == 5
        assert est.residual < 0.05

    def test_lacunary_nu_two_slope(self):
        cfg = LimsupConfig(POW2, Fraction(2), (4, 4096), (8, 22))
        est = estimate_dimension(cfg, FULL2, seeds=8)
        assert est.verdict == "ok"
        assert est.slope == pytest.approx(0.5, abs=0.07)
        assert est.slope_spread < 0.05

    def test_cantor_slope_matches_its_dimension(self):
        cfg = LimsupConfig(POW2, Fraction(1), (16, 16384), (5, 7))
        est = estimate_dimension(cfg, CANTOR, seeds=5)
        assert est.grid_base == 3
        assert est.slope == pytest.approx(S3, abs=0.02)

    def test_quadratic_sequence_slope(self):
        cfg = LimsupConfig(Polynomial((0, 0, 1)), Fraction(1), (16, 8192), (8, 11))
        est = estimate_dimension(cfg, FULL2, seeds=5)
        assert est.slope == pytest.approx(1.0, abs=0.02)

    def test_empty_regime_verdict(self):
        cfg = LimsupConfig(POW2, Fraction(4), (256, 512), (20, 22))
        est = estimate_dimension(cfg, CANTOR, seeds=5)
        assert est.verdict == "empty"
        assert math.isnan(est.slope)
        assert est.per_seed_slopes == ()
        assert all(c == 0 for _, _, c in est.counts)
        assert len(est.counts) == 5 * 3

    def test_counts_table_is_complete(self):
        cfg = LimsupConfig(POW2, Fraction(2), (4, 1024), (8, 18))
        est = estimate_dimension(cfg, FULL2, seeds=5)
        seen = {(t, j) for t, j, _ in est.counts}
        assert seen == {(t, j) for t in range(5) for j in range(8, 19)}

    def test_validation(self):
        cfg = LimsupConfig(POW2, Fraction(1), (16, 16384), (8, 12))
        with pytest.raises(ValueError, match="seeds"):
            estimate_dimension(cfg, FULL2, seeds=4)
        narrow = LimsupConfig(POW2, Fraction(1), (16, 16384), (8, 9))
        with pytest.raises(ValueError, match="scales"):
            estimate_dimension(narrow, FULL2, seeds=5)
        # scales whose resolvability band misses the tail entirely
        off = LimsupConfig(POW2, Fraction(1), (4096, 8192), (1, 5))
        with pytest.raises(ValueError, match="no tail indices"):
            estimate_dimension(off, FULL2, seeds=5)


class TestEmptyRegimeDecay:
    """Above the emptiness threshold, counts at the coupled scale die off
    as the tail start grows; below it they grow."""

    @staticmethod
    def _mean_counts(nu, tail_starts, seeds=8):
        means, all_counts = [], []
        for n0 in tail_starts:
            depth = max(
                1, math.ceil(float(nu) * math.log2(n0) * math.log(2) / math.log(3))
            )
            need = (1 + 2 * n0) + (3**depth).bit_length() + 64
            counts = []
            for trial in range(seeds):
                x = _sampled_point(need, 0, trial)
                cfg = LimsupConfig(POW2, nu, (n0, 2 * n0), (1, depth), x=x)
                counts.append(box_hits(cfg, CANTOR, depth))
            means.append(sum(counts) / seeds)
            all_counts.append(counts)
        return means, all_counts

    def test_above_threshold_counts_vanish(self):
        # nu = 4 > 2.709...: predicted intersection is empty
        means, counts = self._mean_counts(Fraction(4), [2, 16, 256, 1024])
        assert means[0] >= 0.5
        assert means[0] > means[-1]
        assert means[-1] < 0.5
        # at the two largest tail starts every seed counts zero cells
        assert all(c == 0 for c in counts[-1])
        assert all(c == 0 for c in counts[-2])

    def test_below_threshold_counts_grow(self):
        means, counts = self._mean_counts(Fraction(2), [2, 64, 1024])
        assert means[-1] > 4 * means[0] / 2
        assert means[-1] > 5
        assert all(c > 0 for row in counts for c in row)
