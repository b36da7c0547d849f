"""Tests for random arc coverings: interval algebra, trials, summability."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from circlecover import coverset
from circlecover._accel import HAVE_NUMBA
from circlecover._seeding import trial_rng
from circlecover.arith import UnitPoint
from circlecover.coverset import (
    Arc,
    ArcSet,
    Verdict,
    dvoretzky_trial,
    expected_uncovered,
    explicit_lengths,
    grid_covered_infinitely_often,
    harmonic,
    psi_driven,
    run_trials,
    shepp_critical,
    shepp_terms,
    subtract_arc,
)

M64 = 1 << 64


def arc_at(center_frac, length) -> Arc:
    return Arc(center=UnitPoint.from_real(Fraction(center_frac), bits=64),
               length=Fraction(length))


# ---------------------------------------------------------------------------
# ArcSet algebra
# ---------------------------------------------------------------------------


class TestArcSet:
    def test_full_minus_length_one_arc_is_empty(self):
        full = ArcSet.full(64)
        out = subtract_arc(full, arc_at(Fraction(1, 3), 1))
        assert out.is_empty
        assert out.measure == 0
        assert out.components == 0

    def test_full_minus_fifth_has_measure_four_fifths(self):
        out = subtract_arc(ArcSet.full(64), arc_at(Fraction(1, 2), Fraction(1, 5)))
        q = (2**65 + 5) // 10  # 1/5 rounded to the 64-bit grid, half-up
        assert out.measure == Fraction(M64 - q, M64)
        assert abs(float(out.measure) - 0.8) < 1e-15
        assert out.components == 1  # wraps through 0: one circular piece
        assert len(out.intervals) == 2

    def test_subtract_dyadic_arc_is_exact(self):
        # arc [1/4, 1/2) removed exactly: remaining measure 3/4, one component
        out = subtract_arc(ArcSet.full(64), arc_at(Fraction(3, 8), Fraction(1, 4)))
        assert out.measure == Fraction(3, 4)
        assert out.intervals == ((0, 1 << 62), (1 << 63, M64))

    def test_empty_stays_empty(self):
        out = subtract_arc(ArcSet.empty(64), arc_at(Fraction(1, 7), Fraction(1, 9)))
        assert out.is_empty

    def test_zero_length_arc_changes_nothing(self):
        full = ArcSet.full(64)
        assert subtract_arc(full, arc_at(Fraction(1, 7), 0)) == full

    def test_validation_rejects_disorder(self):
        with pytest.raises(ValueError):
            ArcSet(intervals=((0, 10), (5, 20)), precision=64)
        with pytest.raises(ValueError):
            ArcSet(intervals=((0, 10), (10, 20)), precision=64)  # adjacent
        with pytest.raises(ValueError):
            ArcSet(intervals=((3, 3),), precision=64)  # empty interval

    def test_contains(self):
        out = subtract_arc(ArcSet.full(64), arc_at(Fraction(1, 4), Fraction(1, 2)))
        # removed [0, 1/2); remaining [1/2, 1)
        assert not out.contains(UnitPoint.from_real(Fraction(1, 4), bits=64))
        assert out.contains(UnitPoint.from_real(Fraction(3, 4), bits=64))
        assert out.contains(UnitPoint.from_real(Fraction(1, 2), bits=64))
        assert not out.contains(UnitPoint.from_real(Fraction(0), bits=64))

    def test_subtract_at_high_precision(self):
        bits = 256
        full = ArcSet.full(bits)
        arc = Arc(center=UnitPoint.from_real(Fraction(1, 2), bits=bits),
                  length=Fraction(1, 3))
        out = full.subtract(arc)
        q = ((1 << (bits + 1)) + 3) // 6
        assert out.measure == Fraction((1 << bits) - q, 1 << bits)

    @given(
        st.lists(
            st.tuples(st.integers(0, M64 - 1), st.integers(0, M64)),
            min_size=1,
            max_size=12,
        )
    )
    @settings(max_examples=40)
    def test_subtract_matches_fraction_oracle(self, raw_arcs):
        current = ArcSet.full(64)
        centers, lengths = [], []
        for c_ulps, l_ulps in raw_arcs:
            arc = Arc(center=UnitPoint(value=c_ulps, precision=64),
                      length=Fraction(l_ulps, M64))
            current = current.subtract(arc)
            # oracle center chosen so that center - length/2 lands exactly on
            # the quantised start c - (L >> 1): avoids the half-ulp split
            start = (c_ulps - (l_ulps >> 1)) % M64
            centers.append(Fraction(start, M64) + Fraction(l_ulps, 2 * M64))
            lengths.append(Fraction(l_ulps, M64))
        measure, _, n_comp = oracles.uncovered_after_arcs(centers, lengths)
        assert current.measure == measure
        assert current.components == n_comp


# ---------------------------------------------------------------------------
# Length sequences and the expected product
# ---------------------------------------------------------------------------


class TestLengths:
    def test_harmonic_values(self):
        seq = harmonic(Fraction(1, 2))
        assert seq.values(4) == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 6),
                                 Fraction(1, 8)]

    def test_monotone_claim_is_checked(self):
        with pytest.raises(ValueError):
            coverset.LengthSequence(rule=lambda n: Fraction(n, 100),
                                    claims_monotone=True)

    def test_shepp_critical_values(self):
        seq = shepp_critical(1.0)
        assert seq.rule(1) == 0.0
        assert seq.rule(2) == 0.0  # 1/2 - 1/(2 * log2(2))
        assert seq.rule(4) == pytest.approx(0.25 - 0.125)

    def test_explicit_lengths_pad_with_zero(self):
        seq = explicit_lengths([Fraction(1, 2), Fraction(1, 3)])
        assert seq.values(4) == [Fraction(1, 2), Fraction(1, 3), 0, 0]

    def test_expected_uncovered_exact_product(self):
        assert expected_uncovered(harmonic(Fraction(1, 2)), 4) == Fraction(105, 384)

    def test_expected_uncovered_empty_product(self):
        assert expected_uncovered(harmonic(1), 0) == 1

    def test_expected_uncovered_hits_zero_when_a_length_reaches_one(self):
        # l_1 = 3/2 clips to 1, so every later product is zero
        assert expected_uncovered(harmonic(Fraction(3, 2)), 10) == 0

    def test_expected_uncovered_float_rule_matches_exact(self):
        approx = expected_uncovered(psi_driven(lambda n: 1.0 / (2 * n)), 4)
        assert abs(float(approx) - float(Fraction(105, 384))) < 1e-12

    def test_expected_matches_oracle(self):
        lens = [Fraction(1, k + 2) for k in range(12)]
        assert expected_uncovered(explicit_lengths(lens), 12) == (
            oracles.expected_uncovered(lens)
        )

    def test_quantisation_rounds_half_up(self):
        seq = explicit_lengths([Fraction(3, 2 * M64)])  # 1.5 ulps
        lens, full = seq.ulps(1, 64)
        assert lens[0] == 2 and not full[0]


# ---------------------------------------------------------------------------
# Monte Carlo trials
# ---------------------------------------------------------------------------


class TestTrials:
    def test_zero_arcs_leaves_full_circle(self):
        res = dvoretzky_trial(harmonic(1), 0, trial_rng(1, 0))
        assert res.uncovered == ArcSet.full(64)
        assert res.uncovered_measure == 1

    def test_first_length_one_covers_everything(self):
        res = dvoretzky_trial(harmonic(1), 1, trial_rng(1, 0))
        assert res.uncovered.is_empty
        assert res.step_measures[0] == 0.0

    def test_seed_reproducibility_is_bit_exact(self):
        a = dvoretzky_trial(harmonic(Fraction(1, 2)), 200, trial_rng(12345, 7))
        b = dvoretzky_trial(harmonic(Fraction(1, 2)), 200, trial_rng(12345, 7))
        assert a.uncovered == b.uncovered
        assert a.step_measures.tobytes() == b.step_measures.tobytes()

    def test_trial_streams_are_counter_based(self):
        batch = run_trials(harmonic(Fraction(1, 2)), 100, 3, master_seed=5)
        solo = dvoretzky_trial(harmonic(Fraction(1, 2)), 100, trial_rng(5, 2))
        assert batch[2].uncovered == solo.uncovered

    @pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")
    def test_backends_agree_bit_for_bit(self):
        seq = harmonic(Fraction(1, 2))
        for trial in range(3):
            nb = dvoretzky_trial(seq, 300, trial_rng(99, trial), backend="numba")
            py = dvoretzky_trial(seq, 300, trial_rng(99, trial), backend="python")
            assert nb.uncovered == py.uncovered
            assert nb.step_measures.tobytes() == py.step_measures.tobytes()

    def test_trial_matches_fraction_oracle(self):
        seq = harmonic(Fraction(1, 2))
        for trial in range(6):
            n_arcs = 25
            res = dvoretzky_trial(seq, n_arcs, trial_rng(31337, trial),
                                  backend="python")
            centers = trial_rng(31337, trial).integers(0, M64, size=n_arcs,
                                                       dtype=np.uint64)
            lens, _ = seq.ulps(n_arcs, 64)
            oc, ol = [], []
            for c, l in zip(centers, lens):
                start = (int(c) - (int(l) >> 1)) % M64
                oc.append(Fraction(start, M64) + Fraction(int(l), 2 * M64))
                ol.append(Fraction(int(l), M64))
            measure, _, n_comp = oracles.uncovered_after_arcs(oc, ol)
            assert res.uncovered_measure == measure
            assert res.components == n_comp

    def test_step_measures_decrease_by_at_most_arc_length(self):
        seq = harmonic(Fraction(1, 2))
        n_arcs = 50
        res = dvoretzky_trial(seq, n_arcs, trial_rng(7, 0))
        lens, _ = seq.ulps(n_arcs, 64)
        prev = 1.0
        for i in range(n_arcs):
            drop = prev - res.step_measures[i]
            assert -1e-12 <= drop <= float(Fraction(int(lens[i]), M64)) + 1e-12
            prev = res.step_measures[i]

    def test_final_step_measure_matches_exact_measure(self):
        res = dvoretzky_trial(harmonic(Fraction(1, 2)), 120, trial_rng(2, 4))
        assert res.step_measures[-1] == pytest.approx(
            float(res.uncovered_measure), abs=1e-9
        )

    def test_monte_carlo_mean_near_exact_expectation(self):
        seq = harmonic(Fraction(1, 2))
        n_arcs, n_trials = 64, 400
        results = run_trials(seq, n_arcs, n_trials, master_seed=2024)
        vals = np.array([float(r.uncovered_measure) for r in results])
        expect = float(expected_uncovered(seq, n_arcs))
        stderr = vals.std(ddof=1) / math.sqrt(n_trials)
        assert abs(vals.mean() - expect) <= 4 * stderr

    def test_python_backend_supports_other_precisions(self):
        res = dvoretzky_trial(harmonic(Fraction(1, 2)), 40, trial_rng(11, 0),
                              precision=96)
        assert res.uncovered.precision == 96
        assert 0 < res.uncovered_measure < 1

    def test_numba_backend_rejects_other_precisions(self):
        if not HAVE_NUMBA:
            pytest.skip("numba unavailable")
        with pytest.raises(ValueError):
            dvoretzky_trial(harmonic(1), 10, trial_rng(0, 0), precision=128,
                            backend="numba")


# ---------------------------------------------------------------------------
# Summability diagnostic
# ---------------------------------------------------------------------------


class TestShepp:
    def test_first_terms_exact(self):
        rep = shepp_terms(harmonic(1), 1000)
        assert rep.log_terms[0] == pytest.approx(1.0, abs=1e-15)
        rep2 = shepp_terms(harmonic(Fraction(1, 2)), 1000)
        assert rep2.log_terms[0] == pytest.approx(0.5, abs=1e-15)

    def test_terms_match_direct_evaluation(self):
        rep = shepp_terms(harmonic(Fraction(1, 2)), 500)
        ls = [0.5 / n for n in range(1, 501)]
        for n in (1, 10, 100, 499):
            direct = math.fsum(ls[:n]) - 2 * math.log(n)
            assert rep.log_terms[n - 1] == pytest.approx(direct, abs=1e-9)

    @pytest.mark.parametrize(
        "seq,expected",
        [
            (harmonic(1), Verdict.DIVERGES),
            (harmonic(Fraction(9, 10)), Verdict.CONVERGES),
            (harmonic(Fraction(3, 2)), Verdict.DIVERGES),
            (harmonic(Fraction(1, 2)), Verdict.CONVERGES),
            (shepp_critical(1.0), Verdict.DIVERGES),
            (shepp_critical(0.5), Verdict.CONVERGES),
        ],
    )
    def test_closed_form_verdicts(self, seq, expected):
        rep = shepp_terms(seq, 10_000)
        assert rep.verdict == expected
        assert rep.closed_form == expected

    def test_numeric_agrees_with_closed_form_unless_inconclusive(self):
        for seq in [harmonic(1), harmonic(Fraction(9, 10)),
                    harmonic(Fraction(3, 2)), harmonic(Fraction(1, 2)),
                    shepp_critical(1.0), shepp_critical(0.5)]:
            rep = shepp_terms(seq, 100_000)
            if rep.numeric_verdict is not Verdict.INCONCLUSIVE:
                assert rep.numeric_verdict == rep.closed_form, (
                    seq.family, seq.params, rep.fitted_exponent
                )

    def test_numeric_fit_pins_clear_cases(self):
        assert shepp_terms(harmonic(1), 100_000).numeric_verdict == Verdict.DIVERGES
        assert (
            shepp_terms(harmonic(Fraction(1, 2)), 100_000).numeric_verdict
            == Verdict.CONVERGES
        )

    def test_near_critical_exponent_sits_between_thresholds(self):
        rep = shepp_terms(harmonic(Fraction(9, 10)), 100_000)
        assert 1.02 < rep.fitted_exponent < 1.2
        assert rep.numeric_verdict == Verdict.INCONCLUSIVE

    def test_psi_family_has_no_closed_form(self):
        rep = shepp_terms(psi_driven(lambda n: 1.0 / n), 1000)
        assert rep.closed_form is None
        assert rep.verdict == rep.numeric_verdict

    def test_too_few_terms_rejected(self):
        with pytest.raises(ValueError):
            shepp_terms(harmonic(1), 50)


# ---------------------------------------------------------------------------
# Dyadic-window grid coverage
# ---------------------------------------------------------------------------


def _grid_counts_oracle(starts, lens, fulls, m, n_windows):
    counts = [0] * m
    for k in range(n_windows):
        lo, hi = 1 << k, 2 << k  # window holds arcs n in (lo, hi], 1-based
        pts = set()
        for i in range(lo + 1, hi + 1):
            if fulls[i]:
                pts.update(range(m))
                break
            a, l = int(starts[i]), int(lens[i])
            if l == 0:
                continue
            for j in range(m):
                if (Fraction(j * M64, m) - a) % M64 < l:
                    pts.add(j)
        for j in pts:
            counts[j] += 1
    return counts


class TestGridCoverage:
    def test_no_complete_window_means_zero_counts(self):
        counts = grid_covered_infinitely_often(harmonic(1), 1, 16, trial_rng(0, 0))
        assert counts.tolist() == [0] * 16

    def test_matches_bruteforce_oracle(self):
        seq = harmonic(Fraction(2, 3))
        m, n_arcs = 64, 32  # windows (1,2], (2,4], (4,8], (8,16], (16,32]
        for trial in range(4):
            counts = grid_covered_infinitely_often(seq, n_arcs, m,
                                                   trial_rng(555, trial))
            centers = trial_rng(555, trial).integers(0, M64, size=32,
                                                     dtype=np.uint64)
            lens, fulls = seq.ulps(32, 64)
            starts = [(int(c) - (int(l) >> 1)) % M64
                      for c, l in zip(centers, lens)]
            # oracle indexes arcs 1-based
            expected = _grid_counts_oracle([0] + starts, [0] + list(map(int, lens)),
                                           [False] + list(fulls), m, 5)
            assert counts.tolist() == expected

    def test_full_arcs_cover_their_window(self):
        # lengths 3/n: arcs 2 and 3 have length >= 1, so windows (1,2] and
        # (2,4] cover every grid point outright
        counts = grid_covered_infinitely_often(harmonic(3), 4, 32, trial_rng(9, 9))
        assert (counts >= 2).all()

    def test_abundant_lengths_cover_every_point_in_every_window(self):
        seq = harmonic(3)
        n_arcs, m = 1 << 20, 1 << 12
        hits = 0
        for trial in range(20):
            counts = grid_covered_infinitely_often(seq, n_arcs, m,
                                                   trial_rng(77, trial))
            if counts.min() >= 1:
                hits += 1
        assert hits == 20  # miss probability is astronomically small

    def test_grid_size_cap(self):
        with pytest.raises(ValueError):
            grid_covered_infinitely_often(harmonic(1), 8, (1 << 24) + 1,
                                          trial_rng(0, 0))
