"""Relative-frequency tests."""

# run these tests like:
#
#    python -m unittest test_frequencies.py


from collections import Counter
from itertools import product
from unittest import TestCase

import numpy as np
import pandas as pd

from exceptions import ValidationError
from frequencies import (
    Axis, JointFrequencyField, build_joint, conditional, conditional_all,
    marginal_current, marginal_previous, persistence, summarize_daily,
    summarize_persistence)
from generator.markov import MarkovSpec, simulate
from models import N_WT, RegionOfInterest, SeasonWindow, WeatherType, WtSeries

A = WeatherType.PA
C = WeatherType.PC

ONE_POINT = RegionOfInterest(((0.0, 40.0),))
WINDOW = SeasonWindow(first_year=2001, last_year=2001)


def one_point_series(wts, start="2001-06-01"):
    dates = pd.date_range(start, periods=len(wts), freq="D")
    return WtSeries("t", ONE_POINT, dates, np.array(wts).reshape(-1, 1))


def brute_force_joint(columns):
    """Joint rf by counting (today, yesterday) pairs in plain Python."""

    n_s = len(columns)
    rf = np.zeros((n_s, N_WT, N_WT))
    for s, column in enumerate(columns):
        pairs = Counter(zip(column[1:], column[:-1]))
        total = len(column) - 1
        for (today, yesterday), n in pairs.items():
            rf[s, today - 1, yesterday - 1] = n / total
    return rf


class BuildJointTestCase(TestCase):

    def test_small_example(self):
        joint = build_joint(one_point_series([A, A, C, A]), WINDOW)

        self.assertEqual(joint.pair_count[0], 3)
        self.assertAlmostEqual(joint.rf_joint[0, A - 1, A - 1], 1 / 3)
        self.assertAlmostEqual(joint.rf_joint[0, C - 1, A - 1], 1 / 3)
        self.assertAlmostEqual(joint.rf_joint[0, A - 1, C - 1], 1 / 3)
        self.assertAlmostEqual(joint.rf_joint.sum(), 1.0)

    def test_constant_series(self):
        joint = build_joint(one_point_series([A] * 10), WINDOW)

        self.assertEqual(joint.rf_joint[0, A - 1, A - 1], 1.0)
        self.assertEqual(joint.rf_joint.sum(), 1.0)

    def test_pairs_do_not_cross_blocks(self):
        dates = SeasonWindow(first_year=2001, last_year=2002).dates()
        series = WtSeries("t", ONE_POINT, dates, np.ones((len(dates), 1), dtype=int))
        joint = build_joint(series, SeasonWindow(first_year=2001, last_year=2002))

        self.assertEqual(len(dates), 244)
        self.assertEqual(joint.pair_count[0], 242)

    def test_out_of_window_days_dropped(self):
        # 30 and 31 May fall outside the window and never pair with 1 June
        series = one_point_series([C, C, A, A], start="2001-05-30")
        joint = build_joint(series, WINDOW)

        self.assertEqual(joint.pair_count[0], 1)
        self.assertEqual(joint.rf_joint[0, A - 1, A - 1], 1.0)

    def test_no_pairs(self):
        with self.assertRaises(ValidationError):
            build_joint(one_point_series([A]), WINDOW)

    def test_exhaustive_oracle(self):
        """Every series of length <= 10 over three types, in chunks of points."""

        for length in range(2, 11):
            block = [list(series) for series in product((1, 2, 3), repeat=length)]
            for start in range(0, len(block), 6561):
                chunk = block[start:start + 6561]
                roi = RegionOfInterest(tuple((float(i), 0.0) for i in range(len(chunk))))
                dates = pd.date_range("2001-06-01", periods=length, freq="D")
                series = WtSeries("oracle", roi, dates, np.array(chunk).T)

                expected = brute_force_joint(chunk)
                joint = build_joint(series, WINDOW)
                np.testing.assert_array_equal(
                    joint.counts, np.rint(expected * (length - 1)))
                np.testing.assert_allclose(joint.rf_joint, expected, rtol=0, atol=1e-15)


class JointFieldTestCase(TestCase):

    def test_rejects_bad_sum(self):
        rf = np.zeros((1, N_WT, N_WT))
        rf[0, 0, 0] = 0.98

        with self.assertRaises(ValidationError):
            JointFrequencyField(ONE_POINT, rf, [50])

    def test_rejects_fractional_counts(self):
        rf = np.zeros((1, N_WT, N_WT))
        rf[0, 0, 0] = 0.5
        rf[0, 1, 1] = 0.5

        with self.assertRaises(ValidationError):
            JointFrequencyField(ONE_POINT, rf, [3])


class DerivedFieldsTestCase(TestCase):

    def setUp(self):
        self.joint = build_joint(one_point_series([A, A, C, A]), WINDOW)

    def test_marginals(self):
        current = marginal_current(self.joint)
        previous = marginal_previous(self.joint)

        self.assertIs(current.axis_tag, Axis.CURRENT)
        self.assertAlmostEqual(current.rf_daily[0, A - 1], 2 / 3)
        self.assertAlmostEqual(current.rf_daily[0, C - 1], 1 / 3)
        self.assertAlmostEqual(previous.rf_daily[0, A - 1], 2 / 3)
        self.assertAlmostEqual(previous.rf_daily[0, C - 1], 1 / 3)

    def test_conditional(self):
        field = conditional(self.joint, A, min_support=1)

        self.assertTrue(field.defined[0])
        self.assertEqual(field.support[0], 2)
        self.assertAlmostEqual(field.rf_cond[0, A - 1], 0.5)
        self.assertAlmostEqual(field.rf_cond[0, C - 1], 0.5)

    def test_conditional_below_support(self):
        field = conditional(self.joint, A, min_support=3)

        self.assertFalse(field.defined[0])
        self.assertTrue(np.isnan(field.rf_cond[0]).all())
        self.assertEqual(field.coverage, 0.0)

    def test_conditional_on_unseen_type(self):
        field = conditional(self.joint, WeatherType.U, min_support=0)

        self.assertFalse(field.defined.any())

    def test_forced_transition(self):
        joint = build_joint(one_point_series([A, C] * 10), WINDOW)

        self.assertEqual(conditional(joint, A, 1).rf_cond[0, C - 1], 1.0)
        self.assertEqual(persistence(joint, 1).per_rf[0, A - 1], 0.0)
        self.assertEqual(persistence(joint, 1).per_rf[0, C - 1], 0.0)

    def test_persistence_of_constant_series(self):
        joint = build_joint(one_point_series([A] * 40), WINDOW)
        per = persistence(joint)

        self.assertEqual(per.per_rf[0, A - 1], 1.0)
        self.assertEqual(per.defined.sum(), 1)

    def test_conditional_all(self):
        fields = conditional_all(self.joint, min_support=1)

        self.assertEqual(len(fields), N_WT)
        self.assertEqual(sum(f.defined[0] for f in fields.values()), 2)


class ConservationTestCase(TestCase):

    def test_random_series(self):
        roi = RegionOfInterest.default()
        window = SeasonWindow()
        dates = window.dates()

        for seed in range(100):
            rng = np.random.default_rng(seed)
            values = rng.integers(1, N_WT + 1, size=(len(dates), roi.n_s))
            joint = build_joint(WtSeries(f"r{seed}", roi, dates, values), window)

            np.testing.assert_allclose(joint.rf_joint.sum(axis=(1, 2)), 1.0, atol=1e-9)
            current = marginal_current(joint).rf_daily
            previous = marginal_previous(joint).rf_daily
            np.testing.assert_allclose(current.sum(axis=1), 1.0, atol=1e-9)
            np.testing.assert_allclose(previous.sum(axis=1), 1.0, atol=1e-9)

            for j in (A, C, WeatherType.U):
                field = conditional(joint, j, min_support=1)
                rows = field.rf_cond[field.defined]
                np.testing.assert_allclose(rows.sum(axis=1), 1.0, atol=1e-9)
                np.testing.assert_allclose(
                    rows * previous[field.defined, j - 1][:, None],
                    joint.rf_joint[field.defined, :, j - 1],
                    rtol=0, atol=1e-12)

    def test_marginals_differ_only_at_block_edges(self):
        # each season block drops one day from either marginal
        roi = RegionOfInterest.default()
        window = SeasonWindow()
        dates = window.dates()
        bound_pairs = 2 * window.n_years

        for seed in range(5):
            rng = np.random.default_rng(seed)
            values = rng.integers(1, N_WT + 1, size=(len(dates), roi.n_s))
            joint = build_joint(WtSeries(f"r{seed}", roi, dates, values), window)

            l1 = np.abs(marginal_current(joint).rf_daily
                        - marginal_previous(joint).rf_daily).sum(axis=1)
            self.assertTrue((l1 <= bound_pairs / joint.pair_count + 1e-12).all(), l1.max())

    def test_marginal_edges_of_persistent_chain(self):
        roi = RegionOfInterest.default()
        window = SeasonWindow()
        spec = MarkovSpec.random(roi, seed=3, persistence=0.9).with_seed(4)
        joint = build_joint(simulate(spec, window), window)

        l1 = np.abs(marginal_current(joint).rf_daily
                    - marginal_previous(joint).rf_daily).sum(axis=1)
        bound = 2 * window.n_years / joint.pair_count

        self.assertTrue((l1 <= bound + 1e-12).all())
        # block starts are redrawn from the climatology, so the edges do differ
        self.assertGreater(l1.max(), 0.0)


class SummaryTestCase(TestCase):

    def test_daily_summary(self):
        joint = build_joint(one_point_series([A, A, C, A]), WINDOW)
        table = summarize_daily(marginal_current(joint), 3, [A, C])

        self.assertEqual(list(table["wt"]), ["PA", "PC"])
        self.assertAlmostEqual(table.loc[0, "median"], 2 / 3)
        self.assertEqual(table.loc[0, "n_min"], 2)
        self.assertEqual(table.loc[1, "n_q25"], 1)

    def test_persistence_summary_skips_undefined(self):
        joint = build_joint(one_point_series([A] * 40), WINDOW)
        table = summarize_persistence(persistence(joint), [A, C])

        self.assertEqual(list(table["wt"]), ["PA"])
        self.assertEqual(table.loc[0, "mean"], 1.0)
        self.assertTrue(np.isnan(table.loc[0, "sd"]))
