"""Domain model tests."""

# run these tests like:
#
#    python -m unittest test_models.py


from unittest import TestCase

import numpy as np
import pandas as pd

from exceptions import DomainError, NoInWindowDataError, ValidationError
from models import (
    DEFAULT_WT_STAR, KEY_POINTS, GridSpec, RegionOfInterest, SeasonWindow,
    WeatherType, WtSeries, parse_wt_list, season_mask)


class WeatherTypeTestCase(TestCase):

    def test_from_index(self):
        self.assertIs(WeatherType.from_index(1), WeatherType.PA)
        self.assertIs(WeatherType.from_index(27), WeatherType.U)
        self.assertIs(WeatherType.from_index(np.int64(18)), WeatherType.PC)

        for bad in (0, 28, -1, 2.5, "3", None):
            with self.assertRaises(DomainError):
                WeatherType.from_index(bad)

    def test_from_code(self):
        self.assertIs(WeatherType.from_code("pdne"), WeatherType.PDNE)
        self.assertEqual(WeatherType.PDNE.code, "PDNE")

        with self.assertRaises(DomainError):
            WeatherType.from_code("XYZ")

    def test_families(self):
        families = [wt.family for wt in WeatherType]

        self.assertEqual(families.count("A"), 9)
        self.assertEqual(families.count("C"), 9)
        self.assertEqual(families.count("D"), 8)
        self.assertEqual(families.count("U"), 1)

    def test_compose_and_direction(self):
        self.assertIs(WeatherType.compose("D", "W"), WeatherType.PDW)
        self.assertIs(WeatherType.compose("A", "NE"), WeatherType.DANE)
        self.assertIs(WeatherType.compose("C", "N"), WeatherType.DCN)
        self.assertEqual(WeatherType.DCSW.direction, "SW")
        self.assertIsNone(WeatherType.PA.direction)

    def test_parse_wt_list(self):
        self.assertEqual(parse_wt_list("PA, pdne,PC,U"), DEFAULT_WT_STAR)

        with self.assertRaises(ValidationError):
            parse_wt_list("PA,PA")
        with self.assertRaises(ValidationError):
            parse_wt_list(",")
        with self.assertRaises(DomainError):
            parse_wt_list("PA,ZZ")


class GeometryTestCase(TestCase):

    def test_default_region(self):
        roi = RegionOfInterest.default()

        self.assertEqual(roi.n_s, 30)
        self.assertEqual(roi.grid.shape, (5, 6))
        self.assertEqual(roi.points[0], (-8.75, 35.0))
        self.assertEqual(roi.points[-1], (3.75, 45.0))

    def test_key_points_in_default_region(self):
        roi = RegionOfInterest.default()

        self.assertEqual(len(KEY_POINTS), 7)
        for point in KEY_POINTS.values():
            self.assertTrue(roi.contains(point))

    def test_uneven_grid_rejected(self):
        with self.assertRaises(ValidationError):
            GridSpec((0.0, 2.5, 7.5), (40.0,), 2.5)

    def test_region_rejects_duplicates_and_off_grid(self):
        grid = GridSpec.from_bounds(0, 5, 40, 45)

        with self.assertRaises(ValidationError):
            RegionOfInterest(((0.0, 40.0), (0.0, 40.0)), grid)
        with self.assertRaises(ValidationError):
            RegionOfInterest(((1.0, 40.0),), grid)

    def test_index_of_rounds_coordinates(self):
        roi = RegionOfInterest.default()

        self.assertEqual(roi.index_of((-8.7500000001, 35.0)), 0)
        with self.assertRaises(ValidationError):
            roi.index_of((100.0, 0.0))

    def test_subset_keeps_order(self):
        roi = RegionOfInterest.default()
        sub = roi.subset([(3.75, 45.0), (-8.75, 35.0)])

        self.assertEqual(sub.points, ((3.75, 45.0), (-8.75, 35.0)))
        self.assertTrue(roi.same_points(roi.subset(list(reversed(roi.points)))))


class SeasonWindowTestCase(TestCase):

    def test_default_window_day_count(self):
        self.assertEqual(len(SeasonWindow().dates()), 3294)

    def test_one_year(self):
        window = SeasonWindow(first_year=2001, last_year=2001)
        self.assertEqual(len(window.dates()), 122)

    def test_invalid_windows(self):
        with self.assertRaises(ValidationError):
            SeasonWindow(months=frozenset())
        with self.assertRaises(ValidationError):
            SeasonWindow(months={13})
        with self.assertRaises(ValidationError):
            SeasonWindow(first_year=2005, last_year=1979)


class SeriesTestCase(TestCase):

    def setUp(self):
        self.roi = RegionOfInterest(((0.0, 40.0), (2.5, 40.0)))
        dates = pd.date_range("2001-05-30", "2001-06-03", freq="D")
        values = np.tile([[1], [27]], len(dates)).T
        self.series = WtSeries("s", self.roi, dates, values)

    def test_validation(self):
        with self.assertRaises(DomainError):
            WtSeries("bad", self.roi, self.series.dates,
                     np.zeros((5, 2), dtype=int))
        with self.assertRaises(ValidationError):
            WtSeries("bad", self.roi, self.series.dates[::-1],
                     self.series.values)
        with self.assertRaises(ValidationError):
            WtSeries("bad", self.roi, self.series.dates, np.ones((4, 2)))

    def test_season_mask(self):
        masked = season_mask(self.series, SeasonWindow(first_year=2001, last_year=2001))

        self.assertEqual(masked.n_days, 3)
        self.assertEqual(masked.dates[0], pd.Timestamp("2001-06-01"))
        np.testing.assert_array_equal(masked.at((2.5, 40.0)), [27, 27, 27])

    def test_season_mask_is_idempotent(self):
        window = SeasonWindow(first_year=2001, last_year=2001)
        once = season_mask(self.series, window)

        self.assertTrue(season_mask(once, window).equals(once))

    def test_season_mask_empty(self):
        with self.assertRaises(NoInWindowDataError):
            season_mask(self.series, SeasonWindow(months={12}))

    def test_take_points(self):
        flipped = self.series.take_points(
            RegionOfInterest(((2.5, 40.0), (0.0, 40.0))))

        np.testing.assert_array_equal(flipped.values[0], [27, 1])
