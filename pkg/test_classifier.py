"""Weather-type classifier tests."""

# run these tests like:
#
#    python -m unittest test_classifier.py


from unittest import TestCase

from hypothesis import given, strategies as st
import numpy as np
import pandas as pd

from classifier import (
    ClassifierConfig, CrossStencil, FlowIndices, SlpField, classify_day,
    classify_series, compute_flow_indices, interior_region)
from exceptions import StencilOutOfBoundsError, ValidationError
from models import DIRECTIONS, GridSpec, RegionOfInterest, WeatherType

GRID = GridSpec.from_bounds(-20.0, 20.0, 25.0, 55.0, spacing=2.5)
CENTER = (0.0, 40.0)


def make_field(pressure_at, n_days=3):
    """SlpField whose day-d pressure at (lon, lat) is pressure_at(lon, lat, d)."""

    dates = pd.date_range("2001-06-01", periods=n_days, freq="D")
    cube = np.array([
        [[pressure_at(lon, lat, d) for lon in GRID.lon_values]
         for lat in GRID.lat_values]
        for d in range(n_days)
    ])
    return SlpField(GRID, dates, cube)


def opposite(wt):
    """The type a sign flip of every pressure anomaly maps `wt` to."""

    if wt is WeatherType.U:
        return wt
    if wt is WeatherType.PA:
        return WeatherType.PC
    if wt is WeatherType.PC:
        return WeatherType.PA

    kind = {"A": "C", "C": "A", "D": "D"}[wt.family]
    turned = DIRECTIONS[(DIRECTIONS.index(wt.direction) + 4) % 8]
    return WeatherType.compose(kind, turned)


class StencilTestCase(TestCase):

    def test_sixteen_points(self):
        stencil = CrossStencil(CENTER)

        self.assertEqual(len(stencil.points), 16)
        self.assertEqual(stencil.points[0], (-5.0, 50.0))
        self.assertEqual(stencil.points[-1], (5.0, 30.0))

    def test_out_of_bounds_names_the_point(self):
        stencil = CrossStencil((-20.0, 25.0))

        with self.assertRaises(StencilOutOfBoundsError) as cm:
            stencil.resolve(GRID)

        self.assertEqual(cm.exception.center, (-20.0, 25.0))
        self.assertIn("missing", str(cm.exception))

    def test_interior_region(self):
        roi = interior_region(GRID)

        self.assertEqual(roi.n_s, 25)
        self.assertTrue(roi.contains(CENTER))
        self.assertFalse(roi.contains((-20.0, 25.0)))

    def test_interior_region_of_small_grid(self):
        with self.assertRaises(ValidationError):
            interior_region(GridSpec.from_bounds(0, 5, 40, 45))


class FlowIndicesTestCase(TestCase):

    def test_uniform_field(self):
        field = make_field(lambda lon, lat, d: 1013.0)
        idx = compute_flow_indices(field, "2001-06-01", CrossStencil(CENTER))

        for name in ("W", "S", "F", "ZW", "ZS", "Z"):
            self.assertEqual(getattr(idx, name), 0.0)

    def test_meridional_gradient_unscaled(self):
        # 2 hPa per degree, higher pressure to the south
        field = make_field(lambda lon, lat, d: 1010.0 - 2.0 * (lat - 40.0))
        config = ClassifierConfig(latitude_scaling=False)
        idx = compute_flow_indices(field, "2001-06-01", CrossStencil(CENTER), config)

        self.assertEqual(idx.W, 20.0)
        self.assertEqual(idx.S, 0.0)
        self.assertEqual(idx.Z, 0.0)
        self.assertIs(classify_day(idx, config), WeatherType.PDW)

    def test_meridional_gradient_scaled(self):
        field = make_field(lambda lon, lat, d: 1010.0 - 2.0 * (lat - 40.0))
        idx = compute_flow_indices(field, "2001-06-01", CrossStencil(CENTER))

        self.assertGreater(idx.W, 0)
        self.assertLess(abs(idx.Z), idx.F)
        self.assertIs(classify_day(idx), WeatherType.PDW)

    def test_symmetric_low(self):
        field = make_field(
            lambda lon, lat, d: 990.0 + 0.1 * (lon ** 2 + (lat - 40.0) ** 2))
        idx = compute_flow_indices(field, "2001-06-01", CrossStencil(CENTER))

        self.assertEqual(idx.F, 0.0)
        self.assertGreater(idx.Z, 0)
        self.assertIs(classify_day(idx), WeatherType.PC)

    def test_symmetric_high(self):
        field = make_field(
            lambda lon, lat, d: 1030.0 - 0.1 * (lon ** 2 + (lat - 40.0) ** 2))
        idx = compute_flow_indices(field, "2001-06-01", CrossStencil(CENTER))

        self.assertLess(idx.Z, 0)
        self.assertIs(classify_day(idx), WeatherType.PA)

    def test_unknown_date(self):
        field = make_field(lambda lon, lat, d: 1013.0)

        with self.assertRaises(ValidationError):
            compute_flow_indices(field, "1999-01-01", CrossStencil(CENTER))


class ClassifyDayTestCase(TestCase):

    def classify(self, W, S, Z):
        return classify_day(FlowIndices(W, S, float(np.hypot(W, S)), 0.0, Z, Z))

    def test_examples(self):
        self.assertIs(self.classify(0.0, 0.0, 0.0), WeatherType.U)
        self.assertIs(self.classify(10.0, 0.0, 0.0), WeatherType.PDW)
        self.assertIs(self.classify(0.0, 10.0, 0.0), WeatherType.PDS)
        self.assertIs(self.classify(-10.0, -10.0, 0.0), WeatherType.PDNE)

    def test_rotational_with_small_flow(self):
        config = ClassifierConfig(u_flow=0.5, u_vort=0.5)
        idx = FlowIndices(1.0, 0.0, 1.0, 0.0, 5.0, 5.0)

        self.assertIs(classify_day(idx, config), WeatherType.PC)

    def test_hybrid(self):
        self.assertIs(self.classify(10.0, 0.0, 15.0), WeatherType.DCW)
        self.assertIs(self.classify(10.0, 0.0, -15.0), WeatherType.DAW)

    def test_exhaustive_grid_covers_every_type(self):
        seen = set()

        for W in np.arange(-20.0, 21.0, 2.0):
            for S in np.arange(-20.0, 21.0, 2.0):
                for Z in np.arange(-40.0, 41.0, 4.0):
                    seen.add(self.classify(W, S, Z))

        self.assertEqual(seen, set(WeatherType))

    @given(
        st.floats(-100, 100), st.floats(-100, 100), st.floats(-300, 300))
    def test_total(self, W, S, Z):
        wt = self.classify(W, S, Z)
        F = float(np.hypot(W, S))

        self.assertIsInstance(wt, WeatherType)
        if F < 6 and abs(Z) < 6:
            self.assertIs(wt, WeatherType.U)
        elif abs(Z) > 2 * F:
            self.assertIn(wt, (WeatherType.PA, WeatherType.PC))
        elif abs(Z) < F:
            self.assertEqual(wt.family, "D")


class ClassifySeriesTestCase(TestCase):

    def setUp(self):
        rng = np.random.default_rng(7)
        noise = rng.normal(0.0, 6.0, size=(5,) + GRID.shape)
        self.field = SlpField(
            GRID, pd.date_range("2001-06-01", periods=5, freq="D"), 1010.0 + noise)
        self.roi = interior_region(GRID)

    def test_uniform_field_is_unclassified(self):
        series = classify_series(make_field(lambda lon, lat, d: 1013.0), self.roi)

        self.assertTrue((series.values == WeatherType.U).all())

    def test_single_point_matches_classify_day(self):
        roi = RegionOfInterest((CENTER,), GRID)
        series = classify_series(self.field, roi)

        for d, date in enumerate(self.field.dates):
            idx = compute_flow_indices(self.field, date, CrossStencil(CENTER))
            self.assertEqual(series.values[d, 0], classify_day(idx))

    def test_negated_anomalies_swap_families(self):
        mean = self.field.pressure.mean()
        negated = SlpField(GRID, self.field.dates, 2 * mean - self.field.pressure)

        before = classify_series(self.field, self.roi).values
        after = classify_series(negated, self.roi).values

        for a, b in zip(before.ravel(), after.ravel()):
            self.assertIs(WeatherType(int(b)), opposite(WeatherType(int(a))))

    def test_region_past_the_grid(self):
        with self.assertRaises(StencilOutOfBoundsError):
            classify_series(self.field, RegionOfInterest(GRID.points, GRID))

    def test_pressure_out_of_range(self):
        with self.assertRaises(ValidationError):
            make_field(lambda lon, lat, d: 500.0)
