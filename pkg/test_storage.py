"""CSV reader and writer tests."""

# run these tests like:
#
#    python -m unittest test_storage.py


from pathlib import Path
from tempfile import TemporaryDirectory
from unittest import TestCase

import numpy as np
import pandas as pd

from classifier import SlpField
from exceptions import FileFormatError, ValidationError
from frequencies import build_joint
from generator.markov import MarkovSpec, simulate
from models import GridSpec, RegionOfInterest, SeasonWindow, WeatherType, WtSeries
from similarity import DAILY, Metric, Mode, SimilarityField, SubsetStrategy
from storage import (
    discover_trajectories, load_joint, read_joint_rf, read_provenance,
    read_similarity_field, read_slp, read_table, read_transition, read_wt_series,
    region_for, sniff_kind, write_joint_rf, write_similarity_field, write_slp,
    write_table, write_transition, write_wt_series)

ROI = RegionOfInterest(((-1.25, 40.0), (1.25, 40.0), (-1.25, 42.5), (1.25, 42.5)))
WINDOW = SeasonWindow(first_year=2001, last_year=2002)

SERIES_CSV = """\
date,lon,lat,wt
2001-06-01,0,40,1
2001-06-01,2.5,40,2
2001-06-02,0,40,1
2001-06-02,2.5,40,28
"""


class StorageTestCase(TestCase):

    def setUp(self):
        self._tmp = TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def write(self, name, text):
        path = self.tmp / name
        path.write_text(text)
        return path


class SeriesTestCase(StorageTestCase):

    def test_round_trip(self):
        series = simulate(MarkovSpec.random(ROI, seed=1), WINDOW, "ref")
        path = self.tmp / "ref.csv"

        write_wt_series(series, path, {"seed": 1})
        back = read_wt_series(path)

        self.assertTrue(back.equals(series))
        self.assertEqual(read_provenance(path), {"seed": "1"})
        self.assertEqual(sniff_kind(path), "series")

    def test_error_names_the_line(self):
        path = self.write("bad.csv", SERIES_CSV)

        with self.assertRaises(FileFormatError) as cm:
            read_wt_series(path)

        self.assertEqual(cm.exception.line, 5)
        self.assertIn(f"{path}:5", str(cm.exception))
        self.assertIn("28", str(cm.exception))

    def test_line_numbers_count_provenance(self):
        path = self.write("bad.csv", "# source=test\n" + SERIES_CSV)

        with self.assertRaises(FileFormatError) as cm:
            read_wt_series(path)

        self.assertEqual(cm.exception.line, 6)

    def test_bad_date(self):
        path = self.write("bad.csv", SERIES_CSV.replace("2001-06-02,0", "2001-13-02,0"))

        with self.assertRaises(FileFormatError) as cm:
            read_wt_series(path)

        self.assertEqual(cm.exception.line, 4)

    def test_missing_cell(self):
        path = self.write("gap.csv", SERIES_CSV.replace("28", "3").rsplit("\n", 2)[0] + "\n")

        with self.assertRaises(FileFormatError) as cm:
            read_wt_series(path)

        self.assertIn("missing cell", str(cm.exception))

    def test_duplicate_row(self):
        path = self.write("dup.csv", SERIES_CSV.replace("28", "3") + "2001-06-02,0,40,4\n")

        with self.assertRaises(FileFormatError) as cm:
            read_wt_series(path)

        self.assertEqual(cm.exception.line, 6)

    def test_wrong_header(self):
        path = self.write("header.csv", "day,lon,lat,wt\n2001-06-01,0,40,1\n")

        with self.assertRaises(FileFormatError) as cm:
            read_wt_series(path)

        self.assertEqual(cm.exception.line, 1)

    def test_missing_file(self):
        with self.assertRaises(FileFormatError):
            read_wt_series(self.tmp / "absent.csv")


class JointTestCase(StorageTestCase):

    def test_round_trip(self):
        series = simulate(MarkovSpec.random(ROI, seed=2), WINDOW, "m1")
        joint = build_joint(series, WINDOW)
        path = self.tmp / "m1.csv"

        write_joint_rf(joint, path)
        back = read_joint_rf(path)

        self.assertEqual(back.trajectory_id, "m1")
        self.assertEqual(back.roi.points, joint.roi.points)
        np.testing.assert_array_equal(back.counts, joint.counts)
        np.testing.assert_allclose(back.rf_joint, joint.rf_joint, rtol=0, atol=1e-15)
        self.assertEqual(sniff_kind(path), "joint")

    def test_load_joint_from_either_kind(self):
        series = simulate(MarkovSpec.random(ROI, seed=3), WINDOW, "m2")
        write_wt_series(series, self.tmp / "series.csv")
        write_joint_rf(build_joint(series, WINDOW), self.tmp / "joint.csv")

        from_series = load_joint(self.tmp / "series.csv", WINDOW)
        from_joint = load_joint(self.tmp / "joint.csv", WINDOW)

        np.testing.assert_array_equal(from_series.counts, from_joint.counts)

    def test_load_joint_restricted(self):
        series = simulate(MarkovSpec.random(ROI, seed=3), WINDOW, "m2")
        write_wt_series(series, self.tmp / "series.csv")
        roi = ROI.subset([(1.25, 42.5), (-1.25, 40.0)])

        joint = load_joint(self.tmp / "series.csv", WINDOW, roi)

        self.assertEqual(joint.roi.points, roi.points)

    def test_rf_must_sum_to_one(self):
        path = self.write("short.csv", (
            "lon,lat,wt_today,wt_prev,rf,count\n"
            "0,40,1,1,0.5,50\n"
            "0,40,2,1,0.48,48\n"
        ))

        with self.assertRaises(FileFormatError) as cm:
            read_joint_rf(path)

        self.assertIn("0.980000000", str(cm.exception))

    def test_rf_must_match_count(self):
        path = self.write("mismatch.csv", (
            "lon,lat,wt_today,wt_prev,rf,count\n"
            "0,40,1,1,0.6,50\n"
            "0,40,2,1,0.4,50\n"
        ))

        with self.assertRaises(FileFormatError) as cm:
            read_joint_rf(path)

        self.assertEqual(cm.exception.line, 2)

    def test_unknown_kind(self):
        path = self.write("other.csv", "a,b\n1,2\n")

        with self.assertRaises(FileFormatError):
            sniff_kind(path)


class DiscoverTestCase(StorageTestCase):

    def test_sorted_csv_paths(self):
        for name in ("b.csv", "a.csv", "notes.txt"):
            self.write(name, "")

        self.assertEqual([p.name for p in discover_trajectories(self.tmp)], ["a.csv", "b.csv"])

    def test_empty_directory(self):
        with self.assertRaisesRegex(ValidationError, "no trajectories found"):
            discover_trajectories(self.tmp)

    def test_not_a_directory(self):
        with self.assertRaises(ValidationError):
            discover_trajectories(self.tmp / "missing")


class SlpTestCase(StorageTestCase):

    def test_round_trip(self):
        grid = GridSpec.from_bounds(-5.0, 5.0, 35.0, 45.0)
        dates = pd.date_range("2001-06-01", periods=2, freq="D")
        pressure = 1013.0 + np.random.default_rng(0).normal(0, 4, size=(2,) + grid.shape)
        path = self.tmp / "slp.csv"

        write_slp(SlpField(grid, dates, pressure), path)
        back = read_slp(path)

        self.assertEqual(back.grid.shape, grid.shape)
        np.testing.assert_allclose(back.pressure, pressure, rtol=0, atol=1e-9)

    def test_missing_value(self):
        path = self.write("slp.csv", (
            "date,lon,lat,slp_hpa\n"
            "2001-06-01,0,40,1010\n"
            "2001-06-01,2.5,40,1011\n"
            "2001-06-02,0,40,1012\n"
        ))

        with self.assertRaisesRegex(FileFormatError, "missing pressure"):
            read_slp(path)


class TransitionTestCase(StorageTestCase):

    def test_round_trip(self):
        spec = MarkovSpec.random(ROI, seed=5)
        path = self.tmp / "transition.csv"

        write_transition(spec, path)
        back = read_transition(path, seed=7)

        self.assertEqual(back.seed, 7)
        np.testing.assert_allclose(back.transition, spec.transition, rtol=0, atol=1e-15)
        np.testing.assert_allclose(back.initial, 1 / 27)

    def test_row_must_sum_to_one(self):
        path = self.write("transition.csv", (
            "lon,lat,wt_prev,wt_today,prob\n"
            "0,40,1,1,0.5\n"
        ))

        with self.assertRaises(FileFormatError):
            read_transition(path)


class SimilarityFieldFileTestCase(StorageTestCase):

    def test_round_trip(self):
        field = SimilarityField(
            ROI, Metric.HELLINGER, Mode(WeatherType.PC), SubsetStrategy.top_k(5),
            [0.1, np.nan, 0.3, 0.25], "m3")
        path = self.tmp / "field.csv"

        write_similarity_field(field, path, {"command": "compare"})
        back = read_similarity_field(path)

        self.assertEqual(back.metric, Metric.HELLINGER)
        self.assertEqual(back.mode, Mode(WeatherType.PC))
        self.assertEqual(back.strategy, SubsetStrategy.top_k(5))
        self.assertEqual(back.trajectory_id, "m3")
        np.testing.assert_array_equal(back.values, field.values)
        self.assertEqual(read_provenance(path),
                         {"command": "compare", "trajectory": "m3"})

    def test_columns(self):
        field = SimilarityField(
            ROI, Metric.OVERLAP, DAILY, SubsetStrategy.parse("minrf:0.05"),
            [0.9, np.nan, 0.8, 1.0], "m1")
        path = self.tmp / "field.csv"
        write_similarity_field(field, path)

        lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
        self.assertEqual(lines[0], "lon,lat,metric,mode,strategy,value,defined")

        table = read_table(path)
        self.assertEqual(list(table["metric"].unique()), ["overlap"])
        self.assertEqual(list(table["mode"].unique()), ["daily"])
        self.assertEqual(list(table["strategy"].unique()), ["minrf:0.05"])
        self.assertEqual(list(table["defined"]), [True, False, True, True])

    def test_labels_come_from_columns(self):
        path = self.write("sibling.csv", (
            "lon,lat,metric,mode,strategy,value,defined\n"
            "0,40,dissimilarity,PA,top9,0.2,true\n"
            "2.5,40,dissimilarity,PA,top9,,false\n"))

        field = read_similarity_field(path)

        self.assertEqual(field.metric, Metric.DISSIMILARITY)
        self.assertEqual(field.mode, Mode(WeatherType.PA))
        self.assertEqual(field.strategy, SubsetStrategy.top_k(9))
        self.assertEqual(field.trajectory_id, "sibling")
        self.assertEqual(field.defined.tolist(), [True, False])

    def test_old_three_column_layout(self):
        path = self.write("field.csv", "# metric=overlap\nlon,lat,value\n0,40,0.5\n")

        with self.assertRaises(FileFormatError) as cm:
            read_similarity_field(path)

        self.assertEqual(cm.exception.line, 2)

    def test_mixed_metrics(self):
        path = self.write("field.csv", (
            "lon,lat,metric,mode,strategy,value,defined\n"
            "0,40,overlap,daily,all,0.5,True\n"
            "2.5,40,hellinger,daily,all,0.5,True\n"))

        with self.assertRaises(FileFormatError) as cm:
            read_similarity_field(path)

        self.assertEqual(cm.exception.line, 3)

    def test_defined_point_needs_a_value(self):
        path = self.write("field.csv", (
            "lon,lat,metric,mode,strategy,value,defined\n"
            "0,40,overlap,daily,all,,True\n"))

        with self.assertRaises(FileFormatError) as cm:
            read_similarity_field(path)

        self.assertEqual(cm.exception.line, 2)

    def test_bad_flag(self):
        path = self.write("field.csv", (
            "lon,lat,metric,mode,strategy,value,defined\n"
            "0,40,overlap,daily,all,0.5,maybe\n"))

        with self.assertRaisesRegex(FileFormatError, "not a boolean"):
            read_similarity_field(path)


class TableTestCase(StorageTestCase):

    def test_round_trip(self):
        frame = pd.DataFrame({"trajectory": ["a", "b"], "DR": [29.5, 27.25]})
        path = self.tmp / "ranking.csv"

        write_table(frame, path, {"command": "score"})

        pd.testing.assert_frame_equal(read_table(path), frame)
        self.assertEqual(read_provenance(path), {"command": "score"})


class RegionForTestCase(TestCase):

    def test_full_lattice_gets_a_grid(self):
        self.assertIsNotNone(region_for(ROI.points).grid)

    def test_scattered_points(self):
        region = region_for(((0.0, 40.0), (5.0, 45.0)))

        self.assertIsNone(region.grid)
        self.assertEqual(region.n_s, 2)
