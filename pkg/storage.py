"""CSV readers and writers.

Every file starts with optional `# key=value` provenance lines followed by a
header row. Errors name the file and, where one exists, the 1-based line.

    date,lon,lat,wt                        weather-type series
    lon,lat,wt_today,wt_prev,rf,count      joint relative frequencies
    date,lon,lat,slp_hpa                   sea-level pressure
    lon,lat,wt_prev,wt_today,prob          Markov transition spec
    lon,lat,metric,mode,strategy,value,defined   similarity field
"""

from itertools import takewhile
from pathlib import Path
import logging

import numpy as np
import pandas as pd

from classifier import SlpField
from exceptions import FileFormatError, ValidationError
from frequencies import SUM_TOLERANCE, JointFrequencyField, build_joint
from generator.markov import MarkovSpec
from models import N_WT, GridSpec, RegionOfInterest, WtSeries, round_point, season_mask
from similarity import Metric, Mode, SimilarityField, SubsetStrategy

logger = logging.getLogger(__name__)

SERIES_COLUMNS = ["date", "lon", "lat", "wt"]
JOINT_COLUMNS = ["lon", "lat", "wt_today", "wt_prev", "rf", "count"]
SLP_COLUMNS = ["date", "lon", "lat", "slp_hpa"]
TRANSITION_COLUMNS = ["lon", "lat", "wt_prev", "wt_today", "prob"]
FIELD_COLUMNS = ["lon", "lat", "metric", "mode", "strategy", "value", "defined"]

RF_TOLERANCE = 1e-6


##############################################################################
# Provenance


def provenance_lines(provenance):
    """`# key=value` lines, keys in the order given."""

    return [f"# {key}={value}\n" for key, value in (provenance or {}).items()]


def read_provenance(path):
    """The leading `# key=value` lines of `path` as a dict."""

    provenance = {}

    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            provenance[key.strip()] = value

    return provenance


def _write_frame(frame, path, provenance=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, "w", newline="") as fh:
        fh.writelines(provenance_lines(provenance))
        frame.to_csv(fh, index=False, lineterminator="\n")

    logger.debug("wrote %s (%d rows)", path, len(frame))


def _read_frame(path, columns):
    """Read all cells as strings; return (frame, line number of row 0)."""

    path = Path(path)
    if not path.is_file():
        raise FileFormatError(path, "no such file")

    n_comments = 0
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            n_comments += 1

    try:
        frame = pd.read_csv(path, comment="#", dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise FileFormatError(path, f"unreadable CSV ({exc})")

    header_line = n_comments + 1
    if list(frame.columns) != columns:
        raise FileFormatError(
            path, f"header must be {','.join(columns)}", header_line)
    if frame.empty:
        raise FileFormatError(path, "no data rows", header_line)

    blank = (frame == "").any(axis=1).to_numpy()
    if blank.any():
        raise FileFormatError(
            path, "missing cell", header_line + 1 + int(np.argmax(blank)))

    return frame, header_line + 1


def _numeric(frame, column, path, first_line):
    values = pd.to_numeric(frame[column], errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        row = int(np.argmax(bad))
        raise FileFormatError(
            path, f"{column} {frame[column].iloc[row]!r} is not a number",
            first_line + row)
    return values


def _wt_column(frame, column, path, first_line):
    values = _numeric(frame, column, path, first_line)
    bad = (values != np.rint(values)) | (values < 1) | (values > N_WT)
    if bad.any():
        row = int(np.argmax(bad))
        raise FileFormatError(
            path, f"{column} {frame[column].iloc[row]} outside 1..{N_WT}",
            first_line + row)
    return values.astype(np.int64)


def _dates(frame, path, first_line):
    dates = pd.to_datetime(frame["date"], format="%Y-%m-%d", errors="coerce")
    bad = dates.isna().to_numpy()
    if bad.any():
        row = int(np.argmax(bad))
        raise FileFormatError(
            path, f"malformed date {frame['date'].iloc[row]!r}", first_line + row)
    return pd.DatetimeIndex(dates)


def _points(lons, lats):
    """Distinct points in order of first appearance, and each row's position."""

    keys = [round_point(p) for p in zip(lons, lats)]
    order = {}
    for key in keys:
        order.setdefault(key, len(order))
    return tuple(order), np.array([order[k] for k in keys], dtype=np.intp)


def region_for(points):
    """Region over `points`, attached to a grid when they fill a lattice."""

    try:
        grid = GridSpec.from_points([p[0] for p in points], [p[1] for p in points])
    except ValidationError:
        return RegionOfInterest(points)

    if len(grid.points) == len(points):
        return RegionOfInterest(points, grid)
    return RegionOfInterest(points)


def _format_coord(value):
    return f"{value:.6f}".rstrip("0").rstrip(".")


def _check_unique(keys, path, first_line, what):
    duplicated = pd.Series(keys).duplicated().to_numpy()
    if duplicated.any():
        raise FileFormatError(
            path, f"duplicate {what}", first_line + int(np.argmax(duplicated)))


def _trajectory_id(path):
    return Path(path).stem


##############################################################################
# Weather-type series


def read_wt_series(path, trajectory_id=None):
    frame, first = _read_frame(path, SERIES_COLUMNS)

    dates = _dates(frame, path, first)
    lons = _numeric(frame, "lon", path, first)
    lats = _numeric(frame, "lat", path, first)
    wts = _wt_column(frame, "wt", path, first)

    points, column = _points(lons, lats)
    day_index, unique_dates = pd.factorize(dates, sort=True)
    _check_unique(list(zip(day_index, column)), path, first, "date and point")

    values = np.zeros((len(unique_dates), len(points)), dtype=np.int8)
    values[day_index, column] = wts
    if (values == 0).any():
        d, s = np.argwhere(values == 0)[0]
        raise FileFormatError(
            path, f"missing cell for {unique_dates[d].date()} at {points[s]}")

    return WtSeries(
        trajectory_id or _trajectory_id(path), region_for(points),
        pd.DatetimeIndex(unique_dates), values)


def write_wt_series(series, path, provenance=None):
    n_days, n_s = series.values.shape

    frame = pd.DataFrame({
        "date": np.repeat(series.dates.strftime("%Y-%m-%d").to_numpy(), n_s),
        "lon": np.tile([_format_coord(p[0]) for p in series.roi.points], n_days),
        "lat": np.tile([_format_coord(p[1]) for p in series.roi.points], n_days),
        "wt": series.values.reshape(-1).astype(int),
    })
    _write_frame(frame, path, provenance)


##############################################################################
# Joint relative frequencies


def read_joint_rf(path, trajectory_id=None):
    """Read a joint rf field; omitted (today, yesterday) cells are 0.

    rf is rebuilt from the integer counts after checking each row agrees
    with count / pair_count and each point sums to 1.
    """

    frame, first = _read_frame(path, JOINT_COLUMNS)

    lons = _numeric(frame, "lon", path, first)
    lats = _numeric(frame, "lat", path, first)
    today = _wt_column(frame, "wt_today", path, first)
    yesterday = _wt_column(frame, "wt_prev", path, first)
    rf = _numeric(frame, "rf", path, first)
    count = _numeric(frame, "count", path, first)

    bad = (count < 0) | (count != np.rint(count)) | (rf < 0)
    if bad.any():
        raise FileFormatError(
            path, "rf and count must be >= 0, count whole", first + int(np.argmax(bad)))

    points, row_point = _points(lons, lats)
    _check_unique(list(zip(row_point, today, yesterday)), path, first, "cell")

    counts = np.zeros((len(points), N_WT, N_WT), dtype=np.int64)
    counts[row_point, today - 1, yesterday - 1] = count.astype(np.int64)
    pair_count = counts.sum(axis=(1, 2))

    sums = np.bincount(row_point, weights=rf, minlength=len(points))
    for s, total in enumerate(sums):
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise FileFormatError(
                path, f"rf at point {points[s]} sums to {total:.9f}, not 1")

    with np.errstate(divide="ignore", invalid="ignore"):
        expected = count / pair_count[row_point]
    mismatch = ~(np.abs(rf - expected) <= RF_TOLERANCE)
    if mismatch.any():
        row = int(np.argmax(mismatch))
        raise FileFormatError(
            path, f"rf {rf[row]} disagrees with count {int(count[row])}", first + row)

    return JointFrequencyField(
        region_for(points), counts / pair_count[:, None, None], pair_count,
        trajectory_id or _trajectory_id(path))


def write_joint_rf(joint, path, provenance=None):
    counts = joint.counts
    point, today, yesterday = np.nonzero(counts)

    frame = pd.DataFrame({
        "lon": [_format_coord(joint.roi.points[s][0]) for s in point],
        "lat": [_format_coord(joint.roi.points[s][1]) for s in point],
        "wt_today": today + 1,
        "wt_prev": yesterday + 1,
        "rf": joint.rf_joint[point, today, yesterday],
        "count": counts[point, today, yesterday],
    })
    _write_frame(frame, path, provenance)


def sniff_kind(path):
    """'series' or 'joint', from the header row."""

    if not Path(path).is_file():
        raise FileFormatError(path, "no such file")

    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                continue
            header = line.strip().split(",")
            break
        else:
            raise FileFormatError(path, "empty file")

    if header == SERIES_COLUMNS:
        return "series"
    if header == JOINT_COLUMNS:
        return "joint"
    raise FileFormatError(path, "neither a weather-type series nor a joint rf file")


def load_joint(path, window, roi=None):
    """Joint rf from either a series file (built for `window`) or a joint file."""

    if sniff_kind(path) == "joint":
        joint = read_joint_rf(path)
    else:
        joint = build_joint(read_wt_series(path), window)

    if roi is not None:
        joint = joint.take_points(roi)
    return joint


def load_reference(path, window):
    """Reference joint rf and its number of in-window days.

    A joint rf file records only pairs; its day count assumes a full window,
    one day more than the pairs in each season block.
    """

    if sniff_kind(path) == "joint":
        joint = read_joint_rf(path)
        return joint, int(joint.pair_count.max()) + window.n_years

    series = season_mask(read_wt_series(path), window)
    return build_joint(series, window), series.n_days


def discover_trajectories(directory):
    """Sorted CSV paths of a candidate directory."""

    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"{directory} is not a directory")

    paths = sorted(directory.glob("*.csv"))
    if not paths:
        raise ValidationError(f"no trajectories found in {directory}")
    return paths


##############################################################################
# Pressure fields and transition specs


def read_slp(path):
    frame, first = _read_frame(path, SLP_COLUMNS)

    dates = _dates(frame, path, first)
    lons = _numeric(frame, "lon", path, first)
    lats = _numeric(frame, "lat", path, first)
    pressure = _numeric(frame, "slp_hpa", path, first)

    try:
        grid = GridSpec.from_points(lons, lats)
    except ValidationError as exc:
        raise FileFormatError(path, str(exc))

    day_index, unique_dates = pd.factorize(dates, sort=True)
    lat_index = np.array([grid.lat_index(v) for v in lats])
    lon_index = np.array([grid.lon_index(v) for v in lons])
    _check_unique(list(zip(day_index, lat_index, lon_index)), path, first,
                  "date and point")

    cube = np.full((len(unique_dates),) + grid.shape, np.nan)
    cube[day_index, lat_index, lon_index] = pressure
    if np.isnan(cube).any():
        d, i, j = np.argwhere(np.isnan(cube))[0]
        raise FileFormatError(
            path, f"missing pressure on {unique_dates[d].date()} at "
                  f"({grid.lon_values[j]}, {grid.lat_values[i]})")

    return SlpField(grid, pd.DatetimeIndex(unique_dates), cube, _trajectory_id(path))


def write_slp(field, path, provenance=None):
    n_days = len(field.dates)
    points = field.grid.points

    frame = pd.DataFrame({
        "date": np.repeat(field.dates.strftime("%Y-%m-%d").to_numpy(), len(points)),
        "lon": np.tile([_format_coord(p[0]) for p in points], n_days),
        "lat": np.tile([_format_coord(p[1]) for p in points], n_days),
        "slp_hpa": field.pressure.reshape(n_days, -1).reshape(-1),
    })
    _write_frame(frame, path, provenance)


def read_transition(path, seed=0):
    """Markov spec from a transition file; omitted cells are 0 and every
    point starts from the uniform distribution."""

    frame, first = _read_frame(path, TRANSITION_COLUMNS)

    lons = _numeric(frame, "lon", path, first)
    lats = _numeric(frame, "lat", path, first)
    yesterday = _wt_column(frame, "wt_prev", path, first)
    today = _wt_column(frame, "wt_today", path, first)
    prob = _numeric(frame, "prob", path, first)

    points, row_point = _points(lons, lats)
    _check_unique(list(zip(row_point, yesterday, today)), path, first, "cell")

    transition = np.zeros((len(points), N_WT, N_WT))
    transition[row_point, yesterday - 1, today - 1] = prob

    roi = region_for(points)
    initial = np.full((len(points), N_WT), 1.0 / N_WT)

    try:
        return MarkovSpec(roi, transition, initial, seed)
    except ValidationError as exc:
        raise FileFormatError(path, str(exc))


def write_transition(spec, path, provenance=None):
    point, yesterday, today = np.nonzero(spec.transition)

    frame = pd.DataFrame({
        "lon": [_format_coord(spec.roi.points[s][0]) for s in point],
        "lat": [_format_coord(spec.roi.points[s][1]) for s in point],
        "wt_prev": yesterday + 1,
        "wt_today": today + 1,
        "prob": spec.transition[point, yesterday, today],
    })
    _write_frame(frame, path, provenance)


##############################################################################
# Similarity fields and tables


def write_similarity_field(field, path, provenance=None):
    header = dict(provenance or {})
    header["trajectory"] = field.trajectory_id

    n_s = field.roi.n_s
    frame = pd.DataFrame({
        "lon": [_format_coord(p[0]) for p in field.roi.points],
        "lat": [_format_coord(p[1]) for p in field.roi.points],
        "metric": [field.metric.value] * n_s,
        "mode": [field.mode.label] * n_s,
        "strategy": [field.strategy.label] * n_s,
        "value": field.values,
        "defined": field.defined,
    })
    _write_frame(frame, path, header)


def _field_label(frame, column, parse, path, first_line):
    values = frame[column].to_numpy()
    differs = values != values[0]
    if differs.any():
        raise FileFormatError(
            path, f"{column} must be the same on every row",
            first_line + int(np.argmax(differs)))
    try:
        return parse(values[0])
    except ValidationError as exc:
        raise FileFormatError(path, str(exc), first_line)


def read_similarity_field(path):
    """Similarity field; an empty value marks an undefined point."""

    path = Path(path)
    if not path.is_file():
        raise FileFormatError(path, "no such file")

    with open(path) as fh:
        n_comments = sum(1 for _ in takewhile(lambda line: line.startswith("#"), fh))
    try:
        frame = pd.read_csv(path, comment="#", dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise FileFormatError(path, f"unreadable CSV ({exc})")

    header_line = n_comments + 1
    if list(frame.columns) != FIELD_COLUMNS:
        raise FileFormatError(
            path, f"header must be {','.join(FIELD_COLUMNS)}", header_line)
    if frame.empty:
        raise FileFormatError(path, "no data rows", header_line)
    first_line = header_line + 1

    flags = frame["defined"].str.strip().str.lower().map(
        {"true": True, "1": True, "false": False, "0": False})
    if flags.isna().any():
        row = int(np.argmax(flags.isna().to_numpy()))
        raise FileFormatError(
            path, f"defined {frame['defined'].iloc[row]!r} is not a boolean",
            first_line + row)
    defined = flags.to_numpy(dtype=bool)

    values = pd.to_numeric(frame["value"], errors="coerce").to_numpy(dtype=float)
    bad = defined & ~np.isfinite(values)
    if bad.any():
        row = int(np.argmax(bad))
        raise FileFormatError(
            path, f"value {frame['value'].iloc[row]!r} is not a number", first_line + row)
    values[~defined] = np.nan
    lons = _numeric(frame, "lon", path, first_line)
    lats = _numeric(frame, "lat", path, first_line)
    points, _ = _points(lons, lats)
    _check_unique(list(zip(lons, lats)), path, first_line, "point")

    try:
        return SimilarityField(
            region_for(points),
            _field_label(frame, "metric", Metric.parse, path, first_line),
            _field_label(frame, "mode", Mode.parse, path, first_line),
            _field_label(frame, "strategy", SubsetStrategy.parse, path, first_line),
            values,
            read_provenance(path).get("trajectory", _trajectory_id(path)),
        )
    except FileFormatError:
        raise
    except ValidationError as exc:
        raise FileFormatError(path, str(exc))


def write_table(frame, path, provenance=None):
    _write_frame(frame, path, provenance)


def read_table(path):
    path = Path(path)
    if not path.is_file():
        raise FileFormatError(path, "no such file")
    return pd.read_csv(path, comment="#")
