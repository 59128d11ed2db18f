"""Jenkinson-Collison weather-type classification from sea-level pressure.

Each target grid point is the center of a 16-point cross stencil:

            1       2
       3    4       5    6
       7    8   x   9   10
      11   12      13   14
           15      16

Rows are `lat_span` apart, inner columns sit `lon_span / 2` either side of
the center and outer columns `1.5 * lon_span`. Flow (W, S, F) and shear
vorticity (ZW, ZS, Z) indices are finite differences over these points.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
import pandas as pd

from exceptions import StencilOutOfBoundsError, ValidationError
from models import RegionOfInterest, WeatherType, WtSeries, round_point

logger = logging.getLogger(__name__)

SLP_MIN_HPA = 870.0
SLP_MAX_HPA = 1090.0


@dataclass(frozen=True)
class ClassifierConfig:
    """Stencil footprint, weak-flow thresholds and coefficient scheme."""

    lon_span: float = 10.0
    lat_span: float = 5.0
    u_flow: float = 6.0
    u_vort: float = 6.0
    latitude_scaling: bool = True

    def __post_init__(self):
        if self.lon_span <= 0 or self.lat_span <= 0:
            raise ValidationError("stencil spans must be positive")
        if self.u_flow < 0 or self.u_vort < 0:
            raise ValidationError("weak-flow thresholds must be >= 0")

    def coefficients(self, center_lat):
        """Return (s, zw_south, zw_north, zs) factors for a center latitude."""

        if not self.latitude_scaling:
            return 1.0, 1.0, 1.0, 0.5

        phi = math.radians(center_lat)
        dphi = math.radians(self.lat_span)

        return (
            1.0 / math.cos(phi),
            math.sin(phi) / math.sin(phi - dphi),
            math.sin(phi) / math.sin(phi + dphi),
            1.0 / (2.0 * math.cos(phi) ** 2),
        )

    def stencil(self, center):
        return CrossStencil(center, self.lon_span, self.lat_span)


@dataclass(frozen=True, eq=False)
class SlpField:
    """Daily sea-level pressure (hPa) on a grid.

    `pressure[d, i, j]` is the value on `dates[d]` at
    (`grid.lon_values[j]`, `grid.lat_values[i]`).
    """

    grid: object
    dates: pd.DatetimeIndex
    pressure: np.ndarray
    trajectory_id: str = "slp"

    def __post_init__(self):
        dates = pd.DatetimeIndex(self.dates)
        if not dates.is_unique or not dates.is_monotonic_increasing:
            raise ValidationError("pressure dates must be strictly increasing")

        pressure = np.array(self.pressure, dtype=float, copy=True)
        expected = (len(dates),) + self.grid.shape
        if pressure.shape != expected:
            raise ValidationError(
                f"pressure shape {pressure.shape}, expected {expected}")

        if not np.isfinite(pressure).all():
            raise ValidationError("pressure field has missing or non-finite cells")

        if pressure.size and (
                pressure.min() < SLP_MIN_HPA or pressure.max() > SLP_MAX_HPA):
            raise ValidationError(
                f"pressure outside {SLP_MIN_HPA}..{SLP_MAX_HPA} hPa "
                f"(min {pressure.min():.1f}, max {pressure.max():.1f})")

        pressure.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "pressure", pressure)

    def __repr__(self):
        return f"<SlpField {self.trajectory_id}: {len(self.dates)} days on {self.grid!r}>"


@dataclass(frozen=True)
class CrossStencil:
    """The 16 JC points around `center`, in the numbering of the module doc."""

    center: tuple
    lon_span: float = 10.0
    lat_span: float = 5.0

    def __post_init__(self):
        object.__setattr__(self, "center", round_point(self.center))

        offsets = set(self.offsets)
        mirrored = {(-dlon + 0.0, dlat) for dlon, dlat in offsets}
        if len(offsets) != 16 or offsets != mirrored:
            raise ValidationError("cross stencil must be 16 lon-symmetric points")

    @property
    def offsets(self):
        inner = self.lon_span / 2.0
        outer = 1.5 * self.lon_span
        pair = (-inner, inner)
        row = (-outer, -inner, inner, outer)

        layout = (
            (2 * self.lat_span, pair),
            (self.lat_span, row),
            (0.0, row),
            (-self.lat_span, row),
            (-2 * self.lat_span, pair),
        )

        return tuple(
            (dlon, dlat) for dlat, columns in layout for dlon in columns)

    @property
    def points(self):
        lon, lat = self.center
        return tuple(
            round_point((lon + dlon, lat + dlat)) for dlon, dlat in self.offsets)

    def resolve(self, grid, date=None):
        """Return (lat_indices, lon_indices) of the 16 points on `grid`."""

        lat_idx = []
        lon_idx = []

        for point in self.points:
            i = grid.lat_index(point[1])
            j = grid.lon_index(point[0])
            if i is None or j is None:
                raise StencilOutOfBoundsError(point, self.center, date)
            lat_idx.append(i)
            lon_idx.append(j)

        return np.array(lat_idx), np.array(lon_idx)


@dataclass(frozen=True)
class FlowIndices:
    """Flow and vorticity indices; scalars or equally shaped arrays."""

    W: object
    S: object
    F: object
    ZW: object
    ZS: object
    Z: object

    @property
    def direction(self):
        """Direction the flow comes from, degrees clockwise from north."""

        return (np.degrees(np.arctan2(self.W, self.S)) + 180.0) % 360.0


def _flow_from_stack(stack, center_lat, config):
    """Indices from an array whose last axis holds the 16 stencil pressures."""

    def p(number):
        return stack[..., number - 1]

    s_coef, zw_south, zw_north, zs_coef = config.coefficients(center_lat)

    W = 0.5 * (p(12) + p(13)) - 0.5 * (p(4) + p(5))
    S = s_coef * (
        0.25 * (p(5) + 2 * p(9) + p(13)) - 0.25 * (p(4) + 2 * p(8) + p(12)))
    F = np.sqrt(W ** 2 + S ** 2)

    ZW = (
        zw_south * (0.5 * (p(15) + p(16)) - 0.5 * (p(8) + p(9)))
        - zw_north * (0.5 * (p(8) + p(9)) - 0.5 * (p(1) + p(2)))
    )
    ZS = zs_coef * (
        0.25 * (p(6) + 2 * p(10) + p(14))
        - 0.25 * (p(5) + 2 * p(9) + p(13))
        - 0.25 * (p(4) + 2 * p(8) + p(12))
        + 0.25 * (p(3) + 2 * p(7) + p(11))
    )

    return FlowIndices(W, S, F, ZW, ZS, ZW + ZS)


def compute_flow_indices(field, date, stencil, config=None):
    """Flow indices for one day at the center of `stencil`.

    Raises StencilOutOfBoundsError naming the first missing stencil point,
    and ValidationError when `date` is not in the field.
    """

    config = config or ClassifierConfig(stencil.lon_span, stencil.lat_span)
    date = pd.Timestamp(date)

    positions = field.dates.get_indexer([date])
    if positions[0] < 0:
        raise ValidationError(f"date {date.date()} not in pressure field")

    lat_idx, lon_idx = stencil.resolve(field.grid, date.date())
    stack = field.pressure[positions[0], lat_idx, lon_idx]

    flow = _flow_from_stack(stack, stencil.center[1], config)
    return FlowIndices(*(float(getattr(flow, name))
                         for name in ("W", "S", "F", "ZW", "ZS", "Z")))


def _classify_arrays(W, S, F, Z, config):
    """Vectorized JC decision rules; returns weather-type indices."""

    arrays = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (W, S, F, Z)))
    shape = arrays[0].shape
    W, S, F, Z = (np.atleast_1d(a).ravel() for a in arrays)

    if not all(np.isfinite(a).all() for a in (W, S, F, Z)):
        raise ValidationError("flow indices must be finite")

    direction = (np.degrees(np.arctan2(W, S)) + 180.0) % 360.0
    # Sector 0 is N, 1 is NE, ... 7 is NW; a boundary goes to the clockwise side.
    sector = np.floor((direction + 22.5) / 45.0).astype(int) % 8
    position = (sector - 1) % 8

    abs_z = np.abs(Z)
    cyclonic = Z > 0
    directional = abs_z < F
    rotational = abs_z > 2 * F
    hybrid = ~directional & ~rotational

    result = np.empty(W.shape, dtype=np.int8)
    result[directional] = WeatherType.PDNE + position[directional]
    result[rotational & cyclonic] = WeatherType.PC
    result[rotational & ~cyclonic] = WeatherType.PA
    result[hybrid & cyclonic] = WeatherType.DCNE + position[hybrid & cyclonic]
    result[hybrid & ~cyclonic] = WeatherType.DANE + position[hybrid & ~cyclonic]

    weak = ((F < config.u_flow) & (abs_z < config.u_vort)) | ((F == 0) & (Z == 0))
    result[weak] = WeatherType.U

    return result.reshape(shape)


def classify_day(idx, thresholds=None):
    """Weather type for one set of flow indices."""

    config = thresholds or ClassifierConfig()
    code = _classify_arrays(idx.W, idx.S, idx.F, idx.Z, config)
    return WeatherType(int(code))


def classify_series(field, roi, config=None):
    """Classify every day at every point of `roi`.

    Points are independent: the stencil of each ROI point is gathered from the
    full pressure grid, so the grid must extend past the region by the
    stencil footprint.
    """

    config = config or ClassifierConfig()
    first_date = field.dates[0].date() if len(field.dates) else None

    values = np.empty((len(field.dates), roi.n_s), dtype=np.int8)

    for column, center in enumerate(roi.points):
        lat_idx, lon_idx = config.stencil(center).resolve(field.grid, first_date)
        stack = field.pressure[:, lat_idx, lon_idx]
        flow = _flow_from_stack(stack, center[1], config)
        values[:, column] = _classify_arrays(flow.W, flow.S, flow.F, flow.Z, config)

    logger.debug("classified %s: %d days x %d points",
                 field.trajectory_id, len(field.dates), roi.n_s)

    return WtSeries(field.trajectory_id, roi, field.dates, values)


def interior_region(grid, config=None):
    """Every grid point whose whole stencil lies on `grid`."""

    config = config or ClassifierConfig()
    points = [p for p in grid.points
              if all(grid.contains(q) for q in config.stencil(p).points)]

    if not points:
        raise ValidationError(f"no point of {grid!r} fits a full stencil")
    return RegionOfInterest(tuple(points), grid)


__all__ = [
    "ClassifierConfig", "CrossStencil", "FlowIndices", "SlpField",
    "classify_day", "classify_series", "compute_flow_indices", "interior_region",
]
