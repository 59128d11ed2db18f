"""Domain model for wtsel: weather types, grids, regions, seasons, series."""

from dataclasses import dataclass, field
from enum import IntEnum
import math

import numpy as np
import pandas as pd

from exceptions import DomainError, NoInWindowDataError, ValidationError

N_WT = 27

# Order of the directional suffixes inside each family block (index order).
DIRECTIONS = ("NE", "E", "SE", "S", "SW", "W", "NW", "N")

COORD_DECIMALS = 6
SPACING_TOLERANCE = 1e-9


class WeatherType(IntEnum):
    """The 27 Jenkinson-Collison circulation types.

    Indices follow the canonical table order: pure anticyclonic first, then
    the anticyclonic hybrids, the pure directional types, pure cyclonic, the
    cyclonic hybrids and finally the unclassified type.
    """

    PA = 1
    DANE = 2
    DAE = 3
    DASE = 4
    DAS = 5
    DASW = 6
    DAW = 7
    DANW = 8
    DAN = 9
    PDNE = 10
    PDE = 11
    PDSE = 12
    PDS = 13
    PDSW = 14
    PDW = 15
    PDNW = 16
    PDN = 17
    PC = 18
    DCNE = 19
    DCE = 20
    DCSE = 21
    DCS = 22
    DCSW = 23
    DCW = 24
    DCNW = 25
    DCN = 26
    U = 27

    def __repr__(self):
        return f"<WeatherType #{self.value}: {self.name}>"

    @property
    def code(self):
        return self.name

    @property
    def family(self):
        """One of 'A', 'C' (pure or hybrid), 'D' (pure directional), 'U'."""

        if self is WeatherType.U:
            return "U"
        if self is WeatherType.PA or self.name.startswith("DA"):
            return "A"
        if self is WeatherType.PC or self.name.startswith("DC"):
            return "C"
        return "D"

    @property
    def direction(self):
        """Directional suffix ('NE' ... 'N'), or None for PA, PC and U."""

        if self in (WeatherType.PA, WeatherType.PC, WeatherType.U):
            return None
        return self.name[2:]

    @classmethod
    def from_index(cls, index):
        """Return the weather type with this 1-based index.

        Raises DomainError for anything outside 1..27.
        """

        try:
            number = int(index)
        except (TypeError, ValueError):
            raise DomainError(f"weather-type index {index!r} is not an integer")

        if number != index or not 1 <= number <= N_WT:
            raise DomainError(f"weather-type index {index!r} outside 1..{N_WT}")

        return cls(number)

    @classmethod
    def from_code(cls, code):
        """Return the weather type named `code` (case-insensitive)."""

        try:
            return cls[str(code).strip().upper()]
        except KeyError:
            raise DomainError(f"unknown weather-type code {code!r}")

    @classmethod
    def compose(cls, kind, direction):
        """Build a directional type.

        `kind` is 'A' (anticyclonic hybrid), 'D' (pure directional) or
        'C' (cyclonic hybrid); `direction` is one of DIRECTIONS.
        """

        prefix = {"A": "DA", "D": "PD", "C": "DC"}[kind]
        return cls[prefix + direction]


def wt_from_index(index):
    """Functional alias of WeatherType.from_index."""

    return WeatherType.from_index(index)


def code_to_index(code):
    return WeatherType.from_code(code).value


def parse_wt_list(text):
    """Parse 'PA,PC,PDNE' into a tuple of weather types.

    Raises DomainError on unknown codes and ValidationError on duplicates or
    an empty list.
    """

    codes = [part for part in str(text).replace(" ", "").split(",") if part]
    if not codes:
        raise ValidationError("weather-type list is empty")

    wts = tuple(WeatherType.from_code(code) for code in codes)
    if len(set(wts)) != len(wts):
        raise ValidationError(f"duplicate weather types in {text!r}")

    return wts


# Relevant subset used by the starred scores and the conditional filter.
DEFAULT_WT_STAR = (
    WeatherType.PA, WeatherType.PDNE, WeatherType.PC, WeatherType.U)

DEFAULT_CONDITIONING = (
    WeatherType.PA, WeatherType.PC, WeatherType.PDNE, WeatherType.U)


def round_coord(value):
    return round(float(value), COORD_DECIMALS) + 0.0


def round_point(point):
    lon, lat = point
    return (round_coord(lon), round_coord(lat))


##############################################################################
# Geometry


@dataclass(frozen=True)
class GridSpec:
    """Regular lon/lat lattice in decimal degrees (ascending on both axes)."""

    lon_values: tuple
    lat_values: tuple
    spacing: float = 2.5

    def __post_init__(self):
        lons = tuple(round_coord(v) for v in self.lon_values)
        lats = tuple(round_coord(v) for v in self.lat_values)

        object.__setattr__(self, "lon_values", lons)
        object.__setattr__(self, "lat_values", lats)
        object.__setattr__(self, "spacing", float(self.spacing))

        if not lons or not lats:
            raise ValidationError("grid needs at least one lon and one lat")

        if not math.isfinite(self.spacing) or self.spacing <= 0:
            raise ValidationError(f"grid spacing {self.spacing} must be > 0")

        for name, axis in (("lon", lons), ("lat", lats)):
            if not all(math.isfinite(v) for v in axis):
                raise ValidationError(f"non-finite {name} value in grid")

            steps = np.diff(axis)
            if np.any(np.abs(steps - self.spacing) > SPACING_TOLERANCE):
                raise ValidationError(
                    f"{name} axis is not ascending with uniform spacing "
                    f"{self.spacing}")

    def __repr__(self):
        return (
            f"<GridSpec {len(self.lon_values)}x{len(self.lat_values)} "
            f"@ {self.spacing}deg>")

    @classmethod
    def from_bounds(cls, lon_min, lon_max, lat_min, lat_max, spacing=2.5):
        """Build the lattice covering both bounds inclusively."""

        n_lon = int(round((lon_max - lon_min) / spacing)) + 1
        n_lat = int(round((lat_max - lat_min) / spacing)) + 1

        return cls(
            lon_values=tuple(lon_min + spacing * np.arange(n_lon)),
            lat_values=tuple(lat_min + spacing * np.arange(n_lat)),
            spacing=spacing,
        )

    @classmethod
    def from_points(cls, lons, lats, default_spacing=2.5):
        """Infer the lattice from the distinct coordinates found in a file."""

        lons = sorted({round_coord(v) for v in lons})
        lats = sorted({round_coord(v) for v in lats})

        steps = [b - a for axis in (lons, lats) for a, b in zip(axis, axis[1:])]
        spacing = min(steps) if steps else default_spacing

        return cls(tuple(lons), tuple(lats), spacing)

    @property
    def shape(self):
        """(n_lat, n_lon), the layout of gridded arrays."""

        return (len(self.lat_values), len(self.lon_values))

    @property
    def points(self):
        """All (lon, lat) points, south to north, west to east."""

        return tuple(
            (lon, lat) for lat in self.lat_values for lon in self.lon_values)

    def lon_index(self, lon):
        try:
            return self.lon_values.index(round_coord(lon))
        except ValueError:
            return None

    def lat_index(self, lat):
        try:
            return self.lat_values.index(round_coord(lat))
        except ValueError:
            return None

    def contains(self, point):
        lon, lat = point
        return self.lon_index(lon) is not None and self.lat_index(lat) is not None


@dataclass(frozen=True)
class RegionOfInterest:
    """Ordered set of grid points the evaluation runs over."""

    points: tuple
    grid: GridSpec = None
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        points = tuple(round_point(p) for p in self.points)
        object.__setattr__(self, "points", points)

        if not points:
            raise ValidationError("region of interest is empty")

        lookup = {}
        for position, point in enumerate(points):
            if point in lookup:
                raise ValidationError(f"duplicate point {point} in region")
            lookup[point] = position

        if self.grid is not None:
            off_grid = [p for p in points if not self.grid.contains(p)]
            if off_grid:
                raise ValidationError(f"points not on the grid: {off_grid}")

        object.__setattr__(self, "_lookup", lookup)

    def __repr__(self):
        return f"<RegionOfInterest {self.n_s} points>"

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def n_s(self):
        return len(self.points)

    @classmethod
    def default(cls):
        """The 6 lon x 5 lat box over Iberia: 35-45N, 8.75W-3.75E."""

        grid = GridSpec.from_bounds(-8.75, 3.75, 35.0, 45.0, spacing=2.5)
        return cls(grid.points, grid)

    @classmethod
    def from_grid(cls, grid):
        return cls(grid.points, grid)

    def index_of(self, point):
        try:
            return self._lookup[round_point(point)]
        except KeyError:
            raise ValidationError(f"point {point} is not in the region")

    def contains(self, point):
        return round_point(point) in self._lookup

    def subset(self, points):
        """Region restricted to `points` (in the order given)."""

        for point in points:
            self.index_of(point)
        return RegionOfInterest(tuple(points), self.grid)

    def same_points(self, other):
        return set(self.points) == set(other.points)

    def lons(self):
        return np.array([p[0] for p in self.points])

    def lats(self):
        return np.array([p[1] for p in self.points])


# Named points used by the key-point profile; read off the published map, so
# positions are approximate (snapped to the 2.5 degree lattice).
KEY_POINTS = {
    "1_NW": (-8.75, 42.5),
    "2_N": (-3.75, 42.5),
    "3_NE": (1.25, 42.5),
    "4_C": (-3.75, 40.0),
    "5_MED": (3.75, 40.0),
    "6_SW": (-6.25, 37.5),
    "7_SE": (-1.25, 37.5),
}


##############################################################################
# Time


@dataclass(frozen=True)
class SeasonWindow:
    """Calendar months and inclusive year range kept for the analysis."""

    months: frozenset = frozenset({6, 7, 8, 9})
    first_year: int = 1979
    last_year: int = 2005

    def __post_init__(self):
        months = frozenset(int(m) for m in self.months)
        object.__setattr__(self, "months", months)

        if not months:
            raise ValidationError("season window has no months")
        if not months <= set(range(1, 13)):
            raise ValidationError(f"invalid months {sorted(months)}")
        if self.first_year > self.last_year:
            raise ValidationError(
                f"first year {self.first_year} after last year {self.last_year}")

    def __repr__(self):
        months = ",".join(str(m) for m in sorted(self.months))
        return f"<SeasonWindow months={months} {self.first_year}:{self.last_year}>"

    @property
    def year_range(self):
        return (self.first_year, self.last_year)

    @property
    def n_years(self):
        return self.last_year - self.first_year + 1

    def contains(self, dates):
        """Boolean mask of `dates` that fall inside the window."""

        dates = pd.DatetimeIndex(dates)
        return (
            np.isin(dates.month, sorted(self.months))
            & (dates.year >= self.first_year)
            & (dates.year <= self.last_year)
        )

    def dates(self):
        """Every in-window calendar day, in order."""

        every_day = pd.date_range(
            f"{self.first_year}-01-01", f"{self.last_year}-12-31", freq="D")
        return every_day[self.contains(every_day)]


##############################################################################
# Series


@dataclass(frozen=True, eq=False)
class WtSeries:
    """Daily weather types of one trajectory at every point of a region.

    `values[d, s]` is the weather-type index on `dates[d]` at
    `roi.points[s]`.
    """

    trajectory_id: str
    roi: RegionOfInterest
    dates: pd.DatetimeIndex
    values: np.ndarray

    def __post_init__(self):
        dates = pd.DatetimeIndex(self.dates)
        if len(dates) and not (dates == dates.normalize()).all():
            raise ValidationError("series dates must be calendar days")
        if not dates.is_unique or not dates.is_monotonic_increasing:
            raise ValidationError("series dates must be strictly increasing")

        values = np.array(self.values, dtype=np.int8, copy=True)
        if values.shape != (len(dates), self.roi.n_s):
            raise ValidationError(
                f"values shape {values.shape} does not match "
                f"{len(dates)} days x {self.roi.n_s} points")
        if values.size and (values.min() < 1 or values.max() > N_WT):
            raise DomainError(f"weather-type index outside 1..{N_WT} in series")

        values.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    def __repr__(self):
        return (
            f"<WtSeries {self.trajectory_id}: "
            f"{self.n_days} days x {self.roi.n_s} points>")

    @property
    def grid(self):
        return self.roi.grid

    @property
    def n_days(self):
        return len(self.dates)

    def equals(self, other):
        return (
            self.trajectory_id == other.trajectory_id
            and self.roi.points == other.roi.points
            and self.dates.equals(other.dates)
            and np.array_equal(self.values, other.values)
        )

    def at(self, point):
        """Weather-type indices at one point, one per day."""

        return self.values[:, self.roi.index_of(point)]

    def take_points(self, roi):
        """Series restricted (and reordered) to the points of `roi`."""

        columns = [self.roi.index_of(p) for p in roi.points]
        return WtSeries(self.trajectory_id, roi, self.dates,
                        self.values[:, columns])


def season_mask(series, window):
    """Keep only the in-window days of `series`, order preserved.

    Raises NoInWindowDataError when nothing is left.
    """

    keep = window.contains(series.dates)

    if not keep.any():
        raise NoInWindowDataError(
            f"no in-window data for {series.trajectory_id} in {window!r}")

    if keep.all():
        return series

    return WtSeries(
        series.trajectory_id,
        series.roi,
        series.dates[keep],
        series.values[keep],
    )
