"""Joint, daily, conditional and persistence relative frequencies.

The joint field holds, at every point, a 27 x 27 matrix whose entry
[i - 1, j - 1] is the relative frequency of (today = i, yesterday = j).
Everything else is derived from it.
"""

from dataclasses import dataclass
from enum import Enum
import logging

import numpy as np
import pandas as pd

from exceptions import ValidationError
from models import N_WT, WeatherType, season_mask

logger = logging.getLogger(__name__)

DEFAULT_MIN_SUPPORT = 30

SUM_TOLERANCE = 1e-6
COUNT_TOLERANCE = 1e-6


class Axis(Enum):
    CURRENT = "current-day"
    PREVIOUS = "previous-day"


@dataclass(frozen=True, eq=False)
class JointFrequencyField:
    """Per-point joint relative frequencies of consecutive-day pairs."""

    roi: object
    rf_joint: np.ndarray
    pair_count: np.ndarray
    trajectory_id: str = ""

    def __post_init__(self):
        rf = np.array(self.rf_joint, dtype=float, copy=True)
        counts = np.array(self.pair_count, dtype=np.int64, copy=True)

        if rf.shape != (self.roi.n_s, N_WT, N_WT):
            raise ValidationError(
                f"joint rf shape {rf.shape}, expected ({self.roi.n_s}, 27, 27)")
        if counts.shape != (self.roi.n_s,):
            raise ValidationError("one pair count per point is required")
        if (rf < 0).any():
            raise ValidationError("joint rf has negative entries")
        if (counts <= 0).any():
            raise ValidationError("every point needs at least one pair")

        sums = rf.sum(axis=(1, 2))
        bad = np.flatnonzero(np.abs(sums - 1.0) > SUM_TOLERANCE)
        if bad.size:
            s = bad[0]
            raise ValidationError(
                f"joint rf at point {self.roi.points[s]} sums to {sums[s]:.9f}")

        scaled = rf * counts[:, None, None]
        if (np.abs(scaled - np.rint(scaled)) > COUNT_TOLERANCE).any():
            raise ValidationError("joint rf is not a ratio of whole pair counts")

        rf.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "rf_joint", rf)
        object.__setattr__(self, "pair_count", counts)

    def __repr__(self):
        return (
            f"<JointFrequencyField {self.trajectory_id or '?'}: "
            f"{self.roi.n_s} points, {int(self.pair_count.sum())} pairs>")

    @property
    def counts(self):
        """Integer pair counts, (point, today, yesterday)."""

        return np.rint(self.rf_joint * self.pair_count[:, None, None]).astype(np.int64)

    def take_points(self, roi):
        rows = [self.roi.index_of(p) for p in roi.points]
        return JointFrequencyField(
            roi, self.rf_joint[rows], self.pair_count[rows], self.trajectory_id)


@dataclass(frozen=True, eq=False)
class MarginalField:
    roi: object
    rf_daily: np.ndarray
    axis_tag: Axis


@dataclass(frozen=True, eq=False)
class ConditionalField:
    """Distribution of today's type given yesterday's type `conditioning_wt`.

    Rows of `rf_cond` are NaN where `defined` is False.
    """

    roi: object
    conditioning_wt: WeatherType
    rf_cond: np.ndarray
    support: np.ndarray
    defined: np.ndarray

    @property
    def coverage(self):
        return float(self.defined.mean())


@dataclass(frozen=True, eq=False)
class PersistenceField:
    """Per point and type, rf(i | i); NaN where `defined` is False."""

    roi: object
    per_rf: np.ndarray
    support: np.ndarray
    defined: np.ndarray


def _pair_mask(dates):
    """True for each (d - 1, d) pair of consecutive days in the same year."""

    if len(dates) < 2:
        return np.zeros(0, dtype=bool)

    step = np.diff(dates.values).astype("timedelta64[D]").astype(np.int64)
    same_block = dates.year[1:] == dates.year[:-1]
    return (step == 1) & np.asarray(same_block)


def build_joint(series, window, roi=None):
    """Count consecutive-day pairs per point and normalize.

    Pairs never span two season-year blocks (no Sep 30 -> Jun 1 or
    year-boundary transitions). Raises ValidationError when no pair is left.
    """

    roi = roi or series.roi
    masked = season_mask(series, window).take_points(roi)

    pairs = _pair_mask(masked.dates)
    n_pairs = int(pairs.sum())
    if n_pairs == 0:
        raise ValidationError(
            f"no consecutive in-window day pairs for {series.trajectory_id}")

    today = masked.values[1:][pairs].astype(np.intp) - 1
    yesterday = masked.values[:-1][pairs].astype(np.intp) - 1
    point = np.broadcast_to(np.arange(roi.n_s), today.shape)

    counts = np.zeros((roi.n_s, N_WT, N_WT), dtype=np.int64)
    np.add.at(counts, (point, today, yesterday), 1)

    pair_count = np.full(roi.n_s, n_pairs, dtype=np.int64)
    logger.debug("%s: %d pairs per point from %d days",
                 series.trajectory_id, n_pairs, masked.n_days)

    return JointFrequencyField(
        roi, counts / n_pairs, pair_count, series.trajectory_id)


def marginal_current(joint):
    """Daily rf: sum over yesterday's type."""

    return MarginalField(joint.roi, joint.rf_joint.sum(axis=2), Axis.CURRENT)


def marginal_previous(joint):
    """Sum over today's type; the denominator of the conditional rf."""

    return MarginalField(joint.roi, joint.rf_joint.sum(axis=1), Axis.PREVIOUS)


def _support(joint, rf_prev):
    return np.rint(joint.pair_count[:, None] * rf_prev).astype(np.int64)


def conditional(joint, j, min_support=DEFAULT_MIN_SUPPORT):
    """rf(i | j; s) where yesterday's type `j` was seen at least `min_support` times."""

    j = WeatherType.from_index(j)
    rf_prev = marginal_previous(joint).rf_daily[:, j - 1]
    support = _support(joint, rf_prev[:, None])[:, 0]
    defined = support >= max(min_support, 1)

    rf_cond = np.full((joint.roi.n_s, N_WT), np.nan)
    rf_cond[defined] = (
        joint.rf_joint[defined, :, j - 1] / rf_prev[defined, None])

    return ConditionalField(joint.roi, j, rf_cond, support, defined)


def conditional_all(joint, min_support=DEFAULT_MIN_SUPPORT, wts=None):
    """Conditional fields keyed by conditioning type (all 27 by default)."""

    wts = wts or tuple(WeatherType)
    return {wt: conditional(joint, wt, min_support) for wt in wts}


def persistence(joint, min_support=DEFAULT_MIN_SUPPORT):
    """rf(i | i; s) for every type, same expression as `conditional`."""

    rf_prev = marginal_previous(joint).rf_daily
    support = _support(joint, rf_prev)
    defined = support >= max(min_support, 1)

    diagonal = np.diagonal(joint.rf_joint, axis1=1, axis2=2)
    per_rf = np.full((joint.roi.n_s, N_WT), np.nan)
    per_rf[defined] = diagonal[defined] / rf_prev[defined]

    return PersistenceField(joint.roi, per_rf, support, defined)


##############################################################################
# Climatology tables


def summarize_daily(marginal, n_days, wts=None):
    """Spread of the daily rf of each type across points.

    `#Min` and `#Q25` scale the statistic by `n_days` to show roughly how
    many days back the estimate.
    """

    wts = wts or tuple(WeatherType)
    rows = []

    for wt in wts:
        values = marginal.rf_daily[:, wt - 1]
        q25 = np.quantile(values, 0.25)
        rows.append({
            "index": int(wt),
            "wt": wt.code,
            "min": values.min(),
            "q25": q25,
            "median": np.median(values),
            "q75": np.quantile(values, 0.75),
            "max": values.max(),
            "n_min": int(round(values.min() * n_days)),
            "n_q25": int(round(q25 * n_days)),
        })

    return pd.DataFrame(rows)


def summarize_persistence(field, wts):
    """Spread of rf(i | i) across the points where it is defined."""

    rows = []

    for wt in wts:
        values = field.per_rf[field.defined[:, wt - 1], wt - 1]
        if values.size == 0:
            logger.warning("persistence of %s undefined at every point", wt.code)
            continue

        rows.append({
            "wt": wt.code,
            "min": values.min(),
            "q25": np.quantile(values, 0.25),
            "mean": values.mean(),
            "q75": np.quantile(values, 0.75),
            "max": values.max(),
            "sd": values.std(ddof=1) if values.size > 1 else np.nan,
            "n_points": int(values.size),
        })

    return pd.DataFrame(rows)
