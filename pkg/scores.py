"""Regional scores of a trajectory against the reference.

DR sums daily similarities over the ROI. The CR scores weight conditional
similarities by how often the conditioning type occurs in the reference,
locally (CR_loc) or through its median over the ROI (CR_reg). PerR sums
persistence errors, so lower is better. Starred variants restrict the
conditioning or persisting types to a subset WT*.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
import pandas as pd

from exceptions import ValidationError
from frequencies import DEFAULT_MIN_SUPPORT, marginal_current, persistence
from models import DEFAULT_WT_STAR, WeatherType
from similarity import (
    ALL_CATEGORIES, DAILY, Metric, Mode, check_same_roi, similarity_field)

logger = logging.getLogger(__name__)

SCORE_COLUMNS = (
    "DR", "CR_loc", "CR_loc_star", "CR_reg", "CR_reg_star", "PerR", "PerR_star")

# Upper edges of the similarity range bins; see `range_bins` for closures.
BIN_LABELS = ("bin_0_80", "bin_80_88", "bin_88_95", "bin_95_100")


def _canonical(wts):
    wts = sorted(set(WeatherType.from_index(wt) for wt in wts))
    if not wts:
        raise ValidationError("weather-type subset is empty")
    return wts


def dr(daily_field):
    """Sum of daily similarities over the ROI; undefined points add 0."""

    if not daily_field.mode.is_daily:
        raise ValidationError("DR needs a daily similarity field")

    return float(np.nansum(daily_field.similarity_values()))


def _check_conditionals(ref_joint, conditional_fields, wts):
    missing = [wt.code for wt in wts if wt not in conditional_fields]
    if missing:
        raise ValidationError(
            f"no conditional similarity for {', '.join(missing)}")

    for wt in wts:
        check_same_roi(ref_joint.roi, conditional_fields[wt].roi)
        if conditional_fields[wt].roi.points != ref_joint.roi.points:
            raise ValidationError("conditional fields must follow the reference point order")


def _ceiling(n_s, type_weights, wts):
    """Largest value a CR score can take over `wts`.

    Over all types the weights sum to one per point, so the ceiling is N_S
    and a trajectory with similarity 1 everywhere scores N_S exactly.
    """

    if len(wts) == len(WeatherType):
        return float(n_s)
    return math.fsum(type_weights)


def _below(ceiling, shortfalls):
    return max(ceiling - math.fsum(shortfalls), 0.0)


def _cr_loc(ref_joint, conditional_fields, wts):
    _check_conditionals(ref_joint, conditional_fields, wts)
    weights = marginal_current(ref_joint).rf_daily

    shortfalls = []
    for wt in wts:
        values = np.nan_to_num(conditional_fields[wt].similarity_values(), nan=0.0)
        shortfalls.extend(weights[:, wt - 1] * (1.0 - values))

    columns = [wt - 1 for wt in wts]
    ceiling = _ceiling(ref_joint.roi.n_s, weights[:, columns].ravel(), wts)
    return _below(ceiling, shortfalls)


def cr_loc(ref_joint, conditional_fields):
    """Conditional similarities weighted by the local reference daily rf."""

    return _cr_loc(ref_joint, conditional_fields, list(WeatherType))


def cr_loc_star(ref_joint, conditional_fields, wt_subset=DEFAULT_WT_STAR):
    return _cr_loc(ref_joint, conditional_fields, _canonical(wt_subset))


def regional_weights(ref_joint):
    """Median over the ROI of each type's daily rf, normalized over all types."""

    medians = np.median(marginal_current(ref_joint).rf_daily, axis=0)
    total = medians.sum()
    if total <= 0:
        raise ValidationError("reference daily rf has zero median for every type")
    return medians / total


def _cr_reg(ref_joint, conditional_fields, wts):
    _check_conditionals(ref_joint, conditional_fields, wts)
    weights = regional_weights(ref_joint)
    n_s = float(ref_joint.roi.n_s)

    shortfalls = []
    for wt in wts:
        regional = float(np.nansum(conditional_fields[wt].similarity_values()))
        shortfalls.append(weights[wt - 1] * (n_s - regional))

    ceiling = _ceiling(n_s, [n_s * weights[wt - 1] for wt in wts], wts)
    return _below(ceiling, shortfalls)


def cr_reg(ref_joint, conditional_fields):
    """Regional conditional sums weighted by median reference daily rf."""

    return _cr_reg(ref_joint, conditional_fields, list(WeatherType))


def cr_reg_star(ref_joint, conditional_fields, wt_subset=DEFAULT_WT_STAR):
    """CR_reg over WT* only; weights keep their all-type normalization."""

    return _cr_reg(ref_joint, conditional_fields, _canonical(wt_subset))


def _perr_terms(ref_persistence, model_persistence, wts):
    check_same_roi(ref_persistence.roi, model_persistence.roi)
    rows = [model_persistence.roi.index_of(p) for p in ref_persistence.roi.points]
    columns = [wt - 1 for wt in wts]

    ref = ref_persistence.per_rf[:, columns]
    model = model_persistence.per_rf[rows][:, columns]
    defined = (ref_persistence.defined[:, columns]
               & model_persistence.defined[rows][:, columns])

    return model - ref, defined


def persistence_coverage(ref_persistence, model_persistence, wts=None):
    """Fraction of (point, type) cells defined on both sides."""

    _, defined = _perr_terms(
        ref_persistence, model_persistence, _canonical(wts or list(WeatherType)))
    return float(defined.mean())


def _perr(ref_persistence, model_persistence, wts, squared):
    diff, defined = _perr_terms(ref_persistence, model_persistence, wts)
    errors = diff[defined] ** 2 if squared else np.abs(diff[defined])
    return float(errors.sum())


def perr(ref_persistence, model_persistence, squared=False):
    """Summed persistence error over points and types; lower is better.

    Cells undefined on either side are skipped.
    """

    return _perr(ref_persistence, model_persistence, list(WeatherType), squared)


def perr_star(ref_persistence, model_persistence, wt_subset=DEFAULT_WT_STAR,
              squared=False):
    return _perr(ref_persistence, model_persistence, _canonical(wt_subset), squared)


def normalize(score, n_s):
    if n_s < 1:
        raise ValidationError(f"cannot normalize over {n_s} points")
    return score / n_s


##############################################################################
# Per-trajectory score rows


@dataclass(frozen=True)
class ScoreConfig:
    wt_star: tuple = DEFAULT_WT_STAR
    min_support: int = DEFAULT_MIN_SUPPORT
    metric: Metric = Metric.OVERLAP
    squared_perr: bool = False

    def __post_init__(self):
        object.__setattr__(self, "wt_star", tuple(_canonical(self.wt_star)))
        if self.min_support < 0:
            raise ValidationError("min_support must be >= 0")


@dataclass(frozen=True)
class TrajectoryScores:
    trajectory_id: str
    DR: float
    CR_loc: float
    CR_loc_star: float
    CR_reg: float
    CR_reg_star: float
    PerR: float
    PerR_star: float
    coverage: float
    perr_coverage: float


def conditional_fields_all(ref_joint, model_joint, metric=Metric.OVERLAP,
                           min_support=DEFAULT_MIN_SUPPORT):
    """Conditional similarity fields for all 27 conditioning types."""

    return {
        wt: similarity_field(ref_joint, model_joint, metric, Mode(wt),
                             ALL_CATEGORIES, min_support)
        for wt in WeatherType
    }


def score_trajectory(ref_joint, model_joint, config=None):
    """Every regional score of one trajectory."""

    config = config or ScoreConfig()

    daily = similarity_field(ref_joint, model_joint, config.metric, DAILY,
                             ALL_CATEGORIES, config.min_support)
    conditionals = conditional_fields_all(
        ref_joint, model_joint, config.metric, config.min_support)

    ref_per = persistence(ref_joint, config.min_support)
    model_per = persistence(model_joint, config.min_support)

    coverage = float(np.mean([f.coverage for f in conditionals.values()]))
    perr_cover = persistence_coverage(ref_per, model_per)
    if coverage < 1 or perr_cover < 1:
        logger.info("%s: conditional coverage %.3f, persistence coverage %.3f",
                    model_joint.trajectory_id, coverage, perr_cover)

    return TrajectoryScores(
        trajectory_id=model_joint.trajectory_id,
        DR=dr(daily),
        CR_loc=cr_loc(ref_joint, conditionals),
        CR_loc_star=cr_loc_star(ref_joint, conditionals, config.wt_star),
        CR_reg=cr_reg(ref_joint, conditionals),
        CR_reg_star=cr_reg_star(ref_joint, conditionals, config.wt_star),
        PerR=perr(ref_per, model_per, config.squared_perr),
        PerR_star=perr_star(ref_per, model_per, config.wt_star, config.squared_perr),
        coverage=coverage,
        perr_coverage=perr_cover,
    )


def ranking_frame(scores, n_s, outcomes=None, stages=()):
    """Ranking table, best DR first (ties by trajectory id).

    With filter `outcomes`, the below-threshold count of each stage and the
    retained flag are carried over.
    """

    outcomes = {o.trajectory_id: o for o in outcomes or ()}
    rows = []

    for s in scores:
        row = {"trajectory": s.trajectory_id}
        row.update({name: getattr(s, name) for name in SCORE_COLUMNS})
        for name in ("DR", "CR_loc", "CR_reg"):
            row[f"{name}_norm"] = normalize(getattr(s, name), n_s)
        row["coverage"] = s.coverage
        row["perr_coverage"] = s.perr_coverage

        outcome = outcomes.get(s.trajectory_id)
        for stage in stages:
            row[f"n_below_{stage}"] = outcome.count(stage) if outcome else None
        row["retained"] = outcome.retained if outcome else None
        rows.append(row)

    columns = (["trajectory", *SCORE_COLUMNS, "DR_norm", "CR_loc_norm",
                "CR_reg_norm", "coverage", "perr_coverage"]
               + [f"n_below_{stage}" for stage in stages] + ["retained"])
    frame = pd.DataFrame(rows, columns=columns)

    for stage in stages:
        frame[f"n_below_{stage}"] = frame[f"n_below_{stage}"].astype("Int64")
    frame["retained"] = frame["retained"].astype("boolean")

    return (frame.sort_values(["DR", "trajectory"], ascending=[False, True],
                              kind="stable")
            .reset_index(drop=True))


##############################################################################
# Range bins, winners, correlations


@dataclass(frozen=True)
class RangeBins:
    """Point counts in [0, 0.80], (0.80, 0.88], (0.88, 0.95), [0.95, 1]."""

    counts: tuple
    minimum: float
    maximum: float

    @property
    def n_defined(self):
        return sum(self.counts)


def range_bins(field):
    values = field.similarity_values()
    values = values[~np.isnan(values)]

    if values.size == 0:
        raise ValidationError(f"{field!r} has no defined points")

    counts = (
        int((values <= 0.80).sum()),
        int(((values > 0.80) & (values <= 0.88)).sum()),
        int(((values > 0.88) & (values < 0.95)).sum()),
        int((values >= 0.95).sum()),
    )
    return RangeBins(counts, float(values.min()), float(values.max()))


def range_bin_frame(fields_by_trajectory):
    """One row per (trajectory, mode) from {trajectory_id: [fields...]}."""

    rows = []

    for trajectory_id, fields in fields_by_trajectory.items():
        for field in fields:
            if not field.defined.any():
                logger.warning("%s %s: no defined points, range bins skipped",
                               trajectory_id, field.mode.label)
                continue
            bins = range_bins(field)
            row = {"trajectory": trajectory_id, "mode": field.mode.label}
            row.update(zip(BIN_LABELS, bins.counts))
            row.update({"min": bins.minimum, "max": bins.maximum})
            rows.append(row)

    return pd.DataFrame(
        rows, columns=["trajectory", "mode", *BIN_LABELS, "min", "max"])


@dataclass(frozen=True, eq=False)
class WinnerMap:
    """Best trajectory per ROI point; None where nobody is defined."""

    roi: object
    mode: Mode
    winners: tuple
    values: np.ndarray

    def winner_counts(self):
        counts = {}
        for winner in self.winners:
            if winner is not None:
                counts[winner] = counts.get(winner, 0) + 1
        return counts

    def to_frame(self):
        return pd.DataFrame({
            "lon": self.roi.lons(),
            "lat": self.roi.lats(),
            "mode": self.mode.label,
            "winner": [w or "" for w in self.winners],
            "value": self.values,
        })


def winner_map(fields):
    """Highest similarity per point across {trajectory_id: SimilarityField}.

    Ties go to the lexicographically smallest trajectory id.
    """

    if not fields:
        raise ValidationError("winner map needs at least one trajectory")

    ids = sorted(fields)
    first = fields[ids[0]]
    roi = first.roi

    for trajectory_id in ids[1:]:
        check_same_roi(roi, fields[trajectory_id].roi)
        if fields[trajectory_id].mode != first.mode:
            raise ValidationError("winner map mixes similarity modes")

    winners = [None] * roi.n_s
    best = np.full(roi.n_s, np.nan)

    for trajectory_id in ids:
        candidate = fields[trajectory_id]
        rows = [candidate.roi.index_of(p) for p in roi.points]
        values = candidate.similarity_values()[rows]

        better = ~np.isnan(values) & (np.isnan(best) | (values > best))
        for s in np.flatnonzero(better):
            winners[s] = trajectory_id
        best = np.where(better, values, best)

    if any(w is None for w in winners):
        logger.warning("%s: %d points without a winner", first.mode.label,
                       sum(w is None for w in winners))

    return WinnerMap(roi, first.mode, tuple(winners), best)


def score_correlations(table, method="pearson", columns=SCORE_COLUMNS):
    """Correlation matrix of the score columns across trajectories.

    Constant columns give an all-NaN row and column.
    """

    if method not in ("pearson", "spearman"):
        raise ValidationError(f"unknown correlation method {method!r}")
    if len(table) < 3:
        raise ValidationError("correlations need at least three trajectories")

    scores = table[list(columns)].astype(float)
    matrix = scores.corr(method=method)

    constant = scores.nunique() <= 1
    for name in columns:
        if constant[name]:
            logger.warning("score %s is constant; correlations undefined", name)
        else:
            matrix.loc[name, name] = 1.0

    return matrix


def best_performers(daily_fields, t_sim=0.8, n_top=8):
    """Low-quantile summaries of daily similarity with top-n indicators.

    A trajectory scores 1 on a statistic when it is among the `n_top`
    highest by that statistic (ties by trajectory id).
    """

    rows = []
    for trajectory_id in sorted(daily_fields):
        field = daily_fields[trajectory_id]
        values = field.similarity_values()
        defined = values[~np.isnan(values)]
        if defined.size == 0:
            raise ValidationError(f"{trajectory_id}: no defined daily similarity")

        rows.append({
            "trajectory": trajectory_id,
            "q25": np.quantile(defined, 0.25),
            "q10": np.quantile(defined, 0.10),
            "q05": np.quantile(defined, 0.05),
            "min": defined.min(),
            "n_below": int((np.isnan(values) | (values <= t_sim)).sum()),
            "DR": dr(field),
        })

    frame = pd.DataFrame(
        rows, columns=["trajectory", "q25", "q10", "q05", "min", "n_below", "DR"])

    for stat in ("q25", "q10", "q05", "min"):
        order = frame.sort_values([stat, "trajectory"], ascending=[False, True],
                                  kind="stable")
        top = set(order["trajectory"].iloc[:n_top])
        frame[f"top_{stat}"] = frame["trajectory"].isin(top).astype(int)

    return frame
