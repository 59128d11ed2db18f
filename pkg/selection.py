"""Trajectory filter: daily stage first, then one stage per conditioning type.

A trajectory survives a stage when fewer than `limit` ROI points have a
similarity at or below `t_sim`. Undefined points count as below.
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np
import pandas as pd

from exceptions import PipelineError, ValidationError, WtselError
from frequencies import DEFAULT_MIN_SUPPORT
from models import DEFAULT_CONDITIONING
from similarity import (
    ALL_CATEGORIES, DAILY, Metric, Mode, check_same_roi, similarity_field)

logger = logging.getLogger(__name__)

DAILY_STAGE = "daily"


def default_limit(n_s):
    """One third of the ROI, rounded up (10 for 30 points)."""

    return math.ceil(n_s / 3)


@dataclass(frozen=True)
class FilterConfig:
    t_sim: float = 0.8
    limit: int = 10
    conditioning_set: tuple = DEFAULT_CONDITIONING
    metric: Metric = Metric.OVERLAP
    strategy: object = ALL_CATEGORIES
    min_support: int = DEFAULT_MIN_SUPPORT

    def __post_init__(self):
        object.__setattr__(self, "conditioning_set", tuple(self.conditioning_set))

        if not 0 < self.t_sim < 1:
            raise ValidationError(f"t_sim must be in (0, 1), got {self.t_sim}")
        if self.limit < 1:
            raise ValidationError(f"limit must be >= 1, got {self.limit}")
        if not self.conditioning_set:
            raise ValidationError("conditioning set is empty")
        if len(set(self.conditioning_set)) != len(self.conditioning_set):
            raise ValidationError("conditioning set has duplicates")
        if self.min_support < 0:
            raise ValidationError("min_support must be >= 0")

    @classmethod
    def for_roi(cls, roi, **kwargs):
        """Config whose default limit is ceil(N_S / 3) for `roi`."""

        if kwargs.get("limit") is None:
            kwargs["limit"] = default_limit(roi.n_s)

        config = cls(**kwargs)
        config.check_roi(roi)
        return config

    def check_roi(self, roi):
        if self.limit > roi.n_s:
            raise ValidationError(
                f"limit {self.limit} exceeds the {roi.n_s} ROI points")

    @property
    def stages(self):
        return (DAILY_STAGE,) + tuple(wt.code for wt in self.conditioning_set)

    @property
    def modes(self):
        return (DAILY,) + tuple(Mode(wt) for wt in self.conditioning_set)


def count_below(field, t_sim):
    """Points whose similarity is <= t_sim; undefined points included."""

    values = field.similarity_values()
    return int((np.isnan(values) | (values <= t_sim)).sum())


@dataclass(frozen=True)
class FilterOutcome:
    """Stage counts of one trajectory; stages after elimination are absent."""

    trajectory_id: str
    counts: dict
    retained: bool
    eliminated_at: str = None

    def count(self, stage):
        return self.counts.get(stage)


@dataclass(frozen=True, eq=False)
class TrajectoryFields:
    """Daily and conditional similarity fields of one trajectory."""

    trajectory_id: str
    daily: object
    conditionals: dict = field(default_factory=dict)


def build_fields(ref_joint, model_joint, config):
    """Similarity fields for the daily stage and each conditioning type."""

    def compare(mode):
        return similarity_field(
            ref_joint, model_joint, config.metric, mode, config.strategy,
            config.min_support)

    return TrajectoryFields(
        model_joint.trajectory_id,
        compare(DAILY),
        {wt: compare(Mode(wt)) for wt in config.conditioning_set},
    )


def _by_conditioning(conditionals):
    if isinstance(conditionals, dict):
        return dict(conditionals)
    return {f.mode.conditioning: f for f in conditionals}


def filter_trajectory(daily, conditionals, config, trajectory_id=None):
    """Run the stages in configured order, stopping at the first failure.

    A stage fails when its count reaches the limit.
    """

    conditionals = _by_conditioning(conditionals)
    trajectory_id = trajectory_id or daily.trajectory_id
    config.check_roi(daily.roi)

    missing = [wt.code for wt in config.conditioning_set if wt not in conditionals]
    if missing:
        raise ValidationError(
            f"{trajectory_id}: no conditional field for {', '.join(missing)}")

    stage_fields = [(DAILY_STAGE, daily)] + [
        (wt.code, conditionals[wt]) for wt in config.conditioning_set]

    counts = {}
    for stage, stage_field in stage_fields:
        check_same_roi(daily.roi, stage_field.roi)
        counts[stage] = count_below(stage_field, config.t_sim)

        if counts[stage] >= config.limit:
            logger.info("%s eliminated at %s (%d points <= %.2f)",
                        trajectory_id, stage, counts[stage], config.t_sim)
            return FilterOutcome(trajectory_id, counts, False, stage)

    return FilterOutcome(trajectory_id, counts, True)


def sequential_filter(ensemble, config):
    """Filter every trajectory; outcomes come back in input order.

    Failures are collected and raised together as a PipelineError naming
    each trajectory.
    """

    ensemble = list(ensemble)
    if not ensemble:
        raise ValidationError("no trajectories to filter")

    outcomes = []
    failures = []

    for fields in ensemble:
        try:
            outcomes.append(filter_trajectory(
                fields.daily, fields.conditionals, config, fields.trajectory_id))
        except WtselError as exc:
            failures.append(("filter", fields.trajectory_id, str(exc)))

    if failures:
        raise PipelineError(failures)

    sequence = " -> ".join(str(n) for _, n in survivor_counts(outcomes, config))
    logger.info("filter survivors: %s", sequence)

    return outcomes


def survivor_counts(outcomes, config):
    """[('input', n), ('daily', n), (code, n), ...] after each stage."""

    remaining = len(outcomes)
    result = [("input", remaining)]

    for stage in config.stages:
        remaining -= sum(1 for o in outcomes if o.eliminated_at == stage)
        result.append((stage, remaining))

    return result


def ledger_frame(outcomes, config, perr=None):
    """The sequential-filter ledger; blank cells for unevaluated stages.

    `perr` maps trajectory ids to PerR, shown for retained trajectories.
    """

    perr = perr or {}
    rows = []

    for outcome in outcomes:
        row = {"trajectory": outcome.trajectory_id}
        for stage in config.stages:
            row[f"stage_{stage}"] = outcome.count(stage)
        row["retained"] = outcome.retained
        row["eliminated_at"] = outcome.eliminated_at or ""
        row["PerR"] = perr.get(outcome.trajectory_id) if outcome.retained else None
        rows.append(row)

    columns = (["trajectory"] + [f"stage_{s}" for s in config.stages]
               + ["retained", "eliminated_at", "PerR"])
    frame = pd.DataFrame(rows, columns=columns)

    for stage in config.stages:
        frame[f"stage_{stage}"] = frame[f"stage_{stage}"].astype("Int64")
    frame["PerR"] = frame["PerR"].astype("Float64")

    return frame


def survivor_frame(outcomes, config):
    return pd.DataFrame(survivor_counts(outcomes, config), columns=["stage", "survivors"])


def conditional_count_table(ensemble, config):
    """Below-threshold counts per conditioning type for daily-stage survivors.

    Unlike the sequential ledger every conditioning type is evaluated, so
    the table shows where each trajectory struggles.
    """

    rows = []

    for fields in ensemble:
        n_daily = count_below(fields.daily, config.t_sim)
        if n_daily >= config.limit:
            continue

        row = {"trajectory": fields.trajectory_id, "daily": n_daily}
        for wt in config.conditioning_set:
            row[wt.code] = count_below(fields.conditionals[wt], config.t_sim)
        rows.append(row)

    columns = ["trajectory", "daily"] + [wt.code for wt in config.conditioning_set]
    return pd.DataFrame(rows, columns=columns)
