"""End-to-end evaluation: frequencies, similarity, filter, scores, reports."""

from dataclasses import dataclass, field
from pathlib import Path
import logging

import pandas as pd

from exceptions import PipelineError, WtselError
from frequencies import (
    marginal_current, persistence, summarize_daily, summarize_persistence)
from models import DEFAULT_WT_STAR, KEY_POINTS, SeasonWindow
from reports import emit_heatmap, key_point_profile, points_within
from scores import (
    ScoreConfig, best_performers, range_bin_frame, ranking_frame,
    score_correlations, score_trajectory, winner_map)
from selection import (
    FilterConfig, build_fields, conditional_count_table, ledger_frame,
    sequential_filter, survivor_frame)
from similarity import DAILY, Metric, Mode, d_opt_table
from storage import (
    discover_trajectories, load_joint, load_reference, write_joint_rf,
    write_similarity_field, write_table)

logger = logging.getLogger(__name__)

# Conditioning types listed by the D_opt and persistence tables, index order.
PROFILE_WTS = tuple(sorted(DEFAULT_WT_STAR))


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run depends on."""

    ref: Path
    models: Path
    out: Path = None
    window: SeasonWindow = field(default_factory=SeasonWindow)
    filter: FilterConfig = field(default_factory=FilterConfig)
    score: ScoreConfig = field(default_factory=ScoreConfig)
    key_points: dict = field(default_factory=lambda: dict(KEY_POINTS))
    correlation_method: str = "pearson"
    persist_intermediates: bool = False

    def provenance(self):
        """Resolved settings as ordered key/value strings for file headers."""

        f = self.filter
        return {
            "ref": Path(self.ref).name,
            "models": Path(self.models).name,
            "months": ",".join(str(m) for m in sorted(self.window.months)),
            "years": f"{self.window.first_year}:{self.window.last_year}",
            "tsim": f.t_sim,
            "limit": f.limit,
            "condition": ",".join(wt.code for wt in f.conditioning_set),
            "metric": f.metric.value,
            "subset": f.strategy.label,
            "min_support": f.min_support,
            "wt_star": ",".join(wt.code for wt in self.score.wt_star),
            "perr_norm": "squared" if self.score.squared_perr else "absolute",
            "correlation": self.correlation_method,
        }


@dataclass(eq=False)
class ReportBundle:
    """Tables and maps of one run, written by `write`."""

    ranking: pd.DataFrame
    range_bins: pd.DataFrame
    ledger: pd.DataFrame
    survivors: pd.DataFrame
    conditional_counts: pd.DataFrame
    winners: dict
    key_points: pd.DataFrame
    d_opt: pd.DataFrame
    d_opt_trajectory: str
    correlations: pd.DataFrame
    best_performers: pd.DataFrame
    climatology: pd.DataFrame
    persistence_climatology: pd.DataFrame
    joints: dict = field(default_factory=dict)
    fields: dict = field(default_factory=dict)

    def winner_frame(self):
        frames = [w.to_frame() for w in self.winners.values()]
        return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(
            columns=["lon", "lat", "mode", "winner", "value"])

    def write(self, out_dir, provenance=None, intermediates=False):
        """Write every artifact under `out_dir`; returns the written paths."""

        out_dir = Path(out_dir)
        tables = {
            "ranking.csv": self.ranking,
            "range_bins.csv": self.range_bins,
            "ledger.csv": self.ledger,
            "survivors.csv": self.survivors,
            "conditional_counts.csv": self.conditional_counts,
            "winners.csv": self.winner_frame(),
            "key_points.csv": self.key_points,
            "correlations.csv": self.correlations,
            "best_performers.csv": self.best_performers,
            "climatology_daily.csv": self.climatology,
            "climatology_persistence.csv": self.persistence_climatology,
        }

        written = []
        for name, frame in tables.items():
            write_table(frame, out_dir / name, provenance)
            written.append(out_dir / name)

        # D_opt compares one trajectory, named in its header
        d_opt_header = {**(provenance or {}), "trajectory": self.d_opt_trajectory}
        write_table(self.d_opt, out_dir / "d_opt.csv", d_opt_header)
        written.append(out_dir / "d_opt.csv")

        for mode_label, winners in self.winners.items():
            path = out_dir / f"winners_{mode_label}.svg"
            written.append(emit_heatmap(winners, path, provenance))

        if intermediates:
            for trajectory_id, joint in self.joints.items():
                path = out_dir / "joint" / f"{trajectory_id}.csv"
                write_joint_rf(joint, path, provenance)
                written.append(path)

            for trajectory_id, fields in self.fields.items():
                for f in fields:
                    stem = f"{trajectory_id}_{f.mode.label}"
                    write_similarity_field(f, out_dir / "fields" / f"{stem}.csv", provenance)
                    written.append(out_dir / "fields" / f"{stem}.csv")
                    written.append(emit_heatmap(
                        f, out_dir / "fields" / f"{stem}.svg", provenance))

        logger.info("wrote %d artifacts to %s", len(written), out_dir)
        return written


def _run_stage(stage, items, work):
    """Apply `work` to each (trajectory_id, item); raise all failures at once."""

    results = {}
    failures = []

    for trajectory_id, item in items:
        try:
            results[trajectory_id] = work(item)
        except WtselError as exc:
            failures.append((stage, trajectory_id, str(exc)))

    if failures:
        raise PipelineError(failures)
    return results


def _retained_or_all(outcomes, what):
    retained = [o.trajectory_id for o in outcomes if o.retained]
    if retained:
        return retained

    logger.warning("no trajectory retained; %s uses all trajectories", what)
    return [o.trajectory_id for o in outcomes]


def load_trajectories(ref_path, models_dir, window):
    """Reference joint field, the candidates on its ROI, and the reference day count."""

    try:
        ref_joint, ref_days = load_reference(ref_path, window)
    except WtselError as exc:
        raise PipelineError([("frequencies", Path(ref_path).stem, str(exc))])

    paths = discover_trajectories(models_dir)
    logger.info("evaluating %d trajectories against %s over %d points",
                len(paths), ref_joint.trajectory_id, ref_joint.roi.n_s)

    joints = _run_stage(
        "frequencies", [(p.stem, p) for p in paths],
        lambda path: load_joint(path, window, ref_joint.roi))

    return ref_joint, joints, ref_days


def compare_trajectories(ref_joint, joints, filter_config):
    """Daily and conditional similarity fields of every candidate."""

    return _run_stage(
        "similarity", joints.items(),
        lambda joint: build_fields(ref_joint, joint, filter_config))


def winner_maps(fields_by_trajectory):
    """Winner map per mode from {trajectory_id: [fields...]}."""

    by_mode = {}
    for trajectory_id, fields in fields_by_trajectory.items():
        for f in fields:
            by_mode.setdefault(f.mode.label, {})[trajectory_id] = f

    return {label: winner_map(fields) for label, fields in by_mode.items()}


def run_pipeline(config):
    """Run every stage in order and assemble the report bundle.

    Stage failures are collected per trajectory and raised as one
    PipelineError naming the stage.
    """

    ref_joint, joints, ref_days = load_trajectories(
        config.ref, config.models, config.window)
    config.filter.check_roi(ref_joint.roi)

    fields = compare_trajectories(ref_joint, joints, config.filter)
    outcomes = sequential_filter(list(fields.values()), config.filter)

    scores = _run_stage(
        "scores", joints.items(),
        lambda joint: score_trajectory(ref_joint, joint, config.score))

    try:
        bundle = _assemble(
            config, ref_joint, ref_days, joints, fields, outcomes, scores)
    except WtselError as exc:
        raise PipelineError([("reports", None, str(exc))])

    if config.out is not None:
        bundle.write(config.out, config.provenance(), config.persist_intermediates)

    return bundle


def _assemble(config, ref_joint, ref_days, joints, fields, outcomes, scores):
    filter_config = config.filter
    ids = list(joints)
    stage_fields = {
        t: [fields[t].daily] + [fields[t].conditionals[wt]
                                for wt in filter_config.conditioning_set]
        for t in ids
    }

    ranking = ranking_frame(
        [scores[t] for t in ids], ref_joint.roi.n_s, outcomes, filter_config.stages)
    selected = _retained_or_all(outcomes, "reporting")

    best = ranking[ranking["trajectory"].isin(selected)].iloc[0]["trajectory"]
    d_opt = d_opt_table(
        ref_joint, joints[best],
        (DAILY,) + tuple(Mode(wt) for wt in PROFILE_WTS),
        (Metric.OVERLAP, Metric.HELLINGER),
        min_support=filter_config.min_support)

    correlation_ids = selected if len(selected) >= 3 else ids
    if len(correlation_ids) >= 3:
        correlations = score_correlations(
            ranking[ranking["trajectory"].isin(correlation_ids)],
            config.correlation_method)
        correlations = correlations.rename_axis("score").reset_index()
    else:
        logger.warning("fewer than three trajectories; correlations skipped")
        correlations = pd.DataFrame(columns=["score"])

    return ReportBundle(
        ranking=ranking,
        range_bins=range_bin_frame(stage_fields),
        ledger=ledger_frame(
            outcomes, filter_config, {t: scores[t].PerR for t in ids}),
        survivors=survivor_frame(outcomes, filter_config),
        conditional_counts=conditional_count_table(
            [fields[t] for t in ids], filter_config),
        winners=winner_maps({t: stage_fields[t] for t in selected}),
        key_points=key_point_profile(
            {t: stage_fields[t] for t in selected},
            points_within(ref_joint.roi, config.key_points)),
        d_opt=d_opt,
        d_opt_trajectory=best,
        correlations=correlations,
        best_performers=best_performers(
            {t: fields[t].daily for t in selected}, filter_config.t_sim),
        climatology=summarize_daily(marginal_current(ref_joint), ref_days),
        persistence_climatology=summarize_persistence(
            persistence(ref_joint, filter_config.min_support), PROFILE_WTS),
        joints=dict(joints),
        fields=stage_fields,
    )
