"""wtsel command line: evaluate weather-type trajectories against a reference.

Exit codes: 0 on success, 1 for invalid input or parameters, 2 when a
pipeline stage fails.
"""

from functools import wraps
from pathlib import Path
import logging

import click

from classifier import classify_series, interior_region
from exceptions import ValidationError, WtselError
from forms import (
    ClassifyForm, CompareForm, FilterForm, FreqForm, ReportForm, RunForm,
    ScoreForm, SimulateForm, form_errors, formdata)
from frequencies import (
    build_joint, marginal_current, persistence, summarize_daily,
    summarize_persistence)
from generator.markov import MarkovSpec, perturb, simulate
from models import KEY_POINTS, RegionOfInterest, parse_wt_list, season_mask
from pipeline import (
    PROFILE_WTS, RunConfig, compare_trajectories, load_trajectories,
    run_pipeline, winner_maps)
from reports import emit_heatmap, key_point_profile, points_within
from scores import perr, range_bin_frame
from selection import (
    conditional_count_table, ledger_frame, sequential_filter, survivor_counts)
from similarity import (
    DAILY, Metric, Mode, SubsetStrategy, compare_metrics, d_opt_table,
    similarity_field)
from storage import (
    load_joint, read_similarity_field, read_slp, read_transition,
    read_wt_series, write_joint_rf, write_similarity_field, write_table,
    write_wt_series)

logger = logging.getLogger("wtsel")


##############################################################################
# Shared plumbing


def reports_errors(command):
    """Print wtsel errors to stderr and exit with their code."""

    @wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except WtselError as exc:
            click.echo(f"error: {exc}", err=True)
            click.get_current_context().exit(exc.exit_code)

    return wrapper


def validated(form_class, params):
    """Bind flags to a form; exit 1 with one line per problem if invalid."""

    form = form_class(formdata(params))

    if not form.validate():
        for line in form_errors(form):
            click.echo(f"error: {line}", err=True)
        click.get_current_context().exit(1)

    return form


def provenance(command, form):
    """Header for every file a subcommand writes."""

    header = {"command": command}
    header.update(
        (name, value) for name, value in form.data.items()
        if value not in (None, "", False))
    return header


def window_options(command):
    command = click.option("--months", help="Months kept, e.g. 6,7,8,9.")(command)
    return click.option("--years", help="Inclusive year range, e.g. 1979:2005.")(command)


def comparison_options(command):
    for option in reversed((
        click.option("--ref", help="Reference series or joint rf CSV."),
        click.option("--metric", help="overlap, dissimilarity, bhattacharyya or hellinger."),
        click.option("--subset", help="all, topK, cumNN or minrf:T."),
        click.option("--min-support", help="Minimum conditioning-day count."),
    )):
        command = option(command)
    return window_options(command)


def filter_options(command):
    for option in reversed((
        click.option("--models", help="Directory of candidate CSVs."),
        click.option("--tsim", help="Similarity threshold, default 0.8."),
        click.option("--limit", help="Admissible below-threshold points, default ceil(N_S/3)."),
        click.option("--condition", help="Conditioning types, default PA,PC,PDNE,U."),
    )):
        command = option(command)
    return comparison_options(command)


def score_options(command):
    for option in reversed((
        click.option("--wt-star", help="Relevant types for starred scores."),
        click.option("--perr-norm", help="absolute (default) or squared."),
        click.option("--correlation", help="pearson (default) or spearman."),
    )):
        command = option(command)
    return filter_options(command)


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log debug messages.")
@click.option("--quiet", "-q", is_flag=True, help="Log warnings only.")
def cli(verbose, quiet):
    """Evaluate weather-type trajectories against a reference."""

    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


##############################################################################
# Stage subcommands


@cli.command()
@click.option("--slp", help="Sea-level pressure CSV (date,lon,lat,slp_hpa).")
@click.option("--roi", help="default (30-point box) or interior (every point with a full stencil).")
@click.option("--u-flow", help="Weak-flow threshold on F.")
@click.option("--u-vort", help="Weak-flow threshold on |Z|.")
@click.option("--lon-span", help="Stencil longitude span in degrees.")
@click.option("--lat-span", help="Stencil latitude span in degrees.")
@click.option("--no-latitude-scaling", is_flag=True, help="Use unscaled coefficients.")
@click.option("--out", help="Output series CSV.")
@reports_errors
def classify(**params):
    """Classify daily pressure fields into weather types."""

    form = validated(ClassifyForm, params)
    config = form.to_classifier_config()
    field = read_slp(form.slp.data)

    if form.roi.data == "interior":
        roi = interior_region(field.grid, config)
    else:
        roi = RegionOfInterest.default()

    series = classify_series(field, roi, config)
    write_wt_series(series, form.out.data, provenance("classify", form))
    click.echo(f"classified {series.n_days} days at {roi.n_s} points")


@cli.command()
@click.option("--series", help="Weather-type series CSV.")
@click.option("--out", help="Output joint rf CSV.")
@click.option("--summary", help="Optional daily rf summary CSV.")
@click.option("--persistence", "persistence_out", help="Optional persistence summary CSV.")
@click.option("--wt-star", help="Types in the persistence summary.")
@click.option("--min-support", help="Minimum conditioning-day count.")
@window_options
@reports_errors
def freq(persistence_out, **params):
    """Build joint relative frequencies from a series."""

    params["persistence"] = persistence_out
    form = validated(FreqForm, params)
    header = provenance("freq", form)

    window = form.to_window()
    series = season_mask(read_wt_series(form.series.data), window)
    joint = build_joint(series, window)
    write_joint_rf(joint, form.out.data, header)

    n_days = series.n_days
    if form.summary.data:
        write_table(summarize_daily(marginal_current(joint), n_days),
                    form.summary.data, header)
    if form.persistence.data:
        write_table(
            summarize_persistence(persistence(joint, form.min_support.data),
                                  parse_wt_list(form.wt_star.data)),
            form.persistence.data, header)

    click.echo(f"{joint.trajectory_id}: {n_days} days, "
               f"{int(joint.pair_count.max())} pairs per point")


@cli.command()
@click.option("--model", help="Candidate series or joint rf CSV.")
@click.option("--mode", help="daily or a conditioning type code.")
@click.option("--out", help="Output similarity field CSV.")
@click.option("--svg", help="Optional SVG heatmap.")
@click.option("--all-metrics", help="Optional per-point comparison of every metric.")
@click.option("--d-opt", help="Optional D_opt table of the subset strategies.")
@comparison_options
@reports_errors
def compare(**params):
    """Compare one candidate with the reference, point by point."""

    form = validated(CompareForm, params)
    header = provenance("compare", form)
    window = form.to_window()
    mode = Mode.parse(form.mode.data)

    ref = load_joint(form.ref.data, window)
    model = load_joint(form.model.data, window, ref.roi)

    field = similarity_field(
        ref, model, Metric(form.metric.data), mode,
        SubsetStrategy.parse(form.subset.data), form.min_support.data)
    write_similarity_field(field, form.out.data, header)

    if form.svg.data:
        emit_heatmap(field, form.svg.data, header)
    if form.all_metrics.data:
        write_table(compare_metrics(ref, model, mode, min_support=form.min_support.data),
                    form.all_metrics.data, header)
    if form.d_opt.data:
        modes = (DAILY,) + tuple(Mode(wt) for wt in PROFILE_WTS)
        table = d_opt_table(ref, model, modes, min_support=form.min_support.data)
        write_table(table, form.d_opt.data,
                    {**header, "trajectory": model.trajectory_id})

    click.echo(f"{field.trajectory_id}: {int(field.defined.sum())} of "
               f"{field.roi.n_s} points defined")


@cli.command("filter")
@click.option("--out", help="Output ledger CSV.")
@click.option("--counts", help="Optional conditional count table CSV.")
@filter_options
@reports_errors
def filter_command(**params):
    """Run the sequential filter over a directory of candidates."""

    form = validated(FilterForm, params)
    header = provenance("filter", form)

    ref_joint, joints, _ = load_trajectories(
        form.ref.data, form.models.data, form.to_window())
    config = form.to_filter_config(ref_joint.roi)

    fields = compare_trajectories(ref_joint, joints, config)
    outcomes = sequential_filter(list(fields.values()), config)

    ref_per = persistence(ref_joint, config.min_support)
    perr_values = {
        t: perr(ref_per, persistence(joint, config.min_support))
        for t, joint in joints.items()
    }
    write_table(ledger_frame(outcomes, config, perr_values), form.out.data, header)

    if form.counts.data:
        write_table(conditional_count_table(list(fields.values()), config),
                    form.counts.data, header)

    click.echo(" -> ".join(
        f"{n}" for _, n in survivor_counts(outcomes, config)))


@cli.command()
@click.option("--out", help="Output ranking CSV.")
@click.option("--bins", help="Optional range-bin CSV.")
@click.option("--correlations", help="Optional score correlation CSV.")
@click.option("--winners", help="Optional winner-map CSV.")
@score_options
@reports_errors
def score(**params):
    """Score every candidate and write the ranking."""

    form = validated(ScoreForm, params)
    header = provenance("score", form)
    window = form.to_window()

    roi = load_joint(form.ref.data, window).roi
    bundle = run_pipeline(RunConfig(
        ref=Path(form.ref.data),
        models=Path(form.models.data),
        window=window,
        filter=form.to_filter_config(roi),
        score=form.to_score_config(),
        correlation_method=form.correlation.data,
    ))

    write_table(bundle.ranking, form.out.data, header)
    if form.bins.data:
        write_table(bundle.range_bins, form.bins.data, header)
    if form.correlations.data:
        write_table(bundle.correlations, form.correlations.data, header)
    if form.winners.data:
        write_table(bundle.winner_frame(), form.winners.data, header)

    top = bundle.ranking.iloc[0]
    click.echo(f"best DR: {top['trajectory']} ({top['DR']:.2f})")


@cli.command("simulate")
@click.option("--transition", help="Transition spec CSV; a random spec over the default region otherwise.")
@click.option("--seed", help="Simulation seed.")
@click.option("--delta", help="Optional perturbation magnitude in [0, 1].")
@click.option("--kind", help="row_jitter (default) or persistence_inflation.")
@click.option("--perturb-seed", help="Seed of the row_jitter draws.")
@click.option("--trajectory", help="Trajectory id; the output file stem by default.")
@click.option("--out", help="Output series CSV.")
@window_options
@reports_errors
def simulate_command(**params):
    """Simulate a synthetic weather-type trajectory."""

    form = validated(SimulateForm, params)
    seed = form.seed.data

    if form.transition.data:
        spec = read_transition(form.transition.data, seed)
    else:
        spec = MarkovSpec.random(RegionOfInterest.default(), seed)

    if form.delta.data is not None:
        spec = perturb(spec, form.delta.data, form.kind.data, form.perturb_seed.data)

    trajectory_id = form.trajectory.data or Path(form.out.data).stem
    series = simulate(spec, form.to_window(), trajectory_id)
    write_wt_series(series, form.out.data, provenance("simulate", form))
    click.echo(f"simulated {series.n_days} days at {spec.roi.n_s} points")


@cli.command()
@click.option("--fields", "field_dir", help="Directory of similarity field CSVs.")
@click.option("--out", help="Output directory.")
@reports_errors
def report(**params):
    """Render heatmaps, winner maps and key-point profiles of saved fields."""

    form = validated(ReportForm, params)
    header = provenance("report", form)
    out_dir = Path(form.out.data)

    paths = sorted(Path(form.field_dir.data).glob("*.csv"))
    if not paths:
        raise ValidationError(f"no similarity fields found in {form.field_dir.data}")

    by_trajectory = {}
    for path in paths:
        field = read_similarity_field(path)
        emit_heatmap(field, out_dir / f"{path.stem}.svg", header)
        by_trajectory.setdefault(field.trajectory_id, []).append(field)

    maps = winner_maps(by_trajectory)
    for label, winners in maps.items():
        emit_heatmap(winners, out_dir / f"winners_{label}.svg", header)

    roi = next(iter(by_trajectory.values()))[0].roi
    write_table(
        key_point_profile(by_trajectory, points_within(roi, KEY_POINTS)),
        out_dir / "key_points.csv", header)
    write_table(range_bin_frame(by_trajectory), out_dir / "range_bins.csv", header)

    click.echo(f"rendered {len(paths)} fields and {len(maps)} winner maps")


@cli.command()
@click.option("--out", help="Output directory.")
@click.option("--persist", is_flag=True, help="Also write joint rf and similarity fields.")
@score_options
@reports_errors
def run(**params):
    """Run the whole evaluation and write the report bundle."""

    form = validated(RunForm, params)
    window = form.to_window()

    roi = load_joint(form.ref.data, window).roi
    config = form.to_run_config(roi)
    bundle = run_pipeline(config)

    retained = int(bundle.ranking["retained"].sum())
    click.echo(f"{retained} of {len(bundle.ranking)} trajectories retained; "
               f"bundle in {config.out}")


if __name__ == "__main__":
    cli()
