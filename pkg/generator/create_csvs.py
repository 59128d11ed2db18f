"""Generate a synthetic reference and candidate ensemble as CSV files.

Nothing here is needed to use wtsel on real data; run it to get a desk-scale
data set that exercises every subcommand:

    python -m generator.create_csvs --out synthetic

The output directory holds `ref.csv` (the reference series),
`transition.csv` (the chain it was drawn from) and `models/`, one series per
candidate. Candidates are either siblings (same chain, other seed) or
perturbed chains, so the expected ranking is known in advance.
"""

from pathlib import Path
import logging

import click

from generator.markov import MarkovSpec, Perturbation, perturb, simulate
from models import RegionOfInterest, SeasonWindow
from storage import write_transition, write_wt_series

logger = logging.getLogger(__name__)

REF_SEED = 1
FIRST_MODEL_SEED = 100

# (name prefix, perturbation kind, delta); delta None means a plain sibling.
MEMBER_KINDS = [
    ("sibling", None, None),
    ("jitter10", Perturbation.ROW_JITTER, 0.1),
    ("jitter30", Perturbation.ROW_JITTER, 0.3),
    ("jitter50", Perturbation.ROW_JITTER, 0.5),
    ("inflate20", Perturbation.PERSISTENCE_INFLATION, 0.2),
    ("inflate40", Perturbation.PERSISTENCE_INFLATION, 0.4),
]


def ensemble_specs(spec, members_per_kind):
    """(trajectory_id, spec) for every candidate; seeds never repeat."""

    seed = FIRST_MODEL_SEED
    members = []

    for prefix, kind, delta in MEMBER_KINDS:
        for member in range(members_per_kind):
            candidate = spec.with_seed(seed)
            if kind is not None:
                candidate = perturb(candidate, delta, kind, seed=seed)
            members.append((f"{prefix}_r{member + 1}", candidate))
            seed += 1

    return members


def create_dataset(out_dir, members_per_kind=6, window=None, seed=0):
    """Write the reference, its transition spec and the ensemble."""

    out_dir = Path(out_dir)
    window = window or SeasonWindow()
    spec = MarkovSpec.random(RegionOfInterest.default(), seed)
    header = {"generator": "create_csvs", "seed": seed,
              "members_per_kind": members_per_kind}

    write_transition(spec, out_dir / "transition.csv", header)
    write_wt_series(simulate(spec.with_seed(REF_SEED), window, "ref"),
                    out_dir / "ref.csv", header)

    members = ensemble_specs(spec, members_per_kind)
    for trajectory_id, candidate in members:
        series = simulate(candidate, window, trajectory_id)
        write_wt_series(series, out_dir / "models" / f"{trajectory_id}.csv", header)

    logger.info("wrote reference and %d candidates to %s", len(members), out_dir)
    return out_dir


@click.command()
@click.option("--out", default="synthetic", show_default=True, help="Output directory.")
@click.option("--members", default=6, show_default=True, type=click.IntRange(min=1),
              help="Members per perturbation kind.")
@click.option("--seed", default=0, show_default=True, type=click.IntRange(min=0),
              help="Seed of the shared chain.")
def main(out, members, seed):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    create_dataset(out, members, seed=seed)


if __name__ == "__main__":
    main()
