"""Spatially varying first-order Markov chains over the 27 weather types.

Sampling is inverse-CDF on PCG64 uniforms: each point draws one uniform per
day from its own stream (see `generator.helpers.point_generator`) and takes
the first category whose cumulative probability exceeds it.
"""

from bisect import bisect_right
from dataclasses import dataclass, replace
from enum import Enum
import logging

import numpy as np

from exceptions import ValidationError
from generator.helpers import point_generator, random_distribution, random_rows
from models import N_WT, WtSeries

logger = logging.getLogger(__name__)

ROW_TOLERANCE = 1e-12

CLIMATOLOGY_STREAM = 1
JITTER_STREAM = 2


@dataclass(frozen=True, eq=False)
class MarkovSpec:
    """Per-point transition matrices and initial distributions.

    `transition[s, j - 1, i - 1]` is P(today = i | yesterday = j) at
    `roi.points[s]`.
    """

    roi: object
    transition: np.ndarray
    initial: np.ndarray
    seed: int = 0

    def __post_init__(self):
        transition = np.array(self.transition, dtype=float, copy=True)
        initial = np.array(self.initial, dtype=float, copy=True)
        n_s = self.roi.n_s

        if transition.shape != (n_s, N_WT, N_WT):
            raise ValidationError(
                f"transition shape {transition.shape}, expected ({n_s}, 27, 27)")
        if initial.shape != (n_s, N_WT):
            raise ValidationError(
                f"initial shape {initial.shape}, expected ({n_s}, 27)")

        for name, array, sums in (
                ("transition row", transition, transition.sum(axis=2)),
                ("initial distribution", initial, initial.sum(axis=1))):
            if not np.isfinite(array).all() or (array < 0).any():
                raise ValidationError(f"{name} entries must be finite and >= 0")
            if (np.abs(sums - 1.0) > ROW_TOLERANCE).any():
                raise ValidationError(f"{name} does not sum to 1")

        if int(self.seed) < 0:
            raise ValidationError("seed must be >= 0")

        transition.setflags(write=False)
        initial.setflags(write=False)
        object.__setattr__(self, "transition", transition)
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "seed", int(self.seed))

    def __repr__(self):
        return f"<MarkovSpec {self.roi.n_s} points, seed {self.seed}>"

    @classmethod
    def from_matrix(cls, roi, matrix, initial=None, seed=0):
        """Same 27 x 27 matrix at every point; uniform start by default."""

        matrix = np.asarray(matrix, dtype=float)
        if initial is None:
            initial = np.full(N_WT, 1.0 / N_WT)

        return cls(
            roi,
            np.broadcast_to(matrix, (roi.n_s, N_WT, N_WT)),
            np.broadcast_to(np.asarray(initial, dtype=float), (roi.n_s, N_WT)),
            seed,
        )

    @classmethod
    def random(cls, roi, seed=0, persistence=0.6, concentration=0.5):
        """A persistent chain with a skewed, spatially varying climatology.

        At each point T = persistence * I + (1 - persistence) * 1 q^T, where q
        is a Dirichlet draw; q is then also the stationary distribution.
        """

        if not 0 <= persistence < 1:
            raise ValidationError("persistence must be in [0, 1)")

        transition = np.empty((roi.n_s, N_WT, N_WT))
        initial = np.empty((roi.n_s, N_WT))

        for s in range(roi.n_s):
            q = random_distribution(
                point_generator(seed, s, CLIMATOLOGY_STREAM), N_WT, concentration)
            transition[s] = persistence * np.eye(N_WT) + (1 - persistence) * q[None, :]
            initial[s] = q

        # Renormalize away rounding so rows pass the 1e-12 check.
        transition /= transition.sum(axis=2, keepdims=True)
        initial /= initial.sum(axis=1, keepdims=True)

        return cls(roi, transition, initial, seed)

    def with_seed(self, seed):
        return replace(self, seed=seed)


class Perturbation(Enum):
    PERSISTENCE_INFLATION = "persistence_inflation"
    ROW_JITTER = "row_jitter"


def perturb(spec, delta, kind, seed=0):
    """Mix every transition row with a second distribution at weight `delta`.

    persistence_inflation mixes row j with the one-hot vector on j;
    row_jitter mixes each row with an independent Dirichlet(1) draw taken
    from the point's own stream for `seed`.
    """

    kind = Perturbation(kind)
    if not 0 <= delta <= 1:
        raise ValidationError(f"delta must be in [0, 1], got {delta}")

    if kind is Perturbation.PERSISTENCE_INFLATION:
        target = np.broadcast_to(np.eye(N_WT), spec.transition.shape)
    else:
        target = np.stack([
            random_rows(point_generator(seed, s, JITTER_STREAM), N_WT)
            for s in range(spec.roi.n_s)
        ])

    transition = (1.0 - delta) * spec.transition + delta * target
    return replace(spec, transition=transition)


def _cumulative(matrix):
    cdf = np.cumsum(matrix, axis=-1)
    cdf[..., -1] = 1.0
    return cdf.tolist()


def _year_blocks(dates):
    years = np.asarray(dates.year)
    starts = np.flatnonzero(np.r_[True, years[1:] != years[:-1]])
    return set(starts.tolist())


def simulate(spec, window, trajectory_id="synthetic"):
    """Simulate every point over the in-window days of `window`.

    Each season-year block starts afresh from the initial distribution.
    """

    dates = window.dates()
    block_starts = _year_blocks(dates)
    values = np.empty((len(dates), spec.roi.n_s), dtype=np.int8)

    for s in range(spec.roi.n_s):
        uniforms = point_generator(spec.seed, s).random(len(dates)).tolist()
        start_cdf = _cumulative(spec.initial[s])
        step_cdf = _cumulative(spec.transition[s])

        state = 0
        column = values[:, s]
        for d, u in enumerate(uniforms):
            cdf = start_cdf if d in block_starts else step_cdf[state]
            state = min(bisect_right(cdf, u), N_WT - 1)
            column[d] = state + 1

    logger.debug("simulated %s: %d days x %d points (seed %d)",
                 trajectory_id, len(dates), spec.roi.n_s, spec.seed)

    return WtSeries(trajectory_id, spec.roi, dates, values)
