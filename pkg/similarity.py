"""Similarity between categorical distributions, point by point.

Metrics work on the last axis of their inputs, so the same functions score a
single pair of distributions or a whole (points x 27) field at once.
"""

from dataclasses import dataclass
from enum import Enum
import logging

import numpy as np
import pandas as pd

from exceptions import EmptySubsetError, RoiMismatchError, ValidationError
from frequencies import DEFAULT_MIN_SUPPORT, conditional, marginal_current
from models import N_WT, WeatherType

logger = logging.getLogger(__name__)

NORMALIZED_TOLERANCE = 1e-9
RADICAND_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class CategoricalDistribution:
    """Nonnegative category weights; `normalized` ones sum to 1."""

    probs: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float, copy=True)

        if probs.ndim != 1:
            raise ValidationError("a distribution is a 1-d vector")
        if not np.isfinite(probs).all() or (probs < 0).any():
            raise ValidationError("distribution entries must be finite and >= 0")
        if self.normalized and abs(probs.sum() - 1.0) > NORMALIZED_TOLERANCE:
            raise ValidationError(
                f"normalized distribution sums to {probs.sum():.12f}")

        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def __len__(self):
        return len(self.probs)


def _as_array(p):
    if isinstance(p, CategoricalDistribution):
        return p.probs
    return np.asarray(p, dtype=float)


def _pair(p1, p2):
    a = _as_array(p1)
    b = _as_array(p2)

    if a.shape != b.shape:
        raise ValidationError(f"length mismatch: {a.shape} vs {b.shape}")
    if (a < 0).any() or (b < 0).any():
        raise ValidationError("distributions must be nonnegative")

    return a, b


def _both_normalized(a, b):
    return (
        (np.abs(a.sum(axis=-1) - 1.0) <= NORMALIZED_TOLERANCE)
        & (np.abs(b.sum(axis=-1) - 1.0) <= NORMALIZED_TOLERANCE)
    )


def _scalar(value):
    return float(value) if np.ndim(value) == 0 else value


def dissimilarity(p1, p2):
    """Half the L1 distance."""

    a, b = _pair(p1, p2)
    return _scalar(0.5 * np.abs(a - b).sum(axis=-1))


def overlap(p1, p2):
    """Sum of element-wise minima.

    Normalized pairs use the equivalent 1 - dissimilarity form, which is
    exactly 1 for identical inputs.
    """

    a, b = _pair(p1, p2)
    direct = np.minimum(a, b).sum(axis=-1)
    via_l1 = np.clip(1.0 - 0.5 * np.abs(a - b).sum(axis=-1), 0.0, 1.0)

    return _scalar(np.where(_both_normalized(a, b), via_l1, direct))


def bhattacharyya(p1, p2):
    """Sum of sqrt(p1 * p2).

    Normalized pairs use 1 - (1/2) * sum((sqrt p1 - sqrt p2)^2), equal for
    vectors summing to 1 and exactly 1 for identical inputs.
    """

    a, b = _pair(p1, p2)
    root_a = np.sqrt(a)
    root_b = np.sqrt(b)

    direct = (root_a * root_b).sum(axis=-1)
    via_l2 = 1.0 - 0.5 * ((root_a - root_b) ** 2).sum(axis=-1)

    return _scalar(np.where(_both_normalized(a, b), via_l2, direct))


def hellinger(p1, p2):
    """sqrt(1 - bhattacharyya); tiny negative radicands are clamped to 0."""

    radicand = 1.0 - np.asarray(bhattacharyya(p1, p2))

    if np.nanmin(np.atleast_1d(radicand), initial=0.0) < -RADICAND_TOLERANCE:
        raise ValidationError(
            f"negative Hellinger radicand {np.nanmin(radicand):.3e}")

    return _scalar(np.sqrt(np.clip(radicand, 0.0, None)))


class Metric(Enum):
    OVERLAP = "overlap"
    DISSIMILARITY = "dissimilarity"
    BHATTACHARYYA = "bhattacharyya"
    HELLINGER = "hellinger"

    @property
    def higher_is_better(self):
        return self in (Metric.OVERLAP, Metric.BHATTACHARYYA)

    def compute(self, p1, p2):
        return _METRIC_FUNCTIONS[self](p1, p2)

    @classmethod
    def parse(cls, text):
        try:
            return cls(str(text).strip().lower())
        except ValueError:
            raise ValidationError(f"unknown metric {text!r}")


_METRIC_FUNCTIONS = {
    Metric.OVERLAP: overlap,
    Metric.DISSIMILARITY: dissimilarity,
    Metric.BHATTACHARYYA: bhattacharyya,
    Metric.HELLINGER: hellinger,
}


@dataclass(frozen=True)
class Mode:
    """Daily distribution, or conditional on yesterday's type."""

    conditioning: WeatherType = None

    @property
    def label(self):
        return "daily" if self.conditioning is None else self.conditioning.code

    @property
    def is_daily(self):
        return self.conditioning is None

    @classmethod
    def parse(cls, text):
        text = str(text).strip()
        if text.lower() == "daily":
            return cls()
        return cls(WeatherType.from_code(text))


DAILY = Mode()


##############################################################################
# Subset strategies


class SubsetKind(Enum):
    ALL = "all"
    TOP_K = "top"
    CUMULATIVE_MASS = "cum"
    MIN_RF = "minrf"


@dataclass(frozen=True)
class SubsetStrategy:
    """Which categories enter a comparison, chosen from the reference side.

    `parameter` is k for TOP_K, the mass fraction for CUMULATIVE_MASS and the
    rf threshold for MIN_RF.
    """

    kind: SubsetKind = SubsetKind.ALL
    parameter: float = None

    def __post_init__(self):
        kind, value = self.kind, self.parameter

        if kind is SubsetKind.ALL:
            return
        if value is None:
            raise ValidationError(f"{kind.value} strategy needs a parameter")
        if kind is SubsetKind.TOP_K and not (
                float(value).is_integer() and 1 <= value <= N_WT):
            raise ValidationError(f"top-k needs 1 <= k <= {N_WT}, got {value}")
        if kind is SubsetKind.CUMULATIVE_MASS and not 0 < value <= 1:
            raise ValidationError(f"cumulative mass must be in (0, 1], got {value}")
        if kind is SubsetKind.MIN_RF and not 0 <= value < 1:
            raise ValidationError(f"minimum rf must be in [0, 1), got {value}")

    @classmethod
    def all(cls):
        return cls()

    @classmethod
    def top_k(cls, k):
        return cls(SubsetKind.TOP_K, int(k))

    @classmethod
    def cumulative_mass(cls, fraction):
        return cls(SubsetKind.CUMULATIVE_MASS, float(fraction))

    @classmethod
    def min_rf(cls, threshold):
        return cls(SubsetKind.MIN_RF, float(threshold))

    @classmethod
    def parse(cls, text):
        """Parse 'all', 'top9', 'cum70', 'minrf:0.05'."""

        text = str(text).strip().lower()

        try:
            if text == "all":
                return cls.all()
            if text.startswith("top"):
                return cls.top_k(int(text[3:]))
            if text.startswith("cum"):
                return cls.cumulative_mass(float(text[3:]) / 100.0)
            if text.startswith("minrf:"):
                return cls.min_rf(float(text[6:]))
        except ValueError:
            pass

        raise ValidationError(f"unknown subset strategy {text!r}")

    @property
    def label(self):
        if self.kind is SubsetKind.ALL:
            return "all"
        if self.kind is SubsetKind.TOP_K:
            return f"top{int(self.parameter)}"
        if self.kind is SubsetKind.CUMULATIVE_MASS:
            return f"cum{round(self.parameter * 100):g}"
        return f"minrf:{self.parameter:g}"

    def mask(self, p_ref):
        """Boolean mask of selected categories for each reference row."""

        p = np.asarray(p_ref, dtype=float)

        if self.kind is SubsetKind.ALL:
            return np.ones(p.shape, dtype=bool)
        if self.kind is SubsetKind.MIN_RF:
            return p > self.parameter

        # Descending order; stable sort keeps the lower index first on ties.
        order = np.argsort(-p, axis=-1, kind="stable")
        rank = np.empty_like(order)
        np.put_along_axis(rank, order, np.arange(p.shape[-1]), axis=-1)

        if self.kind is SubsetKind.TOP_K:
            return rank < int(self.parameter)

        cumulative = np.cumsum(np.take_along_axis(p, order, axis=-1), axis=-1)
        below = (cumulative < self.parameter - RADICAND_TOLERANCE).sum(axis=-1)
        n_keep = np.minimum(below + 1, p.shape[-1])
        return rank < n_keep[..., None]


ALL_CATEGORIES = SubsetStrategy()


def apply_subset(p_ref, p_model, strategy):
    """Restrict both distributions to the categories `strategy` picks from p_ref.

    Returns ((ref, model), selected) where `selected` holds 1-based category
    indices. Restricted vectors are not renormalized.
    """

    ref = p_ref if isinstance(p_ref, CategoricalDistribution) else CategoricalDistribution(p_ref)
    model = (p_model if isinstance(p_model, CategoricalDistribution)
             else CategoricalDistribution(p_model, normalized=False))

    if len(ref) != len(model):
        raise ValidationError(f"length mismatch: {len(ref)} vs {len(model)}")

    if strategy.kind is SubsetKind.ALL:
        return (ref, model), frozenset(range(1, len(ref) + 1))

    chosen = np.flatnonzero(strategy.mask(ref.probs))
    if chosen.size == 0:
        raise EmptySubsetError(f"{strategy.label} selected no categories")

    restricted = (
        CategoricalDistribution(ref.probs[chosen], normalized=False),
        CategoricalDistribution(model.probs[chosen], normalized=False),
    )
    return restricted, frozenset(int(i) + 1 for i in chosen)


##############################################################################
# Fields


@dataclass(frozen=True, eq=False)
class SimilarityField:
    """One metric value per ROI point; NaN marks an undefined point."""

    roi: object
    metric: Metric
    mode: Mode
    strategy: SubsetStrategy
    values: np.ndarray
    trajectory_id: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)

        if values.shape != (self.roi.n_s,):
            raise ValidationError("one similarity value per point is required")
        defined = values[~np.isnan(values)]
        if ((defined < 0) | (defined > 1)).any():
            raise ValidationError("similarity values must lie in [0, 1]")

        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __repr__(self):
        return (
            f"<SimilarityField {self.trajectory_id or '?'} "
            f"{self.metric.value}/{self.mode.label}/{self.strategy.label}>")

    @property
    def defined(self):
        return ~np.isnan(self.values)

    @property
    def coverage(self):
        return float(self.defined.mean())

    def similarity_values(self):
        """Values oriented so that higher always means more similar."""

        if self.metric.higher_is_better:
            return self.values
        return 1.0 - self.values

    def value_at(self, point):
        return float(self.values[self.roi.index_of(point)])


def check_same_roi(first, second):
    """Raise RoiMismatchError unless both regions hold the same points."""

    if not first.same_points(second):
        left = set(first.points)
        right = set(second.points)
        raise RoiMismatchError(
            sorted(left - right), sorted(right - left))


def _distributions(freqs, mode, min_support):
    """(points x 27) rows and a defined mask for one side of a comparison."""

    if mode.is_daily:
        rows = marginal_current(freqs).rf_daily
        return rows, np.ones(freqs.roi.n_s, dtype=bool)

    field = conditional(freqs, mode.conditioning, min_support)
    return field.rf_cond, field.defined


def similarity_field(ref_freqs, model_freqs, metric=Metric.OVERLAP, mode=DAILY,
                     strategy=ALL_CATEGORIES,
                     min_support=DEFAULT_MIN_SUPPORT):
    """Compare reference and model joint fields at every reference point.

    Conditional points are undefined where either side lacks support; a
    point where the strategy selects nothing is undefined too.
    """

    check_same_roi(ref_freqs.roi, model_freqs.roi)
    if model_freqs.roi.points != ref_freqs.roi.points:
        model_freqs = model_freqs.take_points(ref_freqs.roi)

    p_ref, ref_defined = _distributions(ref_freqs, mode, min_support)
    p_model, model_defined = _distributions(model_freqs, mode, min_support)
    defined = ref_defined & model_defined

    chosen = np.zeros(p_ref.shape, dtype=bool)
    chosen[defined] = strategy.mask(p_ref[defined])

    empty = defined & ~chosen.any(axis=1)
    if empty.any():
        logger.warning(
            "%s %s/%s: no categories selected at %d points",
            model_freqs.trajectory_id, mode.label, strategy.label, int(empty.sum()))
    defined &= ~empty

    values = np.full(ref_freqs.roi.n_s, np.nan)
    if defined.any():
        if strategy.kind is SubsetKind.ALL:
            a, b = p_ref[defined], p_model[defined]
        else:
            a = np.where(chosen[defined], p_ref[defined], 0.0)
            b = np.where(chosen[defined], p_model[defined], 0.0)
        values[defined] = np.clip(np.atleast_1d(metric.compute(a, b)), 0.0, 1.0)

    return SimilarityField(
        ref_freqs.roi, metric, mode, strategy, values, model_freqs.trajectory_id)


##############################################################################
# Deviation of a subset option from the all-categories baseline


def d_opt(option_values, reference_values):
    """Summed deviation of an option from the reference, in reference sd units.

    Both inputs are per-point arrays with NaN for undefined points; the
    defined points must coincide. The sd uses the n - 1 denominator.
    """

    y = np.asarray(option_values, dtype=float)
    x = np.asarray(reference_values, dtype=float)

    if y.shape != x.shape:
        raise ValidationError("option and reference cover different points")
    if not np.array_equal(np.isnan(y), np.isnan(x)):
        raise ValidationError("option and reference have different defined points")

    y = y[~np.isnan(y)]
    x = x[~np.isnan(x)]
    if x.size < 2:
        raise ValidationError("d_opt needs at least two defined points")

    sigma = x.std(ddof=1)
    if sigma == 0:
        raise ValidationError("reference values are constant (sd = 0)")

    return float((y - x).sum() / sigma)


D_OPT_STRATEGIES = (
    SubsetStrategy.top_k(12),
    SubsetStrategy.top_k(9),
    SubsetStrategy.cumulative_mass(0.9),
    SubsetStrategy.cumulative_mass(0.7),
    SubsetStrategy.min_rf(0.05),
)


def d_opt_table(ref_freqs, model_freqs, modes, metrics=(Metric.OVERLAP, Metric.HELLINGER),
                strategies=D_OPT_STRATEGIES, min_support=DEFAULT_MIN_SUPPORT):
    """D_opt of each strategy against All, per mode and metric.

    Values are compared in their similarity orientation (1 - Hellinger), on
    the points where both the option and the baseline are defined.
    """

    rows = []

    for mode in modes:
        for metric in metrics:
            baseline = similarity_field(
                ref_freqs, model_freqs, metric, mode, ALL_CATEGORIES, min_support)
            x = baseline.similarity_values()

            for strategy in strategies:
                option = similarity_field(
                    ref_freqs, model_freqs, metric, mode, strategy, min_support)
                y = option.similarity_values()

                both = ~np.isnan(x) & ~np.isnan(y)
                try:
                    value = d_opt(y[both], x[both])
                except ValidationError as exc:
                    logger.warning("d_opt %s/%s/%s undefined: %s",
                                   strategy.label, mode.label, metric.value, exc)
                    value = np.nan

                rows.append({
                    "strategy": strategy.label,
                    "mode": mode.label,
                    "metric": metric.value,
                    "d_opt": value,
                })

    return pd.DataFrame(rows, columns=["strategy", "mode", "metric", "d_opt"])


def compare_metrics(ref_freqs, model_freqs, mode=DAILY, metrics=tuple(Metric),
                    min_support=DEFAULT_MIN_SUPPORT):
    """Per-point values of several metrics side by side, similarity-oriented."""

    frame = pd.DataFrame({
        "lon": ref_freqs.roi.lons(),
        "lat": ref_freqs.roi.lats(),
    })

    for metric in metrics:
        field = similarity_field(
            ref_freqs, model_freqs, metric, mode, ALL_CATEGORIES, min_support)
        column = metric.value if metric.higher_is_better else f"1-{metric.value}"
        frame[column] = field.similarity_values()

    return frame
