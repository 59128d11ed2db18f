"""Validation of command-line parameters.

Every subcommand hands its raw flag strings to one of these forms as a
werkzeug MultiDict; `validate()` enforces the documented ranges and the
`to_*` methods turn clean data into the immutable configs the library uses.
"""

from pathlib import Path

from werkzeug.datastructures import MultiDict
from wtforms import BooleanField, FloatField, Form, IntegerField, SelectField, StringField
from wtforms.validators import (
    InputRequired, NumberRange, Optional, ValidationError)

from classifier import ClassifierConfig
from exceptions import WtselError
from generator.markov import Perturbation
from models import SeasonWindow, parse_wt_list
from pipeline import RunConfig
from scores import ScoreConfig
from selection import FilterConfig
from similarity import Metric, Mode, SubsetStrategy

METRIC_CHOICES = [(m.value, m.value) for m in Metric]


def formdata(params):
    """MultiDict of the flags that were given, as strings."""

    return MultiDict(
        {key: str(value) for key, value in params.items()
         if value is not None and value is not False})


def _parses_with(parser):
    """Validator that runs `parser` on the field data."""

    def validator(form, field):
        if field.data in (None, ""):
            return
        try:
            parser(field.data)
        except (WtselError, ValueError) as exc:
            raise ValidationError(str(exc))

    return validator


def open_interval(low, high):
    def validator(form, field):
        if field.data is not None and not low < field.data < high:
            raise ValidationError(f"must be strictly between {low} and {high}")

    return validator


def existing_file(form, field):
    if field.data and not Path(field.data).is_file():
        raise ValidationError(f"{field.data} is not a readable file")


def existing_dir(form, field):
    if field.data and not Path(field.data).is_dir():
        raise ValidationError(f"{field.data} is not a directory")


def parse_months(text):
    months = frozenset(int(part) for part in str(text).split(",") if part.strip())
    return SeasonWindow(months=months).months


def parse_years(text):
    first, sep, last = str(text).partition(":")
    if not sep:
        raise ValueError(f"years must look like 1979:2005, got {text!r}")
    return int(first), int(last)


def form_errors(form):
    """'field: message' lines for every failed field."""

    return [
        f"{name}: {message}"
        for name, messages in form.errors.items()
        for message in messages
    ]


##############################################################################
# Reusable field groups


class WindowForm(Form):
    """Season window."""

    months = StringField(
        'Months',
        default="6,7,8,9",
        validators=[_parses_with(parse_months)],
    )

    years = StringField(
        'Years',
        default="1979:2005",
        validators=[_parses_with(lambda text: SeasonWindow(
            first_year=parse_years(text)[0], last_year=parse_years(text)[1]))],
    )

    def to_window(self):
        first, last = parse_years(self.years.data)
        return SeasonWindow(parse_months(self.months.data), first, last)


class ComparisonForm(WindowForm):
    """Reference, candidates and how they are compared."""

    ref = StringField(
        'Reference',
        validators=[InputRequired(), existing_file],
    )

    metric = SelectField(
        'Metric',
        choices=METRIC_CHOICES,
        default="overlap",
    )

    subset = StringField(
        'Subset',
        default="all",
        validators=[_parses_with(SubsetStrategy.parse)],
    )

    min_support = IntegerField(
        'Minimum support',
        default=30,
        validators=[NumberRange(min=0)],
    )


class FilterFieldsForm(ComparisonForm):
    """Filter thresholds over a directory of candidates."""

    models = StringField(
        'Models',
        validators=[InputRequired(), existing_dir],
    )

    tsim = FloatField(
        'Similarity threshold',
        default=0.8,
        validators=[open_interval(0, 1)],
    )

    limit = IntegerField(
        'Limit',
        validators=[Optional(), NumberRange(min=1)],
    )

    condition = StringField(
        'Conditioning types',
        default="PA,PC,PDNE,U",
        validators=[_parses_with(parse_wt_list)],
    )

    def to_filter_config(self, roi):
        return FilterConfig.for_roi(
            roi,
            t_sim=self.tsim.data,
            limit=self.limit.data,
            conditioning_set=parse_wt_list(self.condition.data),
            metric=Metric(self.metric.data),
            strategy=SubsetStrategy.parse(self.subset.data),
            min_support=self.min_support.data,
        )


class ScoreFieldsForm(FilterFieldsForm):
    """Score options on top of the filter."""

    wt_star = StringField(
        'WT*',
        default="PA,PDNE,PC,U",
        validators=[_parses_with(parse_wt_list)],
    )

    perr_norm = SelectField(
        'PerR norm',
        choices=[("absolute", "absolute"), ("squared", "squared")],
        default="absolute",
    )

    correlation = SelectField(
        'Correlation method',
        choices=[("pearson", "pearson"), ("spearman", "spearman")],
        default="pearson",
    )

    def to_score_config(self):
        return ScoreConfig(
            wt_star=parse_wt_list(self.wt_star.data),
            min_support=self.min_support.data,
            metric=Metric(self.metric.data),
            squared_perr=self.perr_norm.data == "squared",
        )


##############################################################################
# One form per subcommand


class ClassifyForm(Form):
    """Parameters of `wtsel classify`."""

    slp = StringField('Pressure file', validators=[InputRequired(), existing_file])
    out = StringField('Output', validators=[InputRequired()])

    roi = SelectField(
        'Region',
        choices=[("default", "default"), ("interior", "interior")],
        default="default",
    )

    u_flow = FloatField('U flow threshold', default=6.0, validators=[NumberRange(min=0)])
    u_vort = FloatField('U vorticity threshold', default=6.0, validators=[NumberRange(min=0)])
    lon_span = FloatField('Stencil lon span', default=10.0, validators=[NumberRange(min=0.5)])
    lat_span = FloatField('Stencil lat span', default=5.0, validators=[NumberRange(min=0.5)])
    no_latitude_scaling = BooleanField('Unscaled coefficients')

    def to_classifier_config(self):
        return ClassifierConfig(
            lon_span=self.lon_span.data,
            lat_span=self.lat_span.data,
            u_flow=self.u_flow.data,
            u_vort=self.u_vort.data,
            latitude_scaling=not self.no_latitude_scaling.data,
        )


class FreqForm(WindowForm):
    """Parameters of `wtsel freq`."""

    series = StringField('Series', validators=[InputRequired(), existing_file])
    out = StringField('Output', validators=[InputRequired()])
    summary = StringField('Summary output', validators=[Optional()])
    persistence = StringField('Persistence summary output', validators=[Optional()])
    min_support = IntegerField('Minimum support', default=30, validators=[NumberRange(min=0)])

    wt_star = StringField(
        'Persistence types',
        default="PA,PDNE,PC,U",
        validators=[_parses_with(parse_wt_list)],
    )


class CompareForm(ComparisonForm):
    """Parameters of `wtsel compare`."""

    model = StringField('Model', validators=[InputRequired(), existing_file])
    out = StringField('Output', validators=[InputRequired()])

    mode = StringField(
        'Mode',
        default="daily",
        validators=[_parses_with(Mode.parse)],
    )

    svg = StringField('SVG output', validators=[Optional()])
    all_metrics = StringField('Metric comparison output', validators=[Optional()])
    d_opt = StringField('D_opt output', validators=[Optional()])


class FilterForm(FilterFieldsForm):
    """Parameters of `wtsel filter`."""

    out = StringField('Ledger output', validators=[InputRequired()])
    counts = StringField('Conditional count output', validators=[Optional()])


class ScoreForm(ScoreFieldsForm):
    """Parameters of `wtsel score`."""

    out = StringField('Ranking output', validators=[InputRequired()])
    bins = StringField('Range-bin output', validators=[Optional()])
    correlations = StringField('Correlation output', validators=[Optional()])
    winners = StringField('Winner-map output', validators=[Optional()])


class SimulateForm(WindowForm):
    """Parameters of `wtsel simulate`."""

    transition = StringField('Transition file', validators=[Optional(), existing_file])
    out = StringField('Output', validators=[InputRequired()])
    seed = IntegerField('Seed', default=0, validators=[NumberRange(min=0)])
    trajectory = StringField('Trajectory id', validators=[Optional()])

    delta = FloatField('Perturbation', validators=[Optional(), NumberRange(min=0, max=1)])

    kind = SelectField(
        'Perturbation kind',
        choices=[(p.value, p.value) for p in Perturbation],
        default=Perturbation.ROW_JITTER.value,
    )

    perturb_seed = IntegerField('Perturbation seed', default=0, validators=[NumberRange(min=0)])


class ReportForm(Form):
    """Parameters of `wtsel report`."""

    field_dir = StringField('Field directory', validators=[InputRequired(), existing_dir])
    out = StringField('Output directory', validators=[InputRequired()])


class RunForm(ScoreFieldsForm):
    """Parameters of `wtsel run`."""

    out = StringField('Output directory', validators=[InputRequired()])
    persist = BooleanField('Persist intermediates')

    def to_run_config(self, roi):
        return RunConfig(
            ref=Path(self.ref.data),
            models=Path(self.models.data),
            out=Path(self.out.data),
            window=self.to_window(),
            filter=self.to_filter_config(roi),
            score=self.to_score_config(),
            correlation_method=self.correlation.data,
            persist_intermediates=self.persist.data,
        )
