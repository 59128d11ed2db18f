"""Report rendering: SVG grid heatmaps and key-point profiles."""

from pathlib import Path
import logging

from jinja2 import Environment, FileSystemLoader
import numpy as np
import pandas as pd

from exceptions import ValidationError
from models import KEY_POINTS

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).resolve().parent / "templates"

# Sequential palette; index 0 is similarity 0 and the last stop is 1.
VIRIDIS = (
    "#440154", "#482878", "#3E4989", "#31688E", "#26828E",
    "#1F9E89", "#35B779", "#6DCD59", "#B4DE2C", "#FDE725", "#FFF7B2",
)

CATEGORICAL = (
    "#1F77B4", "#FF7F0E", "#2CA02C", "#D62728", "#9467BD", "#8C564B",
    "#E377C2", "#7F7F7F", "#BCBD22", "#17BECF", "#AEC7E8", "#FFBB78",
)

UNDEFINED_FILL = "#CCCCCC"

CELL_SIZE = 56
MARGIN = 48
LEGEND_HEIGHT = 32


def _comment_safe(value):
    """Text allowed inside an XML comment."""

    text = str(value)
    while "--" in text:
        text = text.replace("--", "- -")
    return text


environment = Environment(
    loader=FileSystemLoader(str(TEMPLATE_DIR)),
    autoescape=True,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)
environment.filters["comment_safe"] = _comment_safe


def _hex_to_rgb(color):
    return tuple(int(color[i:i + 2], 16) for i in (1, 3, 5))


def value_color(value, palette=VIRIDIS):
    """Interpolated palette color; the scale is fixed to [0, 1]."""

    if value is None or np.isnan(value):
        return UNDEFINED_FILL

    position = min(max(float(value), 0.0), 1.0) * (len(palette) - 1)
    low = int(np.floor(position))
    high = min(low + 1, len(palette) - 1)
    weight = position - low

    a = _hex_to_rgb(palette[low])
    b = _hex_to_rgb(palette[high])
    mixed = (round(x + (y - x) * weight) for x, y in zip(a, b))
    return "#" + "".join(f"{c:02X}" for c in mixed)


def _ink(fill):
    r, g, b = _hex_to_rgb(fill)
    return "#000000" if 0.299 * r + 0.587 * g + 0.114 * b > 140 else "#FFFFFF"


def _layout(roi):
    """Pixel origin of every ROI point; north at the top, west on the left."""

    lons = sorted(set(roi.lons().tolist()))
    lats = sorted(set(roi.lats().tolist()), reverse=True)

    def x_of(lon):
        return MARGIN + lons.index(lon) * CELL_SIZE

    def y_of(lat):
        return MARGIN + lats.index(lat) * CELL_SIZE

    positions = [(x_of(lon), y_of(lat)) for lon, lat in roi.points]
    lon_ticks = [(x_of(lon) + CELL_SIZE // 2, f"{lon:g}") for lon in lons]
    lat_ticks = [(y_of(lat) + CELL_SIZE // 2 + 4, f"{lat:g}") for lat in lats]
    size = (MARGIN * 2 + len(lons) * CELL_SIZE,
            MARGIN * 2 + len(lats) * CELL_SIZE + LEGEND_HEIGHT)

    return positions, lon_ticks, lat_ticks, size


def _render(roi, fills, labels, legend, title, provenance):
    positions, lon_ticks, lat_ticks, (width, height) = _layout(roi)

    cells = [
        {
            "x": x, "y": y, "fill": fill, "ink": _ink(fill), "label": label,
            "lon": f"{lon:g}", "lat": f"{lat:g}",
        }
        for (x, y), fill, label, (lon, lat) in zip(positions, fills, labels, roi.points)
    ]

    template = environment.get_template("heatmap.svg.j2")
    return template.render(
        title=title,
        provenance=list((provenance or {}).items()),
        cells=cells,
        size=CELL_SIZE,
        font_size=11,
        margin=MARGIN,
        width=width,
        height=height,
        legend_height=LEGEND_HEIGHT,
        lon_ticks=lon_ticks,
        lat_ticks=lat_ticks,
        legend=legend,
    )


def _value_legend(width):
    stops = np.linspace(0.0, 1.0, len(VIRIDIS))
    swatch = (width - 2 * MARGIN) / len(stops)
    return [
        {"x": round(MARGIN + i * swatch, 2), "width": round(swatch, 2),
         "fill": value_color(v), "label": f"{v:.1f}" if i % 2 == 0 else ""}
        for i, v in enumerate(stops)
    ]


def render_field_svg(field, provenance=None):
    """SVG heatmap of a similarity field, one cell per ROI point."""

    values = field.similarity_values()
    fills = [value_color(v) for v in values]
    labels = ["n/a" if np.isnan(v) else f"{v:.2f}" for v in values]

    width = _layout(field.roi)[3][0]
    title = (f"{field.trajectory_id} {field.metric.value} "
             f"{field.mode.label} {field.strategy.label}")

    return _render(field.roi, fills, labels, _value_legend(width), title, provenance)


def render_winner_svg(winners, provenance=None):
    """SVG map of the best trajectory per point, colored by trajectory."""

    names = sorted({w for w in winners.winners if w is not None})
    colors = {name: CATEGORICAL[i % len(CATEGORICAL)] for i, name in enumerate(names)}

    fills = [colors.get(w, UNDEFINED_FILL) for w in winners.winners]
    labels = [
        "none" if w is None else f"{w[:8]} {v:.2f}"
        for w, v in zip(winners.winners, winners.values)
    ]

    width = _layout(winners.roi)[3][0]
    swatch = (width - 2 * MARGIN) / max(len(names), 1)
    legend = [
        {"x": round(MARGIN + i * swatch, 2), "width": round(swatch, 2),
         "fill": colors[name], "label": name}
        for i, name in enumerate(names)
    ]

    return _render(winners.roi, fills, labels, legend,
                   f"best trajectory, {winners.mode.label}", provenance)


def emit_heatmap(field_or_winners, path, provenance=None):
    """Write a similarity field or a winner map as SVG."""

    if hasattr(field_or_winners, "winners"):
        svg = render_winner_svg(field_or_winners, provenance)
    else:
        svg = render_field_svg(field_or_winners, provenance)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(svg)
    logger.debug("wrote %s", path)
    return path


def key_point_profile(fields_by_trajectory, points=None):
    """Similarity at named points for every (trajectory, mode).

    `fields_by_trajectory` maps trajectory ids to lists of fields; `points`
    maps names to (lon, lat) and defaults to the shipped key points.
    """

    points = KEY_POINTS if points is None else points
    rows = []

    for trajectory_id, fields in fields_by_trajectory.items():
        for name, point in points.items():
            for field in fields:
                if not field.roi.contains(point):
                    raise ValidationError(
                        f"key point {name} {point} is outside the region")
                rows.append({
                    "trajectory": trajectory_id,
                    "point": name,
                    "lon": point[0],
                    "lat": point[1],
                    "mode": field.mode.label,
                    "value": field.similarity_values()[field.roi.index_of(point)],
                })

    return pd.DataFrame(
        rows, columns=["trajectory", "point", "lon", "lat", "mode", "value"])


def points_within(roi, points):
    """The named points that belong to `roi`; the rest are logged and dropped."""

    inside = {name: p for name, p in points.items() if roi.contains(p)}
    if len(inside) < len(points):
        logger.warning("%d key points outside the region are skipped",
                       len(points) - len(inside))
    return inside
