"""Chart specification records: parsing, validation, serialization, and the
object view used by the reasoning engine.

A chart record is a JSON object whose field names follow the file format
documented in README.md ("title", "x_label", "y_label", "type", "legend_num",
"legends", "group_num", "groups", "colors", "data_points", "legend_colors",
plus extension fields for box, candlestick, and node-link charts).
"""

from __future__ import annotations

import json
import weakref
from dataclasses import dataclass, field
from importlib import resources

from .errors import InvalidSpec, MalformedInput, SchemaMismatch

CHART_TYPES = (
    "bar_single", "bar_multi", "bar_stacked", "line_single", "line_multi",
    "pie", "radar", "rings", "rose", "bar_3d", "box", "funnel", "heatmap",
    "area", "bubble", "node_link", "candlestick", "treemap", "multi_axes",
)

#: The six common types; everything else counts as "Extra".
REGULAR_TYPES = frozenset(
    {"bar_single", "bar_multi", "bar_stacked", "line_single", "line_multi", "pie"}
)

BOX_FIELDS = (
    "median", "first_quartile", "third_quartile",
    "minimum_values", "maximum_values", "outlier_values",
)
CANDLESTICK_FIELDS = ("opening_price", "closing_price", "highest_price", "lowest_price")

_BASE_FIELDS = (
    "title", "x_label", "y_label", "type", "legend_num", "legends",
    "group_num", "groups", "colors", "legend_colors",
)


def color_vocabulary() -> list[str]:
    """The fixed list of named colors charts may use."""
    text = resources.files("chartchain.assets").joinpath("color_vocabulary.txt").read_text()
    return [line.strip() for line in text.splitlines() if line.strip()]


@dataclass(frozen=True)
class ChartSpec:
    """One validated-or-not chart record.

    ``data_points`` maps group -> legend -> value for every type except box
    and candlestick (which carry their own extension maps) and node_link
    (where the inner values are lists of target group names).
    """

    title: str
    x_label: str
    y_label: str
    chart_type: str
    legend_num: int
    legends: list[str]
    group_num: int
    groups: list[str]
    colors: list[str]
    legend_colors: dict[str, str]
    data_points: dict | None = None
    box: dict | None = None          # maps per BOX_FIELDS, keyed by legend
    candlestick: dict | None = None  # maps per CANDLESTICK_FIELDS, keyed by group

    def to_dict(self) -> dict:
        d = {
            "title": self.title,
            "x_label": self.x_label,
            "y_label": self.y_label,
            "type": self.chart_type,
            "legend_num": self.legend_num,
            "legends": list(self.legends),
            "group_num": self.group_num,
            "groups": list(self.groups),
            "colors": list(self.colors),
        }
        if self.data_points is not None:
            d["data_points"] = self.data_points
        d["legend_colors"] = dict(self.legend_colors)
        if self.box is not None:
            d.update({k: self.box[k] for k in BOX_FIELDS})
        if self.candlestick is not None:
            d.update({k: self.candlestick[k] for k in CANDLESTICK_FIELDS})
        return d


@dataclass(frozen=True)
class ChartObject:
    """One data point of a chart, as seen by the reasoning functions."""

    group: str
    legend: str
    value: float | None
    color: str
    attrs: dict | None = None        # box / candlestick per-object fields
    adjacency: tuple[str, ...] | None = None  # node_link targets

    @property
    def label(self) -> str:
        return f"({self.group}, {self.legend})"


@dataclass
class ValidationReport:
    violations: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, path: str, rule: str, message: str) -> None:
        self.violations.append((path, rule, message))


def serialize(spec: ChartSpec) -> str:
    """Serialize to the chart-record file format (stable field order)."""
    return json.dumps(spec.to_dict(), ensure_ascii=False, indent=1)


def parse_spec(data: bytes | str) -> ChartSpec:
    """Parse a serialized chart record.

    Only structural requirements are enforced here (the fields that must be
    present for the declared type).  Cross-field consistency such as count
    mismatches is the job of :func:`validate_spec`.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedInput(str(exc)) from exc
    if not isinstance(raw, dict):
        raise MalformedInput("top-level value is not an object")
    return spec_from_dict(raw)


def spec_from_dict(raw: dict) -> ChartSpec:
    for name in _BASE_FIELDS:
        if name not in raw:
            raise SchemaMismatch(f"missing required field {name!r}")
    chart_type = raw["type"]
    box = candle = points = None
    if chart_type == "box":
        for name in BOX_FIELDS:
            if name not in raw:
                raise SchemaMismatch(f"box record missing {name!r}")
        box = {name: raw[name] for name in BOX_FIELDS}
    elif chart_type == "candlestick":
        for name in CANDLESTICK_FIELDS:
            if name not in raw:
                raise SchemaMismatch(f"candlestick record missing {name!r}")
        candle = {name: raw[name] for name in CANDLESTICK_FIELDS}
    else:
        if "data_points" not in raw:
            raise SchemaMismatch("missing required field 'data_points'")
        points = raw["data_points"]
    return ChartSpec(
        title=raw["title"],
        x_label=raw["x_label"],
        y_label=raw["y_label"],
        chart_type=chart_type,
        legend_num=raw["legend_num"],
        legends=list(raw["legends"]),
        group_num=raw["group_num"],
        groups=list(raw["groups"]),
        colors=list(raw["colors"]),
        legend_colors=dict(raw["legend_colors"]),
        data_points=points,
        box=box,
        candlestick=candle,
    )


def validate_spec(spec: ChartSpec) -> ValidationReport:
    """Check every type invariant; the report lists all violations."""
    rep = ValidationReport()
    if spec.chart_type not in CHART_TYPES:
        rep.add("type", "unknown-type", f"unknown chart type {spec.chart_type!r}")
    if spec.legend_num != len(spec.legends):
        rep.add("legend_num", "count-mismatch",
                f"legend_num={spec.legend_num} but {len(spec.legends)} legends listed")
    if spec.group_num != len(spec.groups):
        rep.add("group_num", "count-mismatch",
                f"group_num={spec.group_num} but {len(spec.groups)} groups listed")
    if len(set(spec.legends)) != len(spec.legends):
        rep.add("legends", "duplicate", "legend names are not unique")
    if len(set(spec.groups)) != len(spec.groups):
        rep.add("groups", "duplicate", "group names are not unique")

    for legend in spec.legends:
        if legend not in spec.legend_colors:
            rep.add(f"legend_colors.{legend}", "missing-color", "legend has no color")
    for legend, color in spec.legend_colors.items():
        if legend not in spec.legends:
            rep.add(f"legend_colors.{legend}", "unknown-legend", "color for unknown legend")
        if color not in spec.colors:
            rep.add(f"legend_colors.{legend}", "unknown-color",
                    f"color {color!r} not in colors list")

    if spec.data_points is not None:
        for group, inner in spec.data_points.items():
            if group not in spec.groups:
                rep.add(f"data_points.{group}", "unknown-group", "outer key not in groups")
            if not isinstance(inner, dict):
                rep.add(f"data_points.{group}", "bad-shape", "inner value is not a map")
                continue
            for legend, value in inner.items():
                if legend not in spec.legends:
                    rep.add(f"data_points.{group}.{legend}", "unknown-legend",
                            "inner key not in legends")
                if spec.chart_type == "node_link":
                    if not isinstance(value, list):
                        rep.add(f"data_points.{group}.{legend}", "bad-adjacency",
                                "node_link inner value must be a list")
                    else:
                        for target in value:
                            if target not in spec.groups:
                                rep.add(f"data_points.{group}.{legend}", "unknown-target",
                                        f"target {target!r} not in groups")
                elif not isinstance(value, (int, float)) or isinstance(value, bool):
                    rep.add(f"data_points.{group}.{legend}", "non-numeric",
                            f"value {value!r} is not a number")
        if spec.chart_type != "node_link":
            for group in spec.groups:
                inner = spec.data_points.get(group)
                if not isinstance(inner, dict):
                    continue
                for legend in spec.legends:
                    if legend not in inner:
                        rep.add(f"data_points.{group}.{legend}", "missing-value",
                                "no value for this group/legend cell")

    if spec.box is not None:
        for legend in spec.legends:
            try:
                lo = spec.box["minimum_values"][legend]
                q1 = spec.box["first_quartile"][legend]
                med = spec.box["median"][legend]
                q3 = spec.box["third_quartile"][legend]
                hi = spec.box["maximum_values"][legend]
            except (KeyError, TypeError):
                rep.add(f"box.{legend}", "missing-quantile", "incomplete box fields")
                continue
            if not (lo <= q1 <= med <= q3 <= hi):
                rep.add(f"box.{legend}", "box-ordering",
                        f"expected min<=q1<=median<=q3<=max, got "
                        f"{lo}, {q1}, {med}, {q3}, {hi}")

    if spec.candlestick is not None:
        for group in spec.groups:
            try:
                op = spec.candlestick["opening_price"][group]
                cl = spec.candlestick["closing_price"][group]
                hi = spec.candlestick["highest_price"][group]
                lo = spec.candlestick["lowest_price"][group]
            except (KeyError, TypeError):
                rep.add(f"candlestick.{group}", "missing-price", "incomplete OHLC fields")
                continue
            if not (lo <= min(op, cl) and hi >= max(op, cl)):
                rep.add(f"candlestick.{group}", "ohlc-ordering",
                        f"expected low<=min(open,close)<=max(open,close)<=high for {group}")
    return rep


def objects_of(spec: ChartSpec) -> list[ChartObject]:
    """The chart's data points as objects, groups-major then legend order.

    Standard types yield group_num x legend_num objects.  node_link yields one
    object per group (with adjacency), candlestick one per group (with OHLC
    attrs), and box one per legend (with the quantile attrs; the box doubles
    as its own group so positional functions can index it).
    """
    cached = _OBJECT_CACHE.get(id(spec))
    if cached is not None and cached[0]() is spec:
        return cached[1]
    if not validate_spec(spec).ok:
        raise InvalidSpec("objects_of requires a spec that passes validation")
    out = _build_objects(spec)
    if len(_OBJECT_CACHE) > 512:
        for key in [k for k, v in _OBJECT_CACHE.items() if v[0]() is None]:
            del _OBJECT_CACHE[key]
    _OBJECT_CACHE[id(spec)] = (weakref.ref(spec), out)
    return out


#: Per-instance memo; validation and object construction run once per spec.
_OBJECT_CACHE: dict[int, tuple] = {}


def _build_objects(spec: ChartSpec) -> list[ChartObject]:
    out: list[ChartObject] = []
    if spec.chart_type == "box":
        for legend in spec.legends:
            attrs = {name: spec.box[name][legend] for name in BOX_FIELDS}
            out.append(ChartObject(group=legend, legend=legend,
                                   value=None, color=spec.legend_colors[legend],
                                   attrs=attrs))
        return out
    if spec.chart_type == "candlestick":
        legend = spec.legends[0] if spec.legends else ""
        color = spec.legend_colors.get(legend, "")
        for group in spec.groups:
            attrs = {name: spec.candlestick[name][group] for name in CANDLESTICK_FIELDS}
            out.append(ChartObject(group=group, legend=legend, value=None,
                                   color=color, attrs=attrs))
        return out
    if spec.chart_type == "node_link":
        legend = spec.legends[0] if spec.legends else ""
        color = spec.legend_colors.get(legend, "")
        for group in spec.groups:
            targets = tuple(spec.data_points.get(group, {}).get(legend, []))
            out.append(ChartObject(group=group, legend=legend, value=None,
                                   color=color, adjacency=targets))
        return out
    for group in spec.groups:
        for legend in spec.legends:
            out.append(ChartObject(
                group=group, legend=legend,
                value=float(spec.data_points[group][legend]),
                color=spec.legend_colors[legend]))
    return out
