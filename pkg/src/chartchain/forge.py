"""Chart record generation: random skeletons, LLM-backed seed generation and
evolution, and a deterministic offline fallback generator.

Every path ends in a record that passes :func:`chartchain.model.validate_spec`.
LLM output gets one automatic repair pass (counts recomputed from lists,
unknown fields dropped, legend colors re-zipped) before being rejected.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib import resources

from .errors import SchemaMismatch, UnrepairableOutput, UnsatisfiableBounds
from .gateway import Gateway, GatewayRequest
from .model import (
    BOX_FIELDS,
    CANDLESTICK_FIELDS,
    CHART_TYPES,
    ChartSpec,
    color_vocabulary,
    serialize,
    spec_from_dict,
    validate_spec,
)

#: Per-type (group bounds, legend bounds) used when the config gives none.
TYPE_BOUNDS: dict[str, tuple[tuple[int, int], tuple[int, int]]] = {
    "bar_single": ((4, 8), (1, 1)),
    "bar_multi": ((3, 6), (2, 4)),
    "bar_stacked": ((3, 6), (2, 4)),
    "line_single": ((5, 10), (1, 1)),
    "line_multi": ((5, 8), (2, 4)),
    "pie": ((3, 6), (1, 1)),
    "radar": ((5, 8), (1, 3)),
    "rings": ((3, 5), (1, 1)),
    "rose": ((4, 7), (1, 1)),
    "bar_3d": ((3, 5), (2, 4)),
    "box": ((3, 5), (3, 5)),        # box charts: one box per legend
    "funnel": ((4, 6), (1, 1)),
    "heatmap": ((4, 6), (3, 4)),
    "area": ((5, 8), (1, 3)),
    "bubble": ((4, 6), (1, 2)),
    "node_link": ((4, 7), (1, 1)),
    "candlestick": ((5, 8), (1, 1)),
    "treemap": ((4, 6), (1, 1)),
    "multi_axes": ((4, 6), (2, 3)),
}

#: Value range each chart type draws from in the fallback generator.
VALUE_RANGES: dict[str, tuple[float, float]] = {
    "pie": (1, 100), "rings": (1, 100), "rose": (1, 100), "funnel": (10, 100),
    "heatmap": (0, 50), "bubble": (5, 80), "candlestick": (50, 200),
    "box": (10, 120),
}
DEFAULT_VALUE_RANGE = (10, 500)

_SUBJECTS = (
    "Revenue", "Visitors", "Sales", "Temperature", "Enrollment", "Output",
    "Downloads", "Expenses", "Score", "Production",
)
_LEGEND_NAMES = (
    "Series A", "Series B", "Series C", "Series D", "Series E", "Series F",
)


@dataclass(frozen=True)
class SpecSkeleton:
    """The randomly sampled structure an LLM call fleshes out."""

    chart_type: str
    legend_num: int
    group_num: int
    colors: tuple[str, ...]
    title: str | None = None

    def to_dict(self) -> dict:
        d = {"type": self.chart_type, "legend_num": self.legend_num,
             "group_num": self.group_num, "colors": list(self.colors)}
        if self.title is not None:
            d["title"] = self.title
        return d


@dataclass
class GenConfig:
    counts: dict[str, int] = field(default_factory=dict)
    group_bounds: dict[str, tuple[int, int]] = field(default_factory=dict)
    legend_bounds: dict[str, tuple[int, int]] = field(default_factory=dict)
    seed: int = 0
    evolution_rounds: int = 1
    retries: int = 1

    def bounds_for(self, chart_type: str) -> tuple[tuple[int, int], tuple[int, int]]:
        if chart_type not in TYPE_BOUNDS:
            raise UnsatisfiableBounds(f"unknown chart type {chart_type!r}")
        default_g, default_l = TYPE_BOUNDS[chart_type]
        g = self.group_bounds.get(chart_type, default_g)
        l = self.legend_bounds.get(chart_type, default_l)
        if g[0] > g[1] or l[0] > l[1] or g[0] < 1 or l[0] < 1:
            raise UnsatisfiableBounds(
                f"{chart_type}: bounds groups={g}, legends={l}")
        return g, l


def prompt_template(name: str) -> str:
    return resources.files("chartchain.assets.prompts").joinpath(
        f"{name}.txt").read_text()


def sample_skeleton(cfg: GenConfig, rng: random.Random,
                    chart_type: str | None = None) -> SpecSkeleton:
    """Draw structure (type, counts, colors) for a new chart."""
    if chart_type is None:
        pool = [t for t, n in sorted(cfg.counts.items()) if n > 0] or list(CHART_TYPES)
        chart_type = rng.choice(pool)
    (gmin, gmax), (lmin, lmax) = cfg.bounds_for(chart_type)
    group_num = rng.randint(gmin, gmax)
    legend_num = rng.randint(lmin, lmax)
    if chart_type == "box":
        group_num = legend_num
    vocab = color_vocabulary()
    if legend_num > len(vocab):
        raise UnsatisfiableBounds("more legends than available colors")
    colors = tuple(rng.sample(vocab, legend_num))
    return SpecSkeleton(chart_type=chart_type, legend_num=legend_num,
                        group_num=group_num, colors=colors)


# --------------------------------------------------------------------------
# LLM-backed paths

_KNOWN_FIELDS = frozenset(
    ("title", "x_label", "y_label", "type", "legend_num", "legends",
     "group_num", "groups", "colors", "legend_colors", "data_points")
    + BOX_FIELDS + CANDLESTICK_FIELDS)


def _extract_json(text: str) -> dict:
    start = text.find("{")
    if start < 0:
        raise ValueError("no JSON object in reply")
    depth = 0
    for i, ch in enumerate(text[start:], start):
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return json.loads(text[start:i + 1])
    raise ValueError("unbalanced JSON object in reply")


def repair_record(raw: dict) -> tuple[dict, list[str]]:
    """One bounded repair pass over a near-valid LLM record."""
    repairs: list[str] = []
    fixed = {k: v for k, v in raw.items() if k in _KNOWN_FIELDS}
    if len(fixed) != len(raw):
        repairs.append("dropped-unknown-fields")
    legends = fixed.get("legends")
    if isinstance(legends, list) and fixed.get("legend_num") != len(legends):
        fixed["legend_num"] = len(legends)
        repairs.append("recomputed-legend_num")
    groups = fixed.get("groups")
    if isinstance(groups, list) and fixed.get("group_num") != len(groups):
        fixed["group_num"] = len(groups)
        repairs.append("recomputed-group_num")
    colors = fixed.get("colors")
    if (isinstance(legends, list) and isinstance(colors, list)
            and len(colors) >= len(legends)):
        mapping = fixed.get("legend_colors")
        if (not isinstance(mapping, dict)
                or set(mapping) != set(legends)
                or any(c not in colors for c in mapping.values())):
            fixed["legend_colors"] = dict(zip(legends, colors))
            repairs.append("rezipped-legend_colors")
    return fixed, repairs


def _spec_from_reply(reply: str) -> tuple[ChartSpec, list[str]]:
    raw = _extract_json(reply)
    fixed, repairs = repair_record(raw)
    spec = spec_from_dict(fixed)
    report = validate_spec(spec)
    if not report.ok:
        raise ValueError(f"record invalid after repair: {report.violations[:3]}")
    return spec, repairs


def generate_seed(skeleton: SpecSkeleton, gateway: Gateway,
                  retries: int = 1) -> ChartSpec:
    """Ask the gateway to flesh a skeleton out into a complete record."""
    template = prompt_template("seed_generation")
    prompt = template.replace("{JSON element file}",
                              json.dumps(skeleton.to_dict(), indent=1))
    last_error = None
    for _ in range(retries + 1):
        reply = gateway.complete(GatewayRequest(user=prompt, tag="seed"))
        try:
            spec, _ = _spec_from_reply(reply)
            return spec
        except (ValueError, KeyError, TypeError, SchemaMismatch) as exc:
            last_error = exc
    raise UnrepairableOutput(f"seed generation failed: {last_error}")


def evolve_spec(spec: ChartSpec, gateway: Gateway,
                retries: int = 1) -> ChartSpec:
    """One enrichment round; chart type and legend count must be preserved."""
    template = prompt_template("evolution")
    prompt = (template
              .replace("{json_data}", serialize(spec))
              .replace("{color_list}", ", ".join(color_vocabulary()))
              .replace("{data_save_path}", "chart.json"))
    last_error = None
    for _ in range(retries + 1):
        reply = gateway.complete(GatewayRequest(user=prompt, tag="evolve"))
        try:
            evolved, _ = _spec_from_reply(reply)
        except (ValueError, KeyError, TypeError, SchemaMismatch) as exc:
            last_error = exc
            continue
        if evolved.chart_type != spec.chart_type:
            last_error = ValueError("evolution changed the chart type")
            continue
        if evolved.legend_num != spec.legend_num:
            last_error = ValueError("evolution changed legend_num")
            continue
        return evolved
    raise UnrepairableOutput(f"evolution failed: {last_error}")


# --------------------------------------------------------------------------
# deterministic offline generator

def _round1(x: float) -> float:
    return round(x, 1)


def _draw_values(rng: random.Random, n: int, lo: float, hi: float) -> list[float]:
    """n distinct one-decimal values in [lo, hi]."""
    seen: set[float] = set()
    out: list[float] = []
    while len(out) < n:
        v = _round1(rng.uniform(lo, hi))
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def fallback_generate(cfg: GenConfig, rng: random.Random,
                      chart_type: str | None = None) -> ChartSpec:
    """A valid synthetic record with no LLM involved; deterministic per rng."""
    skeleton = sample_skeleton(cfg, rng, chart_type)
    return fallback_from_skeleton(skeleton, rng)


def fallback_from_skeleton(skeleton: SpecSkeleton,
                           rng: random.Random) -> ChartSpec:
    ctype = skeleton.chart_type
    gn, ln = skeleton.group_num, skeleton.legend_num
    subject = rng.choice(_SUBJECTS)
    groups = [f"Group {i + 1}" for i in range(gn)]
    legends = list(_LEGEND_NAMES[:ln]) if ln > 1 else [subject]
    colors = list(skeleton.colors)
    legend_colors = dict(zip(legends, colors))
    title = skeleton.title or f"{subject} by category ({ctype})"
    lo, hi = VALUE_RANGES.get(ctype, DEFAULT_VALUE_RANGE)

    box = candle = points = None
    if ctype == "box":
        groups = list(legends)
        gn = ln
        box = {name: {} for name in BOX_FIELDS}
        for legend in legends:
            q = sorted(_draw_values(rng, 5, lo, hi))
            box["minimum_values"][legend] = q[0]
            box["first_quartile"][legend] = q[1]
            box["median"][legend] = q[2]
            box["third_quartile"][legend] = q[3]
            box["maximum_values"][legend] = q[4]
            n_out = rng.randint(0, 2)
            box["outlier_values"][legend] = sorted(
                _round1(q[4] + rng.uniform(5, 20)) for _ in range(n_out))
    elif ctype == "candlestick":
        groups = [f"Day {i + 1}" for i in range(gn)]
        candle = {name: {} for name in CANDLESTICK_FIELDS}
        for group in groups:
            a, b, c, d = sorted(_draw_values(rng, 4, lo, hi))
            candle["lowest_price"][group] = a
            candle["opening_price"][group] = rng.choice([b, c])
            candle["closing_price"][group] = (
                b if candle["opening_price"][group] == c else c)
            candle["highest_price"][group] = d
    elif ctype == "node_link":
        groups = [f"Node {i + 1}" for i in range(gn)]
        points = {}
        for group in groups:
            others = [g for g in groups if g != group]
            k = rng.randint(1, min(3, len(others)))
            points[group] = {legends[0]: sorted(rng.sample(others, k))}
    else:
        points = {}
        for group in groups:
            vals = _draw_values(rng, ln, lo, hi)
            points[group] = dict(zip(legends, vals))

    spec = ChartSpec(
        title=title, x_label="Category",
        y_label=f"{subject} (units)", chart_type=ctype,
        legend_num=ln, legends=legends, group_num=gn, groups=groups,
        colors=colors, legend_colors=legend_colors,
        data_points=points, box=box, candlestick=candle)
    report = validate_spec(spec)
    assert report.ok, report.violations
    return spec
