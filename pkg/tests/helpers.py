"""Shared helpers: random value-chart generation and hand-built mini charts."""

from __future__ import annotations

import random

from chartchain.model import ChartSpec

VALUE_TYPES = ("bar_single", "bar_multi", "bar_stacked", "line_single",
               "line_multi", "pie", "radar", "area", "heatmap")

_COLOR_POOL = ("red", "blue", "green", "orange", "purple", "brown")


def random_value_spec(rng: random.Random, max_groups: int = 6,
                      max_legends: int = 4,
                      allow_duplicates: bool = True) -> ChartSpec:
    """A random standard chart (group x legend numeric cells)."""
    chart_type = rng.choice(VALUE_TYPES)
    gn = rng.randint(2, max_groups)
    ln = rng.randint(1, max_legends)
    if chart_type in ("bar_single", "line_single", "pie"):
        ln = 1
    groups = [f"G{i}" for i in range(gn)]
    legends = [f"L{j}" for j in range(ln)]
    colors = list(_COLOR_POOL[:ln])
    value_pool = ([rng.randint(1, 12) for _ in range(4)] if allow_duplicates
                  else None)
    points = {}
    used = set()
    for g in groups:
        row = {}
        for l in legends:
            if value_pool is not None and rng.random() < 0.3:
                v = float(rng.choice(value_pool))
            else:
                v = round(rng.uniform(1, 500), 1)
                while not allow_duplicates and v in used:
                    v = round(rng.uniform(1, 500), 1)
                used.add(v)
            row[l] = v
        points[g] = row
    return ChartSpec(
        title="Random chart", x_label="x", y_label="y",
        chart_type=chart_type, legend_num=ln, legends=legends,
        group_num=gn, groups=groups, colors=colors,
        legend_colors=dict(zip(legends, colors)), data_points=points)


def mini_spec(chart_type: str, groups: list[str], legends: list[str],
              points: dict, y_label: str = "y", **extra) -> ChartSpec:
    colors = list(_COLOR_POOL[:len(legends)])
    return ChartSpec(
        title=extra.pop("title", "Mini chart"), x_label="x", y_label=y_label,
        chart_type=chart_type, legend_num=len(legends), legends=legends,
        group_num=len(groups), groups=groups, colors=colors,
        legend_colors=dict(zip(legends, colors)), data_points=points, **extra)


