"""Per-chart-type drawing templates.

Each template is a function ``draw(fig, spec, style, annotated)`` that adds
axes to the given figure and draws the record.  ``spec`` is the raw JSON
chart record (a dict); ``style`` is a sampled style dict (alpha, grid,
legend placement).  Every template must surface every group label and every
legend label somewhere in the figure text (tick labels, legend entries, or
node/slice labels) so the caller can verify the label round-trip.

The registry maps every chart type to at least one (id, library, function)
entry; common types get two so the style seed can vary the look.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.lines import Line2D  # noqa: E402
from matplotlib.patches import Patch, Rectangle  # noqa: E402


def _matrix(spec):
    """data_points as a legends x groups value matrix."""
    return np.array([[spec["data_points"][g][l] for g in spec["groups"]]
                     for l in spec["legends"]], dtype=float)


def _colors(spec):
    return [spec["legend_colors"][l] for l in spec["legends"]]


def _finish(ax, spec, style, legend_handles=None):
    ax.set_title(spec["title"])
    ax.set_xlabel(spec["x_label"])
    ax.set_ylabel(spec["y_label"])
    if style["grid"]:
        ax.grid(True, alpha=0.3)
    if legend_handles is None:
        legend_handles = [Patch(facecolor=spec["legend_colors"][l], label=l)
                          for l in spec["legends"]]
    ax.legend(handles=legend_handles, loc=style["legend_loc"], fontsize=8)


def _annotate(ax, xs, ys, fmt="{:g}"):
    for x, y in zip(xs, ys):
        ax.annotate(fmt.format(y), (x, y), textcoords="offset points",
                    xytext=(0, 3), ha="center", fontsize=7)


# --------------------------------------------------------------------------
# bars

def bar_vertical(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    groups, legends = spec["groups"], spec["legends"]
    n, m = len(groups), len(legends)
    width = 0.8 / m
    xs = np.arange(n)
    for j, legend in enumerate(legends):
        vals = [spec["data_points"][g][legend] for g in groups]
        pos = xs + (j - (m - 1) / 2) * width
        ax.bar(pos, vals, width, color=spec["legend_colors"][legend],
               alpha=style["alpha"], label=legend)
        if annotated:
            _annotate(ax, pos, vals)
    ax.set_xticks(xs)
    ax.set_xticklabels(groups, rotation=style["tick_rotation"], ha="right")
    _finish(ax, spec, style)


def bar_horizontal(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    groups, legends = spec["groups"], spec["legends"]
    n, m = len(groups), len(legends)
    height = 0.8 / m
    ys = np.arange(n)
    for j, legend in enumerate(legends):
        vals = [spec["data_points"][g][legend] for g in groups]
        pos = ys + (j - (m - 1) / 2) * height
        ax.barh(pos, vals, height, color=spec["legend_colors"][legend],
                alpha=style["alpha"], label=legend)
        if annotated:
            for y, v in zip(pos, vals):
                ax.annotate(f"{v:g}", (v, y), textcoords="offset points",
                            xytext=(3, 0), va="center", fontsize=7)
    ax.set_yticks(ys)
    ax.set_yticklabels(groups)
    _finish(ax, spec, style)


def bar_stacked(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    groups, legends = spec["groups"], spec["legends"]
    xs = np.arange(len(groups))
    bottom = np.zeros(len(groups))
    for legend in legends:
        vals = np.array([spec["data_points"][g][legend] for g in groups])
        ax.bar(xs, vals, 0.6, bottom=bottom,
               color=spec["legend_colors"][legend], alpha=style["alpha"],
               label=legend)
        if annotated:
            for x, b, v in zip(xs, bottom, vals):
                ax.annotate(f"{v:g}", (x, b + v / 2), ha="center",
                            va="center", fontsize=7)
        bottom += vals
    ax.set_xticks(xs)
    ax.set_xticklabels(groups, rotation=style["tick_rotation"], ha="right")
    _finish(ax, spec, style)


def bar_3d(fig, spec, style, annotated):
    ax = fig.add_subplot(111, projection="3d")
    groups, legends = spec["groups"], spec["legends"]
    for j, legend in enumerate(legends):
        xs = np.arange(len(groups))
        vals = [spec["data_points"][g][legend] for g in groups]
        ax.bar3d(xs, np.full(len(groups), j), np.zeros(len(groups)),
                 0.6, 0.6, vals, color=spec["legend_colors"][legend],
                 alpha=min(style["alpha"], 0.9), shade=True)
    ax.set_xticks(np.arange(len(groups)))
    ax.set_xticklabels(groups, fontsize=7)
    ax.set_yticks(np.arange(len(legends)))
    ax.set_yticklabels(legends, fontsize=7)
    ax.set_title(spec["title"])
    ax.set_xlabel(spec["x_label"])
    ax.set_zlabel(spec["y_label"])
    handles = [Patch(facecolor=spec["legend_colors"][l], label=l)
               for l in spec["legends"]]
    ax.legend(handles=handles, loc=style["legend_loc"], fontsize=8)


# --------------------------------------------------------------------------
# lines and areas

def line_plain(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    groups = spec["groups"]
    xs = np.arange(len(groups))
    for legend in spec["legends"]:
        vals = [spec["data_points"][g][legend] for g in groups]
        ax.plot(xs, vals, marker="o", color=spec["legend_colors"][legend],
                alpha=style["alpha"], label=legend)
        if annotated:
            _annotate(ax, xs, vals)
    ax.set_xticks(xs)
    ax.set_xticklabels(groups, rotation=style["tick_rotation"], ha="right")
    _finish(ax, spec, style)


def line_dashed(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    groups = spec["groups"]
    xs = np.arange(len(groups))
    dashes = ["--", "-.", ":", "-"]
    for j, legend in enumerate(spec["legends"]):
        vals = [spec["data_points"][g][legend] for g in groups]
        ax.plot(xs, vals, dashes[j % len(dashes)], marker="s",
                color=spec["legend_colors"][legend], alpha=style["alpha"],
                label=legend)
        if annotated:
            _annotate(ax, xs, vals)
    ax.set_xticks(xs)
    ax.set_xticklabels(groups, rotation=style["tick_rotation"], ha="right")
    _finish(ax, spec, style)


def area_stack(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    groups = spec["groups"]
    xs = np.arange(len(groups))
    ax.stackplot(xs, _matrix(spec), colors=_colors(spec),
                 alpha=style["alpha"], labels=spec["legends"])
    if annotated:
        total = np.zeros(len(groups))
        for legend in spec["legends"]:
            vals = np.array([spec["data_points"][g][legend] for g in groups])
            total += vals
            _annotate(ax, xs, total)
    ax.set_xticks(xs)
    ax.set_xticklabels(groups, rotation=style["tick_rotation"], ha="right")
    _finish(ax, spec, style)


def multi_axes(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    groups, legends = spec["groups"], spec["legends"]
    xs = np.arange(len(groups))
    first, rest = legends[0], legends[1:]
    vals = [spec["data_points"][g][first] for g in groups]
    ax.bar(xs, vals, 0.5, color=spec["legend_colors"][first],
           alpha=style["alpha"], label=first)
    if annotated:
        _annotate(ax, xs, vals)
    twin = ax.twinx()
    for legend in rest:
        vals = [spec["data_points"][g][legend] for g in groups]
        twin.plot(xs, vals, marker="o", color=spec["legend_colors"][legend],
                  alpha=style["alpha"], label=legend)
        if annotated:
            _annotate(twin, xs, vals)
    twin.set_ylabel(" / ".join(rest), fontsize=8)
    ax.set_xticks(xs)
    ax.set_xticklabels(groups, rotation=style["tick_rotation"], ha="right")
    handles = [Patch(facecolor=spec["legend_colors"][first], label=first)]
    handles += [Line2D([], [], color=spec["legend_colors"][l], label=l)
                for l in rest]
    _finish(ax, spec, style, legend_handles=handles)


# --------------------------------------------------------------------------
# circular

def _single_legend_values(spec):
    legend = spec["legends"][0]
    return [spec["data_points"][g][legend] for g in spec["groups"]]


def pie_plain(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    vals = _single_legend_values(spec)
    autopct = "%1.1f%%" if annotated else None
    ax.pie(vals, labels=spec["groups"], autopct=autopct,
           wedgeprops={"alpha": style["alpha"]}, textprops={"fontsize": 8})
    ax.set_title(spec["title"])
    handles = [Patch(facecolor=spec["legend_colors"][l], label=l)
               for l in spec["legends"]]
    ax.legend(handles=handles, loc=style["legend_loc"], fontsize=8)


def pie_donut(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    vals = _single_legend_values(spec)
    autopct = "%1.1f%%" if annotated else None
    ax.pie(vals, labels=spec["groups"], autopct=autopct,
           wedgeprops={"width": 0.45, "alpha": style["alpha"]},
           textprops={"fontsize": 8})
    ax.set_title(spec["title"])
    handles = [Patch(facecolor=spec["legend_colors"][l], label=l)
               for l in spec["legends"]]
    ax.legend(handles=handles, loc=style["legend_loc"], fontsize=8)


def rings(fig, spec, style, annotated):
    """Concentric rings, one per group, radius share by value."""
    ax = fig.add_subplot(111)
    vals = _single_legend_values(spec)
    total = sum(vals) or 1.0
    for i, (group, v) in enumerate(zip(spec["groups"], vals)):
        radius = 1.0 - i * (0.8 / max(len(vals), 1))
        frac = v / total
        ax.pie([frac, 1 - frac], radius=radius, startangle=90,
               colors=[spec["colors"][0], "#eeeeee"],
               wedgeprops={"width": 0.8 / max(len(vals), 1) * 0.9,
                           "alpha": style["alpha"]})
        label = f"{group}: {v:g}" if annotated else group
        ax.text(1.15, 1.0 - i * 0.14, label, fontsize=8,
                transform=ax.transAxes)
    ax.set_title(spec["title"])
    handles = [Patch(facecolor=spec["legend_colors"][l], label=l)
               for l in spec["legends"]]
    ax.legend(handles=handles, loc="lower left", fontsize=8)


def rose(fig, spec, style, annotated):
    ax = fig.add_subplot(111, projection="polar")
    vals = _single_legend_values(spec)
    n = len(vals)
    theta = np.linspace(0, 2 * math.pi, n, endpoint=False)
    ax.bar(theta, vals, width=2 * math.pi / n * 0.9,
           color=spec["colors"][0], alpha=style["alpha"])
    ax.set_xticks(theta)
    ax.set_xticklabels(spec["groups"], fontsize=7)
    if annotated:
        for t, v in zip(theta, vals):
            ax.annotate(f"{v:g}", (t, v), fontsize=7, ha="center")
    ax.set_title(spec["title"])
    handles = [Patch(facecolor=spec["legend_colors"][l], label=l)
               for l in spec["legends"]]
    ax.legend(handles=handles, loc="lower left", fontsize=8,
              bbox_to_anchor=(1.0, 0.0))


def radar(fig, spec, style, annotated):
    ax = fig.add_subplot(111, projection="polar")
    groups = spec["groups"]
    n = len(groups)
    theta = np.linspace(0, 2 * math.pi, n, endpoint=False).tolist()
    closed = theta + theta[:1]
    for legend in spec["legends"]:
        vals = [spec["data_points"][g][legend] for g in groups]
        vals = vals + vals[:1]
        ax.plot(closed, vals, color=spec["legend_colors"][legend],
                alpha=style["alpha"], label=legend)
        ax.fill(closed, vals, color=spec["legend_colors"][legend],
                alpha=style["alpha"] * 0.25)
        if annotated:
            for t, v in zip(theta, vals[:-1]):
                ax.annotate(f"{v:g}", (t, v), fontsize=7, ha="center")
    ax.set_xticks(theta)
    ax.set_xticklabels(groups, fontsize=7)
    ax.set_title(spec["title"])
    ax.legend(loc="lower left", fontsize=8, bbox_to_anchor=(1.0, 0.0))


# --------------------------------------------------------------------------
# distribution and finance

def box(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    stats = []
    for legend in spec["legends"]:
        stats.append({
            "label": legend,
            "med": spec["median"][legend],
            "q1": spec["first_quartile"][legend],
            "q3": spec["third_quartile"][legend],
            "whislo": spec["minimum_values"][legend],
            "whishi": spec["maximum_values"][legend],
            "fliers": spec.get("outlier_values", {}).get(legend, []),
        })
    artists = ax.bxp(stats, patch_artist=True)
    for patch, legend in zip(artists["boxes"], spec["legends"]):
        patch.set_facecolor(spec["legend_colors"][legend])
        patch.set_alpha(style["alpha"])
    if annotated:
        for i, s in enumerate(stats, start=1):
            ax.annotate(f"{s['med']:g}", (i, s["med"]), fontsize=7,
                        xytext=(5, 0), textcoords="offset points")
    _finish(ax, spec, style)


def candlestick(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    groups = spec["groups"]
    up, down = "green", "red"
    for i, group in enumerate(groups):
        o = spec["opening_price"][group]
        c = spec["closing_price"][group]
        lo = spec["lowest_price"][group]
        hi = spec["highest_price"][group]
        color = up if c >= o else down
        ax.plot([i, i], [lo, hi], color="black", linewidth=1, zorder=1)
        ax.add_patch(Rectangle((i - 0.3, min(o, c)), 0.6, abs(c - o) or 0.1,
                               facecolor=color, alpha=style["alpha"],
                               edgecolor="black", zorder=2))
        if annotated:
            ax.annotate(f"{c:g}", (i, hi), fontsize=7, ha="center",
                        xytext=(0, 3), textcoords="offset points")
    ax.set_xticks(range(len(groups)))
    ax.set_xticklabels(groups, rotation=style["tick_rotation"], ha="right")
    handles = [Patch(facecolor=up, label="close >= open"),
               Patch(facecolor=down, label="close < open")]
    handles += [Patch(facecolor=spec["legend_colors"][l], label=l)
                for l in spec["legends"]]
    _finish(ax, spec, style, legend_handles=handles)


# --------------------------------------------------------------------------
# grids, maps, graphs

def heatmap(fig, spec, style, annotated):
    import seaborn as sns

    ax = fig.add_subplot(111)
    sns.heatmap(_matrix(spec), ax=ax, annot=annotated, fmt="g",
                cmap="viridis", xticklabels=spec["groups"],
                yticklabels=spec["legends"],
                cbar_kws={"label": spec["y_label"]})
    ax.set_title(spec["title"])
    ax.set_xlabel(spec["x_label"])
    handles = [Patch(facecolor=spec["legend_colors"][l], label=l)
               for l in spec["legends"]]
    ax.legend(handles=handles, loc="upper left",
              bbox_to_anchor=(1.25, 1.0), fontsize=7)


def bubble(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    groups = spec["groups"]
    xs = np.arange(len(groups))
    vmax = max(max(spec["data_points"][g][l] for g in groups)
               for l in spec["legends"]) or 1.0
    for legend in spec["legends"]:
        vals = [spec["data_points"][g][legend] for g in groups]
        sizes = [80 + 1200 * v / vmax for v in vals]
        ax.scatter(xs, vals, s=sizes, color=spec["legend_colors"][legend],
                   alpha=style["alpha"] * 0.8, label=legend,
                   edgecolors="black")
        if annotated:
            _annotate(ax, xs, vals)
    ax.set_xticks(xs)
    ax.set_xticklabels(groups, rotation=style["tick_rotation"], ha="right")
    _finish(ax, spec, style)


def funnel(fig, spec, style, annotated):
    ax = fig.add_subplot(111)
    legend = spec["legends"][0]
    pairs = sorted(((spec["data_points"][g][legend], g)
                    for g in spec["groups"]), reverse=True)
    vmax = pairs[0][0] or 1.0
    for i, (v, group) in enumerate(pairs):
        width = v / vmax
        ax.barh(-i, width, left=(1 - width) / 2, height=0.8,
                color=spec["colors"][0], alpha=style["alpha"],
                edgecolor="white")
        text = f"{group}: {v:g}" if annotated else group
        ax.text(0.5, -i, text, ha="center", va="center", fontsize=8)
    ax.set_yticks([])
    ax.set_xticks([])
    ax.set_title(spec["title"])
    handles = [Patch(facecolor=spec["legend_colors"][l], label=l)
               for l in spec["legends"]]
    ax.legend(handles=handles, loc="lower right", fontsize=8)


def treemap(fig, spec, style, annotated):
    """Alternating slice-and-dice tiling of the unit square."""
    ax = fig.add_subplot(111)
    legend = spec["legends"][0]
    items = sorted(((spec["data_points"][g][legend], g)
                    for g in spec["groups"]), reverse=True)
    total = sum(v for v, _ in items) or 1.0
    x, y, w, h = 0.0, 0.0, 1.0, 1.0
    cmap = plt.get_cmap("tab20")
    for i, (v, group) in enumerate(items):
        frac = v / total
        remaining = sum(val for val, _ in items[i:]) / total
        share = frac / remaining if remaining else 1.0
        if w >= h:
            tile = (x, y, w * share, h)
            x, w = x + w * share, w * (1 - share)
        else:
            tile = (x, y, w, h * share)
            y, h = y + h * share, h * (1 - share)
        tx, ty, tw, th = tile
        ax.add_patch(Rectangle((tx, ty), tw, th, facecolor=cmap(i % 20),
                               alpha=style["alpha"], edgecolor="white"))
        text = f"{group}\n{v:g}" if annotated else group
        ax.text(tx + tw / 2, ty + th / 2, text, ha="center", va="center",
                fontsize=7)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_xticks([])
    ax.set_yticks([])
    ax.set_title(spec["title"])
    handles = [Patch(facecolor=spec["legend_colors"][l], label=l)
               for l in spec["legends"]]
    ax.legend(handles=handles, loc="upper left",
              bbox_to_anchor=(1.01, 1.0), fontsize=7)


def node_link(fig, spec, style, annotated):
    import networkx as nx

    ax = fig.add_subplot(111)
    graph = nx.DiGraph()
    graph.add_nodes_from(spec["groups"])
    legend = spec["legends"][0]
    for group in spec["groups"]:
        for target in spec["data_points"][group][legend]:
            graph.add_edge(group, target)
    pos = nx.circular_layout(graph)
    nx.draw_networkx_nodes(graph, pos, ax=ax, node_color=spec["colors"][0],
                           alpha=style["alpha"], node_size=900)
    nx.draw_networkx_edges(graph, pos, ax=ax, arrows=True,
                           connectionstyle="arc3,rad=0.1")
    nx.draw_networkx_labels(graph, pos, ax=ax, font_size=7)
    ax.set_title(spec["title"])
    handles = [Line2D([], [], marker="o", linestyle="",
                      color=spec["legend_colors"][l], label=l)
               for l in spec["legends"]]
    ax.legend(handles=handles, loc=style["legend_loc"], fontsize=8)
    ax.set_axis_off()


#: chart type -> list of (template id, library id, draw function)
TEMPLATES: dict[str, list[tuple[str, str, object]]] = {
    "bar_single": [("bar-vertical", "matplotlib", bar_vertical),
                   ("bar-horizontal", "matplotlib", bar_horizontal)],
    "bar_multi": [("bar-vertical", "matplotlib", bar_vertical),
                  ("bar-horizontal", "matplotlib", bar_horizontal)],
    "bar_stacked": [("bar-stacked", "matplotlib", bar_stacked)],
    "line_single": [("line-plain", "matplotlib", line_plain),
                    ("line-dashed", "matplotlib", line_dashed)],
    "line_multi": [("line-plain", "matplotlib", line_plain),
                   ("line-dashed", "matplotlib", line_dashed)],
    "pie": [("pie-plain", "matplotlib", pie_plain),
            ("pie-donut", "matplotlib", pie_donut)],
    "radar": [("radar-polar", "matplotlib", radar)],
    "rings": [("rings-concentric", "matplotlib", rings)],
    "rose": [("rose-polar", "matplotlib", rose)],
    "bar_3d": [("bar-3d", "matplotlib", bar_3d)],
    "box": [("box-precomputed", "matplotlib", box)],
    "funnel": [("funnel-centered", "matplotlib", funnel)],
    "heatmap": [("heatmap-annotated", "seaborn", heatmap)],
    "area": [("area-stacked", "matplotlib", area_stack)],
    "bubble": [("bubble-scatter", "matplotlib", bubble)],
    "node_link": [("node-link-circular", "networkx", node_link)],
    "candlestick": [("candlestick-ohlc", "matplotlib", candlestick)],
    "treemap": [("treemap-slice-dice", "matplotlib", treemap)],
    "multi_axes": [("multi-axes-twin", "matplotlib", multi_axes)],
}
