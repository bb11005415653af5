"""Rendering engine: style sampling, figure drawing, label verification.

Rendering is headless (Agg backend, PNG output, default DPI 120).  A fixed
style seed always picks the same template and style parameters for the same
job, so reruns produce identical RenderMeta records.
"""

from __future__ import annotations

import json
import random
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .jobs import RenderJob, RenderMeta, TemplateFailure, UnknownChartType
from .templates import TEMPLATES

DPI = 120

_LEGEND_LOCS = ("best", "upper right", "upper left", "lower right")

#: chart types whose group labels are drawn as in-figure text, not ticks
_TEXT_LABEL_TYPES = frozenset(
    {"pie", "rings", "rose", "funnel", "treemap", "node_link"})


def sample_style(seed: int, chart_type: str,
                 template_override: str | None = None) -> tuple[str, str, dict]:
    """Deterministic (template id, library, style dict) for a job."""
    if chart_type not in TEMPLATES:
        raise UnknownChartType(chart_type)
    entries = TEMPLATES[chart_type]
    rng = random.Random(f"{seed}:{chart_type}")
    if template_override is not None:
        matches = [e for e in entries if e[0] == template_override]
        if not matches:
            raise UnknownChartType(
                f"no template {template_override!r} for {chart_type}")
        template_id, library, _ = matches[0]
    else:
        template_id, library, _ = entries[rng.randrange(len(entries))]
    style = {
        "alpha": round(0.7 + 0.3 * rng.random(), 3),
        "grid": rng.random() < 0.5,
        "legend_loc": rng.choice(_LEGEND_LOCS),
        "tick_rotation": rng.choice((0, 30, 45)),
    }
    return template_id, library, style


def _figure_texts(fig) -> list[str]:
    """All visible text in the figure: ticks, legends, annotations, titles."""
    texts: list[str] = []
    for ax in fig.get_axes():
        for label in list(ax.get_xticklabels()) + list(ax.get_yticklabels()):
            texts.append(label.get_text())
        legend = ax.get_legend()
        if legend is not None:
            texts.extend(t.get_text() for t in legend.get_texts())
        texts.extend(t.get_text() for t in ax.texts)
        texts.append(ax.get_title())
        texts.append(ax.get_xlabel())
        texts.append(ax.get_ylabel())
    return [t for t in texts if t]


def verify_labels(fig, spec: dict) -> list[str]:
    """Missing group/legend labels (empty list means the round trip holds)."""
    blob = "\n".join(_figure_texts(fig))
    missing = []
    for name in list(spec["groups"]) + list(spec["legends"]):
        if name not in blob:
            missing.append(name)
    return missing


def render(job: RenderJob) -> RenderMeta:
    """Draw one job; always returns a meta record and writes its sidecar."""
    try:
        spec = json.loads(Path(job.spec).read_text())
        chart_type = spec.get("type", "")
        template_id, library, style = sample_style(
            job.style_seed, chart_type, job.template)
    except UnknownChartType as exc:
        meta = RenderMeta(chart_type=str(exc), template="", library="",
                          style={}, success=False,
                          error=f"UnknownChartType: {exc}", out=job.out)
        _try_sidecar(meta)
        return meta
    except Exception as exc:    # unreadable spec file
        meta = RenderMeta(chart_type="", template="", library="", style={},
                          success=False, error=f"{type(exc).__name__}: {exc}",
                          out=job.out)
        _try_sidecar(meta)
        return meta

    draw = next(fn for tid, _, fn in TEMPLATES[chart_type]
                if tid == template_id)
    fig = plt.figure(figsize=(6.4, 4.8))
    warnings: list[str] = []
    try:
        draw(fig, spec, style, job.annotated)
        missing = verify_labels(fig, spec)
        if missing:
            raise TemplateFailure(f"labels missing from figure: {missing}")
        Path(job.out).parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(job.out, dpi=DPI, bbox_inches="tight")
        meta = RenderMeta(chart_type=chart_type, template=template_id,
                          library=library, style=style, success=True,
                          warnings=warnings, out=job.out)
    except Exception:
        meta = RenderMeta(chart_type=chart_type, template=template_id,
                          library=library, style=style, success=False,
                          warnings=warnings, error=traceback.format_exc(),
                          out=job.out)
    finally:
        plt.close(fig)
    _try_sidecar(meta)
    return meta


def _try_sidecar(meta: RenderMeta) -> None:
    try:
        Path(meta.out).parent.mkdir(parents=True, exist_ok=True)
        meta.save_sidecar()
    except OSError:
        meta.warnings.append("could not write sidecar meta record")


def batch_render(jobs: list[RenderJob], workers: int = 1) -> list[RenderMeta]:
    """Render every job; failures are isolated per job; meta order matches
    job order regardless of worker count."""
    if not jobs:
        return []
    if workers <= 1:
        return [render(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(render, jobs))
