"""Renderer tests: templates, determinism, label round-trip, CLI protocol.

Chart records come from the companion data package's offline generator (a
test-only dependency); the renderer itself reads only JSON files.
"""

import json
import random
import subprocess
import sys
import time

import pytest

from chartrender import (
    TEMPLATES,
    MalformedJob,
    RenderJob,
    batch_render,
    load_jobs,
    render,
    sample_style,
)

forge = pytest.importorskip("chartchain.forge")
model = pytest.importorskip("chartchain.model")

ALL_TYPES = list(model.CHART_TYPES)


def _spec_file(tmp_path, chart_type, seed=0, name=None):
    spec = forge.fallback_generate(forge.GenConfig(), random.Random(seed),
                                   chart_type)
    path = tmp_path / f"{name or chart_type}.json"
    path.write_text(model.serialize(spec))
    return path, json.loads(path.read_text())


# --------------------------------------------------------------------------
# registry and style sampling

def test_registry_covers_all_19_types():
    assert set(TEMPLATES) == set(ALL_TYPES)
    for ctype, entries in TEMPLATES.items():
        assert len(entries) >= 1, ctype
        ids = [tid for tid, _, _ in entries]
        assert len(ids) == len(set(ids))
    common_with_variants = ("bar_single", "bar_multi", "line_single",
                            "line_multi", "pie")
    for ctype in common_with_variants:
        assert len(TEMPLATES[ctype]) >= 2, ctype


def test_style_sampling_deterministic():
    a = sample_style(7, "bar_multi")
    b = sample_style(7, "bar_multi")
    assert a == b
    seen = {json.dumps(sample_style(s, "bar_multi"), sort_keys=True,
                       default=str) for s in range(30)}
    assert len(seen) > 1            # the seed actually varies the style


def test_style_template_override():
    tid, lib, _ = sample_style(0, "pie", template_override="pie-donut")
    assert tid == "pie-donut" and lib == "matplotlib"
    from chartrender import UnknownChartType
    with pytest.raises(UnknownChartType):
        sample_style(0, "pie", template_override="no-such-template")
    with pytest.raises(UnknownChartType):
        sample_style(0, "scatterplot3000")


# --------------------------------------------------------------------------
# single-job rendering

def test_render_bar_single_succeeds(tmp_path):
    spec_path, spec = _spec_file(tmp_path, "bar_single")
    out = tmp_path / "img" / "chart.png"
    meta = render(RenderJob(spec=str(spec_path), out=str(out)))
    assert meta.success, meta.error
    assert out.exists()
    assert meta.chart_type == "bar_single"
    assert meta.template in [t for t, _, _ in TEMPLATES["bar_single"]]
    sidecar = out.parent / (out.name + ".meta.json")
    assert json.loads(sidecar.read_text())["success"] is True


def test_same_job_twice_identical_meta(tmp_path):
    spec_path, _ = _spec_file(tmp_path, "line_multi")
    out = tmp_path / "a.png"
    job = RenderJob(spec=str(spec_path), out=str(out), style_seed=13)
    m1 = render(job)
    m2 = render(job)
    assert m1.to_dict() == m2.to_dict()


def test_unknown_chart_type_fails_gracefully(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"type": "hologram", "groups": [],
                               "legends": []}))
    meta = render(RenderJob(spec=str(bad), out=str(tmp_path / "x.png")))
    assert not meta.success
    assert "UnknownChartType" in meta.error
    assert not (tmp_path / "x.png").exists()


def test_missing_spec_file_fails_gracefully(tmp_path):
    meta = render(RenderJob(spec=str(tmp_path / "ghost.json"),
                            out=str(tmp_path / "x.png")))
    assert not meta.success


def test_job_validation():
    with pytest.raises(MalformedJob):
        RenderJob(spec="same.json", out="same.json")
    with pytest.raises(MalformedJob):
        RenderJob.from_dict({"spec": "a.json"})    # out missing


def test_annotated_flag_adds_value_text(tmp_path):
    import matplotlib.pyplot as plt

    from chartrender.render import sample_style as ss
    from chartrender.templates import TEMPLATES as reg

    spec_path, spec = _spec_file(tmp_path, "bar_single")
    _, _, style = ss(0, "bar_single")
    draw = reg["bar_single"][0][2]
    texts = {}
    for annotated in (False, True):
        fig = plt.figure()
        draw(fig, spec, style, annotated)
        texts[annotated] = sum(len(ax.texts) for ax in fig.get_axes())
        plt.close(fig)
    assert texts[True] > texts[False]


# --------------------------------------------------------------------------
# batch protocol

def test_batch_isolates_failures(tmp_path):
    good1, _ = _spec_file(tmp_path, "pie", name="p1")
    good2, _ = _spec_file(tmp_path, "area", name="p2")
    bad = tmp_path / "broken.json"
    bad.write_text("{ not json")
    jobs = [RenderJob(spec=str(good1), out=str(tmp_path / "1.png")),
            RenderJob(spec=str(bad), out=str(tmp_path / "2.png")),
            RenderJob(spec=str(good2), out=str(tmp_path / "3.png"))]
    metas = batch_render(jobs)
    assert [m.success for m in metas] == [True, False, True]
    assert metas[1].out.endswith("2.png")


def test_batch_empty():
    assert batch_render([]) == []


def test_jobs_file_round_trip(tmp_path):
    path = tmp_path / "jobs.jsonl"
    job = RenderJob(spec="a.json", out="a.png", style_seed=4, annotated=True)
    path.write_text(json.dumps(job.to_dict()) + "\n\n")
    loaded = load_jobs(path)
    assert loaded == [job]


def test_cli_renders_and_exit_codes(tmp_path):
    spec_path, _ = _spec_file(tmp_path, "bar_multi")
    jobs = tmp_path / "jobs.jsonl"
    jobs.write_text(json.dumps({"spec": str(spec_path), "out": "chart.png",
                                "style_seed": 1}) + "\n")
    result = subprocess.run(
        [sys.executable, "-m", "chartrender.cli", "render",
         "--jobs", str(jobs), "--out-dir", str(tmp_path / "img")],
        capture_output=True, text=True)
    assert result.returncode == 0, result.stderr
    assert (tmp_path / "img" / "chart.png").exists()

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"type": "hologram"}))
    jobs.write_text(json.dumps({"spec": str(bad), "out": "x.png"}) + "\n")
    result = subprocess.run(
        [sys.executable, "-m", "chartrender.cli", "render",
         "--jobs", str(jobs), "--out-dir", str(tmp_path / "img")],
        capture_output=True, text=True)
    assert result.returncode == 1      # every job failed


# --------------------------------------------------------------------------
# acceptance

def test_all_types_render_with_label_round_trip(criterion, tmp_path):
    """Every chart type renders headlessly; labels survive into the figure;
    fixed seeds reproduce identical meta records."""
    start = time.perf_counter()
    failures = []
    jobs = []
    for i, ctype in enumerate(ALL_TYPES):
        spec_path, _ = _spec_file(tmp_path, ctype, seed=100 + i)
        jobs.append(RenderJob(spec=str(spec_path),
                              out=str(tmp_path / "img" / f"{ctype}.png"),
                              style_seed=i, annotated=i % 2 == 0))
    metas = batch_render(jobs)
    for job, meta in zip(jobs, metas):
        if not meta.success:
            failures.append(f"{meta.chart_type}: "
                            f"{(meta.error or '').splitlines()[-1]}")
        else:
            rerun = render(job)
            if rerun.to_dict() != meta.to_dict():
                failures.append(f"{meta.chart_type}: nondeterministic meta")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60.0
    assert criterion(
        "renderer coverage", ok,
        f"19 chart types rendered twice in {elapsed:.1f}s; label round-trip "
        "verified on every success"
        + (f"; failures: {failures}" if failures else ""))
