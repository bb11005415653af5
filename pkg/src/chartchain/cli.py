"""Command-line entry points for the dataset tooling."""

from __future__ import annotations

import json
import os
import random
import subprocess
import sys
from pathlib import Path

import click

from .engine import DiscoveryConfig, FunctionChain, discover
from .errors import ChartChainError
from .evaluate import EvalOptions, Prediction, score_dataset
from .forge import GenConfig, fallback_generate
from .gateway import HttpGateway, MockGateway, mock_from_fixture
from .model import CHART_TYPES, parse_spec, serialize
from .pipeline import (
    PipelineConfig,
    build_dataset,
    compute_stats,
    split_dataset,
    spec_hash,
)
from .synthesis import consistency_filter, synthesize_record


def _gateway(mock_fixture: str | None):
    if mock_fixture:
        return mock_from_fixture(mock_fixture)
    if os.environ.get("LLM_BASE_URL"):
        return HttpGateway()
    return MockGateway(unknown="rule")


def _fail(exc: Exception) -> None:
    click.echo(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
               err=True)
    sys.exit(2)


@click.group()
def main() -> None:
    """Synthetic chart question-answering dataset tools."""


@main.command("gen-specs")
@click.option("--out-dir", required=True, type=click.Path())
@click.option("--count", default=1, show_default=True)
@click.option("--type", "chart_type", default=None,
              type=click.Choice(CHART_TYPES))
@click.option("--seed", default=0, show_default=True)
def gen_specs(out_dir: str, count: int, chart_type: str | None, seed: int):
    """Write deterministic synthetic chart records."""
    try:
        root = Path(out_dir)
        root.mkdir(parents=True, exist_ok=True)
        rng = random.Random(seed)
        cfg = GenConfig(seed=seed)
        for _ in range(count):
            spec = fallback_generate(cfg, rng, chart_type)
            (root / f"{spec_hash(spec)}.json").write_text(serialize(spec))
        click.echo(f"wrote {count} spec(s) to {out_dir}")
    except ChartChainError as exc:
        _fail(exc)


@main.command("render")
@click.option("--jobs", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
def render(jobs: str, out_dir: str):
    """Forward a job list to the chart renderer executable."""
    result = subprocess.run(["chartrender", "render", "--jobs", jobs,
                             "--out-dir", out_dir])
    sys.exit(result.returncode)


@main.command("discover")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--max-depth", default=4, show_default=True)
@click.option("--out", default=None, type=click.Path())
def discover_cmd(spec_path: str, seed: int, max_depth: int, out: str | None):
    """Enumerate and sample function chains for one chart record."""
    try:
        spec = parse_spec(Path(spec_path).read_text())
        result = discover(spec, DiscoveryConfig(max_depth=max_depth),
                          random.Random(seed))
        payload = {"chains": [c.to_dict() for c in result.chains],
                   "shortfall": {str(k): v for k, v in result.shortfall.items()}}
        text = json.dumps(payload, indent=1, ensure_ascii=False)
        if out:
            Path(out).write_text(text)
        else:
            click.echo(text)
    except ChartChainError as exc:
        _fail(exc)


@main.command("synthesize")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True))
@click.option("--chains", "chains_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--mock-fixture", default=None, type=click.Path())
@click.option("--no-refine", is_flag=True, default=False)
def synthesize(spec_path: str, chains_path: str, out: str,
               mock_fixture: str | None, no_refine: bool):
    """Write question/rationale records for previously discovered chains."""
    try:
        spec = parse_spec(Path(spec_path).read_text())
        chains = [FunctionChain.from_dict(d)
                  for d in json.loads(Path(chains_path).read_text())["chains"]]
        gateway = _gateway(mock_fixture)
        rows = []
        for chain in chains:
            record = synthesize_record(spec, chain, gateway,
                                       refine=not no_refine)
            keep, reason = consistency_filter(record)
            row = record.to_dict()
            row["kept"] = keep
            row["drop_reason"] = reason
            rows.append(row)
        Path(out).write_text("\n".join(
            json.dumps(r, ensure_ascii=False) for r in rows) + "\n")
        click.echo(f"wrote {len(rows)} record(s) to {out}")
    except ChartChainError as exc:
        _fail(exc)


@main.command("build")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--out-dir", default=None, type=click.Path())
@click.option("--seed", default=None, type=int)
@click.option("--mock-fixture", default=None, type=click.Path())
@click.option("--no-refine", is_flag=True, default=False)
@click.option("--no-render", is_flag=True, default=False)
def build(config_path: str | None, out_dir: str | None, seed: int | None,
          mock_fixture: str | None, no_refine: bool, no_render: bool):
    """Run the full dataset build."""
    try:
        cfg = (PipelineConfig.from_file(config_path) if config_path
               else PipelineConfig())
        if out_dir is not None:
            cfg.out_dir = out_dir
        if seed is not None:
            cfg.seed = seed
        if no_refine:
            cfg.refine = False
        if no_render:
            cfg.render = False
        manifest = build_dataset(cfg, _gateway(mock_fixture))
        click.echo(f"built {len(manifest['records'])} record(s) over "
                   f"{len(manifest['charts'])} chart(s) in {cfg.out_dir}")
    except ChartChainError as exc:
        _fail(exc)


@main.command("stats")
@click.argument("manifest", type=click.Path(exists=True))
@click.option("--out", default=None, type=click.Path())
def stats(manifest: str, out: str | None):
    """Summarize a built dataset."""
    try:
        table = compute_stats(manifest)
        if out:
            Path(out).write_text(json.dumps(table.to_dict(), indent=1))
        click.echo(table.render_text())
    except ChartChainError as exc:
        _fail(exc)


@main.command("split")
@click.argument("manifest", type=click.Path(exists=True))
@click.option("--test-quota", "quota_items", multiple=True,
              help="chart_type=N, repeatable")
@click.option("--seed", default=0, show_default=True)
@click.option("--out-dir", required=True, type=click.Path())
def split(manifest: str, quota_items: tuple[str, ...], seed: int, out_dir: str):
    """Carve a chart-disjoint test split out of a manifest."""
    try:
        quota = {}
        for item in quota_items:
            ctype, _, n = item.partition("=")
            quota[ctype] = int(n)
        train, test = split_dataset(manifest, quota, seed)
        root = Path(out_dir)
        root.mkdir(parents=True, exist_ok=True)
        for name, part in (("train", train), ("test", test)):
            (root / f"manifest.{name}.json").write_text(
                json.dumps(part, sort_keys=True, ensure_ascii=False, indent=1))
        click.echo(f"train charts: {len(train['charts'])}, "
                   f"test charts: {len(test['charts'])}")
    except ChartChainError as exc:
        _fail(exc)


@main.command("evaluate")
@click.option("--preds", required=True, type=click.Path(exists=True))
@click.option("--manifest", required=True, type=click.Path(exists=True))
@click.option("--out", default=None, type=click.Path())
@click.option("--mock-fixture", default=None, type=click.Path())
@click.option("--always-extract", is_flag=True, default=False)
def evaluate_cmd(preds: str, manifest: str, out: str | None,
                 mock_fixture: str | None, always_extract: bool):
    """Score a prediction file against a dataset manifest."""
    try:
        predictions = [Prediction.from_dict(json.loads(line))
                       for line in Path(preds).read_text().splitlines()
                       if line.strip()]
        records = json.loads(Path(manifest).read_text())["records"]
        options = EvalOptions(gateway=_gateway(mock_fixture),
                              always_extract=always_extract)
        report = score_dataset(predictions, records, options)
        if out:
            report.save(out)
        click.echo(f"accuracy: {report.overall_accuracy:.4f} "
                   f"({report.correct}/{report.total})")
    except ChartChainError as exc:
        _fail(exc)


@main.command("plot-report")
@click.option("--report", required=True, type=click.Path(exists=True))
@click.option("--out-dir", required=True, type=click.Path())
def plot_report(report: str, out_dir: str):
    """Bar-chart summaries of an evaluation report's breakdowns."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = json.loads(Path(report).read_text())
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    for axis, cells in data["breakdowns"].items():
        labels = sorted(cells)
        values = [cells[k]["accuracy"] for k in labels]
        fig, ax = plt.subplots(figsize=(max(4, len(labels)), 3))
        ax.bar(range(len(labels)), values, color="steelblue")
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
        ax.set_ylim(0, 1)
        ax.set_ylabel("accuracy")
        ax.set_title(axis)
        fig.savefig(root / f"{axis}.png", dpi=120, bbox_inches="tight")
        plt.close(fig)
    click.echo(f"wrote plots to {out_dir}")


if __name__ == "__main__":
    main()
