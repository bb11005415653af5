"""Renderer command line: consume a job file, emit images + sidecar metas."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .jobs import MalformedJob, RenderJob, load_jobs
from .render import batch_render


@click.group()
def main() -> None:
    """Headless chart image renderer."""


@main.command("render")
@click.option("--jobs", "jobs_path", required=True,
              type=click.Path(exists=True),
              help="Line-delimited JSON job records.")
@click.option("--out-dir", required=True, type=click.Path(),
              help="Directory for images whose job paths are relative.")
@click.option("--workers", default=1, show_default=True)
def render_cmd(jobs_path: str, out_dir: str, workers: int) -> None:
    """Render every job in the file; one sidecar meta record per image."""
    try:
        jobs = load_jobs(jobs_path)
    except (MalformedJob, ValueError) as exc:
        click.echo(json.dumps({"error": type(exc).__name__,
                               "message": str(exc)}), err=True)
        sys.exit(2)
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    resolved = []
    for job in jobs:
        out = Path(job.out)
        if not out.is_absolute():
            out = root / out
        resolved.append(RenderJob(spec=job.spec, out=str(out),
                                  style_seed=job.style_seed,
                                  annotated=job.annotated,
                                  template=job.template))
    metas = batch_render(resolved, workers=workers)
    failures = sum(not m.success for m in metas)
    click.echo(f"rendered {len(metas) - failures}/{len(metas)} job(s)")
    for meta in metas:
        if not meta.success:
            first = (meta.error or "").strip().splitlines()
            click.echo(f"  failed: {meta.out}: "
                       f"{first[-1] if first else 'unknown error'}", err=True)
    if metas and failures == len(metas):
        sys.exit(1)       # nothing succeeded


if __name__ == "__main__":
    main()
