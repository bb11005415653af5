"""Job and result records for the file/subprocess rendering protocol.

The renderer talks to callers only through files: chart records are JSON
documents on disk, work arrives as a line-delimited job file, and every job
leaves a sidecar meta record beside its image.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


class RenderError(Exception):
    """Base class for renderer failures."""


class UnknownChartType(RenderError):
    pass


class TemplateFailure(RenderError):
    pass


class MalformedJob(RenderError):
    pass


@dataclass(frozen=True)
class RenderJob:
    """One chart to draw: where the record lives, where the image goes."""

    spec: str                    # path to the chart record (JSON)
    out: str                     # path of the PNG to write
    style_seed: int = 0          # fixed seed => identical template and style
    annotated: bool = False      # draw value labels on the data points
    template: str | None = None  # optional override of the template choice

    def __post_init__(self):
        if Path(self.spec).resolve() == Path(self.out).resolve():
            raise MalformedJob("spec and output paths must differ")

    @classmethod
    def from_dict(cls, d: dict) -> "RenderJob":
        try:
            return cls(spec=d["spec"], out=d["out"],
                       style_seed=int(d.get("style_seed", 0)),
                       annotated=bool(d.get("annotated", False)),
                       template=d.get("template"))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedJob(f"bad job record: {exc}") from exc

    def to_dict(self) -> dict:
        return {"spec": self.spec, "out": self.out,
                "style_seed": self.style_seed, "annotated": self.annotated,
                "template": self.template}


@dataclass
class RenderMeta:
    """Outcome record emitted for every job, success or not."""

    chart_type: str
    template: str
    library: str
    style: dict
    success: bool
    warnings: list[str] = field(default_factory=list)
    error: str | None = None
    out: str = ""

    def to_dict(self) -> dict:
        return {"chart_type": self.chart_type, "template": self.template,
                "library": self.library, "style": self.style,
                "success": self.success, "warnings": list(self.warnings),
                "error": self.error, "out": self.out}

    def save_sidecar(self) -> None:
        """Write the meta record next to the image (<image>.meta.json)."""
        path = Path(self.out)
        sidecar = path.with_name(path.name + ".meta.json")
        sidecar.write_text(json.dumps(self.to_dict(), indent=1,
                                      ensure_ascii=False))


def load_jobs(path: str | Path) -> list[RenderJob]:
    """Parse a line-delimited job file."""
    jobs = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            jobs.append(RenderJob.from_dict(json.loads(line)))
    return jobs
