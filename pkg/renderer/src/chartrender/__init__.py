"""Headless chart renderer driven by JSON chart records and job files."""

from .jobs import (
    MalformedJob,
    RenderError,
    RenderJob,
    RenderMeta,
    TemplateFailure,
    UnknownChartType,
    load_jobs,
)
from .render import batch_render, render, sample_style, verify_labels
from .templates import TEMPLATES

__version__ = "0.1.0"

__all__ = [
    "MalformedJob", "RenderError", "RenderJob", "RenderMeta",
    "TemplateFailure", "UnknownChartType", "load_jobs",
    "batch_render", "render", "sample_style", "verify_labels", "TEMPLATES",
]
