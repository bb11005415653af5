"""Render one example image per chart type via the standalone renderer.

Requires the `chartrender` package (see renderer/) to be installed; the two
packages talk only through JSON files and a job list.
"""

import json
import random
import subprocess
import sys
from pathlib import Path

from chartchain import CHART_TYPES, GenConfig, fallback_generate, serialize

OUT = Path(__file__).parent / "out" / "gallery"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    jobs = []
    for i, chart_type in enumerate(CHART_TYPES):
        spec = fallback_generate(GenConfig(), random.Random(i), chart_type)
        spec_path = OUT / f"{chart_type}.json"
        spec_path.write_text(serialize(spec))
        jobs.append({"spec": str(spec_path), "out": f"{chart_type}.png",
                     "style_seed": i, "annotated": i % 2 == 0})
    jobs_path = OUT / "jobs.jsonl"
    jobs_path.write_text("\n".join(json.dumps(j) for j in jobs) + "\n")

    result = subprocess.run(
        ["chartrender", "render", "--jobs", str(jobs_path),
         "--out-dir", str(OUT / "images")])
    if result.returncode != 0:
        sys.exit(result.returncode)
    for meta_path in sorted((OUT / "images").glob("*.meta.json")):
        meta = json.loads(meta_path.read_text())
        print(f"{meta['chart_type']:<12} template={meta['template']:<20} "
              f"library={meta['library']}")


if __name__ == "__main__":
    main()
