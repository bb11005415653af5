"""End-to-end dataset build: specs -> (render) -> discover -> synthesize ->
filter -> persist, plus statistics and train/test splitting.

Every stage output is content-addressed under the dataset root, so reruns
with an unchanged config skip completed work (and make zero gateway calls).
The manifest is deterministic: fixed seed + mock gateway give byte-identical
files across runs.
"""

from __future__ import annotations

import hashlib
import json
import random
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from .engine import DiscoveryConfig, discover
from .errors import MissingRecord, QuotaInfeasible
from .forge import GenConfig, fallback_generate, generate_seed, evolve_spec, sample_skeleton
from .gateway import Gateway
from .model import CHART_TYPES, REGULAR_TYPES, parse_spec, serialize
from .synthesis import consistency_filter, synthesize_record

MANIFEST_VERSION = 1

#: Chart types whose rendered image always carries value annotations.
ALWAYS_ANNOTATED = frozenset({"heatmap"})

DEFAULT_QUOTAS = {2: 4, 3: 4, 4: 3, 5: 3, 6: 3, 7: 3}


@dataclass
class PipelineConfig:
    out_dir: str = "dataset"
    chart_types: list[str] = field(default_factory=lambda: list(CHART_TYPES))
    charts_per_type: int = 1
    qa_per_chart: int = 3
    seed: int = 0
    max_depth: int = 4
    quotas: dict[int, int] = field(default_factory=lambda: dict(DEFAULT_QUOTAS))
    refine: bool = True
    render: bool = False
    use_llm_specs: bool = False
    evolution_rounds: int = 1
    min_yield: float = 0.0          # fraction of synthesized records kept

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        raw = json.loads(Path(path).read_text())
        if "quotas" in raw:
            raw["quotas"] = {int(k): v for k, v in raw["quotas"].items()}
        return cls(**raw)

    def digest(self) -> str:
        # out_dir is where the build lands, not what it contains
        content = {k: v for k, v in self.__dict__.items() if k != "out_dir"}
        payload = json.dumps(content, sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def spec_hash(spec) -> str:
    return hashlib.sha256(serialize(spec).encode()).hexdigest()[:16]


def _chart_rng(seed: int, chart_type: str, index: int, stage: str) -> random.Random:
    key = f"{seed}:{chart_type}:{index}:{stage}"
    return random.Random(int(hashlib.sha256(key.encode()).hexdigest()[:16], 16))


def _make_spec(cfg: PipelineConfig, chart_type: str, index: int,
               gateway: Gateway):
    rng = _chart_rng(cfg.seed, chart_type, index, "spec")
    gen = GenConfig(seed=cfg.seed, evolution_rounds=cfg.evolution_rounds)
    if not cfg.use_llm_specs:
        return fallback_generate(gen, rng, chart_type)
    skeleton = sample_skeleton(gen, rng, chart_type)
    spec = generate_seed(skeleton, gateway)
    for _ in range(cfg.evolution_rounds):
        spec = evolve_spec(spec, gateway)
    return spec


def build_dataset(cfg: PipelineConfig, gateway: Gateway) -> dict:
    """Run (or resume) the whole build; returns the manifest."""
    root = Path(cfg.out_dir)
    for sub in ("specs", "records", "images"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    digest = cfg.digest()

    charts: list[dict] = []
    records: list[dict] = []
    drops: list[dict] = []
    synthesized = 0
    render_jobs: list[dict] = []

    for chart_type in cfg.chart_types:
        for index in range(cfg.charts_per_type):
            spec = _make_spec(cfg, chart_type, index, gateway)
            shash = spec_hash(spec)
            spec_path = root / "specs" / f"{shash}.json"
            if not spec_path.exists():
                spec_path.write_text(serialize(spec))

            annotated = (chart_type in ALWAYS_ANNOTATED
                         or _chart_rng(cfg.seed, chart_type, index,
                                       "annotate").random() < 0.5)
            image_rel = f"images/{shash}.png"

            cache_path = root / "records" / f"{shash}-{digest}.json"
            if cache_path.exists():
                cached = json.loads(cache_path.read_text())
            else:
                cached = _produce_records(cfg, spec, shash, gateway)
                cache_path.write_text(json.dumps(cached, sort_keys=True,
                                                 ensure_ascii=False, indent=1))
            synthesized += cached["synthesized"]
            drops.extend(cached["drops"])
            chart_records = []
            for rec in cached["records"]:
                rec = dict(rec)
                rec.update({
                    "chart_type": chart_type,
                    "chart_group": ("Regular" if chart_type in REGULAR_TYPES
                                    else "Extra"),
                    "annotated": annotated,
                    "image": image_rel,
                    "rendered": cfg.render,
                    "split": "train",
                })
                records.append(rec)
                chart_records.append(rec["id"])
            charts.append({
                "spec_hash": shash, "chart_type": chart_type,
                "annotated": annotated, "image": image_rel,
                "spec_path": f"specs/{shash}.json",
                "records": chart_records,
            })
            if cfg.render:
                render_jobs.append({
                    "spec": str(spec_path), "out": str(root / image_rel),
                    "style_seed": cfg.seed + index, "annotated": annotated,
                })

    if cfg.render and render_jobs:
        _run_renderer(root, render_jobs)

    if synthesized and len(records) / synthesized < cfg.min_yield:
        raise MissingRecord(
            f"yield {len(records)}/{synthesized} below floor {cfg.min_yield}")

    manifest = {
        "version": MANIFEST_VERSION,
        "config_digest": digest,
        "seed": cfg.seed,
        "charts": charts,
        "records": records,
        "drops": drops,
    }
    (root / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, ensure_ascii=False, indent=1))
    return manifest


def _produce_records(cfg: PipelineConfig, spec, shash: str,
                     gateway: Gateway) -> dict:
    rng = _chart_rng(cfg.seed, spec.chart_type, 0, f"discover:{shash}")
    dcfg = DiscoveryConfig(max_depth=cfg.max_depth, quotas=dict(cfg.quotas))
    result = discover(spec, dcfg, rng)
    chains = result.chains
    if len(chains) > cfg.qa_per_chart:
        chains = rng.sample(chains, cfg.qa_per_chart)
    records, drops = [], []
    for k, chain in enumerate(chains):
        record = synthesize_record(spec, chain, gateway, refine=cfg.refine)
        keep, reason = consistency_filter(record)
        if keep:
            row = record.to_dict()
            row.update({
                "id": f"{shash}-{k}",
                "spec_hash": shash,
                "chain": chain.to_dict(),
            })
            records.append(row)
        else:
            drops.append({"spec_hash": shash, "signature": chain.signature,
                          "reason": reason})
    return {"records": records, "drops": drops, "synthesized": len(chains),
            "shortfall": {str(k): v for k, v in result.shortfall.items()}}


def _run_renderer(root: Path, jobs: list[dict]) -> None:
    jobs_path = root / "render_jobs.jsonl"
    jobs_path.write_text("\n".join(json.dumps(j) for j in jobs) + "\n")
    subprocess.run(
        ["chartrender", "render", "--jobs", str(jobs_path),
         "--out-dir", str(root / "images")],
        check=True)


# --------------------------------------------------------------------------
# statistics

@dataclass
class StatsTable:
    chart_counts: dict[str, int]
    qa_counts: dict[str, int]
    length_percentages: dict[str, float]
    question_type_percentages: dict[str, float]
    distinct_signatures: int
    distinct_functions: int
    mean_rationale_words: float
    total_charts: int
    total_qa: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def render_text(self) -> str:
        lines = [f"charts: {self.total_charts}   Q&A: {self.total_qa}",
                 f"distinct signatures: {self.distinct_signatures}   "
                 f"distinct functions: {self.distinct_functions}",
                 f"mean rationale words: {self.mean_rationale_words:.1f}",
                 "chain length %: " + "  ".join(
                     f"{k}:{v:.2f}" for k, v in self.length_percentages.items()),
                 "question type %: " + "  ".join(
                     f"{k}:{v:.2f}" for k, v in self.question_type_percentages.items()),
                 "per chart type (charts/qa):"]
        for ctype in sorted(self.chart_counts):
            lines.append(f"  {ctype}: {self.chart_counts[ctype]}"
                         f"/{self.qa_counts.get(ctype, 0)}")
        return "\n".join(lines)


def _length_bucket(length: int) -> str:
    return str(length) if length < 7 else ">=7"


def compute_stats(manifest: dict | str | Path) -> StatsTable:
    manifest = _load_manifest(manifest)
    records = manifest["records"]
    chart_counts: dict[str, int] = {}
    for chart in manifest["charts"]:
        chart_counts[chart["chart_type"]] = chart_counts.get(
            chart["chart_type"], 0) + 1
    qa_counts: dict[str, int] = {}
    length_counts: dict[str, int] = {}
    qtype_counts: dict[str, int] = {}
    signatures: set[str] = set()
    functions: set[str] = set()
    words = 0
    for rec in records:
        qa_counts[rec["chart_type"]] = qa_counts.get(rec["chart_type"], 0) + 1
        bucket = _length_bucket(rec["length"])
        length_counts[bucket] = length_counts.get(bucket, 0) + 1
        qtype_counts[rec["question_type"]] = qtype_counts.get(
            rec["question_type"], 0) + 1
        signatures.add(rec["signature"])
        functions.update(rec["signature"].split("/"))
        words += len(rec["rationale"].split())
    n = len(records)

    def percentages(counts: dict[str, int]) -> dict[str, float]:
        return {k: 100.0 * v / n for k, v in sorted(counts.items())} if n else {}

    return StatsTable(
        chart_counts=chart_counts, qa_counts=qa_counts,
        length_percentages=percentages(length_counts),
        question_type_percentages=percentages(qtype_counts),
        distinct_signatures=len(signatures),
        distinct_functions=len(functions),
        mean_rationale_words=(words / n) if n else 0.0,
        total_charts=len(manifest["charts"]), total_qa=n)


def _load_manifest(manifest: dict | str | Path) -> dict:
    if isinstance(manifest, (str, Path)):
        path = Path(manifest)
        if not path.exists():
            raise MissingRecord(f"manifest not found: {path}")
        return json.loads(path.read_text())
    return manifest


# --------------------------------------------------------------------------
# splitting

def split_dataset(manifest: dict | str | Path, test_quota: dict[str, int],
                  seed: int = 0) -> tuple[dict, dict]:
    """Seeded per-type split, disjoint by chart (no chart in both splits)."""
    manifest = _load_manifest(manifest)
    rng = random.Random(seed)
    by_type: dict[str, list[dict]] = {}
    for chart in manifest["charts"]:
        by_type.setdefault(chart["chart_type"], []).append(chart)
    test_hashes: set[str] = set()
    for ctype in sorted(test_quota):
        want = test_quota[ctype]
        pool = by_type.get(ctype, [])
        if want > len(pool):
            raise QuotaInfeasible(
                f"{ctype}: want {want} test charts, only {len(pool)} available")
        chosen = rng.sample(pool, want)
        test_hashes.update(c["spec_hash"] for c in chosen)

    def subset(which: str) -> dict:
        in_test = lambda h: h in test_hashes          # noqa: E731
        keep = (in_test if which == "test"
                else (lambda h: not in_test(h)))
        charts = [c for c in manifest["charts"] if keep(c["spec_hash"])]
        records = []
        for rec in manifest["records"]:
            if keep(rec["spec_hash"]):
                rec = dict(rec)
                rec["split"] = which
                records.append(rec)
        return {"version": manifest["version"],
                "config_digest": manifest["config_digest"],
                "seed": manifest["seed"], "charts": charts,
                "records": records, "drops": []}

    return subset("train"), subset("test")
