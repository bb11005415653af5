"""Build a small chart-QA dataset fully offline and print its statistics.

The deterministic rule-based mock gateway stands in for an LLM, so this
runs with no network access and reproduces byte-identical output per seed.
"""

from pathlib import Path

from chartchain import MockGateway, PipelineConfig, build_dataset, compute_stats

OUT = Path(__file__).parent / "out" / "small_dataset"


def main() -> None:
    cfg = PipelineConfig(
        out_dir=str(OUT),
        chart_types=["bar_multi", "line_multi", "pie", "heatmap",
                     "box", "candlestick", "node_link"],
        charts_per_type=2,
        qa_per_chart=3,
        seed=42,
        quotas={2: 2, 3: 2, 4: 2, 5: 1},
    )
    manifest = build_dataset(cfg, MockGateway(unknown="rule"))
    print(f"built {len(manifest['records'])} Q&A records over "
          f"{len(manifest['charts'])} charts -> {OUT}/manifest.json\n")
    print(compute_stats(manifest).render_text())

    sample = manifest["records"][0]
    print("\n--- sample record ---")
    print("question: ", sample["question"])
    print("rationale:", sample["rationale"][:200], "...")
    print("answer:   ", sample["final_answer_text"])
    print("chain:    ", sample["signature"])


if __name__ == "__main__":
    main()
