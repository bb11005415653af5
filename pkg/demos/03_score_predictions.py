"""Score simulated model predictions against a built dataset and print the
fine-grained accuracy breakdowns."""

import random
from pathlib import Path

from chartchain import (
    MockGateway,
    PipelineConfig,
    Prediction,
    TypedAnswer,
    build_dataset,
    score_dataset,
)

OUT = Path(__file__).parent / "out" / "eval_dataset"


def main() -> None:
    cfg = PipelineConfig(
        out_dir=str(OUT),
        chart_types=["bar_multi", "pie", "line_multi", "heatmap", "radar"],
        charts_per_type=2, qa_per_chart=3, seed=5,
        quotas={2: 2, 3: 2, 4: 1})
    manifest = build_dataset(cfg, MockGateway(unknown="rule"))

    # a simulated model: mostly right, sometimes near-misses, sometimes wrong
    rng = random.Random(1)
    preds = []
    for rec in manifest["records"]:
        truth = TypedAnswer.from_dict(rec["truth"])
        roll = rng.random()
        if roll < 0.6:
            answer = truth.render()
        elif roll < 0.8 and truth.kind == "number":
            answer = f"{float(truth.value) * 1.03:.2f}"   # inside 5% margin
        else:
            answer = "999999"
        preds.append(Prediction(rec["id"], (f"Answer: {answer}",)))

    report = score_dataset(preds, manifest["records"])
    print(f"overall accuracy: {report.overall_accuracy:.3f} "
          f"({report.correct}/{report.total})\n")
    for axis, cells in report.breakdowns.items():
        print(f"{axis}:")
        for label in sorted(cells):
            cell = cells[label]
            print(f"  {label:<45} {cell['accuracy']:.3f}  (n={cell['n']})")
        print()


if __name__ == "__main__":
    main()
