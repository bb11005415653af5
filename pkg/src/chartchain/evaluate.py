"""Scoring model predictions with the relaxed-accuracy metric.

Numeric answers pass within a 5% relative margin (with a tiny absolute
floor so a ground truth of zero is matchable); text and boolean answers are
compared case-insensitively after Yes/No canonicalization.  Answers are
pulled from the text after the last "Answer:" marker, with an optional
LLM-assisted extraction fallback for weakly formatted responses.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .engine import TypedAnswer
from .errors import UnknownRecordId
from .forge import prompt_template
from .gateway import Gateway, GatewayRequest
from .model import REGULAR_TYPES
from .registry import lookup

RELATIVE_MARGIN = 0.05
ABSOLUTE_FLOOR = 1e-9

LENGTH_BUCKETS = ("2", "3", "4", "5", "6", ">=7")


@dataclass(frozen=True)
class Prediction:
    record_id: str
    responses: tuple[str, ...]          # >1 entries enable majority voting
    pre_extracted: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "Prediction":
        if "responses" in d:
            responses = tuple(d["responses"])
        else:
            responses = (d["response"],)
        return cls(record_id=d["id"], responses=responses,
                   pre_extracted=d.get("extracted"))


@dataclass
class EvalOptions:
    gateway: Gateway | None = None      # needed only for extraction
    always_extract: bool = False


_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?")


def parse_number(text: str) -> float | None:
    """The first number in the text, ignoring thousands separators, currency
    signs, and percent units."""
    cleaned = text.replace(",", "").replace("$", "").strip()
    try:
        return float(cleaned.rstrip("%").strip())
    except ValueError:
        pass
    m = _NUMBER_RE.search(cleaned)
    return float(m.group()) if m else None


def _split_list(text: str) -> list[str]:
    """Split on commas, but not on commas inside parenthesized labels."""
    parts, depth, current = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return parts


def _canonical_bool(text: str) -> str | None:
    t = text.strip().strip(".").lower()
    if t in ("yes", "true", "correct"):
        return "Yes"
    if t in ("no", "false", "incorrect"):
        return "No"
    return None


def relaxed_match(pred_text: str | None, truth: TypedAnswer) -> bool:
    """The dataset's accuracy predicate; never raises on junk input."""
    if pred_text is None:
        return False
    pred_text = pred_text.strip()
    if truth.kind == "number":
        pred = parse_number(pred_text)
        if pred is None:
            return False
        margin = RELATIVE_MARGIN * max(abs(float(truth.value)), ABSOLUTE_FLOOR)
        return abs(pred - float(truth.value)) <= margin
    if truth.kind == "boolean":
        want = "Yes" if truth.value else "No"
        return _canonical_bool(pred_text) == want
    if truth.kind == "text-list":
        want = sorted(str(v).strip().lower() for v in truth.value)
        got = sorted(p.strip().lower() for p in _split_list(pred_text)
                     if p.strip())
        return want == got
    return pred_text.strip().strip(".").lower() == str(truth.value).strip().lower()


def parse_answer_marker(response: str) -> str | None:
    """Text after the last "Answer:" marker, or None when absent."""
    pos = response.rfind("Answer:")
    if pos < 0:
        return None
    return response[pos + len("Answer:"):].strip()


def extract_answer(question: str, response: str, gateway: Gateway) -> str:
    """LLM-assisted canonicalization of a free-form response."""
    prompt = (prompt_template("answer_extraction")
              .replace("{question}", question)
              .replace("{response}", response))
    reply = gateway.complete(GatewayRequest(user=prompt, tag="extraction"))
    return reply.strip().splitlines()[0].strip() if reply.strip() else "FAILED"


def canonicalize(text: str, kind: str) -> str:
    text = text.strip()
    if kind == "boolean":
        return _canonical_bool(text) or text
    if kind == "number":
        value = parse_number(text)
        return text if value is None else repr(value)
    return text.lower()


def majority_vote(answers: list[str], truth_kind: str) -> str:
    """Most frequent answer; numeric answers cluster by relaxed equivalence;
    ties break to the earliest first occurrence.  Always returns an element
    of the input list."""
    if not answers:
        raise ValueError("majority_vote needs at least one answer")
    if truth_kind == "number":
        clusters: list[dict] = []   # {"centroid": float|None, "members": [idx]}
        for i, answer in enumerate(answers):
            value = parse_number(answer)
            placed = False
            for cluster in clusters:
                c = cluster["centroid"]
                if value is None and c is None:
                    placed = True
                elif value is not None and c is not None and \
                        abs(value - c) <= RELATIVE_MARGIN * max(abs(c), ABSOLUTE_FLOOR):
                    placed = True
                if placed:
                    cluster["members"].append(i)
                    break
            if not placed:
                clusters.append({"centroid": value, "members": [i]})
        best = max(clusters, key=lambda cl: (len(cl["members"]), -cl["members"][0]))
        return answers[best["members"][0]]
    counts: dict[str, list[int]] = {}
    for i, answer in enumerate(answers):
        counts.setdefault(canonicalize(answer, truth_kind), []).append(i)
    best_key = max(counts, key=lambda k: (len(counts[k]), -counts[k][0]))
    return answers[counts[best_key][0]]


def length_bucket(length: int) -> str:
    return str(length) if length < 7 else ">=7"


def final_taxonomy(signature: str) -> str:
    last = signature.rsplit("/", 1)[-1]
    return lookup(last).taxonomy or "selection"


@dataclass
class EvalReport:
    overall_accuracy: float
    total: int
    correct: int
    breakdowns: dict[str, dict[str, dict]]
    items: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "overall_accuracy": self.overall_accuracy,
            "total": self.total, "correct": self.correct,
            "breakdowns": self.breakdowns, "items": self.items,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1,
                                         ensure_ascii=False))


def _axes_of(record: dict) -> dict[str, str]:
    chart_group = ("Regular" if record["chart_type"] in REGULAR_TYPES
                   else "Extra")
    return {
        "question_type": record["question_type"],
        "chart_group": chart_group,
        "annotated": "w. annotation" if record.get("annotated") else "w.o. annotation",
        "length_bucket": length_bucket(record["length"]),
        "signature": record["signature"],
        "taxonomy": final_taxonomy(record["signature"]),
    }


def score_dataset(predictions: list[Prediction], records: list[dict],
                  options: EvalOptions | None = None) -> EvalReport:
    """Verdict per item, then exact breakdowns along every axis.

    ``records`` are dataset rows (dicts) carrying at least id, question,
    question_type, chart_type, annotated, length, signature, and truth.
    """
    options = options or EvalOptions()
    by_id = {r["id"]: r for r in records}
    items: list[dict] = []
    correct = 0
    tallies: dict[str, dict[str, dict]] = {}
    for pred in predictions:
        if pred.record_id not in by_id:
            raise UnknownRecordId(pred.record_id)
        record = by_id[pred.record_id]
        truth = TypedAnswer.from_dict(record["truth"])
        extracted = [_item_answer(record, resp, pred, options)
                     for resp in pred.responses]
        answer = (extracted[0] if len(extracted) == 1
                  else majority_vote(extracted, truth.kind))
        ok = answer != "FAILED" and relaxed_match(answer, truth)
        correct += ok
        items.append({"id": pred.record_id, "extracted": answer,
                      "correct": ok})
        for axis, label in _axes_of(record).items():
            cell = tallies.setdefault(axis, {}).setdefault(
                label, {"n": 0, "correct": 0})
            cell["n"] += 1
            cell["correct"] += ok
    for axis_cells in tallies.values():
        for cell in axis_cells.values():
            cell["accuracy"] = cell["correct"] / cell["n"]
    total = len(predictions)
    return EvalReport(
        overall_accuracy=(correct / total) if total else 0.0,
        total=total, correct=correct, breakdowns=tallies, items=items)


def _item_answer(record: dict, response: str, pred: Prediction,
                 options: EvalOptions) -> str:
    if pred.pre_extracted is not None:
        return pred.pre_extracted
    marker = None if options.always_extract else parse_answer_marker(response)
    if marker is not None and marker.strip():
        return marker
    if options.gateway is None:
        return response            # best effort without an extraction gateway
    return extract_answer(record["question"], response, options.gateway)
