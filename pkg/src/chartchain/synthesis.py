"""Turning executed chains into linguistic chain-of-thought records.

The order is deliberately reversed relative to normal QA writing: first a
rationale draft is produced from the structured step description, then a
question that the rationale answers, then the rationale is rewritten into
fluent prose.  A consistency filter drops records whose stated final answer
no longer matches the executed ground truth.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from .engine import FunctionChain, TypedAnswer, classify_question_type, execute_chain, format_number
from .errors import UnparseableOutput
from .forge import prompt_template
from .gateway import Gateway, GatewayRequest
from .model import ChartSpec, serialize
from .registry import lookup

_POSITION_WORDS = ("left", "right", "upper", "bottom", "top")


@dataclass(frozen=True)
class ProcessDescription:
    """Machine-readable rendering of every chain step, one line per step."""

    lines: tuple[str, ...]
    final_result: str
    addition_prompt: str = ""

    def text(self) -> str:
        return "\n".join(self.lines) + f"\nFinal result: {self.final_result}"


@dataclass
class CoTRecord:
    question: str
    rationale: str
    final_answer_text: str
    truth: TypedAnswer
    signature: str
    length: int
    taxonomies: list[str]
    question_type: str
    refined: bool
    leak_suspect: bool = False

    def to_dict(self) -> dict:
        return {
            "question": self.question, "rationale": self.rationale,
            "final_answer_text": self.final_answer_text,
            "truth": self.truth.to_dict(), "signature": self.signature,
            "length": self.length, "taxonomies": list(self.taxonomies),
            "question_type": self.question_type, "refined": self.refined,
            "leak_suspect": self.leak_suspect,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CoTRecord":
        d = dict(d)
        d["truth"] = TypedAnswer.from_dict(d["truth"])
        return cls(**d)


def _addition_prompt(chart_type: str) -> str:
    """Optional per-type guidance appended to the rationale prompt."""
    folder = resources.files("chartchain.assets.prompts")
    candidate = folder.joinpath(f"addition_{chart_type}.txt")
    try:
        return candidate.read_text().strip()
    except FileNotFoundError:
        return ""


def _render_step(index: int, step) -> str:
    fdef = lookup(step.function)
    params = step.params_dict
    param_text = ""
    if params:
        param_text = " with " + ", ".join(
            f"{k}={format_number(v) if isinstance(v, (int, float)) else v}"
            for k, v in sorted(params.items()))
    if step.output_kind == "objects":
        out = "; ".join(step.output)
    elif step.output_kind == "values":
        out = ", ".join(format_number(v) for v in step.output)
    elif step.output_kind == "number":
        out = format_number(step.output)
    elif step.output_kind == "boolean":
        out = "Yes" if step.output else "No"
    elif step.output_kind == "text-list":
        out = ", ".join(step.output)
    else:
        out = str(step.output)
    return (f"Step {index}: apply {step.function}{param_text} "
            f"({fdef.description}) to input [{step.input_digest}] "
            f"-> {out}")


def describe_chain(spec: ChartSpec, chain: FunctionChain) -> ProcessDescription:
    """Deterministic step-by-step text; one line per chain step."""
    execute_chain(spec, chain)   # raises ReplayMismatch on corruption
    lines = []
    index = 1
    for sub in chain.sub_chains:
        for step in sub:
            lines.append(_render_step(index, step))
            index += 1
    if chain.joiner is not None:
        lines.append(_render_step(index, chain.joiner))
    return ProcessDescription(
        lines=tuple(lines),
        final_result=chain.final_answer.render(),
        addition_prompt=_addition_prompt(spec.chart_type))


def _parse_two_part(reply: str, head: str, tail: str = "Final answer:"):
    if head not in reply or tail not in reply:
        raise UnparseableOutput(f"reply missing {head!r} or {tail!r}")
    after_head = reply.split(head, 1)[1]
    body, _, answer = after_head.rpartition(tail)
    body = body.strip().rstrip(",").strip()
    answer = answer.strip().rstrip(".")
    if not body or not answer:
        raise UnparseableOutput("empty rationale or answer")
    return body, answer


def _complete_with_retry(gateway: Gateway, prompt: str, tag: str, parse,
                         retries: int = 1):
    last = None
    nudge = ""
    for _ in range(retries + 1):
        reply = gateway.complete(GatewayRequest(user=prompt + nudge, tag=tag))
        try:
            return parse(reply)
        except UnparseableOutput as exc:
            last = exc
            nudge = "\nPlease strictly follow the output format."
    raise last


def draft_rationale(desc: ProcessDescription, spec: ChartSpec,
                    gateway: Gateway, retries: int = 1) -> tuple[str, str]:
    prompt = (prompt_template("rationale_generation")
              .replace("{addition_prompt}", desc.addition_prompt)
              .replace("{json_str}", serialize(spec))
              .replace("{structured process description}", desc.text()))
    return _complete_with_retry(
        gateway, prompt, "rationale",
        lambda r: _parse_two_part(r, "Reasoning process:"), retries)


def draft_question(spec: ChartSpec, desc: ProcessDescription,
                   rationale_draft: str, gateway: Gateway,
                   retries: int = 1) -> str:
    prompt = (prompt_template("question_generation")
              .replace("{json_data}", serialize(spec))
              .replace("{structured process description}", desc.text())
              .replace("{rationale}", rationale_draft))

    def parse(reply: str) -> str:
        if "Question:" not in reply:
            raise UnparseableOutput("reply missing 'Question:' prefix")
        question = reply.split("Question:", 1)[1].strip()
        if not question:
            raise UnparseableOutput("empty question")
        return question

    return _complete_with_retry(gateway, prompt, "question", parse, retries)


def refine_rationale(desc: ProcessDescription, question: str, draft: str,
                     gateway: Gateway, retries: int = 1) -> tuple[str, str]:
    prompt = (prompt_template("rationale_refinement")
              .replace("{structured process description}", desc.text())
              .replace("{question}", question)
              .replace("{rationale}", draft))
    return _complete_with_retry(
        gateway, prompt, "refinement",
        lambda r: _parse_two_part(r, "Rewritten rationale:"), retries)


def leak_suspect(question: str, final_answer_text: str) -> bool:
    """True when the question itself contains the final answer verbatim."""
    answer = final_answer_text.strip().rstrip("%")
    if not answer:
        return False
    if re.fullmatch(r"-?\d+(\.\d+)?", answer):
        return re.search(rf"(?<![\d.]){re.escape(answer)}(?![\d.])",
                         question) is not None
    return answer.lower() in question.lower()


def rationale_lint(rationale: str) -> list[str]:
    """Soft checks on refined text (phrases the refinement prompt forbids)."""
    problems = []
    if "structured process description" in rationale.lower():
        problems.append("mentions the structured process description")
    return problems


def synthesize_record(spec: ChartSpec, chain: FunctionChain, gateway: Gateway,
                      refine: bool = True, retries: int = 1) -> CoTRecord:
    """Full reverse synthesis for one chain: draft -> question -> refine."""
    desc = describe_chain(spec, chain)
    draft, draft_answer = draft_rationale(desc, spec, gateway, retries)
    question = draft_question(spec, desc, draft, gateway, retries)
    if refine:
        rationale, answer_text = refine_rationale(desc, question, draft,
                                                  gateway, retries)
    else:
        rationale, answer_text = draft, draft_answer
    return CoTRecord(
        question=question, rationale=rationale,
        final_answer_text=answer_text, truth=chain.final_answer,
        signature=chain.signature, length=chain.length,
        taxonomies=chain.taxonomies(),
        question_type=classify_question_type(chain),
        refined=refine,
        leak_suspect=leak_suspect(question, answer_text))


def consistency_filter(record: CoTRecord) -> tuple[bool, str | None]:
    """Keep iff the stated final answer matches the executed truth."""
    from .evaluate import relaxed_match

    if relaxed_match(record.final_answer_text, record.truth):
        return True, None
    return False, (f"final answer {record.final_answer_text!r} does not "
                   f"match truth {record.truth.render()!r}")
