"""Reverse question/rationale synthesis from executed chains."""

import pytest

from chartchain.engine import TypedAnswer, build_chain
from chartchain.errors import UnparseableOutput
from chartchain.gateway import MockGateway, prompt_hash
from chartchain.synthesis import (
    CoTRecord,
    consistency_filter,
    describe_chain,
    draft_question,
    draft_rationale,
    leak_suspect,
    rationale_lint,
    refine_rationale,
    synthesize_record,
)
from helpers import mini_spec

SPEC = mini_spec("bar_multi", ["g1", "g2", "g3"], ["a", "b"],
                 {"g1": {"a": 10.0, "b": 20.0}, "g2": {"a": 30.0, "b": 40.0},
                  "g3": {"a": 50.0, "b": 60.0}})
CHAIN = build_chain(SPEC, [[("all_object_selection", {}),
                            ("max_one_object", {}),
                            ("value_of_objects", {})]])


def _record(final_answer_text, truth, question="What is the largest value?"):
    return CoTRecord(
        question=question, rationale="r", final_answer_text=final_answer_text,
        truth=truth, signature=CHAIN.signature, length=CHAIN.length,
        taxonomies=CHAIN.taxonomies(), question_type="NQA", refined=True)


def test_describe_chain_line_per_step():
    desc = describe_chain(SPEC, CHAIN)
    assert len(desc.lines) == CHAIN.length
    assert desc.lines[0].startswith("Step 1: apply all_object_selection")
    assert desc.final_result == "60"
    assert desc.text().endswith("Final result: 60")


def test_describe_chain_counts_joiner():
    chain = build_chain(
        SPEC,
        [[("one_object_selection", {"group": "g1", "legend": "a"}),
          ("value_of_objects", {})],
         [("one_object_selection", {"group": "g2", "legend": "b"}),
          ("value_of_objects", {})]],
        ("sum_of_values", {}))
    desc = describe_chain(SPEC, chain)
    assert len(desc.lines) == 5
    assert "sum_of_values" in desc.lines[-1]


def test_rule_mode_pipeline_parses_and_is_deterministic():
    gw1 = MockGateway(unknown="rule")
    gw2 = MockGateway(unknown="rule")
    rec1 = synthesize_record(SPEC, CHAIN, gw1)
    rec2 = synthesize_record(SPEC, CHAIN, gw2)
    assert rec1 == rec2
    assert rec1.final_answer_text == "60"
    assert rec1.refined is True
    assert consistency_filter(rec1) == (True, None)


def test_no_refine_keeps_draft():
    rec = synthesize_record(SPEC, CHAIN, MockGateway(unknown="rule"),
                            refine=False)
    assert rec.refined is False
    desc = describe_chain(SPEC, CHAIN)
    draft, answer = draft_rationale(desc, SPEC, MockGateway(unknown="rule"))
    assert rec.rationale == draft
    assert rec.final_answer_text == answer


class _GarbageGateway(MockGateway):
    """Always replies with text that matches no expected output format."""

    def _send(self, req):
        return "I would rather talk about something else."


def test_unparseable_reply_retried_then_raised():
    gw = _GarbageGateway()
    desc = describe_chain(SPEC, CHAIN)
    with pytest.raises(UnparseableOutput):
        draft_rationale(desc, SPEC, gw, retries=1)
    assert len(gw.transcript) == 2
    assert gw.transcript[1]["prompt"].endswith(
        "Please strictly follow the output format.")


def test_question_marker_required():
    desc = describe_chain(SPEC, CHAIN)
    with pytest.raises(UnparseableOutput):
        draft_question(SPEC, desc, "draft", _GarbageGateway(), retries=0)


def test_refinement_parses_last_marker():
    desc = describe_chain(SPEC, CHAIN)
    reply = ("Rewritten rationale: The tallest bar belongs to g3. "
             "Final answer: 61, Final answer: 60")
    gw = MockGateway(unknown="rule")
    gw.replies = {}   # force rule; then override via direct parse path

    # use a scripted gateway keyed to the real refinement prompt
    from chartchain.forge import prompt_template
    prompt = (prompt_template("rationale_refinement")
              .replace("{structured process description}", desc.text())
              .replace("{question}", "Q?")
              .replace("{rationale}", "draft"))
    scripted = MockGateway(replies={prompt_hash("refinement", prompt): reply},
                           unknown="error")
    rationale, answer = refine_rationale(desc, "Q?", "draft", scripted)
    assert answer == "60"
    assert "Final answer: 61" in rationale


def test_leak_suspect():
    assert leak_suspect("Is the total 370 this year?", "370")
    assert not leak_suspect("Is the total 3700 this year?", "370")
    assert not leak_suspect("Is the total above average?", "370")
    assert leak_suspect("Does Marketing lead the chart?", "Marketing")
    assert not leak_suspect("What is the best group?", "Marketing")
    assert leak_suspect("Is the share 24 percent?", "24%")


def test_rationale_lint():
    assert rationale_lint("Reading the chart, the answer is 60.") == []
    assert rationale_lint(
        "Per the structured process description above...") != []


def test_consistency_filter_numeric_margin():
    truth = TypedAnswer("number", 440.0)
    keep, reason = consistency_filter(_record("440", truth))
    assert keep and reason is None
    keep2, reason2 = consistency_filter(_record("410", truth))
    assert not keep2 and "410" in reason2   # 30/440 = 6.8% off, beyond margin
    keep3, _ = consistency_filter(_record("442", truth))
    assert keep3                            # 0.45% off, inside margin


def test_consistency_filter_boolean_case_insensitive():
    truth = TypedAnswer("boolean", True)
    assert consistency_filter(_record("yes", truth))[0]
    assert consistency_filter(_record("Yes", truth))[0]
    assert not consistency_filter(_record("no", truth))[0]


def test_record_round_trip():
    rec = synthesize_record(SPEC, CHAIN, MockGateway(unknown="rule"))
    again = CoTRecord.from_dict(rec.to_dict())
    assert again == rec
