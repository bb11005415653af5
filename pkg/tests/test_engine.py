"""Chain execution semantics, step by step."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chartchain.engine import (
    DiscoveryConfig,
    EngineOptions,
    FunctionChain,
    TypedAnswer,
    apply_object_function,
    apply_value_function,
    build_chain,
    classify_question_type,
    discover,
    execute_chain,
    format_number,
    parse_signature,
    select_objects,
)
from chartchain.errors import (
    ArityViolation,
    ConditionViolated,
    DivisionByZero,
    EmptyResult,
    EmptySelection,
    IncompleteChain,
    ReplayMismatch,
    TieRejected,
    UnknownColor,
    UnknownFunction,
    UnknownGroup,
    UnknownLegend,
)
from chartchain.model import objects_of
from chartchain.registry import lookup
from helpers import mini_spec
from deskdata import ALL_EXAMPLES

BAR = mini_spec("bar_multi", ["g1", "g2", "g3", "g4"], ["a", "b"],
                {"g1": {"a": 10.0, "b": 20.0}, "g2": {"a": 30.0, "b": 40.0},
                 "g3": {"a": 50.0, "b": 60.0}, "g4": {"a": 70.0, "b": 80.0}})
TIED = mini_spec("bar_single", ["g1", "g2", "g3"], ["a"],
                 {"g1": {"a": 5.0}, "g2": {"a": 5.0}, "g3": {"a": 5.0}})


def _apply(spec, objs, name, params=None, **kw):
    return apply_object_function(spec, objs, lookup(name), params or {}, **kw)


# --------------------------------------------------------------------------
# selection

def test_one_object_selection():
    objs = select_objects(BAR, "one_object_selection",
                          {"group": "g2", "legend": "b"})
    assert len(objs) == 1 and objs[0].value == 40.0


def test_group_and_legend_selection():
    assert [o.value for o in select_objects(BAR, "group_selection",
                                            {"group": "g3"})] == [50.0, 60.0]
    assert [o.value for o in select_objects(BAR, "legend_selection",
                                            {"legend": "a"})] == \
        [10.0, 30.0, 50.0, 70.0]


def test_color_selection_matches_legend_color():
    objs = select_objects(BAR, "color_selection", {"color": "blue"})
    assert {o.legend for o in objs} == {"b"}
    objs2 = select_objects(BAR, "color_group_selection",
                           {"group": "g1", "color": "red"})
    assert len(objs2) == 1 and objs2[0].value == 10.0


def test_all_object_selection():
    assert len(select_objects(BAR, "all_object_selection", {})) == 8


def test_selection_errors():
    with pytest.raises(UnknownGroup):
        select_objects(BAR, "group_selection", {"group": "ghost"})
    with pytest.raises(UnknownLegend):
        select_objects(BAR, "legend_selection", {"legend": "ghost"})
    with pytest.raises(UnknownColor):
        select_objects(BAR, "color_selection", {"color": "chartreuse"})
    with pytest.raises(UnknownFunction):
        select_objects(BAR, "value_of_objects", {})


# --------------------------------------------------------------------------
# min/max and ties

def test_max_min_one_object():
    objs = objects_of(BAR)
    assert _apply(BAR, objs, "max_one_object").output == ("(g4, b)",)
    assert _apply(BAR, objs, "min_one_object").output == ("(g1, a)",)


def test_top_k_families():
    objs = objects_of(BAR)
    assert _apply(BAR, objs, "max_two_objects").output == \
        ("(g4, a)", "(g4, b)")
    assert _apply(BAR, objs, "min_three_objects").output == \
        ("(g1, a)", "(g1, b)", "(g2, a)")


def test_second_max_and_min():
    objs = objects_of(BAR)
    assert _apply(BAR, objs, "second_max_object").output == ("(g4, a)",)
    assert _apply(BAR, objs, "second_min_object").output == ("(g1, b)",)


def test_tie_rejection_on_and_off():
    objs = objects_of(TIED)
    with pytest.raises(TieRejected):
        _apply(TIED, objs, "max_one_object")
    step = _apply(TIED, objs, "max_one_object",
                  options=EngineOptions(tie_rejection=False))
    assert len(step.output) == 1


def test_boundary_tie_rejected_for_top_k():
    spec = mini_spec("bar_single", ["g1", "g2", "g3", "g4"], ["a"],
                     {"g1": {"a": 9.0}, "g2": {"a": 7.0}, "g3": {"a": 7.0},
                      "g4": {"a": 1.0}})
    objs = objects_of(spec)
    with pytest.raises(TieRejected):
        _apply(spec, objs, "max_two_objects")      # 7.0 tie at the boundary
    # bottom two are 1.0 and 7.0-tie -> also rejected
    with pytest.raises(TieRejected):
        _apply(spec, objs, "min_two_objects")


# --------------------------------------------------------------------------
# values, filters, counts

def test_value_of_objects_scalar_and_list():
    one = select_objects(BAR, "one_object_selection",
                         {"group": "g1", "legend": "a"})
    step = _apply(BAR, one, "value_of_objects")
    assert step.output_kind == "number" and step.output == 10.0
    many = select_objects(BAR, "legend_selection", {"legend": "b"})
    step2 = _apply(BAR, many, "value_of_objects")
    assert step2.output_kind == "values"
    assert step2.output == (20.0, 40.0, 60.0, 80.0)


def test_filters_and_empty_result():
    objs = objects_of(BAR)
    step = _apply(BAR, objs, "objects_that_larger_than_value", {"value": 55})
    assert step.output == ("(g3, b)", "(g4, a)", "(g4, b)")
    with pytest.raises(EmptyResult):
        _apply(BAR, objs, "objects_that_larger_than_value", {"value": 1000})
    step2 = _apply(BAR, objs, "objects_that_larger_than_value",
                   {"value": 1000},
                   options=EngineOptions(allow_empty_filter=True))
    assert step2.output == ()


def test_objects_with_same_value():
    spec = mini_spec("bar_single", ["g1", "g2", "g3"], ["a"],
                     {"g1": {"a": 4.0}, "g2": {"a": 4.0}, "g3": {"a": 9.0}})
    objs = objects_of(spec)
    step = _apply(spec, objs, "objects_with_same_value", {"value": 4.0})
    assert step.output == ("(g1, a)", "(g2, a)")
    with pytest.raises(EmptyResult):
        _apply(spec, objs, "objects_with_same_value", {"value": 9.0})


def test_counts():
    objs = objects_of(BAR)
    assert _apply(BAR, objs, "count_of_objects").output == 8.0
    assert _apply(BAR, objs, "num_of_legends").output == 2.0
    assert _apply(BAR, objs, "num_of_groups").output == 4.0
    assert _apply(BAR, objs, "num_of_colors").output == 2.0


def test_exclusions():
    objs = objects_of(BAR)
    step = _apply(BAR, objs, "exclude_objects_with_groups", {"group": "g1"})
    assert all(not lbl.startswith("(g1") for lbl in step.output)
    with pytest.raises(UnknownGroup):
        _apply(BAR, objs, "exclude_objects_with_groups", {"group": "nope"})


def test_min_max_diff_family():
    objs = objects_of(BAR)   # |a-b| = 10 per group, all tied
    with pytest.raises(TieRejected):
        _apply(BAR, objs, "the_group_that_has_maximum_difference")
    spec = mini_spec("bar_multi", ["g1", "g2"], ["a", "b"],
                     {"g1": {"a": 1.0, "b": 9.0}, "g2": {"a": 5.0, "b": 6.0}})
    objs2 = objects_of(spec)
    assert _apply(spec, objs2,
                  "maximum_difference_between_two_group_of_data").output == 8.0
    assert _apply(spec, objs2,
                  "minimum_difference_between_two_group_of_data").output == 1.0
    assert _apply(spec, objs2,
                  "the_group_that_has_maximum_difference").output == "g1"


def test_trend_and_sameness_predicates():
    up = mini_spec("line_single", ["g1", "g2", "g3"], ["a"],
                   {"g1": {"a": 1.0}, "g2": {"a": 2.0}, "g3": {"a": 3.0}})
    objs = objects_of(up)
    assert _apply(up, objs, "if_objects_consistently_increase",
                  history=("legend_selection",)).output is True
    assert _apply(up, objs, "if_objects_consistently_decrease",
                  history=("legend_selection",)).output is False
    assert _apply(up, objs, "if_same_values").output is False
    assert _apply(TIED, objects_of(TIED), "if_same_values").output is True
    assert _apply(BAR, objects_of(BAR), "if_same_groups").output is False


def test_single_object_predicates_and_text():
    one = select_objects(BAR, "one_object_selection",
                         {"group": "g2", "legend": "a"})
    assert _apply(BAR, one, "if_object_that_equal_to_value",
                  {"value": 30.0}).output is True
    assert _apply(BAR, one, "if_object_that_larger_than_value",
                  {"value": 25.0}).output is True
    assert _apply(BAR, one, "if_object_that_smaller_than_value",
                  {"value": 25.0}).output is False
    assert _apply(BAR, one, "color_of_objects").output == "red"
    step = _apply(BAR, one, "groups_of_object",
                  history=("group_selection",))
    assert step.output_kind == "text" and step.output == "g2"


def test_legend_of_one_object_value():
    objs = objects_of(BAR)
    step = _apply(BAR, objs, "legend_of_one_object_value", {"value": 60.0})
    assert step.output == "b"
    step2 = _apply(BAR, objs, "group_of_one_object_value", {"value": 70.0})
    assert step2.output == "g4"
    with pytest.raises(TieRejected):
        _apply(TIED, objects_of(TIED), "legend_of_one_object_value",
               {"value": 5.0})


# --------------------------------------------------------------------------
# position functions

def test_left_right_positions():
    objs = objects_of(BAR)
    assert _apply(BAR, objs, "leftmost_object").output == \
        ("(g1, a)", "(g1, b)")
    assert _apply(BAR, objs, "rightmost_object").output == \
        ("(g4, a)", "(g4, b)")
    assert _apply(BAR, objs, "left_two_objects").output == \
        ("(g1, a)", "(g1, b)", "(g2, a)", "(g2, b)")


def test_upper_bottom_bars():
    objs = select_objects(BAR, "legend_selection", {"legend": "a"})
    assert _apply(BAR, objs, "upper_one_bar").output == ("(g4, a)",)
    assert _apply(BAR, objs, "bottom_one_bar").output == ("(g1, a)",)


def test_stacked_corners():
    spec = mini_spec("bar_stacked", ["g1", "g2"], ["a", "b"],
                     {"g1": {"a": 3.0, "b": 7.0}, "g2": {"a": 8.0, "b": 2.0}})
    objs = objects_of(spec)
    assert _apply(spec, objs, "upper_rightmost_object").output == ("(g2, a)",)
    assert _apply(spec, objs, "lower_rightmost_object").output == ("(g2, b)",)
    assert _apply(spec, objs, "upper_leftmost_object").output == ("(g1, b)",)


def test_upper_lower_lines():
    spec = mini_spec("line_multi", ["g1", "g2"], ["a", "b"],
                     {"g1": {"a": 1.0, "b": 9.0}, "g2": {"a": 2.0, "b": 8.0}})
    objs = objects_of(spec)
    assert _apply(spec, objs, "upper_line_of_objects").output == \
        ("(g1, b)", "(g2, b)")
    assert _apply(spec, objs, "lower_line_of_objects").output == \
        ("(g1, a)", "(g2, a)")


# --------------------------------------------------------------------------
# chart-specific functions

BOX = mini_spec(
    "box", ["p", "q"], ["p", "q"], None,
    box={"median": {"p": 5.0, "q": 7.0},
         "first_quartile": {"p": 3.0, "q": 4.0},
         "third_quartile": {"p": 8.0, "q": 9.0},
         "minimum_values": {"p": 1.0, "q": 2.0},
         "maximum_values": {"p": 10.0, "q": 12.0},
         "outlier_values": {"p": [15.0, 16.0], "q": []}})


def test_box_values_and_extremes():
    objs = objects_of(BOX)
    assert _apply(BOX, objs, "median_of_objects").output == (5.0, 7.0)
    assert _apply(BOX, objs, "max_median_object").output == ("(q, q)",)
    assert _apply(BOX, objs[:1], "interquartile_range_of_box").output == 5.0
    assert _apply(BOX, objs[:1], "num_of_outliers").output == 2.0
    assert _apply(BOX, objs[:1], "outlier_values_of_objects").output == \
        (15.0, 16.0)
    with pytest.raises(EmptyResult):
        _apply(BOX, objs[1:], "outlier_values_of_objects")
    assert _apply(BOX, objs, "leftmost_box").output == ("(p, p)",)
    assert _apply(BOX, objs, "upper_box").output == ("(q, q)",)


CANDLE = mini_spec(
    "candlestick", ["d1", "d2"], ["price"], None,
    candlestick={"opening_price": {"d1": 10.0, "d2": 14.0},
                 "closing_price": {"d1": 12.0, "d2": 11.0},
                 "highest_price": {"d1": 13.0, "d2": 15.0},
                 "lowest_price": {"d1": 9.0, "d2": 10.5}})


def test_candlestick_prices():
    objs = objects_of(CANDLE)
    assert _apply(CANDLE, objs[:1], "high_price_of_object").output == 13.0
    assert _apply(CANDLE, objs[1:], "close_price_of_object").output == 11.0
    assert _apply(CANDLE, objs, "max_high_price_object").output == \
        ("(d2, price)",)
    assert _apply(CANDLE, objs, "min_open_price_object").output == \
        ("(d1, price)",)


NODES = mini_spec("node_link", ["n1", "n2", "n3"], ["edge"],
                  {"n1": {"edge": ["n2"]}, "n2": {"edge": ["n3"]},
                   "n3": {"edge": ["n1"]}})


def test_node_link_functions():
    objs = objects_of(NODES)
    assert _apply(NODES, objs[:1], "targets_of_object").output == ("(n2, edge)",)
    assert _apply(NODES, objs[:1], "sources_of_object").output == ("(n3, edge)",)
    assert set(_apply(NODES, objs[:1], "connected_objects").output) == \
        {"(n2, edge)", "(n3, edge)"}
    assert _apply(NODES, objs[:1], "if_object_point_to_A",
                  {"A": "n2"}).output is True
    assert _apply(NODES, objs[:1], "if_object_pointed_by_A",
                  {"A": "n2"}).output is False
    assert _apply(NODES, objs[:1], "if_object_connect_to_A",
                  {"A": "n3"}).output is True
    with pytest.raises(UnknownGroup):
        _apply(NODES, objs[:1], "if_object_point_to_A", {"A": "ghost"})


# --------------------------------------------------------------------------
# value functions

def test_value_function_arithmetic():
    assert apply_value_function([80, 210, 80], "sum_of_values").value == 370.0
    assert apply_value_function([75, 470, 440], "median_of_values").value == 440.0
    assert apply_value_function([180, 175], "A_divided_by_B").value == \
        pytest.approx(1.0285714285714285, abs=1e-15)
    assert apply_value_function([5, 5], "difference_between_A_and_B").value == 0.0
    assert apply_value_function([3, 7], "A_minus_B").value == -4.0
    assert apply_value_function([3], "multiply_constant",
                                {"constant": 10}).value == 30.0
    assert apply_value_function([3, 7], "A_is_larger_than_B").value is False
    assert apply_value_function([3, 7], "A_is_smaller_than_B").value is True


def test_value_function_errors():
    with pytest.raises(DivisionByZero):
        apply_value_function([1, 0], "A_divided_by_B")
    with pytest.raises(ArityViolation):
        apply_value_function([1], "sum_of_values")
    with pytest.raises(ArityViolation):
        apply_value_function([1, 2, 3], "A_minus_B")
    with pytest.raises(UnknownFunction):
        apply_value_function([1], "count_of_objects")


@settings(max_examples=200, deadline=None)
@given(a=st.floats(-1e6, 1e6), b=st.floats(-1e6, 1e6))
def test_arithmetic_self_consistency(a, b):
    diff = apply_value_function([a, b], "A_minus_B").value
    assert diff + b == pytest.approx(a, rel=1e-9, abs=1e-6)
    sym = apply_value_function([a, b], "difference_between_A_and_B").value
    assert sym == apply_value_function([b, a],
                                       "difference_between_A_and_B").value
    assert sym >= 0
    if abs(b) > 1e-6:
        q = apply_value_function([a, b], "A_divided_by_B").value
        assert q * b == pytest.approx(a, rel=1e-9, abs=1e-6)


@settings(max_examples=100, deadline=None)
@given(vals=st.lists(st.floats(-1e5, 1e5), min_size=2, max_size=8))
def test_mean_sum_median_consistency(vals):
    total = apply_value_function(vals, "sum_of_values").value
    mean = apply_value_function(vals, "mean_of_values").value
    assert mean * len(vals) == pytest.approx(total, rel=1e-9, abs=1e-6)
    if len(vals) % 2 == 1:
        med = apply_value_function(vals, "median_of_values").value
        assert med in vals


# --------------------------------------------------------------------------
# chains

def test_build_and_execute_chain():
    chain = build_chain(BAR, [[("all_object_selection", {}),
                               ("max_one_object", {}),
                               ("value_of_objects", {})]])
    assert chain.signature == \
        "all_object_selection/max_one_object/value_of_objects"
    assert chain.length == 3
    assert chain.final_answer.value == 80.0
    assert execute_chain(BAR, chain) == chain.final_answer


def test_incomplete_chain_rejected():
    with pytest.raises(IncompleteChain):
        build_chain(BAR, [[("all_object_selection", {})]])
    with pytest.raises(IncompleteChain):
        build_chain(BAR, [[("group_selection", {"group": "g1"}),
                           ("value_of_objects", {})]])   # values, no fold


def test_joiner_required_for_multiple_sub_chains():
    plans = [[("one_object_selection", {"group": "g1", "legend": "a"}),
              ("value_of_objects", {})],
             [("one_object_selection", {"group": "g2", "legend": "a"}),
              ("value_of_objects", {})]]
    with pytest.raises(IncompleteChain):
        build_chain(BAR, plans, None)
    chain = build_chain(BAR, plans, ("A_minus_B", {}))
    assert chain.final_answer.value == -20.0
    assert chain.length == 5


def test_replay_mismatch_detected():
    chain = build_chain(BAR, [[("all_object_selection", {}),
                               ("count_of_objects", {})]])
    tampered = FunctionChain(
        sub_chains=chain.sub_chains, joiner=None,
        signature=chain.signature, length=chain.length,
        final_answer=TypedAnswer("number", 999.0))
    with pytest.raises(ReplayMismatch):
        execute_chain(BAR, tampered)


def test_classify_question_type():
    count = build_chain(BAR, [[("all_object_selection", {}),
                               ("count_of_objects", {})]])
    assert classify_question_type(count) == "NQA"
    boolean = build_chain(NODES, [[("one_object_selection",
                                    {"group": "n1", "legend": "edge"}),
                                   ("if_object_point_to_A", {"A": "n2"})]])
    assert classify_question_type(boolean) == "Binary"
    text = build_chain(BAR, [[("all_object_selection", {}),
                              ("legend_of_one_object_value",
                               {"value": 60.0})]])
    assert classify_question_type(text) == "Text"


def test_signature_round_trip():
    chain = build_chain(BAR, [[("all_object_selection", {}),
                               ("max_one_object", {}),
                               ("value_of_objects", {})]])
    names = parse_signature(chain.signature)
    assert names == [s.function for s in chain.sub_chains[0]]
    assert chain.length == len(chain.signature.split("/"))
    with pytest.raises(UnknownFunction):
        parse_signature("all_object_selection/ghost_function")


def test_chain_serialization_round_trip():
    chain = build_chain(BAR, [[("one_object_selection",
                                {"group": "g1", "legend": "a"}),
                               ("value_of_objects", {})],
                              [("one_object_selection",
                                {"group": "g2", "legend": "b"}),
                               ("value_of_objects", {})]],
                        ("sum_of_values", {}))
    again = FunctionChain.from_dict(chain.to_dict())
    assert again == chain
    assert execute_chain(BAR, again) == chain.final_answer


def test_unit_propagation():
    pct = mini_spec("bar_multi", ["g1", "g2"], ["a", "b"],
                    {"g1": {"a": 10.0, "b": 20.0},
                     "g2": {"a": 30.0, "b": 40.0}},
                    y_label="Share (%)")
    value = build_chain(pct, [[("one_object_selection",
                               {"group": "g1", "legend": "a"}),
                              ("value_of_objects", {})]])
    assert value.final_answer.unit == "%"
    count = build_chain(pct, [[("all_object_selection", {}),
                               ("count_of_objects", {})]])
    assert count.final_answer.unit is None


def test_desk_examples_execute():
    for name, maker in ALL_EXAMPLES:
        spec, plans, joiner, want, unit = maker()
        chain = build_chain(spec, plans, joiner)
        assert chain.final_answer.value == want, name
        assert chain.final_answer.unit == unit, name
        assert execute_chain(spec, chain) == chain.final_answer


# --------------------------------------------------------------------------
# formatting

def test_format_number():
    assert format_number(370.0) == "370"
    assert format_number(24.0) == "24"
    assert format_number(1200.2) == "1200.2"
    assert format_number(1.0285714285714285) == "1.0285714285714285"
    assert format_number(-3.5) == "-3.5"


def test_typed_answer_rendering():
    assert TypedAnswer("boolean", True).render() == "Yes"
    assert TypedAnswer("boolean", False).render() == "No"
    assert TypedAnswer("number", 24.0, unit="%").render() == "24%"
    assert TypedAnswer("text-list", ("a", "b")).render() == "a, b"
    round_trip = TypedAnswer.from_dict(TypedAnswer("text-list",
                                                   ("a", "b")).to_dict())
    assert round_trip == TypedAnswer("text-list", ("a", "b"))


# --------------------------------------------------------------------------
# discovery

def test_discovery_deterministic(rng):
    spec = BAR
    cfg = DiscoveryConfig(quotas={2: 3, 3: 3, 4: 2, 5: 2, 6: 2})
    first = discover(spec, cfg, random.Random(99))
    second = discover(spec, cfg, random.Random(99))
    assert [c.signature for c in first.chains] == \
        [c.signature for c in second.chains]
    assert [c.final_answer for c in first.chains] == \
        [c.final_answer for c in second.chains]


def test_discovery_rejects_invalid_spec():
    from chartchain.errors import InvalidSpec
    bad = mini_spec("bar_single", ["g"], ["a"], {"g": {"a": "x"}})
    with pytest.raises(InvalidSpec):
        discover(bad, DiscoveryConfig(), random.Random(0))


def test_all_equal_values_exclude_min_max():
    out = discover(TIED, DiscoveryConfig(quotas={2: 5, 3: 5, 4: 5}),
                   random.Random(3))
    for chain in out.chains:
        assert "max_one_object" not in chain.signature
        assert "min_one_object" not in chain.signature


def test_discovered_chains_replay_and_are_deduplicated():
    out = discover(BAR, DiscoveryConfig(quotas={2: 4, 3: 4, 4: 4}),
                   random.Random(5))
    signatures = [c.signature for c in out.chains]
    assert len(signatures) == len(set(signatures))
    for chain in out.chains:
        assert execute_chain(BAR, chain) == chain.final_answer
        assert chain.length == len(chain.signature.split("/"))
