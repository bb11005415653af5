"""Function catalog structure and condition evaluation."""

import pytest

from chartchain.errors import UnknownFunction
from chartchain.model import objects_of
from chartchain.registry import (
    ChainState,
    applicable,
    catalog,
    lookup,
    selections,
    taxonomy_of,
    value_functions,
)
from helpers import mini_spec


def _state(spec, n_objects=None, history=()):
    objs = objects_of(spec)
    if n_objects is not None:
        objs = objs[:n_objects]
    return ChainState(spec=spec, objects=objs, history=history)


BAR = mini_spec("bar_multi", ["g1", "g2", "g3"], ["a", "b"],
                {"g1": {"a": 1.0, "b": 2.0}, "g2": {"a": 3.0, "b": 4.0},
                 "g3": {"a": 5.0, "b": 6.0}})
HEATMAP = mini_spec("heatmap", ["g1", "g2"], ["a", "b"],
                    {"g1": {"a": 1.0, "b": 2.0}, "g2": {"a": 3.0, "b": 4.0}})


def test_catalog_is_stable_and_unique():
    first = catalog()
    second = catalog()
    assert first == second
    names = [d.name for d in first]
    assert len(names) == len(set(names))


def test_exactly_six_selection_methods():
    names = {d.name for d in selections()}
    assert names == {"one_object_selection", "group_selection",
                     "legend_selection", "color_selection",
                     "color_group_selection", "all_object_selection"}


def test_selection_io_kinds():
    for d in selections():
        assert d.input_kind == "chart"
        assert d.output_kind == "objects"


def test_value_functions_by_arity():
    two = {d.name for d in value_functions()
           if any(c.kind == "values" and c.op == "=" and c.number == 2
                  for c in d.conditions)}
    assert {"A_minus_B", "difference_between_A_and_B", "A_multiply_B",
            "A_divided_by_B", "A_is_larger_than_B",
            "A_is_smaller_than_B"} <= two
    more_than_one = {d.name for d in value_functions()
                     if any(c.kind == "values" and c.op == ">" and c.number == 1
                            for c in d.conditions)}
    assert {"sum_of_values", "mean_of_values"} <= more_than_one


def test_value_functions_input_kind():
    for d in value_functions():
        assert d.input_kind == "values"


def test_color_of_objects_needs_single_object():
    state = _state(BAR)                        # 6 objects
    names = {d.name for d in applicable("object_function", state)}
    assert "color_of_objects" not in names
    state1 = _state(BAR, n_objects=1)
    names1 = {d.name for d in applicable("object_function", state1)}
    assert "color_of_objects" in names1


def test_color_of_objects_excluded_on_heatmap():
    state = _state(HEATMAP, n_objects=1)
    names = {d.name for d in applicable("object_function", state)}
    assert "color_of_objects" not in names


def test_history_exclusion():
    state = _state(BAR, n_objects=1,
                   history=("one_object_selection",))
    names = {d.name for d in applicable("object_function", state)}
    assert "groups_of_object" not in names
    state2 = _state(BAR, n_objects=1, history=("group_selection",))
    names2 = {d.name for d in applicable("object_function", state2)}
    assert "groups_of_object" in names2


def test_applicable_preserves_catalog_order():
    state = _state(BAR)
    defs = applicable("object_function", state)
    order = [d.name for d in catalog() if d in defs]
    assert [d.name for d in defs] == order


def test_taxonomy_of():
    assert taxonomy_of("value_of_objects") == "value"
    assert taxonomy_of("objects_that_larger_than_value") == "filter"
    assert taxonomy_of("if_object_connect_to_A") == "if_match_condition"
    assert taxonomy_of("count_of_objects") == "count"
    assert taxonomy_of("sum_of_values") == "stat"
    with pytest.raises(UnknownFunction):
        taxonomy_of("not_a_function")


def test_position_functions_carry_type_conditions():
    for name in ("leftmost_object", "upper_one_bar", "upper_line_of_objects",
                 "upper_rightmost_object"):
        fdef = lookup(name)
        assert any(c.kind == "type_in" for c in fdef.conditions), name


def test_min_max_diff_requires_two_selected_legends():
    fdef = lookup("maximum_difference_between_two_group_of_data")
    assert any(c.kind == "sel_legends" and c.number == 2
               for c in fdef.conditions)
    assert any(c.kind == "groups" and c.op == ">" for c in fdef.conditions)


def test_box_functions_restricted_to_box_charts():
    state = _state(BAR, n_objects=1)
    names = {d.name for d in applicable("object_function", state)}
    assert "median_of_objects" not in names
    assert "interquartile_range_of_box" not in names
