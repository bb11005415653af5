"""Brute-force cross-checks of chain results on many random charts.

Every expected value here is computed directly from the chart's data with
plain Python (sorted/sum/statistics), independently of the chain machinery.
"""

import random
import statistics

import pytest

from chartchain.engine import (
    EngineOptions,
    apply_object_function,
    apply_value_function,
    select_objects,
)
from chartchain.errors import EmptyResult, TieRejected
from chartchain.model import objects_of
from chartchain.registry import lookup
from helpers import random_value_spec

N_SPECS = 1000


def _cells(spec):
    return [(g, l, spec.data_points[g][l])
            for g in spec.groups for l in spec.legends]


def _label(g, l):
    return f"({g}, {l})"


@pytest.fixture(scope="module")
def specs():
    rng = random.Random(20240817)
    return [random_value_spec(rng) for _ in range(N_SPECS)]


def test_min_max_against_sort(specs):
    checked = 0
    for spec in specs:
        cells = _cells(spec)
        by_value = sorted(cells, key=lambda c: c[2])
        objs = objects_of(spec)
        for name, want in (("max_one_object", by_value[-1]),
                           ("min_one_object", by_value[0]),
                           ("second_max_object", by_value[-2]),
                           ("second_min_object", by_value[1])):
            try:
                step = apply_object_function(spec, objs, lookup(name), {})
            except TieRejected:
                values = sorted(c[2] for c in cells)
                # a tie must actually exist at the relevant boundary
                assert len(set(values)) < len(values)
                continue
            assert step.output == (_label(want[0], want[1]),), name
            checked += 1
    assert checked > N_SPECS  # most specs yield at least one clean extreme


def test_filter_and_count_against_comprehension(specs):
    rng = random.Random(7)
    options = EngineOptions(allow_empty_filter=True)
    for spec in specs:
        cells = _cells(spec)
        threshold = rng.choice([c[2] for c in cells])
        objs = objects_of(spec)
        step = apply_object_function(
            spec, objs, lookup("objects_that_larger_than_value"),
            {"value": threshold}, options=options)
        want = tuple(_label(g, l) for g, l, v in cells if v > threshold)
        assert step.output == want
        step2 = apply_object_function(
            spec, objs, lookup("objects_that_smaller_than_value"),
            {"value": threshold}, options=options)
        want2 = tuple(_label(g, l) for g, l, v in cells if v < threshold)
        assert step2.output == want2
        count = apply_object_function(spec, objs, lookup("count_of_objects"),
                                      {})
        assert count.output == float(len(cells))


def test_stats_against_statistics_module(specs):
    for spec in specs:
        values = [v for _, _, v in _cells(spec)]
        if len(values) < 2:
            continue
        assert apply_value_function(values, "sum_of_values").value == \
            pytest.approx(sum(values), rel=1e-12)
        assert apply_value_function(values, "mean_of_values").value == \
            pytest.approx(statistics.fmean(values), rel=1e-12)
        assert apply_value_function(values, "median_of_values").value == \
            pytest.approx(statistics.median(values), rel=1e-12)


def test_pairwise_arithmetic_and_compare(specs):
    rng = random.Random(13)
    for spec in specs:
        values = [v for _, _, v in _cells(spec)]
        a, b = rng.choice(values), rng.choice(values)
        assert apply_value_function([a, b], "A_minus_B").value == a - b
        assert apply_value_function([a, b],
                                    "difference_between_A_and_B").value == \
            abs(a - b)
        assert apply_value_function([a, b], "A_multiply_B").value == \
            pytest.approx(a * b, rel=1e-12)
        if b != 0:
            assert apply_value_function([a, b], "A_divided_by_B").value == \
                pytest.approx(a / b, rel=1e-12)
        assert apply_value_function([a, b], "A_is_larger_than_B").value == \
            (a > b)
        assert apply_value_function([a, b], "A_is_smaller_than_B").value == \
            (a < b)


def test_group_and_legend_slices(specs):
    rng = random.Random(29)
    for spec in specs:
        g = rng.choice(spec.groups)
        objs = select_objects(spec, "group_selection", {"group": g})
        assert [o.value for o in objs] == \
            [spec.data_points[g][l] for l in spec.legends]
        l = rng.choice(spec.legends)
        objs2 = select_objects(spec, "legend_selection", {"legend": l})
        assert [o.value for o in objs2] == \
            [spec.data_points[g][l] for g in spec.groups]


def test_min_max_diff_against_brute_force(specs):
    for spec in specs:
        if spec.legend_num != 2 or spec.group_num < 2:
            continue
        la, lb = spec.legends
        diffs = [abs(spec.data_points[g][la] - spec.data_points[g][lb])
                 for g in spec.groups]
        objs = objects_of(spec)
        for name, want in (
                ("maximum_difference_between_two_group_of_data", max(diffs)),
                ("minimum_difference_between_two_group_of_data", min(diffs))):
            try:
                step = apply_object_function(spec, objs, lookup(name), {})
            except TieRejected:
                assert diffs.count(want) > 1
                continue
            assert step.output == pytest.approx(want, rel=1e-12)


def test_same_value_lookup_against_comprehension(specs):
    rng = random.Random(31)
    hits = 0
    for spec in specs:
        cells = _cells(spec)
        target = rng.choice([v for _, _, v in cells])
        matches = [(g, l) for g, l, v in cells if v == target]
        objs = objects_of(spec)
        try:
            step = apply_object_function(
                spec, objs, lookup("objects_with_same_value"),
                {"value": target})
        except EmptyResult:
            assert len(matches) == 1
            continue
        assert step.output == tuple(_label(g, l) for g, l in matches)
        hits += 1
    assert hits > 0
