"""Discovery and execution of function chains over a chart.

A chain starts with a selection step, applies object functions while the
running payload is still a set of objects, and finishes when the payload
becomes a number, text, or boolean.  Sub-chains whose final payload is a
single number can be joined by a value function into a longer combined
chain.  Every emitted chain replays deterministically to the same answer.
"""

from __future__ import annotations

import itertools
import math
import random
import statistics
from dataclasses import dataclass, field, replace

from . import registry
from .errors import (
    ArityViolation,
    ConditionViolated,
    DivisionByZero,
    EmptyResult,
    EmptySelection,
    IncompleteChain,
    InvalidSpec,
    ReplayMismatch,
    TieRejected,
    UnknownColor,
    UnknownFunction,
    UnknownGroup,
    UnknownLegend,
)
from .model import ChartObject, ChartSpec, objects_of, validate_spec
from .registry import ChainState, FunctionDef, lookup

#: Constant pool for multiply_constant bindings.
MULTIPLY_CONSTANTS = (2, 3, 0.5, 10)


def format_number(x: float) -> str:
    """Full-precision rendering without trailing-zero padding."""
    if isinstance(x, bool):
        return "Yes" if x else "No"
    if float(x) == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


@dataclass(frozen=True)
class TypedAnswer:
    """A chain's final answer: number, text, boolean, or a list of texts."""

    kind: str                      # number | text | boolean | text-list
    value: float | str | bool | tuple[str, ...]
    unit: str | None = None

    def render(self) -> str:
        if self.kind == "number":
            text = format_number(self.value)
            return text + self.unit if self.unit else text
        if self.kind == "boolean":
            return "Yes" if self.value else "No"
        if self.kind == "text-list":
            return ", ".join(str(v) for v in self.value)
        return str(self.value)

    def to_dict(self) -> dict:
        value = list(self.value) if self.kind == "text-list" else self.value
        return {"kind": self.kind, "value": value, "unit": self.unit}

    @classmethod
    def from_dict(cls, d: dict) -> "TypedAnswer":
        value = d["value"]
        if d["kind"] == "text-list":
            value = tuple(value)
        return cls(kind=d["kind"], value=value, unit=d.get("unit"))


@dataclass(frozen=True)
class ChainStep:
    function: str
    params: tuple[tuple[str, object], ...]   # sorted (name, value) pairs
    input_digest: str
    output_kind: str                         # objects | values | number | text | text-list | boolean
    output: tuple | float | str | bool

    @property
    def params_dict(self) -> dict:
        return dict(self.params)

    def to_dict(self) -> dict:
        out = self.output
        if isinstance(out, tuple):
            out = list(out)
        return {"function": self.function, "params": dict(self.params),
                "input": self.input_digest, "output_kind": self.output_kind,
                "output": out}

    @classmethod
    def from_dict(cls, d: dict) -> "ChainStep":
        out = d["output"]
        if isinstance(out, list):
            out = tuple(out)
        return cls(function=d["function"],
                   params=tuple(sorted(d["params"].items())),
                   input_digest=d["input"], output_kind=d["output_kind"],
                   output=out)


@dataclass(frozen=True)
class FunctionChain:
    sub_chains: tuple[tuple[ChainStep, ...], ...]
    joiner: ChainStep | None
    signature: str
    length: int
    final_answer: TypedAnswer

    def step_names(self) -> list[str]:
        names = [s.function for sub in self.sub_chains for s in sub]
        if self.joiner is not None:
            names.append(self.joiner.function)
        return names

    def taxonomies(self) -> list[str]:
        out = []
        for name in self.step_names():
            tax = registry.taxonomy_of(name)
            if tax is not None and tax not in out:
                out.append(tax)
        return out

    def to_dict(self) -> dict:
        return {
            "signature": self.signature,
            "length": self.length,
            "sub_chains": [[s.to_dict() for s in sub] for sub in self.sub_chains],
            "joiner": self.joiner.to_dict() if self.joiner else None,
            "final_answer": self.final_answer.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FunctionChain":
        return cls(
            sub_chains=tuple(tuple(ChainStep.from_dict(s) for s in sub)
                             for sub in d["sub_chains"]),
            joiner=ChainStep.from_dict(d["joiner"]) if d["joiner"] else None,
            signature=d["signature"], length=d["length"],
            final_answer=TypedAnswer.from_dict(d["final_answer"]),
        )


@dataclass
class EngineOptions:
    tie_rejection: bool = True
    allow_empty_filter: bool = False


@dataclass
class DiscoveryConfig:
    max_depth: int = 4                       # object-function steps per sub-chain, incl. selection
    quotas: dict[int, int] | None = None     # per-length targets
    combine_probability: float = 0.5
    max_sub_chains: int = 3                  # 2 or 3
    chains_per_chart: int = 20
    tie_rejection: bool = True
    allow_empty_filter: bool = False
    max_partials: int = 300                  # frontier cap per depth level
    combo_attempts: int = 150

    def __post_init__(self):
        if self.max_sub_chains not in (2, 3):
            raise ValueError("max_sub_chains must be 2 or 3")
        if self.quotas is not None and any(v < 0 for v in self.quotas.values()):
            raise ValueError("quotas must be non-negative")


# --------------------------------------------------------------------------
# payload helpers

def _labels(objs: list[ChartObject]) -> tuple[str, ...]:
    return tuple(o.label for o in objs)


def _digest(payload_kind: str, payload) -> str:
    if payload_kind == "objects":
        return "; ".join(_labels(payload))
    if payload_kind == "values":
        return ", ".join(format_number(v) for v in payload)
    if payload_kind == "number":
        return format_number(payload)
    return str(payload)


def _vals(objs: list[ChartObject]) -> list[float]:
    return [o.value for o in objs]


def _topk(objs: list[ChartObject], key, k: int, largest: bool,
          options: EngineOptions) -> list[ChartObject]:
    if len(objs) <= k:
        raise ConditionViolated(f"need more than {k} objects")
    order = sorted(objs, key=key, reverse=largest)
    if options.tie_rejection and key(order[k - 1]) == key(order[k]):
        raise TieRejected("boundary tie in min/max selection")
    chosen = set(id(o) for o in order[:k])
    return [o for o in objs if id(o) in chosen]   # chart order


def _nth(objs: list[ChartObject], key, rank: int, largest: bool,
         options: EngineOptions) -> ChartObject:
    """The element of the given rank (0-based) with uniqueness checks."""
    if len(objs) <= rank:
        raise ConditionViolated("not enough objects")
    order = sorted(objs, key=key, reverse=largest)
    if options.tie_rejection:
        lo = max(0, rank - 1)
        hi = min(len(order) - 1, rank + 1)
        for i in range(lo, hi):
            if key(order[i]) == key(order[i + 1]):
                raise TieRejected("tie around the requested rank")
    return order[rank]


def _distinct_in_order(items: list[str], order: list[str]) -> list[str]:
    present = set(items)
    return [x for x in order if x in present]


def _text_or_list(items: list[str]):
    if len(items) == 1:
        return "text", items[0]
    return "text-list", tuple(items)


def unit_of(spec: ChartSpec, final_def: FunctionDef) -> str | None:
    """Percent unit propagated from the y label for value-like answers."""
    if "%" not in spec.y_label:
        return None
    if final_def.output_kind != "number":
        return None
    if final_def.taxonomy in ("value", "stat", "min_max_diff"):
        return "%"
    if final_def.name in ("A_minus_B", "difference_between_A_and_B", "median_of_values"):
        return "%"
    return None


# --------------------------------------------------------------------------
# selection

def select_objects(spec: ChartSpec, method: str, params: dict) -> list[ChartObject]:
    """Apply one of the six selection methods to the chart."""
    fdef = lookup(method)
    if fdef.kind != "selection":
        raise UnknownFunction(f"{method} is not a selection method")
    objs = objects_of(spec)
    if method == "all_object_selection":
        selected = objs
    elif method == "one_object_selection":
        _require_group(spec, objs, params["group"])
        _require_legend(spec, objs, params["legend"])
        selected = [o for o in objs
                    if o.group == params["group"] and o.legend == params["legend"]]
    elif method == "group_selection":
        _require_group(spec, objs, params["group"])
        selected = [o for o in objs if o.group == params["group"]]
    elif method == "legend_selection":
        _require_legend(spec, objs, params["legend"])
        selected = [o for o in objs if o.legend == params["legend"]]
    elif method == "color_selection":
        _require_color(spec, params["color"])
        selected = [o for o in objs if o.color == params["color"]]
    elif method == "color_group_selection":
        _require_group(spec, objs, params["group"])
        _require_color(spec, params["color"])
        selected = [o for o in objs
                    if o.group == params["group"] and o.color == params["color"]]
    else:
        raise UnknownFunction(method)
    if not selected:
        raise EmptySelection(f"{method} with {params} selected nothing")
    return selected


def _require_group(spec, objs, name):
    if name not in {o.group for o in objs}:
        raise UnknownGroup(name)


def _require_legend(spec, objs, name):
    if name not in {o.legend for o in objs}:
        raise UnknownLegend(name)


def _require_color(spec, name):
    if name not in spec.colors:
        raise UnknownColor(name)


# --------------------------------------------------------------------------
# object functions

def _box_key(attr: str):
    return lambda o: o.attrs[attr]


_BOX_MINMAX = {
    "max_median_object": ("median", True), "min_median_object": ("median", False),
    "max_maximum_object_without_outliers": ("maximum_values", True),
    "min_maximum_object_without_outliers": ("maximum_values", False),
    "max_minimum_object_without_outliers": ("minimum_values", True),
    "min_minimum_object_without_outliers": ("minimum_values", False),
    "max_first_quartile_object": ("first_quartile", True),
    "min_first_quartile_object": ("first_quartile", False),
    "max_third_quartile_object": ("third_quartile", True),
    "min_third_quartile_object": ("third_quartile", False),
}
_BOX_VALUES = {
    "median_of_objects": "median",
    "first_quartile_of_objects": "first_quartile",
    "third_quartile_of_objects": "third_quartile",
    "maximum_value_without_outliers": "maximum_values",
    "minimum_value_without_outliers": "minimum_values",
}
_CANDLE_VALUES = {
    "high_price_of_object": "highest_price", "low_price_of_object": "lowest_price",
    "open_price_of_object": "opening_price", "close_price_of_object": "closing_price",
}
_CANDLE_MINMAX = {
    "max_high_price_object": ("highest_price", True),
    "min_high_price_object": ("highest_price", False),
    "max_low_price_object": ("lowest_price", True),
    "min_low_price_object": ("lowest_price", False),
    "max_open_price_object": ("opening_price", True),
    "min_open_price_object": ("opening_price", False),
    "max_close_price_object": ("closing_price", True),
    "min_close_price_object": ("closing_price", False),
}


def _numbers_payload(values: list[float]):
    if len(values) == 1:
        return "number", float(values[0])
    return "values", tuple(float(v) for v in values)


def _group_index(spec: ChartSpec, group: str) -> int:
    order = spec.legends if spec.chart_type == "box" else spec.groups
    return order.index(group)


def _k_extreme_groups(spec, objs, k, leftmost, options):
    groups = sorted({o.group for o in objs}, key=lambda g: _group_index(spec, g))
    if len(groups) <= k:
        raise ConditionViolated("not enough distinct groups")
    wanted = set(groups[:k] if leftmost else groups[-k:])
    return [o for o in objs if o.group in wanted]


def _stacked_corner(spec, objs, rightmost, upper, options):
    groups = sorted({o.group for o in objs}, key=lambda g: _group_index(spec, g))
    corner_group = groups[-1] if rightmost else groups[0]
    column = [o for o in objs if o.group == corner_group]
    if len(column) == 1:
        return column[0]
    return _nth(column, lambda o: o.value, 0, largest=upper, options=options)


def _line_by_mean(objs, largest, options):
    by_legend: dict[str, list[ChartObject]] = {}
    for o in objs:
        by_legend.setdefault(o.legend, []).append(o)
    if len(by_legend) < 2:
        raise ConditionViolated("need at least two lines")
    means = {leg: statistics.fmean(_vals(group)) for leg, group in by_legend.items()}
    best = max(means.values()) if largest else min(means.values())
    winners = [leg for leg, m in means.items() if m == best]
    if options.tie_rejection and len(winners) > 1:
        raise TieRejected("two lines share the extreme mean")
    return by_legend[winners[0]]


def _legend_pair_diffs(spec, objs):
    legends = _distinct_in_order([o.legend for o in objs], spec.legends)
    if len(legends) != 2:
        raise ConditionViolated("needs exactly two legends selected")
    cells = {(o.group, o.legend): o.value for o in objs}
    diffs = []
    for g in spec.groups:
        a, b = cells.get((g, legends[0])), cells.get((g, legends[1]))
        if a is not None and b is not None:
            diffs.append((g, abs(a - b)))
    if len(diffs) < 2:
        raise ConditionViolated("needs at least two paired groups")
    return diffs


def apply_object_function(spec: ChartSpec, objs: list[ChartObject],
                          fdef: FunctionDef, params: dict,
                          options: EngineOptions | None = None,
                          history: tuple[str, ...] = ()) -> ChainStep:
    """Execute one object function on the current set and record the step.

    The function's conditions are re-checked against the state; a violation
    raises ConditionViolated rather than producing a wrong answer.
    """
    options = options or EngineOptions()
    state = ChainState(spec=spec, objects=objs, history=history)
    if not fdef.applicable_to(state):
        raise ConditionViolated(f"{fdef.name} conditions do not hold")
    kind, payload = _run_object_function(spec, objs, fdef.name, params, options)
    if kind == "objects" and not payload:
        if not (options.allow_empty_filter and fdef.taxonomy == "filter"):
            raise EmptyResult(fdef.name)
    return ChainStep(
        function=fdef.name, params=tuple(sorted(params.items())),
        input_digest=_digest("objects", objs),
        output_kind=kind,
        output=_labels(payload) if kind == "objects" else payload,
    )


def _run_object_function(spec, objs, name, params, options):
    # min/max over plain values
    if name in ("max_one_object", "min_one_object"):
        obj = _nth(objs, lambda o: o.value, 0, name.startswith("max"), options)
        return "objects", [obj]
    if name in ("max_two_objects", "min_two_objects"):
        return "objects", _topk(objs, lambda o: o.value, 2, name.startswith("max"), options)
    if name in ("max_three_objects", "min_three_objects"):
        return "objects", _topk(objs, lambda o: o.value, 3, name.startswith("max"), options)
    if name in ("second_max_object", "second_min_object"):
        obj = _nth(objs, lambda o: o.value, 1, name.startswith("second_max"), options)
        return "objects", [obj]

    if name == "value_of_objects":
        return _numbers_payload(_vals(objs))

    # text information
    if name == "color_of_objects":
        return "text", objs[0].color
    if name == "groups_of_object":
        return _text_or_list(_distinct_in_order(
            [o.group for o in objs],
            spec.legends if spec.chart_type == "box" else spec.groups))
    if name in ("legends_of_object", "legend_of_objects"):
        return _text_or_list(_distinct_in_order([o.legend for o in objs], spec.legends))
    if name in ("legend_of_one_object_value", "group_of_one_object_value"):
        matches = [o for o in objs if o.value == params["value"]]
        if len(matches) != 1:
            raise TieRejected("value does not identify a unique object")
        return "text", (matches[0].legend if name.startswith("legend")
                        else matches[0].group)

    # single-object predicates
    if name == "if_object_that_equal_to_value":
        return "boolean", objs[0].value == params["value"]
    if name == "if_object_that_larger_than_value":
        return "boolean", objs[0].value > params["value"]
    if name == "if_object_that_smaller_than_value":
        return "boolean", objs[0].value < params["value"]

    # filters
    if name == "objects_that_larger_than_value":
        kept = [o for o in objs if o.value > params["value"]]
        if not kept and not options.allow_empty_filter:
            raise EmptyResult(name)
        return "objects", kept
    if name == "objects_that_smaller_than_value":
        kept = [o for o in objs if o.value < params["value"]]
        if not kept and not options.allow_empty_filter:
            raise EmptyResult(name)
        return "objects", kept
    if name == "objects_with_same_value":
        kept = [o for o in objs if o.value == params["value"]]
        if len(kept) < 2:
            raise EmptyResult("no group of equal-valued objects")
        return "objects", kept

    # counting
    if name == "count_of_objects":
        return "number", float(len(objs))
    if name == "num_of_legends":
        return "number", float(len({o.legend for o in objs}))
    if name == "num_of_colors":
        return "number", float(len({o.color for o in objs}))
    if name == "num_of_groups":
        return "number", float(len({o.group for o in objs}))

    # exclusion
    if name == "exclude_objects_with_groups":
        if params["group"] not in {o.group for o in objs}:
            raise UnknownGroup(params["group"])
        kept = [o for o in objs if o.group != params["group"]]
        if not kept:
            raise EmptyResult(name)
        return "objects", kept
    if name == "exclude_objects_with_legends":
        if params["legend"] not in {o.legend for o in objs}:
            raise UnknownLegend(params["legend"])
        kept = [o for o in objs if o.legend != params["legend"]]
        if not kept:
            raise EmptyResult(name)
        return "objects", kept

    # paired-legend differences
    if name in ("maximum_difference_between_two_group_of_data",
                "minimum_difference_between_two_group_of_data"):
        diffs = _legend_pair_diffs(spec, objs)
        pick = max if name.startswith("max") else min
        return "number", float(pick(d for _, d in diffs))
    if name in ("the_group_that_has_maximum_difference",
                "the_group_that_has_minimum_difference"):
        diffs = _legend_pair_diffs(spec, objs)
        best = (max if "maximum" in name else min)(d for _, d in diffs)
        winners = [g for g, d in diffs if d == best]
        if options.tie_rejection and len(winners) > 1:
            raise TieRejected("two groups share the extreme difference")
        return "text", winners[0]

    # trend / sameness predicates
    if name in ("if_objects_consistently_increase", "if_objects_consistently_decrease"):
        ordered = sorted(objs, key=lambda o: _group_index(spec, o.group))
        vals = _vals(ordered)
        pairs = zip(vals, vals[1:])
        if name.endswith("increase"):
            return "boolean", all(a < b for a, b in pairs)
        return "boolean", all(a > b for a, b in pairs)
    if name == "if_same_values":
        return "boolean", len({o.value for o in objs}) == 1
    if name == "if_same_colors":
        return "boolean", len({o.color for o in objs}) == 1
    if name == "if_same_groups":
        return "boolean", len({o.group for o in objs}) == 1
    if name == "if_same_legends":
        return "boolean", len({o.legend for o in objs}) == 1

    # positions on bars and lines
    if name in ("upper_one_bar", "bottom_one_bar"):
        obj = _nth(objs, lambda o: o.value, 0, name.startswith("upper"), options)
        return "objects", [obj]
    if name in ("upper_two_bars", "bottom_two_bars"):
        return "objects", _topk(objs, lambda o: o.value, 2, name.startswith("upper"), options)
    if name in ("upper_three_bars", "bottom_three_bars"):
        return "objects", _topk(objs, lambda o: o.value, 3, name.startswith("upper"), options)
    if name in ("leftmost_object", "rightmost_object"):
        return "objects", _k_extreme_groups(spec, objs, 1, name.startswith("left"), options)
    if name in ("left_two_objects", "right_two_objects"):
        return "objects", _k_extreme_groups(spec, objs, 2, name.startswith("left"), options)
    if name in ("left_three_objects", "right_three_objects"):
        return "objects", _k_extreme_groups(spec, objs, 3, name.startswith("left"), options)
    if name in ("upper_rightmost_object", "upper_leftmost_object",
                "lower_rightmost_object", "lower_leftmost_object"):
        obj = _stacked_corner(spec, objs, rightmost=name.endswith("rightmost_object"),
                              upper=name.startswith("upper"), options=options)
        return "objects", [obj]
    if name in ("upper_line_of_objects", "lower_line_of_objects"):
        return "objects", _line_by_mean(objs, name.startswith("upper"), options)

    # box charts
    if name in _BOX_VALUES:
        return _numbers_payload([o.attrs[_BOX_VALUES[name]] for o in objs])
    if name == "interquartile_range_of_box":
        o = objs[0]
        return "number", float(o.attrs["third_quartile"] - o.attrs["first_quartile"])
    if name == "outlier_values_of_objects":
        outliers = list(objs[0].attrs["outlier_values"])
        if not outliers:
            raise EmptyResult("box has no outliers")
        return _numbers_payload(outliers)
    if name in _BOX_MINMAX:
        attr, largest = _BOX_MINMAX[name]
        return "objects", [_nth(objs, _box_key(attr), 0, largest, options)]
    if name == "num_of_outliers":
        return "number", float(len(objs[0].attrs["outlier_values"]))
    if name in ("leftmost_box", "rightmost_box"):
        return "objects", _k_extreme_groups(spec, objs, 1, name.startswith("left"), options)
    if name in ("upper_box", "bottom_box"):
        return "objects", [_nth(objs, _box_key("median"), 0, name.startswith("upper"), options)]

    # candlestick charts
    if name in _CANDLE_VALUES:
        return "number", float(objs[0].attrs[_CANDLE_VALUES[name]])
    if name in _CANDLE_MINMAX:
        attr, largest = _CANDLE_MINMAX[name]
        return "objects", [_nth(objs, _box_key(attr), 0, largest, options)]

    # node-link charts
    if name == "targets_of_object":
        targets = set(objs[0].adjacency or ())
        return "objects", [o for o in objects_of(spec) if o.group in targets]
    if name == "sources_of_object":
        me = objs[0].group
        return "objects", [o for o in objects_of(spec)
                           if o.adjacency and me in o.adjacency]
    if name == "connected_objects":
        me = objs[0].group
        targets = set(objs[0].adjacency or ())
        return "objects", [o for o in objects_of(spec)
                           if o.group != me
                           and (o.group in targets or (o.adjacency and me in o.adjacency))]
    if name == "if_object_point_to_A":
        _require_node(spec, params["A"])
        return "boolean", params["A"] in (objs[0].adjacency or ())
    if name == "if_object_pointed_by_A":
        node = _node(spec, params["A"])
        return "boolean", objs[0].group in (node.adjacency or ())
    if name == "if_object_connect_to_A":
        node = _node(spec, params["A"])
        return "boolean", (params["A"] in (objs[0].adjacency or ())
                           or objs[0].group in (node.adjacency or ()))

    raise UnknownFunction(name)


def _require_node(spec, name):
    if name not in spec.groups:
        raise UnknownGroup(name)


def _node(spec, name):
    _require_node(spec, name)
    return next(o for o in objects_of(spec) if o.group == name)


# --------------------------------------------------------------------------
# value functions

def apply_value_function(values: list[float], fn: str | FunctionDef,
                         params: dict | None = None) -> TypedAnswer:
    """Execute one of the value functions on a list of numbers."""
    fdef = fn if isinstance(fn, FunctionDef) else lookup(fn)
    params = params or {}
    state = ChainState(spec=_DUMMY_SPEC, values=list(values))
    for cond in fdef.conditions:
        if cond.kind == "values" and not cond.holds(state):
            raise ArityViolation(f"{fdef.name} arity condition fails for "
                                 f"{len(values)} values")
    name = fdef.name
    if name == "sum_of_values":
        return TypedAnswer("number", float(sum(values)))
    if name == "mean_of_values":
        return TypedAnswer("number", float(sum(values)) / len(values))
    if name == "median_of_values":
        return TypedAnswer("number", float(statistics.median(values)))
    if name == "A_minus_B":
        return TypedAnswer("number", float(values[0] - values[1]))
    if name == "difference_between_A_and_B":
        return TypedAnswer("number", float(abs(values[0] - values[1])))
    if name == "A_multiply_B":
        return TypedAnswer("number", float(values[0] * values[1]))
    if name == "A_divided_by_B":
        if values[1] == 0:
            raise DivisionByZero("A_divided_by_B with zero divisor")
        return TypedAnswer("number", float(values[0] / values[1]))
    if name == "multiply_constant":
        return TypedAnswer("number", float(values[0] * params["constant"]))
    if name == "A_is_larger_than_B":
        return TypedAnswer("boolean", values[0] > values[1])
    if name == "A_is_smaller_than_B":
        return TypedAnswer("boolean", values[0] < values[1])
    raise UnknownFunction(name)


# minimal placeholder so value-function arity checks can reuse Condition.holds
_DUMMY_SPEC = ChartSpec(
    title="", x_label="", y_label="", chart_type="bar_single",
    legend_num=1, legends=["v"], group_num=1, groups=["g"],
    colors=["red"], legend_colors={"v": "red"}, data_points={"g": {"v": 0.0}})


# --------------------------------------------------------------------------
# chain construction, execution, signatures

ChainPlan = tuple[list[list[tuple[str, dict]]], tuple[str, dict] | None]
"""A plan: per-sub-chain lists of (function name, params), plus optional joiner."""


def plan_of(chain: FunctionChain) -> ChainPlan:
    subs = [[(s.function, s.params_dict) for s in sub] for sub in chain.sub_chains]
    joiner = (chain.joiner.function, chain.joiner.params_dict) if chain.joiner else None
    return subs, joiner


def build_chain(spec: ChartSpec, sub_plans: list[list[tuple[str, dict]]],
                joiner: tuple[str, dict] | None = None,
                options: EngineOptions | None = None) -> FunctionChain:
    """Execute a plan and assemble the resulting chain with its answer."""
    options = options or EngineOptions()
    sub_chains: list[tuple[ChainStep, ...]] = []
    sub_outputs = []
    history: list[str] = []
    for plan in sub_plans:
        steps: list[ChainStep] = []
        sel_name, sel_params = plan[0]
        objs = select_objects(spec, sel_name, sel_params)
        history.append(sel_name)
        steps.append(ChainStep(
            function=sel_name, params=tuple(sorted(sel_params.items())),
            input_digest="chart", output_kind="objects", output=_labels(objs)))
        kind, payload = "objects", objs
        for name, params in plan[1:]:
            fdef = lookup(name)
            if fdef.kind == "object_function":
                if kind != "objects":
                    raise IncompleteChain(f"{name} needs objects input")
                step = apply_object_function(spec, payload, fdef, params,
                                             options, tuple(history))
                kind = step.output_kind
                payload = (_resolve_objects(spec, step.output)
                           if kind == "objects" else step.output)
                steps.append(step)
            elif fdef.kind == "value_function":
                values = _as_values(kind, payload)
                answer = apply_value_function(values, fdef, params)
                steps.append(ChainStep(
                    function=name, params=tuple(sorted(params.items())),
                    input_digest=_digest("values", values),
                    output_kind=answer.kind, output=answer.value))
                kind, payload = answer.kind, answer.value
            else:
                raise IncompleteChain(f"{name} cannot appear mid-chain")
            history.append(name)
        if kind in ("objects", "values"):
            raise IncompleteChain("sub-chain does not end in number/text/boolean")
        sub_chains.append(tuple(steps))
        sub_outputs.append((kind, payload))

    joiner_step = None
    final_def = lookup(sub_chains[-1][-1].function)
    if joiner is not None:
        if any(kind != "number" for kind, _ in sub_outputs):
            raise IncompleteChain("joined sub-chains must all yield numbers")
        values = [payload for _, payload in sub_outputs]
        name, params = joiner
        final_def = lookup(name)
        answer = apply_value_function(values, final_def, params)
        joiner_step = ChainStep(
            function=name, params=tuple(sorted(params.items())),
            input_digest=_digest("values", values),
            output_kind=answer.kind, output=answer.value)
        kind, payload = answer.kind, answer.value
    elif len(sub_chains) > 1:
        raise IncompleteChain("multiple sub-chains require a joiner")
    else:
        kind, payload = sub_outputs[0]

    if kind == "text-list":
        final = TypedAnswer("text-list", payload)
    elif kind == "number":
        final = TypedAnswer("number", payload, unit=unit_of(spec, final_def))
    else:
        final = TypedAnswer(kind, payload)
    names = [s.function for sub in sub_chains for s in sub]
    if joiner_step:
        names.append(joiner_step.function)
    return FunctionChain(
        sub_chains=tuple(sub_chains), joiner=joiner_step,
        signature="/".join(names), length=len(names), final_answer=final)


def _resolve_objects(spec: ChartSpec, labels: tuple[str, ...]) -> list[ChartObject]:
    by_label = {o.label: o for o in objects_of(spec)}
    return [by_label[lbl] for lbl in labels]


def _as_values(kind, payload) -> list[float]:
    if kind == "values":
        return list(payload)
    if kind == "number":
        return [payload]
    raise IncompleteChain("value function needs numeric input")


def execute_chain(spec: ChartSpec, chain: FunctionChain,
                  options: EngineOptions | None = None) -> TypedAnswer:
    """Replay every step of a stored chain and check it reproduces itself."""
    subs, joiner = plan_of(chain)
    rebuilt = build_chain(spec, subs, joiner, options)
    if rebuilt.final_answer != chain.final_answer:
        raise ReplayMismatch(
            f"stored {chain.final_answer} != recomputed {rebuilt.final_answer}")
    for stored_sub, new_sub in zip(chain.sub_chains, rebuilt.sub_chains):
        for stored, new in zip(stored_sub, new_sub):
            if stored.output != new.output:
                raise ReplayMismatch(f"step {stored.function} output changed")
    return rebuilt.final_answer


def classify_question_type(chain: FunctionChain) -> str:
    """Binary for boolean answers, NQA for numbers, Text otherwise."""
    kind = chain.final_answer.kind
    if kind == "boolean":
        return "Binary"
    if kind == "number":
        return "NQA"
    if kind in ("text", "text-list"):
        return "Text"
    raise IncompleteChain(f"unclassifiable answer kind {kind!r}")


def chain_signature(chain: FunctionChain) -> str:
    return "/".join(chain.step_names())


def parse_signature(text: str) -> list[str]:
    """Split a slash-joined signature, validating every name."""
    names = [n for n in text.split("/") if n]
    if not names:
        raise UnknownFunction("empty signature")
    for name in names:
        lookup(name)
    return names


# --------------------------------------------------------------------------
# discovery

def _round_between(lo: float, hi: float) -> float:
    """A display-friendly threshold strictly between two values."""
    mid = (lo + hi) / 2
    for digits in range(0, 12):
        cand = round(mid, digits)
        if lo < cand < hi:
            return cand
    return mid


def _threshold_candidates(values: list[float], limit: int = 2) -> list[float]:
    distinct = sorted(set(values))
    if len(distinct) < 2:
        return []
    mids = [_round_between(a, b) for a, b in zip(distinct, distinct[1:])]
    if len(mids) <= limit:
        return mids
    # spread the picks across the range
    step = len(mids) / limit
    return [mids[int(i * step)] for i in range(limit)]


def _param_bindings(spec: ChartSpec, fdef: FunctionDef, objs: list[ChartObject],
                    rng: random.Random) -> list[dict]:
    """Enumerate a bounded, deterministic set of parameter bindings."""
    if not fdef.param_schema:
        return [{}]
    name = fdef.name
    if name in ("objects_that_larger_than_value", "objects_that_smaller_than_value"):
        return [{"value": t} for t in _threshold_candidates(_vals(objs))]
    if name == "objects_with_same_value":
        counts: dict[float, int] = {}
        for v in _vals(objs):
            counts[v] = counts.get(v, 0) + 1
        return [{"value": v} for v in sorted(counts) if counts[v] >= 2][:2]
    if name in ("legend_of_one_object_value", "group_of_one_object_value"):
        counts = {}
        for v in _vals(objs):
            counts[v] = counts.get(v, 0) + 1
        uniques = [v for v in sorted(counts) if counts[v] == 1]
        return [{"value": v} for v in uniques[:2]]
    if name == "if_object_that_equal_to_value":
        own = objs[0].value
        others = sorted({o.value for o in objects_of(spec)
                         if o.value is not None and o.value != own})
        out = [{"value": own}]
        if others:
            out.append({"value": others[0]})
        return out
    if name in ("if_object_that_larger_than_value", "if_object_that_smaller_than_value"):
        own = objs[0].value
        chart_vals = sorted({o.value for o in objects_of(spec) if o.value is not None})
        out = []
        below = [v for v in chart_vals if v < own]
        above = [v for v in chart_vals if v > own]
        if below:
            out.append({"value": _round_between(below[-1], own)})
        if above:
            out.append({"value": _round_between(own, above[0])})
        return out
    if name == "exclude_objects_with_groups":
        groups = _distinct_in_order(
            [o.group for o in objs],
            spec.legends if spec.chart_type == "box" else spec.groups)
        return [{"group": g} for g in groups[:3]]
    if name == "exclude_objects_with_legends":
        legends = _distinct_in_order([o.legend for o in objs], spec.legends)
        return [{"legend": l} for l in legends[:3]]
    if name in ("if_object_point_to_A", "if_object_pointed_by_A", "if_object_connect_to_A"):
        me = objs[0].group
        adjacency = set(objs[0].adjacency or ())
        inside = [g for g in spec.groups if g in adjacency]
        outside = [g for g in spec.groups if g != me and g not in adjacency]
        out = []
        if inside:
            out.append({"A": inside[0]})
        if outside:
            out.append({"A": outside[0]})
        return out
    if name == "multiply_constant":
        return [{"constant": rng.choice(MULTIPLY_CONSTANTS)}]
    raise UnknownFunction(f"no binding rule for {name}")


def _selection_plans(spec: ChartSpec) -> list[tuple[str, dict]]:
    objs = objects_of(spec)
    state = ChainState(spec=spec)
    plans: list[tuple[str, dict]] = []
    groups = list(dict.fromkeys(o.group for o in objs))
    legends = list(dict.fromkeys(o.legend for o in objs))
    colors = list(dict.fromkeys(o.color for o in objs))
    for fdef in registry.applicable("selection", state):
        if fdef.name == "one_object_selection":
            plans.extend(("one_object_selection", {"group": g, "legend": l})
                         for g in groups for l in legends)
        elif fdef.name == "group_selection":
            plans.extend(("group_selection", {"group": g}) for g in groups)
        elif fdef.name == "legend_selection":
            plans.extend(("legend_selection", {"legend": l}) for l in legends)
        elif fdef.name == "color_selection":
            plans.extend(("color_selection", {"color": c}) for c in colors)
        elif fdef.name == "color_group_selection":
            plans.extend(("color_group_selection", {"group": g, "color": c})
                         for g in groups for c in colors)
        elif fdef.name == "all_object_selection":
            plans.append(("all_object_selection", {}))
    return plans


@dataclass
class _Partial:
    plan: list[tuple[str, dict]]
    steps: list[ChainStep]
    kind: str
    payload: object
    history: tuple[str, ...]


@dataclass
class DiscoveryOutput:
    chains: list[FunctionChain]
    shortfall: dict[int, int] = field(default_factory=dict)


def discover(spec: ChartSpec, cfg: DiscoveryConfig,
             rng: random.Random) -> DiscoveryOutput:
    """Explore the function pools breadth-first and sample chains.

    All enumeration is order-stable, so a fixed rng seed reproduces the
    exact same chain list.
    """
    if not validate_spec(spec).ok:
        raise InvalidSpec("discovery requires a valid spec")
    options = EngineOptions(tie_rejection=cfg.tie_rejection,
                            allow_empty_filter=cfg.allow_empty_filter)

    frontier: list[_Partial] = []
    complete: list[_Partial] = []
    for sel_name, sel_params in _selection_plans(spec):
        try:
            objs = select_objects(spec, sel_name, sel_params)
        except EmptySelection:
            continue
        sel_step = ChainStep(
            function=sel_name, params=tuple(sorted(sel_params.items())),
            input_digest="chart", output_kind="objects", output=_labels(objs))
        frontier.append(_Partial(plan=[(sel_name, dict(sel_params))],
                                 steps=[sel_step],
                                 kind="objects", payload=objs,
                                 history=(sel_name,)))

    depth = 1
    while frontier and depth < cfg.max_depth:
        nxt: list[_Partial] = []
        for node in frontier:
            state = ChainState(spec=spec, objects=node.payload, history=node.history)
            for fdef in registry.applicable("object_function", state):
                try:
                    bindings = _param_bindings(spec, fdef, node.payload, rng)
                except Exception:
                    continue
                for params in bindings:
                    try:
                        step = apply_object_function(
                            spec, node.payload, fdef, params, options, node.history)
                    except (TieRejected, EmptyResult, ConditionViolated,
                            EmptySelection, UnknownGroup, UnknownLegend):
                        continue
                    child = _Partial(
                        plan=node.plan + [(fdef.name, dict(params))],
                        steps=node.steps + [step],
                        kind=step.output_kind,
                        payload=(_resolve_objects(spec, step.output)
                                 if step.output_kind == "objects" else step.output),
                        history=node.history + (fdef.name,))
                    if child.kind == "objects":
                        nxt.append(child)
                    elif child.kind == "values":
                        _expand_values(child, complete, cfg)
                    else:
                        complete.append(child)
        if len(nxt) > cfg.max_partials:
            nxt = rng.sample(nxt, cfg.max_partials)
        frontier = nxt
        depth += 1

    singles = [_single_chain(spec, node) for node in complete]

    numeric = [c for c in singles if c.final_answer.kind == "number"
               and c.joiner is None
               and not any(lookup(s.function).kind == "value_function"
                           for s in c.sub_chains[0])]
    combined = _combine(spec, numeric, cfg, rng, options)

    seen: set[str] = set()
    candidates: list[FunctionChain] = []
    for chain in singles + combined:
        if chain.signature not in seen:
            seen.add(chain.signature)
            candidates.append(chain)

    by_length: dict[int, list[FunctionChain]] = {}
    for chain in candidates:
        by_length.setdefault(chain.length, []).append(chain)

    out: list[FunctionChain] = []
    shortfall: dict[int, int] = {}
    if cfg.quotas:
        for length in sorted(cfg.quotas):
            want = cfg.quotas[length]
            pool = by_length.get(length, [])
            if len(pool) <= want:
                out.extend(pool)
                if len(pool) < want:
                    shortfall[length] = want - len(pool)
            else:
                out.extend(rng.sample(pool, want))
    else:
        if len(candidates) <= cfg.chains_per_chart:
            out = list(candidates)
        else:
            out = rng.sample(candidates, cfg.chains_per_chart)
    return DiscoveryOutput(chains=out, shortfall=shortfall)


def _single_chain(spec: ChartSpec, node: _Partial) -> FunctionChain:
    """Assemble a complete sub-chain partial into a FunctionChain without
    re-executing its steps."""
    final_step = node.steps[-1]
    final_def = lookup(final_step.function)
    if node.kind == "number":
        answer = TypedAnswer("number", node.payload,
                             unit=unit_of(spec, final_def))
    elif node.kind == "text-list":
        answer = TypedAnswer("text-list", tuple(node.payload))
    else:
        answer = TypedAnswer(node.kind, node.payload)
    names = [s.function for s in node.steps]
    return FunctionChain(
        sub_chains=(tuple(node.steps),), joiner=None,
        signature="/".join(names), length=len(names), final_answer=answer)


def _expand_values(node: _Partial, complete: list[_Partial],
                   cfg: DiscoveryConfig) -> None:
    """A values payload must be folded by a value function to complete."""
    values = list(node.payload)
    state = ChainState(spec=_DUMMY_SPEC, values=values)
    for fdef in registry.catalog():
        if fdef.kind != "value_function" or fdef.param_schema:
            continue
        if not all(c.holds(replace_state(state)) for c in fdef.conditions
                   if c.kind == "values"):
            continue
        try:
            answer = apply_value_function(values, fdef)
        except (ArityViolation, DivisionByZero):
            continue
        step = ChainStep(
            function=fdef.name, params=(),
            input_digest=_digest("values", values),
            output_kind=answer.kind, output=answer.value)
        complete.append(_Partial(
            plan=node.plan + [(fdef.name, {})],
            steps=node.steps + [step],
            kind=answer.kind, payload=answer.value,
            history=node.history + (fdef.name,)))


def replace_state(state: ChainState) -> ChainState:
    return state


_JOINERS_2 = ("A_minus_B", "difference_between_A_and_B", "A_multiply_B",
              "A_divided_by_B", "A_is_larger_than_B", "A_is_smaller_than_B",
              "sum_of_values", "mean_of_values")
_JOINERS_3 = ("sum_of_values", "mean_of_values", "median_of_values")


def _combine(spec, numeric, cfg, rng, options) -> list[FunctionChain]:
    """Join 2-3 numeric sub-chains with a value function.

    Candidate sub-chain tuples are drawn per total-length target so every
    combined length the quotas ask for gets attempts, not just the lengths
    that dominate the pool.
    """
    if len(numeric) < 2:
        return []
    by_len: dict[int, list[int]] = {}
    for i, chain in enumerate(numeric):
        by_len.setdefault(chain.length, []).append(i)
    lengths = sorted(by_len)
    targets = (sorted(cfg.quotas) if cfg.quotas
               else range(2 * lengths[0] + 1, 2 * lengths[-1] + 2))
    per_target = max(4, cfg.combo_attempts // max(1, len(list(targets))))
    out: list[FunctionChain] = []
    for total in targets:
        want = total - 1        # step budget left for the sub-chains
        partitions: list[tuple[int, ...]] = []
        for la in lengths:
            if want - la in by_len and (la, want - la) and la <= want - la:
                partitions.append((la, want - la))
        if cfg.max_sub_chains >= 3:
            for la in lengths:
                for lb in lengths:
                    lc = want - la - lb
                    if la <= lb <= lc and lc in by_len:
                        partitions.append((la, lb, lc))
        made = 0
        attempts = 0
        while partitions and made < per_target and attempts < 4 * per_target:
            attempts += 1
            parts = partitions[attempts % len(partitions)]
            picks: list[int] = []
            ok = True
            for size in parts:
                pool = [i for i in by_len[size] if i not in picks]
                if not pool:
                    ok = False
                    break
                picks.append(rng.choice(pool))
            if not ok:
                continue
            joiner_name = rng.choice(_JOINERS_2 if len(parts) == 2 else _JOINERS_3)
            sub_plans = [plan_of(numeric[i])[0][0] for i in picks]
            try:
                out.append(build_chain(spec, sub_plans, (joiner_name, {}),
                                       options))
                made += 1
            except (DivisionByZero, ArityViolation, IncompleteChain,
                    TieRejected, EmptyResult, ConditionViolated):
                continue
    return out


def discover_chains(spec: ChartSpec, cfg: DiscoveryConfig,
                    rng: random.Random) -> list[FunctionChain]:
    """Condition-valid chains over the chart (see :func:`discover`)."""
    return discover(spec, cfg, rng).chains
