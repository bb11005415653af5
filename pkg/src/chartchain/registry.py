"""The atomic-function catalog.

The catalog is loaded from ``assets/function_catalog.tsv`` (one row per
function: selections, object functions, value functions) so the full
inventory stays auditable and extensible without touching code.  Execution
conditions use a closed token vocabulary documented at the top of that file,
which keeps applicability decidable without running the candidate function.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import UnknownFunction
from .model import ChartObject, ChartSpec

KINDS = ("selection", "object_function", "value_function")
TAXONOMIES = (
    "value", "text_information", "count", "min_max", "arithmetical_operation",
    "compare", "stat", "filter", "if_match_condition", "exclude_objects",
    "position", "min_max_diff", "min_max_diff_arg",
)
PARAM_KINDS = (
    "value-threshold", "constant", "group-name", "legend-name", "color", "target-node",
)


@dataclass(frozen=True)
class Condition:
    """One execution-condition token, e.g. ``objects>1`` or ``type_in=box``."""

    kind: str
    op: str = ""           # "=" or ">" for count conditions
    number: int = 0
    names: tuple[str, ...] = ()

    def holds(self, state: "ChainState") -> bool:
        if self.kind in ("objects", "values", "groups", "legends", "sel_legends"):
            count = {
                "objects": state.object_count,
                "values": state.value_count,
                "groups": state.spec.group_num,
                "legends": state.spec.legend_num,
                "sel_legends": state.selected_legend_count,
            }[self.kind]
            if count is None:
                return False
            return count == self.number if self.op == "=" else count > self.number
        if self.kind == "type_in":
            return state.spec.chart_type in self.names
        if self.kind == "type_not_in":
            return state.spec.chart_type not in self.names
        if self.kind == "not_in_chain":
            return all(name not in state.history for name in self.names)
        if self.kind == "any_in_chain":
            return any(name in state.history for name in self.names)
        raise ValueError(f"unknown condition kind {self.kind!r}")


@dataclass(frozen=True)
class FunctionDef:
    name: str
    kind: str
    taxonomy: str | None     # None for selection methods
    input_kind: str          # chart | objects | values
    output_kind: str         # objects | number | text | boolean
    param_schema: tuple[tuple[str, str], ...]
    conditions: tuple[Condition, ...]
    description: str

    def applicable_to(self, state: "ChainState") -> bool:
        return all(c.holds(state) for c in self.conditions)


@dataclass
class ChainState:
    """What condition checks can see: the spec, the current set, and the
    names of functions already in the chain."""

    spec: ChartSpec
    objects: list[ChartObject] | None = None
    values: list[float] | None = None
    history: tuple[str, ...] = ()

    @property
    def object_count(self) -> int | None:
        return None if self.objects is None else len(self.objects)

    @property
    def value_count(self) -> int | None:
        return None if self.values is None else len(self.values)

    @property
    def selected_legend_count(self) -> int | None:
        if self.objects is None:
            return None
        return len({o.legend for o in self.objects})


def _parse_condition(token: str) -> Condition:
    for kind in ("objects", "values", "groups", "legends", "sel_legends"):
        for op in ("=", ">"):
            prefix = kind + op
            if token.startswith(prefix) and token[len(prefix):].isdigit():
                return Condition(kind=kind, op=op, number=int(token[len(prefix):]))
    for kind in ("type_in", "type_not_in", "not_in_chain", "any_in_chain"):
        prefix = kind + "="
        if token.startswith(prefix):
            return Condition(kind=kind, names=tuple(token[len(prefix):].split("|")))
    raise ValueError(f"unparseable condition token {token!r}")


def _parse_row(line: str) -> FunctionDef:
    name, kind, taxonomy, input_kind, output_kind, params, conditions, desc = \
        line.split("\t")
    if kind not in KINDS:
        raise ValueError(f"{name}: bad kind {kind!r}")
    if taxonomy == "-":
        tax = None
    elif taxonomy in TAXONOMIES:
        tax = taxonomy
    else:
        raise ValueError(f"{name}: bad taxonomy {taxonomy!r}")
    schema = []
    if params != "-":
        for part in params.split(","):
            pname, pkind = part.split(":")
            if pkind not in PARAM_KINDS:
                raise ValueError(f"{name}: bad param kind {pkind!r}")
            schema.append((pname, pkind))
    conds = ()
    if conditions != "-":
        conds = tuple(_parse_condition(tok) for tok in conditions.split(";"))
    return FunctionDef(
        name=name, kind=kind, taxonomy=tax, input_kind=input_kind,
        output_kind=output_kind, param_schema=tuple(schema),
        conditions=conds, description=desc.strip(),
    )


@lru_cache(maxsize=1)
def catalog() -> tuple[FunctionDef, ...]:
    """The complete static catalog, in file order."""
    text = resources.files("chartchain.assets").joinpath("function_catalog.tsv").read_text()
    defs: list[FunctionDef] = []
    seen: set[str] = set()
    for line in text.splitlines():
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        fdef = _parse_row(line)
        if fdef.name in seen:
            raise ValueError(f"duplicate function name {fdef.name!r}")
        seen.add(fdef.name)
        defs.append(fdef)
    return tuple(defs)


@lru_cache(maxsize=1)
def _by_name() -> dict[str, FunctionDef]:
    return {d.name: d for d in catalog()}


def lookup(name: str) -> FunctionDef:
    try:
        return _by_name()[name]
    except KeyError:
        raise UnknownFunction(name) from None


def taxonomy_of(name: str) -> str | None:
    return lookup(name).taxonomy


def applicable(kind: str, state: ChainState) -> list[FunctionDef]:
    """The defs of the requested kind whose every condition holds, in
    catalog order."""
    return [d for d in catalog() if d.kind == kind and d.applicable_to(state)]


def selections() -> list[FunctionDef]:
    return [d for d in catalog() if d.kind == "selection"]


def object_functions() -> list[FunctionDef]:
    return [d for d in catalog() if d.kind == "object_function"]


def value_functions() -> list[FunctionDef]:
    return [d for d in catalog() if d.kind == "value_function"]
