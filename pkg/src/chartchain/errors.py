"""Exception hierarchy shared across the package."""


class ChartChainError(Exception):
    """Base class for all package errors."""


# --- chart model ---

class MalformedInput(ChartChainError):
    """Input text is not parseable as a chart record."""


class SchemaMismatch(ChartChainError):
    """A required field for the declared chart type is missing."""


class InvalidSpec(ChartChainError):
    """An operation requires a spec that passes validation."""


# --- registry / engine ---

class UnknownFunction(ChartChainError):
    pass


class UnknownGroup(ChartChainError):
    pass


class UnknownLegend(ChartChainError):
    pass


class UnknownColor(ChartChainError):
    pass


class EmptySelection(ChartChainError):
    """A selection produced no objects; discovery discards the branch."""


class ConditionViolated(ChartChainError):
    """A function's execution conditions do not hold for the state."""


class TieRejected(ChartChainError):
    """A min/max style function hit a tie; branch rejected for unique answers."""


class EmptyResult(ChartChainError):
    """A filter produced an empty set and the configuration forbids it."""


class ArityViolation(ChartChainError):
    pass


class DivisionByZero(ChartChainError):
    pass


class ReplayMismatch(ChartChainError):
    """Replaying a chain produced a different answer than the stored one."""


class IncompleteChain(ChartChainError):
    """The chain does not end in a number, text, or boolean."""


# --- generation / gateway ---

class UnsatisfiableBounds(ChartChainError):
    pass


class GatewayError(ChartChainError):
    """The completion endpoint failed after the configured retries."""


class BudgetExceeded(ChartChainError):
    pass


class FixtureMissing(ChartChainError):
    pass


class UnrepairableOutput(ChartChainError):
    """LLM output could not be parsed/repaired within the retry budget."""


class UnparseableOutput(ChartChainError):
    """A synthesis reply did not follow the mandated output markers."""


# --- pipeline / evaluation ---

class UnknownRecordId(ChartChainError):
    pass


class MissingRecord(ChartChainError):
    pass


class QuotaInfeasible(ChartChainError):
    pass
