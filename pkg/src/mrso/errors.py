"""Exception types shared across the package."""


class MrsoError(Exception):
    """Base class for every input or validation error raised by mrso."""


class ExpressionSyntaxError(MrsoError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at offset {position}")
        self.position = position


class InvalidExpression(MrsoError, ValueError):
    """Structurally well-formed expression that breaks a k-expression rule."""


class InstanceError(MrsoError, ValueError):
    """Malformed instance data (alphabet, bonds, score tables)."""


class MalformedLabeling(MrsoError, ValueError):
    pass


class ExpressionMismatch(MrsoError):
    """The expression does not define the instance's implied structure graph."""


class HeterogeneousEta(MrsoError):
    """An eta node joins codon pairs whose bond patterns differ."""


class BudgetExceeded(MrsoError):
    pass


class NotCograph(MrsoError):
    pass


class NotTree(MrsoError):
    pass


class DegreeTooHigh(MrsoError):
    pass


class WitnessError(AssertionError):
    """Internal consistency failure: a reconstructed witness does not re-score."""
