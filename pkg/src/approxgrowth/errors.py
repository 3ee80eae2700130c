"""Exception hierarchy shared by every module."""


class ApproxGrowthError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ApproxGrowthError, ValueError):
    """Operands live in different groups, or an encoding is not a group element."""


class ElementParseError(ApproxGrowthError, ValueError):
    """A literal does not conform to the element grammar of its family."""

    def __init__(self, message, text, position):
        self.text = text
        self.position = position
        super().__init__(f"{message} at position {position} in {text!r}")


class PreconditionError(ApproxGrowthError, ValueError):
    """An operation was called with inputs outside its contract."""


class ResourceError(ApproxGrowthError, MemoryError):
    """A computed set would exceed the configured element budget."""

    def __init__(self, message, budget, projected=None):
        self.budget = budget
        self.projected = projected
        super().__init__(f"{message} (budget {budget} elements)")


class SoundnessError(ApproxGrowthError, AssertionError):
    """A proven inequality or inclusion failed at runtime.

    Every check that raises this is a theorem under the operation's
    preconditions, so hitting it means a bug, never a counterexample.
    """


class ConfigError(ApproxGrowthError, ValueError):
    """A corpus or fuzz configuration is malformed."""

    def __init__(self, message, line=None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
