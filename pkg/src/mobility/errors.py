"""Exception hierarchy shared across the package."""


class MobilityError(Exception):
    """Base class for all package errors."""


class InvariantViolation(MobilityError, ValueError):
    """A value object was constructed outside its legal range."""


class DomainError(MobilityError, ValueError):
    """A derivative or transform was requested where it is unbounded."""


class InvalidBudget(MobilityError, ValueError):
    pass


class NonConvergence(MobilityError):
    """Raised when callers insist on a converged solve and none was found."""


class EmptyFeasibleSet(MobilityError):
    """No device combination satisfies the regime's requirements."""


class Infeasible(MobilityError):
    pass


class MixedSign(MobilityError):
    """A mobility path is neither uniformly nondecreasing nor decreasing."""


class Unbounded(MobilityError):
    pass


class ScenarioError(MobilityError):
    """Scenario file failed validation; ``diagnostics`` lists (path, message)."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = [f"{path}: {msg}" for path, msg in self.diagnostics]
        super().__init__("invalid scenario:\n  " + "\n  ".join(lines))
