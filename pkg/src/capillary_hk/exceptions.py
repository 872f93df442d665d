"""Exception types shared across the package."""


class DomainError(ValueError):
    """A point lies outside the domain where a metric or gauge is defined."""


class ZeroVectorError(ValueError):
    """A gauge or Legendre map was evaluated on the zero vector."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class StepUnderflowError(RuntimeError):
    """Step halving in an integrator fell below the smallest allowed step."""


class DomainExitError(RuntimeError):
    """An integrated path left the admissible domain.

    ``exit_time`` is the last parameter value known to be inside.
    """

    def __init__(self, message, exit_time):
        super().__init__(message)
        self.exit_time = exit_time


class HypothesisError(ValueError):
    """A surface fails one of the named hypotheses of an inequality.

    ``reason`` is one of ``"mean-convexity"``, ``"angle"``, ``"domain"``,
    ``"embeddedness"``, ``"support"`` or ``"format"``.
    """

    def __init__(self, reason, message):
        super().__init__(f"{reason}: {message}")
        self.reason = reason


class FlowExhaustedError(RuntimeError):
    """Every node of a flowing surface has been excised."""
