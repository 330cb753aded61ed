"""Exception taxonomy shared by all aoikit modules.

The split matters for the CLI exit codes: bad user input (ParameterError)
is a usage problem, an argument outside the mathematically admissible
region (DomainError) is a domain problem, and a failure inside a solver
or the simulator (SolverError and friends) is an engine problem.
"""


class AoikitError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(AoikitError, ValueError):
    """Invalid input values (rates, shapes, non-binary matrices, ...)."""


class DomainError(AoikitError, ValueError):
    """Argument outside the admissible region (s >= s0, pole proximity)."""


class SolverError(AoikitError, RuntimeError):
    """A linear system could not be solved reliably."""


class ConditioningError(SolverError):
    """System solvable in principle but numerically near-singular."""


class ModelViolationError(SolverError):
    """Solution violates a structural requirement (e.g. negativity)."""
