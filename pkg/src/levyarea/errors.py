"""Exception hierarchy.

Every error carries a module-qualified ``code`` so that the command line
front end can report where a failure originated.
"""


class LevyAreaError(Exception):
    """Base class for all library errors."""

    module = "levyarea"

    @property
    def code(self) -> str:
        return f"{self.module}.{type(self).__name__}"


class PreconditionError(LevyAreaError, ValueError):
    """Arguments violate a documented precondition."""


class DomainError(PreconditionError):
    """Argument outside the domain of a function."""


class BranchCutError(DomainError):
    """Principal branch requested on its cut."""

    module = "levyarea.special_functions"


class PoleError(DomainError):
    """Gamma-type function evaluated at a pole."""

    module = "levyarea.special_functions"


class DegenerateParameterError(PreconditionError):
    """Connection formula selected with integer parameter differences."""

    module = "levyarea.special_functions"


class ConvergenceError(LevyAreaError, ArithmeticError):
    """Series or adaptive scheme ran out of budget."""


class ResolutionError(LevyAreaError, ArithmeticError):
    """Refinement check failed to reach the requested tolerance."""

    module = "levyarea.quadrature"


class BudgetError(PreconditionError):
    """Combinatorial size above the supported limit."""

    module = "levyarea.diagrams"


class MissingCumulantError(PreconditionError):
    module = "levyarea.diagrams"


class CholeskyError(LevyAreaError, ArithmeticError):
    module = "levyarea.simulate"


class GridError(PreconditionError):
    module = "levyarea.simulate"


class FitError(LevyAreaError, ArithmeticError):
    module = "levyarea.analysis"


class RangeError(PreconditionError):
    module = "levyarea.analysis"


class ConfigError(PreconditionError):
    module = "levyarea.cli"
