"""Exception hierarchy shared by every module of the engine."""


class EngineError(Exception):
    """Base class for all engine failures."""


class DimensionError(EngineError, ValueError):
    """Operand shapes are incompatible."""


class DomainError(EngineError, ValueError):
    """An argument lies outside the domain of the operation."""


class ValidationError(EngineError, ValueError):
    """A model failed validation. ``report`` lists every violation."""

    def __init__(self, report):
        self.report = list(report)
        super().__init__("; ".join(self.report) or "invalid model")


class ConfigurationError(EngineError, ValueError):
    """Solver configuration is inconsistent with the model."""


class NumericalError(EngineError, ArithmeticError):
    """A numerical kernel failed (e.g. eigensolver did not converge)."""


class IntegrityError(EngineError, ArithmeticError):
    """A computed object violates a structural guarantee of CPTP dynamics."""


class ExtractionError(EngineError, ArithmeticError):
    """No physical steady state could be certified."""


class ContractError(EngineError, ValueError):
    """Inputs do not satisfy a documented precondition."""


class DegenerateSteadyStateError(EngineError, ArithmeticError):
    """The closed-form two-level steady state is not unique."""
