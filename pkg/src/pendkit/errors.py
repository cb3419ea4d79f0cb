"""Exception hierarchy. Every error raised by the package derives from PendkitError."""


class PendkitError(Exception):
    pass


class ParameterError(PendkitError, ValueError):
    """An argument violates an operation's precondition (p <= 1, r < r_min, ...)."""


class DomainError(ParameterError):
    pass


class ExtrapolationError(DomainError):
    """A tabulated model was evaluated outside its sample range."""


class NumericError(PendkitError, ArithmeticError):
    pass


class DiscretizationError(NumericError):
    pass


class GeometryError(NumericError):
    pass


class ConvergenceError(NumericError):
    """Iterative solver gave up; ``residual`` and ``best`` carry the last state."""

    def __init__(self, msg, residual=float("nan"), best=None):
        super().__init__(msg)
        self.residual = residual
        self.best = best


class NumericInconsistencyError(NumericError):
    pass


class BoundInapplicableError(PendkitError):
    """The divergence-field bound needs inf delta_r > 0 on the domain."""


class ContractError(PendkitError, ValueError):
    pass


class TheoremViolationError(PendkitError):
    """Finite Sobolev probe, parabolic end and infinite volume all at once."""


class ParseError(PendkitError, ValueError):
    def __init__(self, msg, line=None):
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
        self.line = line
