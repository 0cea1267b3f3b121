"""Exception hierarchy shared by all modules."""


class CRFlatError(Exception):
    """Base class for every error raised by this package."""


# -- jet kernel ---------------------------------------------------------------

class JetError(CRFlatError, ArithmeticError):
    """Arithmetic on a jet is undefined at the seed point.

    ``position`` is filled in by the expression evaluator with the offset of
    the AST node that triggered the failure (``None`` otherwise).
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position

    def __str__(self):
        msg = super().__str__()
        if self.position is not None:
            msg = f"{msg} (at position {self.position})"
        return msg


class DivisionBySingularJet(JetError):
    pass


class BranchCutViolation(JetError):
    pass


class PairingViolated(CRFlatError, ValueError):
    pass


class OrderExceeded(CRFlatError, ValueError):
    pass


# -- expressions --------------------------------------------------------------

class ExprError(CRFlatError, ValueError):
    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position

    def __str__(self):
        msg = super().__str__()
        if self.position is not None:
            msg = f"{msg} (at position {self.position})"
        return msg


class ExprSyntaxError(ExprError):
    pass


class UnknownVariable(ExprError):
    pass


class UnknownFunction(ExprError):
    pass


class DomainMix(ExprError):
    pass


# -- invariants ---------------------------------------------------------------

class InvariantError(CRFlatError):
    """Invariants are undefined at a point.

    ``report`` carries whatever was computed before the failure, so callers
    can still record predicates and residuals.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class HessianDegenerate(InvariantError):
    pass


class TwoDegenerate(InvariantError):
    pass


class JSingular(InvariantError):
    pass


class RealityViolated(InvariantError):
    pass


class NonPositiveR(CRFlatError, ValueError):
    pass


# -- profiles and ODE families ------------------------------------------------

class ProfileViolation(CRFlatError, ValueError):
    def __init__(self, condition, at=None):
        msg = condition if at is None else f"{condition} at v={at!r}"
        super().__init__(msg)
        self.condition = condition
        self.at = at


class NewtonDiverged(CRFlatError, ArithmeticError):
    pass


class JacobianSingular(CRFlatError, ArithmeticError):
    pass


class QuadratureUnreliable(CRFlatError, ArithmeticError):
    pass


class DomainGuard(CRFlatError, ValueError):
    pass


# -- catalog ------------------------------------------------------------------

class ParamOutOfRange(CRFlatError, ValueError):
    pass


class UnknownFamily(CRFlatError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown family"
