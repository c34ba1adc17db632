"""Exception hierarchy.

Every failure carries a short machine-readable ``kind`` (the class name) and an
optional ``detail`` dict that the CLI copies verbatim into its JSON report.
"""


class AglerError(Exception):
    exit_code = 2

    def __init__(self, message, **detail):
        super().__init__(message)
        self.detail = detail

    def to_dict(self):
        out = {"error": type(self).__name__, "message": str(self)}
        out.update({k: v for k, v in self.detail.items() if _jsonable(v)})
        return out


def _jsonable(v):
    return isinstance(v, (str, int, float, bool, list, dict, type(None)))


# poly
class DegreeExceeded(AglerError):
    pass


class ShapeMismatch(AglerError):
    pass


class NotSquare(AglerError):
    pass


class ZeroDenominator(AglerError):
    pass


# inner
class NotInner(AglerError):
    pass


class UnstableDenominator(AglerError):
    pass


class PoleHit(AglerError):
    pass


class SingularityHit(AglerError):
    pass


# subspaces / hilbert
class NumericalRankAmbiguity(AglerError):
    exit_code = 3


class ConditionalReport(AglerError):
    exit_code = 3


class QuadratureNonConvergent(AglerError):
    exit_code = 3


class NotNested(AglerError):
    pass


class NotAglerPair(AglerError):
    pass


# realization
class GramMismatch(AglerError):
    pass


class RankDeficiency(AglerError):
    pass


class NearSingularResolvent(AglerError):
    pass


class ValidationFailed(AglerError):
    pass


# restriction
class ExceptionalSlice(AglerError):
    exit_code = 3


class WindingAmbiguous(AglerError):
    exit_code = 3


# trivar
class DegreeViolation(AglerError):
    pass


class InfeasibleSplit(AglerError):
    exit_code = 3


class FactorizationStall(AglerError):
    exit_code = 3


class InexactDivision(AglerError):
    pass


class FinalIdentityFailed(AglerError):
    pass


# cli
class SchemaError(AglerError):
    exit_code = 4
