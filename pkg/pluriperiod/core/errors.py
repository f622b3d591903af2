
from typing import Any, Dict, Optional


class PluriperiodError(Exception):

    def __init__(self, message: str, detail: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.detail = detail or {}

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"error": type(self).__name__, "message": self.message}
        if self.detail:
            payload["detail"] = self.detail
        return payload


class NearPole(PluriperiodError):
    """cz + d underflowed: the point sits numerically on the limit set."""


class DegreeOverflow(PluriperiodError):
    pass


class IllConditioned(PluriperiodError):
    pass


class ConstructionFailure(PluriperiodError):
    pass


class BudgetExceeded(PluriperiodError):
    pass


class UnsupportedGroup(PluriperiodError):
    pass


class NotReduced(PluriperiodError):
    pass


class ToleranceNotMet(PluriperiodError):
    pass


class DomainViolation(PluriperiodError):
    pass


class NotPolynomial(PluriperiodError):
    pass


class SignConventionMismatch(PluriperiodError):
    pass


class RankAmbiguous(PluriperiodError):
    pass


class BranchTrackingFailure(PluriperiodError):
    pass


class ConfigError(PluriperiodError):
    pass
