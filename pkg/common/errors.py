"""
Domain errors shared by every service.

Each error carries a ``details`` dict so the CLI can emit a machine-readable
error object (see ``common.events.create_error_event``).
"""

from typing import Any, Dict, Optional


class MxQueueError(Exception):
    """Base class for all domain errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    @property
    def error_type(self) -> str:
        return type(self).__name__

    def to_dict(self) -> Dict[str, Any]:
        return {"errorType": self.error_type, "errorMessage": self.message, "details": self.details}


class InvalidModelError(MxQueueError):
    pass


class InvalidDistribution(InvalidModelError):
    pass


class SingularMatrix(InvalidModelError):
    pass


class NonConvergence(MxQueueError):
    pass


class StabilityViolation(MxQueueError):
    pass


class RoucheCountMismatch(MxQueueError):
    pass


class PoleOnAxis(MxQueueError):
    pass


class DualityViolation(MxQueueError):
    def __init__(self, u: float, gap: float, details: Optional[Dict[str, Any]] = None):
        info = {"u": float(u), "gap": float(gap)}
        info.update(details or {})
        super().__init__(f"duality violated at u={u:.6g}: gap={gap:.3e}", info)
        self.u = u
        self.gap = gap


class OrderingViolation(MxQueueError):
    def __init__(self, relation: str, t: float, gap: float, details: Optional[Dict[str, Any]] = None):
        info = {"relation": relation, "t": float(t), "gap": float(gap)}
        info.update(details or {})
        super().__init__(f"ordering {relation} violated at t={t:.6g}: gap={gap:.3e}", info)
        self.relation = relation
        self.t = t
        self.gap = gap
