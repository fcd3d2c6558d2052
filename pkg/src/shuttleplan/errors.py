"""Exception hierarchy shared across the engine and the service layer."""

from __future__ import annotations


class PlanningError(Exception):
    """Base class for all engine-level failures."""


class ValidationError(PlanningError):
    """Input violates a documented invariant (maps to HTTP 422)."""


class NotFoundError(PlanningError):
    """A referenced entity does not exist (maps to HTTP 404)."""


class ConflictError(PlanningError):
    """State conflict: stale revision or a full candidate list (HTTP 409)."""
