from __future__ import annotations


class GsanError(Exception):
    """Base class for every error raised by the library.

    Each subclass carries a stable ``code`` that ends up in CLI output and in
    JSON reports, so callers can match on it without importing the class.
    """

    code = "gsan_error"

    def __init__(self, message: str = "") -> None:
        super().__init__(message or self.code)
        self.message = message or self.code

    def to_dict(self) -> dict:
        return {"error": {"type": self.code, "message": self.message}}


class InvalidSimplex(GsanError):
    code = "invalid_simplex"


class OrderExceeded(GsanError):
    code = "order_exceeded"


class OrderOutOfRange(GsanError, IndexError):
    code = "order_out_of_range"


class EmptyOrder(GsanError):
    code = "empty_order"


class NotSymmetric(GsanError):
    code = "not_symmetric"


class InvalidStepSize(GsanError, ValueError):
    code = "invalid_step_size"


class ShapeError(GsanError, ValueError):
    code = "shape_error"


class MissingProjector(GsanError):
    code = "missing_projector"


class SupportViolation(GsanError):
    code = "support_violation"


class NonFiniteLogit(GsanError, FloatingPointError):
    code = "non_finite_logit"


class MissingFace(GsanError, KeyError):
    code = "missing_face"

    def __str__(self) -> str:
        return self.message


class NotScalar(GsanError):
    code = "not_scalar"


class NonDeterministic(GsanError):
    code = "non_deterministic"


class NonFiniteGradient(GsanError, FloatingPointError):
    code = "non_finite_gradient"


class EmptyMask(GsanError):
    code = "empty_mask"


class DegenerateGeometry(GsanError):
    code = "degenerate_geometry"


class InsufficientCandidates(GsanError):
    code = "insufficient_candidates"


class IncompatibleCheckpoint(GsanError):
    code = "incompatible_checkpoint"


class ConfigError(GsanError, ValueError):
    code = "invalid_config"


class ArchiveError(GsanError):
    code = "invalid_archive"
