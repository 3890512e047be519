"""
Error hierarchy shared by every module.

Each error carries a stable machine-readable ``code`` (emitted by the CLI as
JSON on stderr) and a human ``detail`` message, the same split HTTP errors use.
"""

from typing import Any, Dict, List, Optional


class DriverseError(ValueError):
    """Base class for all domain errors raised by the library."""

    code: str = "driverse_error"

    def __init__(self, detail: str, errors: Optional[List[Dict[str, Any]]] = None) -> None:
        super().__init__(detail)
        self.detail = detail
        self.errors = errors or []

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {"error": self.code, "detail": self.detail}
        if self.errors:
            payload["errors"] = self.errors
        return payload


class ParameterError(DriverseError):
    code = "parameter_error"


class DegenerateDepthError(DriverseError):
    """Point lies on the camera plane (|Z_c| < 1e-9)."""

    code = "degenerate_depth"


class TrajectoryTooShortError(DriverseError):
    code = "trajectory_too_short"


class NoSegmentsError(DriverseError):
    code = "no_segments"


class NoVisibleAnchorsError(DriverseError):
    code = "no_visible_anchors"


class WindowUnderrunError(DriverseError):
    code = "window_underrun"


class NoDynamicRegionsError(DriverseError):
    code = "no_dynamic_regions"


class DegenerateWeightsError(DriverseError):
    code = "degenerate_weights"


class DimensionError(DriverseError):
    code = "dimension_error"


class AlignmentInputError(DriverseError):
    """Length mismatch, too few frames or zero-variance estimate."""

    code = "alignment_input_error"


class ManifestValidationError(DriverseError):
    """Aggregated schema violations; ``errors`` lists every failing field path."""

    code = "manifest_validation_error"


class ReportWriteError(DriverseError):
    code = "report_write_error"


class GradientCheckError(DriverseError):
    """Analytic and finite-difference gradients disagree beyond tolerance."""

    code = "gradient_check_failed"
