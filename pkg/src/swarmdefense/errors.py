"""Shared exception types."""


class CoincidentPointError(RuntimeError):
    """Two interacting points are closer than the guard radius.

    Pairwise force and damage-gradient evaluations divide by distance;
    below the guard radius the result would be numerically meaningless,
    so we fail hard instead of clamping (clamped forces corrupt
    gradients silently).
    """


class SimulationError(RuntimeError):
    """Forward or backward integration failed; message carries step context."""


class ConfigError(ValueError):
    """A scenario/optimization config failed validation; message names the field."""
