"""System-pointer coupling angle."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidArgumentError

HALF_PI = math.pi / 2
# slack so that float(pi/2) parsed from text is accepted
_THETA_SLACK = 1e-12


def check_theta(theta, *, allow_zero: bool = False) -> float:
    """Validate a coupling angle and return it as a float.

    ``allow_zero`` admits the uncoupled limit, which the forward simulators
    accept but the estimators cannot invert.
    """
    if isinstance(theta, CouplingAngle):
        return theta.theta
    try:
        t = float(theta)
    except (TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"theta must be a real number, got {theta!r}") from exc
    if not math.isfinite(t):
        raise InvalidArgumentError(f"theta must be finite, got {t}")
    lo_ok = t >= 0.0 if allow_zero else t > 0.0
    if not lo_ok or t > HALF_PI + _THETA_SLACK:
        bracket = "[0, pi/2]" if allow_zero else "(0, pi/2]"
        raise InvalidArgumentError(f"theta must lie in {bracket}, got {t}")
    return min(t, HALF_PI)


def epsilon_theta(theta: float) -> float:
    """Coupling strength 2 sin^2(theta/2) = 1 - cos(theta)."""
    s = math.sin(0.5 * theta)
    return 2.0 * s * s


@dataclass(frozen=True)
class CouplingAngle:
    """Pointer rotation angle in (0, pi/2]."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", check_theta(self.theta))

    @property
    def eps(self) -> float:
        return epsilon_theta(self.theta)

    def __float__(self) -> float:
        return self.theta
