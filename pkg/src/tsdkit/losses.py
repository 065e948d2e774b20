"""Classification and box regression losses, with analytic gradients."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidConfig, InvalidInput
from .targets import BoxDelta

# Probabilities are clamped into [P_CLAMP, 1 - P_CLAMP] before taking logs;
# gradient checks should stay away from the clamp boundaries.
P_CLAMP = 1e-7


@dataclass(frozen=True)
class FocalParams:
    """Focal loss parameters: alpha in (0, 1], gamma >= 0."""

    alpha: float = 0.25
    gamma: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidConfig(f"alpha {self.alpha} outside (0, 1]")
        if self.gamma < 0.0:
            raise InvalidConfig(f"gamma {self.gamma} must be >= 0")


DEFAULT_FOCAL = FocalParams()


def _check_py(p: float, y: int) -> float:
    if y not in (0, 1):
        raise InvalidInput(f"y must be 0 or 1, got {y!r}")
    if not (isinstance(p, (int, float)) and 0.0 <= p <= 1.0):
        raise InvalidInput(f"p {p!r} outside [0, 1]")
    return min(max(float(p), P_CLAMP), 1.0 - P_CLAMP)


def focal_loss(p: float, y: int, params: FocalParams = DEFAULT_FOCAL) -> float:
    """Focal loss -alpha_t * (1 - pt)**gamma * ln(pt) for one prediction.

    pt is p for y = 1 and 1 - p for y = 0; alpha_t follows the same switch.
    With gamma = 0 and alpha_t = 1 this reduces to cross-entropy.
    """
    p = _check_py(p, y)
    if y == 1:
        pt, alpha_t = p, params.alpha
    else:
        pt, alpha_t = 1.0 - p, 1.0 - params.alpha
    return -alpha_t * (1.0 - pt) ** params.gamma * math.log(pt)


def focal_loss_grad(p: float, y: int, params: FocalParams = DEFAULT_FOCAL) -> float:
    """d(focal_loss)/dp, valid strictly inside the clamp interval."""
    p = _check_py(p, y)
    a, g = params.alpha, params.gamma
    if y == 1:
        # L = -a (1-p)^g ln p
        return a * g * (1.0 - p) ** (g - 1.0) * math.log(p) - a * (1.0 - p) ** g / p
    # L = -(1-a) p^g ln(1-p)
    return (-(1.0 - a) * g * p ** (g - 1.0) * math.log(1.0 - p)
            + (1.0 - a) * p ** g / (1.0 - p))


def smooth_l1_term(d: float, beta: float) -> float:
    """Single-component smooth L1: quadratic inside |d| < beta, linear outside."""
    if beta <= 0:
        raise InvalidConfig(f"beta {beta} must be > 0")
    ad = abs(d)
    if ad < beta:
        return 0.5 * d * d / beta
    return ad - 0.5 * beta


def smooth_l1(pred: BoxDelta, target: BoxDelta, beta: float = 1.0 / 9.0) -> float:
    """Smooth L1 between two box deltas, summed over the four components."""
    return sum(smooth_l1_term(p - t, beta)
               for p, t in zip(pred.as_tuple(), target.as_tuple()))
