"""Double-well potential W(t) = w0 (t - alpha)^2 (t - beta)^2."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DoubleWell:
    alpha: float = 0.0
    beta: float = 1.0
    well_scale: float = 1.0

    def __post_init__(self):
        if not self.alpha < self.beta:
            raise ValueError(f"wells must satisfy alpha < beta, got {self.alpha}, {self.beta}")
        if not self.well_scale > 0:
            raise ValueError("well_scale must be positive")

    def W(self, t):
        t = np.asarray(t, dtype=float)
        return self.well_scale * (t - self.alpha) ** 2 * (t - self.beta) ** 2

    def dW(self, t):
        t = np.asarray(t, dtype=float)
        a, b = t - self.alpha, t - self.beta
        return 2.0 * self.well_scale * a * b * (a + b)

    def d2W(self, t):
        t = np.asarray(t, dtype=float)
        a, b = t - self.alpha, t - self.beta
        return 2.0 * self.well_scale * (a * a + 4.0 * a * b + b * b)

    @property
    def curvature_bound(self) -> float:
        """W'' at the wells, the largest value W'' takes on [alpha, beta]."""
        return 2.0 * self.well_scale * (self.beta - self.alpha) ** 2


def eval_W(t, potential: DoubleWell | None = None):
    return (potential or DoubleWell()).W(t)


def eval_dW(t, potential: DoubleWell | None = None):
    return (potential or DoubleWell()).dW(t)
