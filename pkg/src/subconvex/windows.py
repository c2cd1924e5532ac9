"""Compactly supported smooth weights h, h* and W."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _flat(s):
    """exp(-1/s) for s > 0, else 0."""
    s = np.asarray(s, dtype=np.float64)
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_step(s):
    """C-infinity step: 0 for s <= 0, 1 for s >= 1."""
    a = _flat(s)
    b = _flat(1.0 - np.asarray(s, dtype=np.float64))
    return a / (a + b)


def bump(u):
    """h(u) = exp(1 - 1/(1 - (2u - 3)^2)) on (1, 2), zero elsewhere; h(3/2) = 1."""
    u = np.asarray(u, dtype=np.float64)
    s = 2.0 * u - 3.0
    out = np.zeros_like(u)
    inside = np.abs(s) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def plateau(u):
    """h*(u): 1 on [1, 2], supported in [3/4, 9/4]."""
    u = np.asarray(u, dtype=np.float64)
    return smooth_step(4.0 * (u - 0.75)) * smooth_step(4.0 * (2.25 - u))


def even_plateau(u):
    """W(u): 1 on [-1, 1], supported in [-2, 2]."""
    u = np.abs(np.asarray(u, dtype=np.float64))
    return smooth_step(2.0 - u)


_KINDS = {
    "h": (bump, (1.0, 2.0)),
    "h_star": (plateau, (0.75, 2.25)),
    "W": (even_plateau, (-2.0, 2.0)),
}


@dataclass(frozen=True)
class SmoothWindow:
    """One of the three fixed weights, dilated by ``scale``.

    ``window(u)`` evaluates the undilated profile; ``window.at(x)`` evaluates
    ``profile(x / scale)``.
    """

    kind: str
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown window kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def support(self) -> tuple[float, float]:
        return _KINDS[self.kind][1]

    @property
    def scaled_support(self) -> tuple[float, float]:
        a, b = self.support
        return a * self.scale, b * self.scale

    def __call__(self, u):
        return _KINDS[self.kind][0](u)

    def at(self, x):
        return self(np.asarray(x, dtype=np.float64) / self.scale)

    def integer_points(self) -> np.ndarray:
        """Integers strictly inside the scaled support (where the weight can be nonzero)."""
        a, b = self.scaled_support
        lo = int(np.floor(a)) + 1
        hi = int(np.ceil(b)) - 1
        return np.arange(lo, hi + 1, dtype=np.int64)
