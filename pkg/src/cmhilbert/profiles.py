"""Closed-form unit-norm one-dimensional profiles supported on ``(0, 1)``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["Profile", "BumpProfile", "BoxProfile", "BUMP", "BOX", "PROFILES", "get_profile"]

# int_0^1 exp(-2/(y(1-y))) dy and, after dividing by it, int_0^1 b'(y)^2 dy,
# from mpmath.quad at 40 significant digits (tests/test_profiles.py recomputes both).
_BUMP_RAW_NORM_SQ = 9.69866415335882327182094848949e-05
_BUMP_DERIV_NORM_SQ = 22.5747164838098083910879137782


class Profile:
    name: str
    support = (0.0, 1.0)
    differentiable: bool
    deriv_norm_sq: float

    def value(self, y) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, y) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<profile {self.name}>"


@dataclass(frozen=True, repr=False)
class BumpProfile(Profile):
    """Normalized ``exp(-1/(y(1-y)))`` on ``(0, 1)``, zero elsewhere."""

    name: str = "bump"
    differentiable: bool = True
    deriv_norm_sq: float = _BUMP_DERIV_NORM_SQ

    def _parts(self, y):
        y = np.asarray(y, dtype=float)
        inside = (y > 0) & (y < 1)
        yy = np.where(inside, y, 0.5)
        q = yy * (1 - yy)
        return inside, yy, q

    def value(self, y):
        inside, _, q = self._parts(y)
        return np.where(inside, np.exp(-1 / q), 0.0) / math.sqrt(_BUMP_RAW_NORM_SQ)

    def derivative(self, y):
        inside, yy, q = self._parts(y)
        d = np.exp(-1 / q) * (1 - 2 * yy) / q**2
        return np.where(inside, d, 0.0) / math.sqrt(_BUMP_RAW_NORM_SQ)


@dataclass(frozen=True, repr=False)
class BoxProfile(Profile):
    """Indicator of ``(0, 1)``: unit norm, not differentiable."""

    name: str = "box"
    differentiable: bool = False
    deriv_norm_sq: float = math.inf

    def value(self, y):
        y = np.asarray(y, dtype=float)
        return np.where((y > 0) & (y < 1), 1.0, 0.0)

    def derivative(self, y):
        raise ValueError("the box profile has no L2 derivative")


BUMP = BumpProfile()
BOX = BoxProfile()
PROFILES: dict[str, Profile] = {p.name: p for p in (BUMP, BOX)}


def get_profile(name: str) -> Profile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; known: {sorted(PROFILES)}") from None
