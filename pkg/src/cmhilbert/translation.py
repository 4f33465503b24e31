"""Translations ``tau_a`` and coordinate derivatives on representable states.

Coordinate ``k`` (1-based) of a cylinder state with head dimension ``N`` is
a head axis when ``k <= N`` and tail factor ``k - N`` otherwise.

Head translations by whole grid steps are circular shifts (exact); any
other real amount goes through the phase multiplier ``exp(-i xi a)``.
Closed-form tail factors translate by moving their offset, so every real
shift is representable there.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import atomic
from .atomic import AtomicState, BaseMeasure
from .cylinder import (
    ClosedFactor,
    CylinderState,
    SampledFactor,
    cylinder_distance,
    cylinder_inner,
)
from .grid import GridState, fourier_multiplier, lattice_shift, spectral_shift

__all__ = [
    "Direction",
    "ShiftVector",
    "NotRepresentable",
    "translate",
    "translate_atomic",
    "shift_axis",
    "difference_quotient",
    "derivative",
    "symmetry_check",
    "strong_continuity_check",
]

# a head shift counts as a lattice shift when a/h is this close to an integer
LATTICE_TOL = 1e-9


class NotRepresentable(ValueError):
    """The requested shift or derivative leaves the representable class."""


@dataclass(frozen=True)
class Direction:
    k: int

    def __post_init__(self):
        if int(self.k) < 1:
            raise ValueError("coordinate directions are 1-based")
        object.__setattr__(self, "k", int(self.k))


def _k(direction) -> int:
    return direction.k if isinstance(direction, Direction) else Direction(direction).k


@dataclass(frozen=True)
class ShiftVector:
    """Finitely supported ``a`` in ``R^inf`` as sorted ``(index, amount)`` pairs."""

    entries: tuple = ()

    def __post_init__(self):
        merged: dict[int, float] = {}
        for k, amount in self.entries:
            k = int(k)
            if k < 1:
                raise ValueError("coordinate indices are 1-based")
            merged[k] = merged.get(k, 0.0) + float(amount)
        object.__setattr__(self, "entries", tuple(sorted((k, a) for k, a in merged.items() if a != 0.0)))

    @classmethod
    def of(cls, amounts: Mapping[int, float] | Sequence[float]) -> "ShiftVector":
        if isinstance(amounts, Mapping):
            return cls(tuple(amounts.items()))
        return cls(tuple((i + 1, a) for i, a in enumerate(amounts)))

    @classmethod
    def along(cls, k, h: float) -> "ShiftVector":
        return cls(((_k(k), h),))

    def __getitem__(self, k: int) -> float:
        return dict(self.entries).get(k, 0.0)

    def __neg__(self) -> "ShiftVector":
        return ShiftVector(tuple((k, -a) for k, a in self.entries))

    def __add__(self, other: "ShiftVector") -> "ShiftVector":
        return ShiftVector(self.entries + other.entries)

    @property
    def support(self) -> list[int]:
        return [k for k, _ in self.entries]


def shift_axis(s: GridState, axis: int, amount: float) -> GridState:
    """Translate one axis of a grid state, on the lattice when possible."""
    if amount == 0:
        return s
    h = s.grid.spacing[axis]
    steps = amount / h
    if abs(steps - round(steps)) <= LATTICE_TOL:
        k = [0] * s.dimension
        k[axis] = int(round(steps))
        return lattice_shift(s, k)
    a = [0.0] * s.dimension
    a[axis] = amount
    return spectral_shift(s, a)


def _shift_factor(f, amount: float):
    if isinstance(f, ClosedFactor):
        return f.shifted(amount)
    return SampledFactor(shift_axis(f.state, 0, amount))


def translate(a: ShiftVector, u: CylinderState) -> CylinderState:
    """``tau_a u``: amplitude ``f(x) -> f(x - a)`` coordinatewise."""
    if not isinstance(a, ShiftVector):
        a = ShiftVector.of(a)
    head = u.head
    tail = u.tail
    n = u.dimension
    for k, amount in a.entries:
        if k <= n:
            head = shift_axis(head, k - 1, amount)
            continue
        if tail.is_inert:
            raise NotRepresentable(f"head-only state has no coordinate {k}")
        j = k - n
        tail = tail.with_factor(j, _shift_factor(tail.factor(j), amount))
    return CylinderState(head, tail)


def translate_atomic(a: Sequence[float], u: AtomicState) -> AtomicState:
    """Move every atom by ``+a``; amplitudes and weights are unchanged."""
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.shape != (u.dimension,):
        raise atomic.DimensionMismatch(f"shift has length {a.size}, state dimension {u.dimension}")
    return AtomicState(BaseMeasure(u.base.points + a, u.base.weights), u.amp)


def _ik(grid, axis: int):
    xi = grid.frequencies(axis)
    shape = [1] * grid.dimension
    shape[axis] = -1
    return (1j * xi).reshape(shape)


def difference_quotient(k, h: float, u: CylinderState) -> CylinderState:
    """``(tau_{h e_k} u - u) / h`` in square-root coordinates.

    Only coordinate ``k`` changes, so the result is again a product state:
    the quotient is formed on the head (head coordinate) or on the single
    tail factor carrying coordinate ``k``.
    """
    k = _k(k)
    if not h > 0:
        raise ValueError("h must be positive")
    n = u.dimension
    if k <= n:
        shifted = shift_axis(u.head, k - 1, h)
        return u.with_head((shifted - u.head) / h)
    if u.tail.is_inert:
        raise NotRepresentable(f"head-only state has no coordinate {k}")
    j = k - n
    f = u.tail.factor(j)
    if isinstance(f, ClosedFactor):
        grid = f.reference_grid()
        lo, hi = f.support
        if h > (hi - lo) / 2:
            raise NotRepresentable("shift larger than the factor's sampling margin")
        x = grid.axis(0)
        q = GridState(grid, (f(x - h) - f(x)) / h)
    else:
        q = (shift_axis(f.state, 0, h) - f.state) / h
    return CylinderState(u.head, u.tail.with_factor(j, SampledFactor(q)))


def derivative(k, u: CylinderState) -> CylinderState:
    """``du/dx_k``; a tail factor ``f_n`` becomes the sampled factor ``f_n'``."""
    k = _k(k)
    n = u.dimension
    if k <= n:
        return u.with_head(fourier_multiplier(_ik(u.head.grid, k - 1), u.head))
    if u.tail.is_inert:
        raise NotRepresentable(f"head-only state has no coordinate {k}")
    j = k - n
    f = u.tail.factor(j)
    if isinstance(f, ClosedFactor):
        if not f.profile.differentiable:
            raise NotRepresentable(f"factor {j} uses the non-differentiable profile {f.profile.name!r}")
        grid = f.reference_grid()
        d = GridState(grid, f.derivative(grid.axis(0)))
    else:
        d = fourier_multiplier(_ik(f.grid, 0), f.state)
    return CylinderState(u.head, u.tail.with_factor(j, SampledFactor(d)))


def symmetry_check(k, u: CylinderState, v: CylinderState) -> tuple[complex, complex]:
    """``(<i d_k u, v>, <u, i d_k v>)``; equal when ``i d_k`` is symmetric."""
    lhs = cylinder_inner(1j * derivative(k, u), v)
    rhs = cylinder_inner(u, 1j * derivative(k, v))
    return lhs, rhs


def strong_continuity_check(k, u: CylinderState, hs: Iterable[float]) -> list[float]:
    """``||tau_{h e_k} u - u||`` for each ``h``."""
    k = _k(k)
    return [cylinder_distance(translate(ShiftVector.along(k, h), u), u) for h in hs]
