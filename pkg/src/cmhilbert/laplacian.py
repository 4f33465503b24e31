"""H1 form, resolvent, Laplacian and the heat/Schrödinger semigroups.

The semigroups act on heads by exact Fourier multipliers.  A non-inert tail
is never evolved; it is carried as an :class:`EvolvedTail` marker recording
``exp(t Delta) u0`` or ``exp(i t Delta) u0`` symbolically.  Only facts that
hold without knowing the evolved tail are computed from it: its norm is
``||u0||`` for Schrödinger and unknown for heat.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import roots_legendre

from .cylinder import (
    ClosedFactor,
    CylinderState,
    EvolvedTail,
    IncomparableTails,
    TailProduct,
    _align,
    _same_rule,
    absorb,
    contract_head,
    contract_tail,
    cylinder_distance,
    cylinder_inner,
    tail_inner,
    tensor,
)
from .grid import Grid, GridState, fourier_multiplier, grid_inner, grid_norm
from .translation import ShiftVector, derivative, translate

__all__ = [
    "NotHeadOnly",
    "NonSummable",
    "H1Profile",
    "h1_profile",
    "h1_inner",
    "resolvent",
    "laplacian",
    "laplace_resolvent_oracle",
    "heat_multiplier",
    "schrodinger_multiplier",
    "evolve_head",
    "evolve_schrodinger",
    "evolve_heat",
    "EvolvedFamily",
    "evolve_family",
    "joint_family_gram",
    "proportionality_fit",
    "factorization_check",
    "translation_invariance_check",
    "contraction_derivative_check",
]

HEAT = "heat"
SCHRODINGER = "schrodinger"


class NotHeadOnly(ValueError):
    """The operation is only defined here for states with an inert tail."""


class NonSummable(ValueError):
    pass


# --------------------------------------------------------------------------
# H1 form


def _coordinates(u: CylinderState) -> int:
    """Number of explicitly differentiable coordinates (head + tail prefix)."""
    return u.dimension + (0 if u.tail.is_inert else len(u.tail.prefix))


def _rule_derivative_sum(u: CylinderState, first: int) -> float:
    """``sum_{j >= first} ||f_j'||^2`` over the rule part of the tail."""
    rule = u.tail.rule
    if not rule.profile.differentiable:
        raise NonSummable(f"profile {rule.profile.name!r} has no derivative")
    if not rule.law.derivative_summable:
        raise NonSummable(f"sum of L_n^-4 diverges for exponent {rule.law.exponent}")
    return rule.profile.deriv_norm_sq * rule.law.inverse_fourth_sum(first + rule.skip)


@dataclass(frozen=True)
class H1Profile:
    """A state together with its coordinate derivative norms.

    ``explicit[k-1]`` is ``||du/dx_k||^2`` for the head and tail-prefix
    coordinates; ``tail_sum`` is the closed-form remainder over the rule.
    """

    state: CylinderState
    explicit: tuple = ()
    tail_sum: float = 0.0

    @property
    def derivative_sum(self) -> float:
        return math.fsum(self.explicit) + self.tail_sum

    @property
    def norm_sq(self) -> float:
        return self.state.norm() ** 2 + self.derivative_sum


def h1_profile(u: CylinderState) -> H1Profile:
    explicit = tuple(derivative(k, u).norm() ** 2 for k in range(1, _coordinates(u) + 1))
    tail_sum = 0.0
    if not u.tail.is_inert:
        weight = u.norm() ** 2
        tail_sum = weight * _rule_derivative_sum(u, len(u.tail.prefix) + 1)
    return H1Profile(u, explicit, tail_sum)


def h1_inner(u, v) -> complex:
    """``<u, v> + sum_k <i du/dx_k, i dv/dx_k>``."""
    u = u.state if isinstance(u, H1Profile) else u
    v = v.state if isinstance(v, H1Profile) else v
    u, v = _align(u, v)
    if u.tail.is_inert != v.tail.is_inert:
        raise IncomparableTails("head-only and tailed states share no H1 form")
    n = max(_coordinates(u), _coordinates(v))
    if not u.tail.is_inert:
        u = CylinderState(u.head, u.tail.expanded(n - u.dimension))
        v = CylinderState(v.head, v.tail.expanded(n - v.dimension))
    total = cylinder_inner(u, v)
    terms = [cylinder_inner(1j * derivative(k, u), 1j * derivative(k, v)) for k in range(1, n + 1)]
    if not u.tail.is_inert and _same_rule(u.tail.rule, v.tail.rule):
        # identical rule factors: overlap 1 except at the differentiated one
        terms.append(total * _rule_derivative_sum(u, len(u.tail.prefix) + 1))
    elif not u.tail.is_inert:
        # every rule-region term keeps infinitely many overlaps of modulus < 1
        tail_inner(u.tail, v.tail)
    return total + complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


# --------------------------------------------------------------------------
# resolvent and Laplacian on head-only states


def _require_head_only(u: CylinderState) -> None:
    if not u.tail.is_inert:
        raise NotHeadOnly("defined only for head-only states (inert tail)")


def resolvent(f: CylinderState) -> CylinderState:
    """``(1 - Delta)^-1 f`` via the multiplier ``1 / (1 + |xi|^2)``."""
    _require_head_only(f)
    return f.with_head(fourier_multiplier(1 / (1 + f.head.grid.xi_squared()), f.head))


def laplacian(u: CylinderState) -> CylinderState:
    """``Delta u`` via the multiplier ``-|xi|^2``."""
    _require_head_only(u)
    return u.with_head(fourier_multiplier(-u.head.grid.xi_squared(), u.head))


def laplace_resolvent_oracle(f: CylinderState, nodes: int = 64, s_range=(-20.0, 4.0)) -> CylinderState:
    """``int_0^inf exp(-t) exp(t Delta) f dt`` by quadrature in ``s = log t``.

    Gauss-Legendre with ``nodes`` points on ``s_range``; each node is one
    exact heat evolution of ``f``.
    """
    _require_head_only(f)
    x, w = roots_legendre(nodes)
    lo, hi = s_range
    s = (hi - lo) / 2 * x + (hi + lo) / 2
    t = np.exp(s)
    weights = w * (hi - lo) / 2 * t * np.exp(-t)
    acc = np.zeros(f.head.grid.shape, dtype=complex)
    for ti, wi in zip(t, weights):
        acc = acc + wi * evolve_heat(float(ti), f).head.amp
    return f.with_head(GridState(f.head.grid, acc))


# --------------------------------------------------------------------------
# semigroups


def heat_multiplier(grid: Grid, t: float, axes: Sequence[int] | None = None) -> np.ndarray:
    return np.exp(-_xi_squared(grid, axes) * t)


def schrodinger_multiplier(grid: Grid, t: float, axes: Sequence[int] | None = None) -> np.ndarray:
    return np.exp(-1j * _xi_squared(grid, axes) * t)


def _xi_squared(grid: Grid, axes) -> np.ndarray:
    if axes is None:
        return grid.xi_squared()
    out = np.zeros(grid.shape)
    mesh = grid.freq_mesh()
    for i in axes:
        out = out + mesh[i] ** 2
    return out


def evolve_head(head: GridState, t: float, mode: str, axes: Sequence[int] | None = None) -> GridState:
    """Evolve a head by the heat or Schrödinger multiplier, optionally on some axes only."""
    if mode == HEAT:
        if t < 0:
            raise ValueError("heat evolution needs t >= 0")
        m = heat_multiplier(head.grid, t, axes)
    elif mode == SCHRODINGER:
        m = schrodinger_multiplier(head.grid, t, axes)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return fourier_multiplier(m, head)


def _evolve_tail(tail, t: float, mode: str):
    if isinstance(tail, EvolvedTail):
        if tail.mode != mode:
            raise ValueError("cannot mix heat and Schrödinger evolution of one tail")
        return replace(tail, time=tail.time + t)
    if tail.is_inert or t == 0:
        return tail
    return EvolvedTail(tail, mode, t)


def _evolve(t: float, u: CylinderState, mode: str) -> CylinderState:
    return CylinderState(evolve_head(u.head, t, mode), _evolve_tail(u.tail, t, mode))


def evolve_schrodinger(t: float, u: CylinderState) -> CylinderState:
    """``exp(i t Delta) u``: head by ``exp(-i |xi|^2 t)``, tail symbolic."""
    return _evolve(t, u, SCHRODINGER)


def evolve_heat(t: float, u: CylinderState) -> CylinderState:
    """``exp(t Delta) u`` for ``t >= 0``: head by ``exp(-|xi|^2 t)``, tail symbolic."""
    if t < 0:
        raise ValueError("heat evolution needs t >= 0")
    return _evolve(t, u, HEAT)


@dataclass(frozen=True)
class EvolvedFamily:
    """States sharing one tail at time ``t`` and their Gram matrix.

    For heat evolution the Gram matrix is known only up to the common factor
    ``||exp(t Delta) u0||^2``; ``gram`` then holds the head part and
    ``tail_factor`` is ``None``.
    """

    time: float
    mode: str
    states: tuple
    gram: np.ndarray
    tail_factor: float | None


def _gram(heads: Sequence[GridState]) -> np.ndarray:
    n = len(heads)
    g = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(i, n):
            g[i, j] = grid_inner(heads[i], heads[j])
            g[j, i] = np.conj(g[i, j])
    return g


def evolve_family(heads: Sequence[GridState], tail: TailProduct, t: float, mode: str) -> EvolvedFamily:
    states = tuple(_evolve(t, CylinderState(h, tail), mode) for h in heads)
    head_gram = _gram([s.head for s in states])
    factor = None if (mode == HEAT and not tail.is_inert and t > 0) else tail.restarted(1).norm_sq()
    gram = head_gram if factor is None else head_gram * factor
    return EvolvedFamily(t, mode, states, gram, factor)


def joint_family_gram(heads: Sequence[GridState], tail: TailProduct, t: float, mode: str, grid: Grid) -> np.ndarray:
    """Gram matrix after absorbing the first tail factor onto ``grid`` and evolving jointly.

    The remaining tail is common to the family; its (unknown) evolved norm
    is left out, so for Schrödinger the result should equal the head-evolved
    Gram and for heat be proportional to it.
    """
    joint = [absorb(CylinderState(h, tail), [grid]) for h in heads]
    return _gram([evolve_head(s.head, t, mode) for s in joint])


def proportionality_fit(measured: np.ndarray, predicted: np.ndarray) -> tuple[float, float]:
    """Least-squares ``c`` with ``measured ~ c * predicted``; returns ``(c, max residual)``."""
    p = predicted.ravel()
    m = measured.ravel()
    c = float((np.vdot(p, m) / np.vdot(p, p)).real)
    return c, float(np.max(np.abs(m - c * p)))


def factorization_check(
    t: float,
    f: GridState,
    u0: CylinderState,
    mode: str,
    split: int | None = None,
    family: Sequence[GridState] | None = None,
    absorb_grid: Grid | None = None,
    taylor_steps: Sequence[float] = (),
) -> dict:
    """Residuals of the head/tail factorization of the semigroup.

    * ``split``: evolving the ``N1 + N2`` axes of ``f`` jointly versus the
      first ``N1`` axes and then the rest.
    * ``tensor``: evolving ``f (x) u0`` versus tensoring the evolved head with
      the evolved ``u0`` (symbolic tail, compared through heads).
    * ``gram``: family Gram after joint evolution with the first tail factor
      of ``u0`` versus the head-evolved Gram (equality for Schrödinger,
      proportionality for heat).
    * ``taylor``: ``||(evolve(s) f - f)/s - L f||`` for each ``s`` in
      ``taylor_steps`` where ``L`` is ``Delta`` or ``i Delta``.
    """
    report: dict = {"mode": mode, "t": t}
    n = f.dimension
    split = n if split is None else split
    joint = evolve_head(f, t, mode)
    staged = evolve_head(evolve_head(f, t, mode, axes=range(split)), t, mode, axes=range(split, n))
    report["split"] = grid_norm(joint - staged)

    lhs = _evolve(t, tensor(f, u0), mode)
    rhs_head = tensor(joint, CylinderState(evolve_head(u0.head, t, mode), TailProduct.inert())).head
    report["tensor"] = grid_norm(lhs.head - rhs_head)

    if family is not None and not u0.tail.is_inert:
        grid = absorb_grid or _default_absorb_grid(u0)
        base = [tensor(h, CylinderState(u0.head, TailProduct.inert())).head for h in family]
        predicted = _gram([evolve_head(h, t, mode) for h in base])
        measured = joint_family_gram(base, u0.tail, t, mode, grid)
        if mode == SCHRODINGER:
            report["gram"] = float(np.max(np.abs(measured - predicted)))
        else:
            c, res = proportionality_fit(measured, predicted)
            report["gram"] = res
            report["tail_contraction_sq"] = c

    if taylor_steps:
        lap = fourier_multiplier(-f.grid.xi_squared(), f)
        gen = lap if mode == HEAT else 1j * lap
        report["taylor"] = [grid_norm((evolve_head(f, s, mode) - f) / s - gen) for s in taylor_steps]
    return report


def _default_absorb_grid(u0: CylinderState) -> Grid:
    f = u0.tail.factor(1)
    if isinstance(f, ClosedFactor):
        lo, hi = f.support
        return Grid((2 * (hi - lo),), (512,), ((lo + hi) / 2,))
    return f.grid


# --------------------------------------------------------------------------
# commutation checks


def translation_invariance_check(a: ShiftVector, u: CylinderState) -> float:
    """``||Delta(tau_a u) - tau_a(Delta u)||``."""
    return cylinder_distance(laplacian(translate(a, u)), translate(a, laplacian(u)))


def contraction_derivative_check(k: int, f: GridState, v: CylinderState, u: CylinderState | None = None) -> dict:
    """Residuals of derivatives passing through both contractions.

    ``head``: ``d/dx_k (f <>_N v)`` against ``f <>_N dv/dx_{N+k}``.
    ``tail`` (only for ``k <= N`` and a given ``u``): ``d/dx_k (u <>_inf v)``
    against ``u <>_inf dv/dx_k``.
    """
    n = f.dimension
    out = {}
    lhs = derivative(k, contract_head(f, v))
    rhs = contract_head(f, derivative(n + k, v))
    out["head"] = cylinder_distance(lhs, rhs)
    if u is not None and k <= n:
        g = contract_tail(u, v, n)
        lhs_t = derivative(k, CylinderState.head_only(g)).head
        rhs_t = contract_tail(u, derivative(k, v), n)
        out["tail"] = grid_norm(lhs_t - rhs_t)
    return out
