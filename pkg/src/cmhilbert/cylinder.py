"""Product measures, cylinder states ``head (x) tail`` and their contractions.

A :class:`CylinderState` is ``f (x) u`` with ``f`` a :class:`GridState` on
the first ``N`` coordinates and ``u`` a :class:`TailProduct`
``prod_n f_n(x_n)^2 dx_n`` living on coordinates ``N+1, N+2, ...``.  Tails
are a finite explicit prefix of factors followed by an eventually constant
rule of closed-form unit factors, which keeps every infinite inner product
exactly computable factor by factor.

Tail factors come in two kinds.  A :class:`ClosedFactor` is the scaled
profile ``x -> L^-1 f(x/L^2 - offset)``; a :class:`SampledFactor` is a
one-dimensional grid state, produced when an operation (a derivative, a
difference quotient) leaves the closed-form family.  Sampled factors need
not have unit norm.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from . import atomic
from .atomic import AtomicState, BaseMeasure
from .grid import Grid, GridMismatch, GridState, grid_inner, grid_norm, sorted_sum
from .profiles import BUMP, Profile, get_profile

__all__ = [
    "product",
    "product_inner_factorization_check",
    "ClosedFactor",
    "SampledFactor",
    "ScaleLaw",
    "TailRule",
    "TailProduct",
    "CylinderState",
    "BinaryAddress",
    "IncomparableTails",
    "DivergentScaleLaw",
    "UnknownTailNorm",
    "EvolvedTail",
    "factor_overlap",
    "tail_inner",
    "cylinder_inner",
    "cylinder_norm",
    "cylinder_distance",
    "tensor",
    "absorb",
    "build_family",
    "contract_head",
    "contract_tail",
    "tail_to_json",
    "tail_from_json",
    "TAIL_FORMAT_VERSION",
]

TAIL_FORMAT_VERSION = 1
REFERENCE_POINTS = 2048


class IncomparableTails(ValueError):
    """Raised when an infinite tail inner product cannot be decided exactly."""


class DivergentScaleLaw(ValueError):
    pass


class UnknownTailNorm(IncomparableTails):
    """The overlap involves an evolved tail whose norm is not computable."""


# --------------------------------------------------------------------------
# finite products of atomic measures


def product(u1: AtomicState, u2: AtomicState) -> AtomicState:
    """Product measure ``f1 f2 dmu1 dmu2`` on the Cartesian product of supports."""
    m1, m2 = len(u1.base), len(u2.base)
    pts = np.hstack(
        [np.repeat(u1.base.points, m2, axis=0), np.tile(u2.base.points, (m1, 1))]
    ).reshape(m1 * m2, u1.dimension + u2.dimension)
    weights = np.outer(u1.base.weights, u2.base.weights).ravel()
    amp = np.outer(u1.amp, u2.amp).ravel()
    return AtomicState(BaseMeasure(pts, weights), amp)


def product_inner_factorization_check(u1, v1, u2, v2) -> tuple[complex, complex]:
    """``(<u1.u2, v1.v2>, <u1,v1><u2,v2>)``; the two agree for product measures."""
    lhs = atomic.inner(product(u1, u2), product(v1, v2))
    rhs = atomic.inner(u1, v1) * atomic.inner(u2, v2)
    return lhs, rhs


# --------------------------------------------------------------------------
# tail factors


@dataclass(frozen=True)
class ClosedFactor:
    """``x -> scale^-1 * profile(x / scale^2 - offset)``; unit norm."""

    profile: Profile
    scale: float
    offset: float = 0.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "scale", float(self.scale))
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def support(self) -> tuple[float, float]:
        s2 = self.scale**2
        lo, hi = self.profile.support
        return ((lo + self.offset) * s2, (hi + self.offset) * s2)

    def __call__(self, x):
        return self.profile.value(np.asarray(x) / self.scale**2 - self.offset) / self.scale

    def derivative(self, x):
        if not self.profile.differentiable:
            raise ValueError(f"profile {self.profile.name!r} is not differentiable")
        return self.profile.derivative(np.asarray(x) / self.scale**2 - self.offset) / self.scale**3

    def reference_grid(self, points: int = REFERENCE_POINTS) -> Grid:
        """Grid covering the support with half a support width of margin per side."""
        lo, hi = self.support
        return Grid((2 * (hi - lo),), (points,), ((lo + hi) / 2,))

    def sample(self, grid: Grid) -> GridState:
        _require_cover(self, grid)
        return grid.sample(self)

    def shifted(self, a: float) -> "ClosedFactor":
        return replace(self, offset=self.offset + a / self.scale**2)


@dataclass(frozen=True)
class SampledFactor:
    """A tail factor known only through samples on a one-dimensional grid."""

    state: GridState

    def __post_init__(self):
        if self.state.dimension != 1:
            raise ValueError("sampled tail factors are one-dimensional")

    @property
    def grid(self) -> Grid:
        return self.state.grid


Factor = Union[ClosedFactor, SampledFactor]


def _require_cover(f: ClosedFactor, grid: Grid) -> None:
    lo, hi = f.support
    start = grid.axis(0)[0]
    stop = start + grid.lengths[0]
    if lo < start or hi > stop:
        raise ValueError(f"grid [{start}, {stop}) does not cover factor support [{lo}, {hi}]")


def _same_factor(a: Factor, b: Factor) -> bool:
    if isinstance(a, ClosedFactor) and isinstance(b, ClosedFactor):
        return a == b
    if isinstance(a, SampledFactor) and isinstance(b, SampledFactor):
        return a.grid == b.grid and np.array_equal(a.state.amp, b.state.amp)
    return False


def _midpoint_integral(func, lo: float, hi: float, points: int = REFERENCE_POINTS) -> float:
    # both integrands vanish to all orders (bump) or are constant (box) at the
    # ends, so the midpoint rule is exact to rounding here
    h = (hi - lo) / points
    x = lo + (np.arange(points) + 0.5) * h
    return math.fsum(func(x)) * h


def factor_overlap(a: Factor, b: Factor) -> complex:
    """``<a, b>`` in ``L2(R)``, linear in ``a``."""
    if isinstance(a, ClosedFactor) and isinstance(b, ClosedFactor):
        lo = max(a.support[0], b.support[0])
        hi = min(a.support[1], b.support[1])
        if lo >= hi:
            return 0.0
        return complex(_midpoint_integral(lambda x: a(x) * b(x), lo, hi))
    if isinstance(a, SampledFactor) and isinstance(b, SampledFactor):
        return grid_inner(a.state, b.state)
    if isinstance(a, ClosedFactor):
        return grid_inner(a.sample(b.grid), b.state)
    return grid_inner(a.state, b.sample(a.grid))


def factor_norm_sq(a: Factor) -> float:
    if isinstance(a, ClosedFactor):
        return 1.0
    return grid_norm(a.state) ** 2


def factor_on_grid(a: Factor, grid: Grid) -> GridState:
    if isinstance(a, ClosedFactor):
        return a.sample(grid)
    if a.grid != grid:
        raise GridMismatch(f"sampled factor lives on {a.grid}, not {grid}")
    return a.state


def common_factor_grid(a: Factor, b: Factor | None = None) -> Grid:
    """A grid on which both factors can be sampled exactly."""
    for f in (a, b):
        if isinstance(f, SampledFactor):
            return f.grid
    if b is None or a == b:
        return a.reference_grid()
    lo = min(a.support[0], b.support[0])
    hi = max(a.support[1], b.support[1])
    return Grid((2 * (hi - lo),), (2 * REFERENCE_POINTS,), ((lo + hi) / 2,))


# --------------------------------------------------------------------------
# tails


@dataclass(frozen=True)
class ScaleLaw:
    """``L_n = coef * n^exponent`` for the n-th factor of a tail."""

    coef: float = 1.0
    exponent: float = 1.0

    def __call__(self, n: int) -> float:
        return self.coef * float(n) ** self.exponent

    @property
    def derivative_summable(self) -> bool:
        """Whether ``sum_n L_n^-4`` converges."""
        return 4 * self.exponent > 1

    def inverse_fourth_sum(self, start: int) -> float:
        """``sum_{n >= start} L_n^-4`` (Hurwitz zeta)."""
        from scipy.special import zeta

        if not self.derivative_summable:
            return math.inf
        return float(zeta(4 * self.exponent, start)) / self.coef**4


@dataclass(frozen=True)
class TailRule:
    """Factors ``ClosedFactor(profile, law(n + skip), offset)`` for every later ``n``.

    ``skip`` counts factors already moved into a head, so that a re-split
    tail keeps the scale numbering of the original one.
    """

    profile: Profile
    law: ScaleLaw = field(default_factory=ScaleLaw)
    offset: float = 0.0
    skip: int = 0

    def factor(self, n: int) -> ClosedFactor:
        return ClosedFactor(self.profile, self.law(n + self.skip), self.offset)


@dataclass(frozen=True)
class TailProduct:
    """``prod_n f_n(x_n)^2 dx_n`` on coordinates ``start, start+1, ...``.

    Factor ``n`` (1-based, counted within the tail) is ``prefix[n-1]`` when
    ``n <= len(prefix)`` and ``rule.factor(n)`` otherwise.  ``rule=None``
    with an empty prefix is the inert tail of a head-only state.
    """

    prefix: tuple = ()
    rule: TailRule | None = None
    start: int = 1

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        if self.rule is None and self.prefix:
            raise ValueError("a tail with explicit factors needs an eventual rule")
        if self.start < 1:
            raise ValueError("tail start index must be >= 1")
        for f in self.prefix:
            if not isinstance(f, (ClosedFactor, SampledFactor)):
                raise TypeError(f"not a tail factor: {f!r}")

    @classmethod
    def inert(cls, start: int = 1) -> "TailProduct":
        return cls((), None, start)

    @property
    def is_inert(self) -> bool:
        return self.rule is None

    def factor(self, n: int) -> Factor:
        if n < 1:
            raise IndexError("tail factors are 1-based")
        if n <= len(self.prefix):
            return self.prefix[n - 1]
        if self.rule is None:
            raise IndexError("the inert tail has no factors")
        return self.rule.factor(n)

    def expanded(self, length: int) -> "TailProduct":
        """Same tail with at least ``length`` explicit factors."""
        if length <= len(self.prefix):
            return self
        extra = tuple(self.factor(n) for n in range(len(self.prefix) + 1, length + 1))
        return replace(self, prefix=self.prefix + extra)

    def with_factor(self, n: int, f: Factor) -> "TailProduct":
        t = self.expanded(n)
        return replace(t, prefix=t.prefix[: n - 1] + (f,) + t.prefix[n:])

    def dropped(self, count: int) -> "TailProduct":
        """Remove the first ``count`` factors (they move into a head)."""
        t = self.expanded(count)
        rule = t.rule if t.rule is None else replace(t.rule, skip=t.rule.skip + count)
        return TailProduct(t.prefix[count:], rule, t.start + count)

    def restarted(self, start: int) -> "TailProduct":
        return replace(self, start=start)

    def norm_sq(self) -> float:
        if self.is_inert:
            return 1.0
        return math.prod(factor_norm_sq(f) for f in self.prefix)


def _rule_key(rule: TailRule):
    return (rule.profile, rule.law, rule.skip)


def _same_rule(a: TailRule | None, b: TailRule | None) -> bool:
    if a is None or b is None:
        return a is b
    return _rule_key(a) == _rule_key(b) and a.offset == b.offset


def _rule_overlap(a: TailRule, b: TailRule) -> complex:
    """Common per-factor overlap of two rules that differ only in offset."""
    if _rule_key(a) != _rule_key(b):
        raise IncomparableTails("tails follow different scale laws or profiles")
    return factor_overlap(ClosedFactor(a.profile, 1.0, a.offset), ClosedFactor(b.profile, 1.0, b.offset))


@dataclass(frozen=True)
class EvolvedTail:
    """Symbolic ``exp(t Delta) base`` (heat) or ``exp(i t Delta) base`` (Schrödinger).

    Never materialized.  Two evolved tails overlap computably only when they
    are the same Schrödinger evolution of the same base, where unitarity
    gives ``<base, base>``.
    """

    base: TailProduct
    mode: str
    time: float

    is_inert = False

    @property
    def start(self) -> int:
        return self.base.start

    def restarted(self, start: int) -> "EvolvedTail":
        return replace(self, base=self.base.restarted(start))

    def norm_sq(self) -> float:
        if self.mode == "schrodinger":
            return self.base.norm_sq()
        raise UnknownTailNorm("the norm of a heat-evolved tail is not computable")


def tails_identical(a, b) -> bool:
    if isinstance(a, EvolvedTail) or isinstance(b, EvolvedTail):
        return (
            isinstance(a, EvolvedTail)
            and isinstance(b, EvolvedTail)
            and (a.mode, a.time) == (b.mode, b.time)
            and tails_identical(a.base, b.base)
        )
    if a.start != b.start or not _same_rule(a.rule, b.rule):
        return False
    n = max(len(a.prefix), len(b.prefix))
    return all(_same_factor(a.factor(j), b.factor(j)) for j in range(1, n + 1)) if n else True


def tail_inner(a: TailProduct, b: TailProduct) -> complex:
    """``<a, b>`` evaluated exactly as an infinite product of factor overlaps."""
    if isinstance(a, EvolvedTail) or isinstance(b, EvolvedTail):
        if not tails_identical(a, b):
            raise UnknownTailNorm("overlap of different evolved tails is not computable")
        return complex(a.norm_sq())
    if a.is_inert or b.is_inert:
        if a.is_inert and b.is_inert:
            return 1.0
        raise IncomparableTails("an inert tail is only comparable with another inert tail")
    if a.start != b.start:
        raise IncomparableTails(f"tails start at {a.start} and {b.start}; re-split first")
    total = 1.0 + 0j
    for j in range(1, max(len(a.prefix), len(b.prefix)) + 1):
        r = factor_overlap(a.factor(j), b.factor(j))
        if r == 0:
            return 0j
        total *= r
    if _same_rule(a.rule, b.rule):
        return total
    r = _rule_overlap(a.rule, b.rule)
    if abs(r) < 1:
        # the same overlap repeats for infinitely many coordinates
        return 0j
    raise IncomparableTails(f"eventual factor overlap {r} has modulus 1 but the rules differ")


# --------------------------------------------------------------------------
# cylinder states


@dataclass(frozen=True)
class CylinderState:
    head: GridState
    tail: TailProduct = field(default_factory=TailProduct.inert)

    def __post_init__(self):
        if self.tail.start != self.head.dimension + 1:
            object.__setattr__(self, "tail", self.tail.restarted(self.head.dimension + 1))

    @classmethod
    def head_only(cls, head: GridState) -> "CylinderState":
        return cls(head, TailProduct.inert(head.dimension + 1))

    @classmethod
    def pure_tail(cls, tail: TailProduct, amplitude: complex = 1.0) -> "CylinderState":
        return cls(GridState.scalar(amplitude), tail.restarted(1))

    @property
    def dimension(self) -> int:
        """Number of head coordinates ``N``."""
        return self.head.dimension

    def with_head(self, head: GridState) -> "CylinderState":
        return CylinderState(head, self.tail)

    def norm(self) -> float:
        return cylinder_norm(self)

    def __rmul__(self, c) -> "CylinderState":
        return self.with_head(complex(c) * self.head)

    def _combine(self, other: "CylinderState", sign: int) -> "CylinderState":
        if not tails_identical(self.tail, other.tail):
            raise ValueError("linear combinations need a common tail")
        return self.with_head(self.head + other.head if sign > 0 else self.head - other.head)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)


def tensor(f: GridState, u: CylinderState) -> CylinderState:
    """``f (x) u``: ``f`` on the first ``N`` coordinates, ``u`` shifted past them."""
    grid = f.grid.concat(u.head.grid)
    amp = np.multiply.outer(f.amp, u.head.amp)
    return CylinderState(GridState(grid, amp), u.tail.restarted(u.tail.start + f.dimension))


def absorb(u: CylinderState, grids: Sequence[Grid]) -> CylinderState:
    """Move the first ``len(grids)`` tail factors into the head by sampling."""
    if not grids:
        return u
    if u.tail.is_inert:
        raise ValueError("an inert tail has no factors to absorb")
    head = u.head
    for j, g in enumerate(grids, start=1):
        s = factor_on_grid(u.tail.factor(j), g)
        head = GridState(head.grid.concat(g), np.multiply.outer(head.amp, s.amp))
    return CylinderState(head, u.tail.dropped(len(grids)))


def _axis_grid(u: CylinderState, k: int) -> Grid:
    """Grid for coordinate ``k`` (1-based) of ``u``: a head axis or a factor grid."""
    if k <= u.dimension:
        return u.head.grid.sub([k - 1])
    return common_factor_grid(u.tail.factor(k - u.dimension))


def _align(u: CylinderState, v: CylinderState) -> tuple[CylinderState, CylinderState]:
    if u.dimension < v.dimension:
        u = absorb(u, [_axis_grid(v, k) for k in range(u.dimension + 1, v.dimension + 1)])
    elif v.dimension < u.dimension:
        v = absorb(v, [_axis_grid(u, k) for k in range(v.dimension + 1, u.dimension + 1)])
    return u, v


def cylinder_inner(u: CylinderState, v: CylinderState) -> complex:
    """``<u, v>`` = head inner product times the exact tail product.

    States split at different head dimensions are re-split by absorbing
    tail factors of the shorter one onto the other's head axes.
    """
    u, v = _align(u, v)
    t = tail_inner(u.tail, v.tail)
    if t == 0:
        return 0j
    return grid_inner(u.head, v.head) * t


def cylinder_norm(u: CylinderState) -> float:
    return grid_norm(u.head) * math.sqrt(u.tail.norm_sq())


MAX_ABSORB_SIZE = 1 << 22


def _slot_pair(u: CylinderState, v: CylinderState, slot: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Samples of slot ``slot`` (0 = head, j = tail factor j) of both states, and the cell weight."""
    if slot == 0:
        return u.head.amp, v.head.amp, u.head.grid.weight
    a, b = u.tail.factor(slot), v.tail.factor(slot)
    g = common_factor_grid(a, b)
    return factor_on_grid(a, g).amp, factor_on_grid(b, g).amp, g.weight


def _proportionality(a: np.ndarray, b: np.ndarray, rtol: float = 1e-14) -> complex | None:
    """``c`` with ``b == c * a`` to ``rtol``, else ``None``."""
    na = np.vdot(a, a).real
    if na == 0:
        return None
    c = np.vdot(a, b) / na
    if np.linalg.norm((b - c * a).ravel()) <= rtol * max(np.linalg.norm(b.ravel()), 1e-300):
        return complex(c)
    return None


def cylinder_distance(u: CylinderState, v: CylinderState) -> float:
    """``||u - v||``, computed without cancellation whenever possible.

    The states are compared slot by slot (head, then tail factors).  When
    every differing slot but one is a scalar multiple of its counterpart,
    the difference is a product state and its norm factorizes exactly.
    Otherwise the differing factors are absorbed into a common head when
    that stays small, and the Gram expansion is the last resort.
    """
    u, v = _align(u, v)
    if isinstance(u.tail, EvolvedTail) or isinstance(v.tail, EvolvedTail):
        if not tails_identical(u.tail, v.tail):
            raise UnknownTailNorm("distance between different evolved tails is not computable")
        return grid_norm(u.head - v.head) * math.sqrt(u.tail.norm_sq())
    if u.tail.start != v.tail.start or not _same_rule(u.tail.rule, v.tail.rule):
        return _gram_distance(u, v)
    n = max(len(u.tail.prefix), len(v.tail.prefix))
    u = CylinderState(u.head, u.tail.expanded(n))
    v = CylinderState(v.head, v.tail.expanded(n))
    slots = [j for j in range(1, n + 1) if not _same_factor(u.tail.factor(j), v.tail.factor(j))]
    if u.head.grid != v.head.grid:
        raise GridMismatch("heads live on different grids")
    if not np.array_equal(u.head.amp, v.head.amp):
        slots = [0] + slots
    if not slots:
        return 0.0
    pairs = {s: _slot_pair(u, v, s) for s in slots}
    scale = 1.0 + 0j
    free = []
    for s in slots:
        c = _proportionality(pairs[s][0], pairs[s][1])
        if c is None:
            free.append(s)
        else:
            scale *= c
    if len(free) <= 1:
        # u - v = (rest) (x) (a - scale * b') where b = scale_s * a on the parallel slots
        target = free[0] if free else slots[0]
        a, b, w = pairs[target]
        if not free:
            b = a  # every slot parallel: v = scale * u
        d = math.sqrt(sorted_sum(np.abs(a - scale * b) ** 2) * w) if free else abs(1 - scale) * math.sqrt(
            sorted_sum(np.abs(a) ** 2) * w
        )
        rest = 1.0
        for s in range(0, n + 1):
            if s == target:
                continue
            if s == 0:
                rest *= grid_norm(u.head) ** 2
            else:
                rest *= factor_norm_sq(u.tail.factor(s))
        return d * math.sqrt(rest)
    last = max(slots)
    grids = [common_factor_grid(u.tail.factor(j), v.tail.factor(j)) for j in range(1, last + 1)]
    size = u.head.amp.size * math.prod(g.points[0] for g in grids)
    if size > MAX_ABSORB_SIZE:
        return _gram_distance(u, v)
    ua, va = absorb(u, grids), absorb(v, grids)
    return grid_norm(ua.head - va.head) * math.sqrt(ua.tail.norm_sq())


def _gram_distance(u: CylinderState, v: CylinderState) -> float:
    uu, vv = cylinder_inner(u, u).real, cylinder_inner(v, v).real
    return math.sqrt(max(uu + vv - 2 * cylinder_inner(u, v).real, 0.0))


# --------------------------------------------------------------------------
# the uncountable orthonormal family


@dataclass(frozen=True)
class BinaryAddress:
    """0/1 sequence: explicit ``prefix`` then ``eventual`` forever."""

    prefix: tuple = ()
    eventual: int = 0

    def __post_init__(self):
        bits = tuple(int(b) for b in self.prefix)
        if any(b not in (0, 1) for b in bits + (int(self.eventual),)):
            raise ValueError("address entries must be 0 or 1")
        object.__setattr__(self, "prefix", bits)
        object.__setattr__(self, "eventual", int(self.eventual))

    def __getitem__(self, n: int) -> int:
        return self.prefix[n - 1] if n <= len(self.prefix) else self.eventual

    @classmethod
    def all_prefixes(cls, depth: int, eventual: int = 0) -> list["BinaryAddress"]:
        return [cls(tuple((i >> (depth - 1 - j)) & 1 for j in range(depth)), eventual) for i in range(2**depth)]


def build_family(addr: BinaryAddress, law: ScaleLaw = ScaleLaw(), profile: Profile = BUMP) -> CylinderState:
    """The pure-tail state ``prod_n (L_n^-1 f(x_n/L_n^2 - addr(n)))^2 dx_n``."""
    if not law.derivative_summable:
        raise DivergentScaleLaw(f"sum of L_n^-4 diverges for exponent {law.exponent}")
    prefix = tuple(ClosedFactor(profile, law(n), addr[n]) for n in range(1, len(addr.prefix) + 1))
    return CylinderState.pure_tail(TailProduct(prefix, TailRule(profile, law, float(addr.eventual))))


# --------------------------------------------------------------------------
# contractions


def contract_head(f: GridState, v: CylinderState) -> CylinderState:
    """``f <>_N v``: the state ``w`` with ``<f (x) u, v> = <u, w>`` for all ``u``."""
    n = f.dimension
    if v.dimension < n:
        if v.tail.is_inert:
            raise ValueError(f"head dimension {v.dimension} < {n}")
        v = absorb(v, [f.grid.sub([i]) for i in range(v.dimension, n)])
    if v.head.grid.sub(range(n)) != f.grid:
        raise GridMismatch("f must live on the first axes of v's head grid")
    amp = np.tensordot(np.conj(f.amp), v.head.amp, axes=(list(range(n)), list(range(n)))) * f.grid.weight
    rest = v.head.grid.sub(range(n, v.dimension))
    return CylinderState(GridState(rest, amp), v.tail.restarted(v.tail.start - n))


def contract_tail(u: CylinderState, v: CylinderState, n: int) -> GridState:
    """``u <>_inf v``: the ``g`` on ``R^n`` with ``<f (x) u, v> = <f, g>`` for all ``f``."""
    if v.dimension < n:
        if v.tail.is_inert:
            raise ValueError(f"head dimension {v.dimension} < {n}")
        raise ValueError("v's head must cover the first n coordinates; absorb tail factors first")
    m = v.dimension - n
    if u.dimension > m:
        v = absorb(v, [_axis_grid(u, k) for k in range(m + 1, u.dimension + 1)])
    elif u.dimension < m:
        u = absorb(u, [v.head.grid.sub([n + k - 1]) for k in range(u.dimension + 1, m + 1)])
    m = u.dimension
    if v.head.grid.sub(range(n, n + m)) != u.head.grid:
        raise GridMismatch("u's head grid must match the trailing axes of v's head")
    t = tail_inner(v.tail.restarted(v.tail.start - n), u.tail)
    axes_v = list(range(n, n + m))
    amp = np.tensordot(v.head.amp, np.conj(u.head.amp), axes=(axes_v, list(range(m)))) * u.head.grid.weight
    return GridState(v.head.grid.sub(range(n)), amp * t)


# --------------------------------------------------------------------------
# text form of tails


def _grid_json(g: Grid) -> dict:
    return {"lengths": list(g.lengths), "points": list(g.points), "centers": list(g.centers)}


def _factor_json(f: Factor) -> dict:
    if isinstance(f, ClosedFactor):
        return {"kind": "closed", "profile": f.profile.name, "scale": f.scale, "offset": f.offset}
    amp = f.state.amp
    return {"kind": "sampled", "grid": _grid_json(f.grid), "re": amp.real.tolist(), "im": amp.imag.tolist()}


def _factor_from_json(d: dict) -> Factor:
    if d["kind"] == "closed":
        return ClosedFactor(get_profile(d["profile"]), d["scale"], d["offset"])
    if d["kind"] == "sampled":
        g = d["grid"]
        grid = Grid(tuple(g["lengths"]), tuple(g["points"]), tuple(g["centers"]))
        return SampledFactor(GridState(grid, np.array(d["re"]) + 1j * np.array(d["im"])))
    raise ValueError(f"unknown factor kind {d['kind']!r}")


def tail_to_json(t: TailProduct) -> str:
    """Canonical JSON text of a tail (sorted keys, shortest float repr)."""
    rule = None
    if t.rule is not None:
        rule = {
            "profile": t.rule.profile.name,
            "law": {"name": "power", "coef": t.rule.law.coef, "exponent": t.rule.law.exponent},
            "offset": t.rule.offset,
            "skip": t.rule.skip,
        }
    doc = {
        "format": "tail-product",
        "version": TAIL_FORMAT_VERSION,
        "start": t.start,
        "prefix": [_factor_json(f) for f in t.prefix],
        "rule": rule,
    }
    return json.dumps(doc, sort_keys=True)


def tail_from_json(text: str) -> TailProduct:
    doc = json.loads(text)
    if doc.get("format") != "tail-product" or doc.get("version") != TAIL_FORMAT_VERSION:
        raise ValueError("not a version-1 tail-product document")
    rule = None
    if doc["rule"] is not None:
        r = doc["rule"]
        if r["law"]["name"] != "power":
            raise ValueError(f"unknown scale law {r['law']['name']!r}")
        law = ScaleLaw(r["law"]["coef"], r["law"]["exponent"])
        rule = TailRule(get_profile(r["profile"]), law, r["offset"], int(r.get("skip", 0)))
    return TailProduct(tuple(_factor_from_json(f) for f in doc["prefix"]), rule, int(doc["start"]))
