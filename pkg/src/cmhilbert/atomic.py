"""Square-root-density calculus on finitely supported complex measures.

A complex measure ``u`` is written as ``u = f|f| dmu`` for a base measure
``mu`` and an amplitude ``f``.  Sums, scalar multiples and inner products are
taken on the amplitudes over a common dominating base, which for atomic
measures is just the union of the supports with unit weights.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "eta",
    "zeta",
    "BaseMeasure",
    "AtomicState",
    "DimensionMismatch",
    "refine",
    "rebase",
    "add",
    "sub",
    "scale",
    "inner_measure",
    "inner",
    "norm",
    "total_variation",
    "measure_values",
    "allclose",
    "zero_state",
    "point_mass",
    "to_csv",
    "from_csv",
]


class DimensionMismatch(ValueError):
    pass


def eta(z):
    """Squaring map ``z -> z|z|``; works elementwise on arrays."""
    return z * np.abs(z)


def zeta(w):
    """Inverse of :func:`eta`: ``w -> w / sqrt(|w|)`` and ``0 -> 0``."""
    w = np.asarray(w, dtype=complex)
    mod = np.abs(w)
    out = np.zeros_like(w)
    nz = mod > 0
    out[nz] = w[nz] / np.sqrt(mod[nz])
    return out[()] if out.ndim == 0 else out


def fsum_complex(values) -> complex:
    values = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BaseMeasure:
    """Atomic positive measure ``sum_i weights[i] * delta(points[i])``."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        w = np.array(self.weights, dtype=float)
        if pts.ndim != 2:
            raise ValueError("points must be a (m, d) array")
        if pts.shape[1] < 1:
            raise ValueError("dimension must be positive")
        if w.shape != (pts.shape[0],):
            raise ValueError("one weight per point required")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if not (np.all(np.isfinite(w)) and np.all(w > 0)):
            raise ValueError("weights must be finite and strictly positive")
        if len({tuple(p) for p in pts.tolist()}) != len(pts):
            raise ValueError("points must be distinct")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.weights)

    def keys(self) -> list[tuple]:
        return [tuple(p) for p in self.points.tolist()]


@dataclass(frozen=True)
class AtomicState:
    """The complex measure ``sum_i eta(amp[i]) * weight[i] * delta(point[i])``."""

    base: BaseMeasure
    amp: np.ndarray

    def __post_init__(self):
        a = np.array(self.amp, dtype=complex).reshape(-1)
        if a.shape != (len(self.base),):
            raise ValueError("one amplitude per atom required")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amp", _frozen(a))

    @classmethod
    def from_arrays(cls, points, weights, amp) -> "AtomicState":
        return cls(BaseMeasure(points, weights), amp)

    @property
    def dimension(self) -> int:
        return self.base.dimension

    @property
    def points(self) -> np.ndarray:
        return self.base.points

    @property
    def weights(self) -> np.ndarray:
        return self.base.weights

    def values(self) -> np.ndarray:
        """Per-atom measure values ``eta(amp) * weight``."""
        return eta(self.amp) * self.base.weights

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return scale(-1, self)

    def __rmul__(self, c):
        return scale(c, self)


def zero_state(dimension: int) -> AtomicState:
    return AtomicState(BaseMeasure(np.zeros((0, dimension)), np.zeros(0)), np.zeros(0))


def point_mass(point: Sequence[float], amp: complex = 1.0, weight: float = 1.0) -> AtomicState:
    return AtomicState(BaseMeasure([list(point)], [weight]), [amp])


def _check_dims(a: AtomicState, b: AtomicState) -> None:
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"dimension {a.dimension} != {b.dimension}")


def refine(a: AtomicState, b: AtomicState):
    """Common dominating base for ``a`` and ``b``.

    Returns ``(nu, fa, fb)`` where ``nu`` carries unit weight on the union of
    both supports and ``fa|fa| dnu``, ``fb|fb| dnu`` reproduce ``a`` and ``b``.
    Atoms of ``a`` come first, in their original order, then the atoms of
    ``b`` not already present.
    """
    _check_dims(a, b)
    index: dict[tuple, int] = {}
    points: list = []
    for key in a.base.keys() + b.base.keys():
        if key not in index:
            index[key] = len(points)
            points.append(key)
    m = len(points)
    fa = np.zeros(m, dtype=complex)
    fb = np.zeros(m, dtype=complex)
    # zeta(eta(f) * w) == f * sqrt(w); the latter avoids a needless round trip
    fa[[index[k] for k in a.base.keys()]] = a.amp * np.sqrt(a.base.weights)
    fb[[index[k] for k in b.base.keys()]] = b.amp * np.sqrt(b.base.weights)
    pts = np.array(points, dtype=float).reshape(m, a.dimension)
    return BaseMeasure(pts, np.ones(m)), fa, fb


def rebase(u: AtomicState, base: BaseMeasure) -> AtomicState:
    """Express ``u`` on a larger ``base`` whose support contains u's support."""
    if base.dimension != u.dimension:
        raise DimensionMismatch(f"dimension {base.dimension} != {u.dimension}")
    index = {k: i for i, k in enumerate(base.keys())}
    f = np.zeros(len(base), dtype=complex)
    for key, amp, w in zip(u.base.keys(), u.amp, u.base.weights):
        try:
            i = index[key]
        except KeyError:
            raise ValueError(f"atom {key} is not in the new base") from None
        f[i] = amp * math.sqrt(w / base.weights[i])
    return AtomicState(base, f)


def add(a: AtomicState, b: AtomicState) -> AtomicState:
    nu, fa, fb = refine(a, b)
    return AtomicState(nu, fa + fb)


def sub(a: AtomicState, b: AtomicState) -> AtomicState:
    nu, fa, fb = refine(a, b)
    return AtomicState(nu, fa - fb)


def scale(c: complex, u: AtomicState) -> AtomicState:
    return AtomicState(u.base, complex(c) * u.amp)


def inner_measure(a: AtomicState, b: AtomicState) -> tuple[np.ndarray, np.ndarray]:
    """The complex measure ``f_a conj(f_b) dnu`` as ``(points, values)``."""
    nu, fa, fb = refine(a, b)
    return nu.points, fa * np.conj(fb) * nu.weights


def inner(a: AtomicState, b: AtomicState) -> complex:
    """Inner product, linear in the first slot."""
    _, values = inner_measure(a, b)
    return fsum_complex(values)


def norm(u: AtomicState) -> float:
    return math.sqrt(math.fsum(np.abs(u.amp) ** 2 * u.base.weights))


def total_variation(u: AtomicState) -> float:
    return math.fsum(np.abs(eta(u.amp)) * u.base.weights)


def measure_values(u: AtomicState) -> dict[tuple, complex]:
    return dict(zip(u.base.keys(), u.values().tolist()))


def allclose(a: AtomicState, b: AtomicState, atol: float = 1e-12) -> bool:
    """Equality of the represented measures, atom by atom."""
    _check_dims(a, b)
    va, vb = measure_values(a), measure_values(b)
    for key in va.keys() | vb.keys():
        if abs(va.get(key, 0.0) - vb.get(key, 0.0)) > atol:
            return False
    return True


_CSV_TAIL = ("weight", "re", "im")


def to_csv(u: AtomicState) -> str:
    """Plain-text CSV: header ``x1..xd,weight,re,im`` then one row per atom.

    Floats are written with ``repr`` (shortest round-trip form), so reading
    the text back reproduces every bit.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{i + 1}" for i in range(u.dimension)] + list(_CSV_TAIL))
    for p, w, a in zip(u.base.points.tolist(), u.base.weights.tolist(), u.amp.tolist()):
        writer.writerow([repr(x) for x in p] + [repr(w), repr(a.real), repr(a.imag)])
    return buf.getvalue()


def from_csv(text: str | Iterable[str]) -> AtomicState:
    lines = text.splitlines() if isinstance(text, str) else list(text)
    rows = list(csv.reader(lines))
    if not rows:
        raise ValueError("empty atomic-state text")
    header = rows[0]
    d = len(header) - len(_CSV_TAIL)
    if d < 1 or tuple(header[d:]) != _CSV_TAIL or header[:d] != [f"x{i + 1}" for i in range(d)]:
        raise ValueError(f"bad atomic-state header: {header}")
    data = np.array([[float(x) for x in row] for row in rows[1:] if row], dtype=float)
    data = data.reshape(-1, d + 3)
    return AtomicState(BaseMeasure(data[:, :d], data[:, d]), data[:, d + 1] + 1j * data[:, d + 2])
