"""Periodic quadrature grids, a unitary DFT and Fourier multipliers.

Conventions
-----------
Axis ``i`` of a :class:`Grid` has ``n_i`` nodes ``center_i + j*h_i - L_i/2``
with ``h_i = L_i/n_i``; every node carries the weight ``prod_i h_i``.  The
frequency lattice is ``xi = 2*pi*k/L`` for ``k = -n/2 .. n/2-1`` (stored in
numpy FFT order).  A shift by ``a`` sends ``f(x)`` to ``f(x - a)``, i.e. the
multiplier ``exp(-i xi.a)``.

A zero-dimensional grid is allowed; it has one node of weight 1 and models
the scalar head of a pure-tail cylinder state.
"""
from __future__ import annotations

import cmath
import io
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .atomic import eta

__all__ = [
    "Grid",
    "GridState",
    "GridMismatch",
    "sorted_sum",
    "grid_inner",
    "grid_norm",
    "dft",
    "idft",
    "fourier_multiplier",
    "lattice_shift",
    "spectral_shift",
    "GaussianWave",
    "heat_1d_oracle",
    "schrodinger_1d_oracle",
    "gaussian_overlap",
    "grid_to_text",
    "grid_from_text",
]


class GridMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    lengths: tuple[float, ...] = ()
    points: tuple[int, ...] = ()
    centers: tuple[float, ...] | None = None

    def __post_init__(self):
        lengths = tuple(float(x) for x in self.lengths)
        points = tuple(int(n) for n in self.points)
        centers = (0.0,) * len(lengths) if self.centers is None else tuple(float(c) for c in self.centers)
        if not (len(lengths) == len(points) == len(centers)):
            raise ValueError("lengths, points and centers must have equal length")
        for L, n in zip(lengths, points):
            if not L > 0:
                raise ValueError("axis length must be positive")
            if n < 2 or n & (n - 1):
                raise ValueError(f"points per axis must be a power of two >= 2, got {n}")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "centers", centers)

    @classmethod
    def cube(cls, dimension: int, length: float, points: int) -> "Grid":
        return cls((length,) * dimension, (points,) * dimension)

    @property
    def dimension(self) -> int:
        return len(self.points)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.points))

    @property
    def weight(self) -> float:
        return math.prod(self.spacing)

    @property
    def volume(self) -> float:
        return math.prod(self.lengths)

    def axis(self, i: int) -> np.ndarray:
        h = self.lengths[i] / self.points[i]
        return self.centers[i] + np.arange(self.points[i]) * h - self.lengths[i] / 2

    def frequencies(self, i: int) -> np.ndarray:
        """Angular frequencies of axis ``i`` in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.points[i], d=self.spacing[i])

    def mesh(self) -> list[np.ndarray]:
        """Open (broadcastable) mesh of node coordinates."""
        return list(np.ix_(*[self.axis(i) for i in range(self.dimension)])) if self.dimension else []

    def freq_mesh(self) -> list[np.ndarray]:
        return list(np.ix_(*[self.frequencies(i) for i in range(self.dimension)])) if self.dimension else []

    def xi_squared(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for xi in self.freq_mesh():
            out = out + xi**2
        return out

    def concat(self, other: "Grid") -> "Grid":
        return Grid(self.lengths + other.lengths, self.points + other.points, self.centers + other.centers)

    def sub(self, axes: Sequence[int]) -> "Grid":
        return Grid(
            tuple(self.lengths[i] for i in axes),
            tuple(self.points[i] for i in axes),
            tuple(self.centers[i] for i in axes),
        )

    def sample(self, func: Callable[..., np.ndarray]) -> "GridState":
        """Sample ``func(x1, ..., xN)`` (broadcasting over an open mesh)."""
        values = np.broadcast_to(np.asarray(func(*self.mesh()), dtype=complex), self.shape)
        return GridState(self, values)


@dataclass(frozen=True)
class GridState:
    """Square-root density sampled on a grid; represents ``f|f| dx``."""

    grid: Grid
    amp: np.ndarray

    def __post_init__(self):
        a = np.array(self.amp, dtype=complex)
        if a.shape != self.grid.shape:
            raise ValueError(f"amplitude shape {a.shape} does not match grid {self.grid.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "amp", a)

    @classmethod
    def scalar(cls, value: complex = 1.0) -> "GridState":
        return cls(Grid(), np.asarray(value, dtype=complex))

    @property
    def dimension(self) -> int:
        return self.grid.dimension

    def values(self) -> np.ndarray:
        """Per-cell measure values ``eta(amp) * w``."""
        return eta(self.amp) * self.grid.weight

    def norm(self) -> float:
        return grid_norm(self)

    def with_amp(self, amp) -> "GridState":
        return GridState(self.grid, amp)

    def _check(self, other: "GridState") -> None:
        if self.grid != other.grid:
            raise GridMismatch(f"{self.grid} != {other.grid}")

    def __add__(self, other: "GridState") -> "GridState":
        self._check(other)
        return self.with_amp(self.amp + other.amp)

    def __sub__(self, other: "GridState") -> "GridState":
        self._check(other)
        return self.with_amp(self.amp - other.amp)

    def __neg__(self) -> "GridState":
        return self.with_amp(-self.amp)

    def __rmul__(self, c) -> "GridState":
        return self.with_amp(complex(c) * self.amp)

    def __truediv__(self, c) -> "GridState":
        return self.with_amp(self.amp / c)


def sorted_sum(values) -> float:
    """Sum of real terms sorted first, so only the multiset of terms matters."""
    return float(np.sum(np.sort(np.asarray(values, dtype=float).ravel())))


def grid_inner(a: GridState, b: GridState) -> complex:
    """Quadrature inner product ``sum f conj(g) w``, linear in ``a``.

    Terms are sorted before summing, so the value does not depend on the
    order of the nodes and circular shifts preserve it bit for bit.
    """
    a._check(b)
    p = a.amp * np.conj(b.amp)
    return complex(sorted_sum(p.real), sorted_sum(p.imag)) * a.grid.weight


def grid_norm(a: GridState) -> float:
    return math.sqrt(sorted_sum(np.abs(a.amp) ** 2) * a.grid.weight)


def dft(s: GridState) -> GridState:
    """Unitary DFT of the samples (coefficients stored on the same grid)."""
    if s.dimension == 0:
        return s
    return s.with_amp(np.fft.fftn(s.amp, norm="ortho"))


def idft(s: GridState) -> GridState:
    if s.dimension == 0:
        return s
    return s.with_amp(np.fft.ifftn(s.amp, norm="ortho"))


def fourier_multiplier(m, s: GridState) -> GridState:
    """Apply ``ifft(m(xi) * fft(amp))``.

    ``m`` is either an array on the frequency lattice (FFT order) or a
    callable ``m(xi_1, ..., xi_N)`` evaluated on the open frequency mesh.
    """
    g = s.grid
    mult = m(*g.freq_mesh()) if callable(m) else m
    if g.dimension == 0:
        return s.with_amp(complex(np.asarray(mult)) * s.amp)
    mult = np.broadcast_to(np.asarray(mult), g.shape)
    return s.with_amp(np.fft.ifftn(mult * np.fft.fftn(s.amp)))


def lattice_shift(s: GridState, steps: Sequence[int]) -> GridState:
    """Translate by ``steps[i] * h_i`` along each axis (circularly)."""
    steps = tuple(int(k) for k in steps)
    if len(steps) != s.dimension:
        raise ValueError("one step count per axis required")
    if not any(steps):
        return s
    return s.with_amp(np.roll(s.amp, steps, axis=tuple(range(s.dimension))))


def spectral_shift(s: GridState, a: Sequence[float]) -> GridState:
    """Translate by an arbitrary real vector via the phase ``exp(-i xi.a)``."""
    a = [float(x) for x in a]
    if len(a) != s.dimension:
        raise ValueError("one shift per axis required")
    if not any(a):
        return s

    def phase(*xi):
        total = 0
        for x, ai in zip(xi, a):
            total = total + x * ai
        return np.exp(-1j * total)

    return fourier_multiplier(phase, s)


@dataclass(frozen=True)
class GaussianWave:
    """``prefactor * exp(-(x - center)^2 / (2 * variance))`` in one dimension.

    ``variance`` may be complex (Schrödinger evolution); ``Re(variance) > 0``.
    """

    variance: complex
    prefactor: complex
    center: float = 0.0

    def __call__(self, x):
        return self.prefactor * np.exp(-((x - self.center) ** 2) / (2 * self.variance))

    def norm_squared(self) -> float:
        v = self.variance
        # |exp(-x^2/(2v))|^2 = exp(-x^2 Re(1/v))
        return abs(self.prefactor) ** 2 * math.sqrt(math.pi / (1 / v).real)

    @classmethod
    def normalized(cls, sigma: float, center: float = 0.0) -> "GaussianWave":
        """Unit-norm wave ``(pi sigma^2)^(-1/4) exp(-x^2 / (2 sigma^2))``."""
        return cls(sigma**2, (math.pi * sigma**2) ** -0.25, center)


def heat_1d_oracle(sigma: float, t: float, center: float = 0.0) -> GaussianWave:
    """Closed form of ``exp(t d^2/dx^2)`` applied to ``GaussianWave.normalized(sigma)``.

    The variance parameter grows to ``sigma^2 + 2t`` and the amplitude drops
    by ``sigma / sqrt(sigma^2 + 2t)``.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    if t < 0:
        raise ValueError("heat evolution needs t >= 0")
    g = GaussianWave.normalized(sigma, center)
    v = sigma**2 + 2 * t
    return GaussianWave(v, g.prefactor * sigma / math.sqrt(v), center)


def schrodinger_1d_oracle(sigma: float, t: float, center: float = 0.0) -> GaussianWave:
    """Closed form of ``exp(i t d^2/dx^2)`` on ``GaussianWave.normalized(sigma)``."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    g = GaussianWave.normalized(sigma, center)
    v = sigma**2 + 2j * t
    return GaussianWave(v, g.prefactor * sigma / cmath.sqrt(v), center)


def gaussian_overlap(f: GaussianWave, g: GaussianWave) -> complex:
    """``integral f(x) conj(g(x)) dx`` over the real line, in closed form."""
    p = 1 / (2 * f.variance) + 1 / (2 * np.conj(g.variance))
    q = f.center / f.variance + g.center / np.conj(g.variance)
    r = f.center**2 / (2 * f.variance) + g.center**2 / (2 * np.conj(g.variance))
    return complex(f.prefactor * np.conj(g.prefactor) * cmath.sqrt(math.pi / p) * cmath.exp(q**2 / (4 * p) - r))


def grid_to_text(s: GridState) -> str:
    """Canonical text form: ``#`` header lines, then ``re,im`` rows in C order."""
    g = s.grid
    buf = io.StringIO()
    buf.write("# gridstate v1\n")
    buf.write(f"# N={g.dimension}\n")
    buf.write("# lengths=" + ",".join(repr(x) for x in g.lengths) + "\n")
    buf.write("# points=" + ",".join(str(n) for n in g.points) + "\n")
    buf.write("# centers=" + ",".join(repr(x) for x in g.centers) + "\n")
    buf.write("re,im\n")
    for z in s.amp.ravel().tolist():
        buf.write(f"{z.real!r},{z.imag!r}\n")
    return buf.getvalue()


def grid_from_text(text: str) -> GridState:
    header: dict[str, str] = {}
    rows: list[str] = []
    lines = iter(text.splitlines())
    for line in lines:
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                header[key.strip()] = value.strip()
            continue
        if line.strip() != "re,im":
            raise ValueError(f"expected 're,im' header, got {line!r}")
        rows = [row for row in lines if row.strip()]
        break
    try:
        n_dim = int(header["N"])
        parse = lambda key, typ: tuple(typ(x) for x in header[key].split(",") if x)  # noqa: E731
        grid = Grid(parse("lengths", float), parse("points", int), parse("centers", float))
    except KeyError as exc:
        raise ValueError(f"missing grid header field {exc}") from None
    if grid.dimension != n_dim:
        raise ValueError("header N disagrees with axis data")
    data = np.array([[float(x) for x in row.split(",")] for row in rows], dtype=float).reshape(-1, 2)
    amp = (data[:, 0] + 1j * data[:, 1]).reshape(grid.shape)
    return GridState(grid, amp)
