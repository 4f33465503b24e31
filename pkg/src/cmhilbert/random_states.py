"""Seeded generators of random atomic, grid and cylinder states."""
from __future__ import annotations

import numpy as np

from .atomic import AtomicState, BaseMeasure
from .cylinder import BinaryAddress, CylinderState, build_family, tensor
from .grid import Grid, GridState, grid_norm


def random_atomic(rng: np.random.Generator, dimension: int = 2, max_atoms: int = 6, lattice: int = 4) -> AtomicState:
    """Random state with atoms on ``{0..lattice-1}^dimension`` so supports overlap often."""
    m = int(rng.integers(1, max_atoms + 1))
    cells = rng.choice(lattice**dimension, size=min(m, lattice**dimension), replace=False)
    pts = np.array(np.unravel_index(cells, (lattice,) * dimension), dtype=float).T
    weights = rng.uniform(0.1, 2.0, size=len(cells))
    amp = rng.normal(size=len(cells)) + 1j * rng.normal(size=len(cells))
    return AtomicState(BaseMeasure(pts, weights), amp)


def random_complex(rng: np.random.Generator, size: int = 1, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.normal(size=size) + 1j * rng.normal(size=size))


def random_bandlimited(rng: np.random.Generator, grid: Grid, bandwidth: int = 8, normalize: bool = True) -> GridState:
    """Random head whose Fourier coefficients vanish outside ``|k| <= bandwidth`` per axis."""
    coeffs = np.zeros(grid.shape, dtype=complex)
    index = tuple(np.r_[0 : bandwidth + 1, n - bandwidth : n] for n in grid.shape)
    mesh = np.ix_(*index)
    sub = tuple(len(ix) for ix in index)
    coeffs[mesh] = rng.normal(size=sub) + 1j * rng.normal(size=sub)
    s = GridState(grid, np.fft.ifftn(coeffs, norm="ortho"))
    return s / grid_norm(s) if normalize else s


def random_family_state(rng: np.random.Generator, depth: int, head: GridState | None = None) -> CylinderState:
    """``head (x) u_tau`` for a random address of the given prefix depth."""
    addr = BinaryAddress(tuple(int(b) for b in rng.integers(0, 2, size=depth)), int(rng.integers(0, 2)))
    u = build_family(addr)
    return u if head is None else tensor(head, u)
