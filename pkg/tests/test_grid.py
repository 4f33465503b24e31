import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmhilbert.grid import (
    GaussianWave,
    Grid,
    GridMismatch,
    GridState,
    dft,
    fourier_multiplier,
    gaussian_overlap,
    grid_from_text,
    grid_inner,
    grid_norm,
    grid_to_text,
    heat_1d_oracle,
    idft,
    lattice_shift,
    schrodinger_1d_oracle,
    spectral_shift,
)
from cmhilbert.laplacian import HEAT, SCHRODINGER, evolve_head
from cmhilbert.random_states import random_bandlimited

from oracles import gaussian_amp


def test_grid_layout():
    g = Grid((4.0,), (8,), (1.0,))
    assert g.spacing == (0.5,)
    assert g.axis(0)[0] == pytest.approx(-1.0)
    assert g.axis(0)[-1] == pytest.approx(2.5)
    assert g.weight == 0.5
    assert np.allclose(sorted(g.frequencies(0)), 2 * math.pi * np.arange(-4, 4) / 4.0)


@pytest.mark.parametrize("points", [0, 3, 6, 100])
def test_non_power_of_two_rejected(points):
    with pytest.raises(ValueError):
        Grid((1.0,), (points,))


def test_zero_dimensional_grid_is_a_scalar():
    s = GridState.scalar(2 - 1j)
    assert s.grid.dimension == 0
    assert grid_inner(s, s) == pytest.approx(5.0)


def test_mismatched_grids():
    a = Grid.cube(1, 1.0, 8).sample(lambda x: x)
    b = Grid.cube(1, 2.0, 8).sample(lambda x: x)
    with pytest.raises(GridMismatch):
        grid_inner(a, b)
    with pytest.raises(GridMismatch):
        a + b


def test_trapezoid_is_spectrally_accurate_on_gaussians():
    g = Grid.cube(1, 40.0, 256)
    f = g.sample(GaussianWave.normalized(1.3, 0.4))
    assert grid_norm(f) == pytest.approx(1.0, abs=1e-14)
    h = g.sample(GaussianWave.normalized(0.7, -0.2))
    exact = gaussian_overlap(GaussianWave.normalized(1.3, 0.4), GaussianWave.normalized(0.7, -0.2))
    assert abs(grid_inner(f, h) - exact) < 1e-14


@given(st.integers(0, 2**31))
def test_dft_is_unitary(seed):
    rng = np.random.default_rng(seed)
    g = Grid.cube(2, 3.0, 16)
    a = random_bandlimited(rng, g, 7)
    b = random_bandlimited(rng, g, 7)
    # the DFT state lives on the same grid object; the node weight cancels in the ratio
    assert abs(grid_inner(dft(a), dft(b)) - grid_inner(a, b)) < 1e-13
    assert grid_norm(idft(dft(a)) - a) < 1e-14


def test_fourier_multiplier_accepts_callable_and_array():
    g = Grid.cube(1, 2 * math.pi, 32)
    f = g.sample(np.sin)
    via_call = fourier_multiplier(lambda xi: 1j * xi, f)
    via_array = fourier_multiplier(1j * g.frequencies(0), f)
    assert grid_norm(via_call - via_array) == 0.0
    assert grid_norm(via_call - g.sample(np.cos)) < 1e-13


@given(st.integers(-64, 64), st.integers(0, 2**31))
def test_lattice_shift_is_exact(k, seed):
    rng = np.random.default_rng(seed)
    g = Grid.cube(1, 2 * math.pi, 64)
    f = random_bandlimited(rng, g, 10)
    s = lattice_shift(f, [k])
    assert grid_norm(s) == grid_norm(f)
    assert np.array_equal(lattice_shift(s, [-k]).amp, f.amp)


def test_lattice_shift_direction():
    g = Grid.cube(1, 8.0, 8)
    f = g.sample(lambda x: (x == 0).astype(float))
    s = lattice_shift(f, [1])
    # f(x - h) is supported at x = h
    assert g.axis(0)[np.argmax(np.abs(s.amp))] == pytest.approx(1.0)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_spectral_shift_moves_band_limited_functions(a, b):
    g = Grid.cube(1, 2 * math.pi, 64)
    f = g.sample(lambda x: np.exp(2j * x) + 0.5 * np.cos(5 * x))
    s = spectral_shift(f, [a])
    want = g.sample(lambda x: np.exp(2j * (x - a)) + 0.5 * np.cos(5 * (x - a)))
    assert grid_norm(s - want) < 1e-12
    assert grid_norm(spectral_shift(s, [b]) - spectral_shift(f, [a + b])) < 1e-12


def test_spectral_shift_by_lattice_step_matches_roll():
    g = Grid.cube(1, 2 * math.pi, 64)
    f = random_bandlimited(np.random.default_rng(1), g, 12)
    assert grid_norm(spectral_shift(f, [3 * g.spacing[0]]) - lattice_shift(f, [3])) < 1e-13


# ---------------------------------------------------------------- Gaussian closed forms


@pytest.mark.parametrize("t", [0.0, 0.1, 0.5, 1.0, 3.0])
@pytest.mark.parametrize("sigma", [0.6, 1.0, 1.5])
def test_heat_oracle_matches_independent_closed_form(t, sigma):
    x = np.linspace(-6, 6, 101)
    assert np.max(np.abs(heat_1d_oracle(sigma, t)(x) - gaussian_amp(x, sigma, t, "heat"))) < 1e-15
    assert np.max(np.abs(schrodinger_1d_oracle(sigma, t)(x) - gaussian_amp(x, sigma, t, "schrodinger"))) < 1e-15


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
def test_spectral_heat_matches_closed_form(t):
    g = Grid.cube(1, 40.0, 256)
    f = g.sample(GaussianWave.normalized(1.0))
    ev = evolve_head(f, t, HEAT)
    want = g.sample(lambda x: gaussian_amp(x, 1.0, t, "heat"))
    assert grid_norm(ev - want) < 1e-12
    # heat loses norm: ||u_t||^2 = sigma / sqrt(sigma^2 + 2t)
    assert grid_norm(ev) ** 2 == pytest.approx(1 / math.sqrt(1 + 2 * t), rel=1e-12)


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
def test_spectral_schrodinger_matches_closed_form(t):
    g = Grid.cube(1, 60.0, 512)
    f = g.sample(GaussianWave.normalized(1.0))
    ev = evolve_head(f, t, SCHRODINGER)
    want = g.sample(lambda x: gaussian_amp(x, 1.0, t, "schrodinger"))
    assert grid_norm(ev - want) < 1e-12
    assert grid_norm(ev) == pytest.approx(1.0, abs=1e-14)


def test_heat_oracle_rejects_negative_time():
    with pytest.raises(ValueError):
        heat_1d_oracle(1.0, -0.1)


def test_gaussian_norm_squared():
    w = schrodinger_1d_oracle(0.8, 0.7)
    g = Grid.cube(1, 60.0, 512)
    assert grid_norm(g.sample(w)) ** 2 == pytest.approx(w.norm_squared(), rel=1e-13)
    assert w.norm_squared() == pytest.approx(1.0, rel=1e-14)


# ---------------------------------------------------------------- text format


def test_text_roundtrip_is_exact(rng):
    g = Grid((2.0, 3.0), (4, 8), (0.5, -1.0))
    s = random_bandlimited(rng, g, 1)
    text = grid_to_text(s)
    assert text.startswith("# gridstate v1\n")
    back = grid_from_text(text)
    assert back.grid == g
    assert np.array_equal(back.amp, s.amp)


def test_text_rejects_wrong_row_count():
    s = Grid.cube(1, 1.0, 4).sample(lambda x: x)
    text = grid_to_text(s).rsplit("\n", 2)[0] + "\n"
    with pytest.raises(ValueError):
        grid_from_text(text)
