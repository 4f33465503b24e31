import math

import numpy as np
import pytest

from cmhilbert.profiles import BOX, BUMP, PROFILES, get_profile
from cmhilbert.cylinder import ClosedFactor, factor_norm_sq

from oracles import _BUMP, bump_derivative_complex_step, bump_value


def test_bump_constants_match_mpmath():
    raw, dsq = _BUMP
    from cmhilbert import profiles

    assert profiles._BUMP_RAW_NORM_SQ == pytest.approx(raw, rel=1e-15)
    assert BUMP.deriv_norm_sq == pytest.approx(dsq, rel=1e-15)


def test_bump_values_and_derivative_against_oracle():
    ys = np.linspace(-0.2, 1.2, 57)
    assert np.allclose(BUMP.value(ys), [bump_value(y) for y in ys], rtol=1e-14, atol=0)
    d = np.array([bump_derivative_complex_step(y) for y in ys])
    assert np.max(np.abs(BUMP.derivative(ys) - d)) < 1e-12 * np.max(np.abs(d))


def test_bump_is_unit_and_flat_at_the_ends():
    n = 4096
    y = (np.arange(n) + 0.5) / n
    assert math.fsum(BUMP.value(y) ** 2) / n == pytest.approx(1.0, abs=1e-14)
    assert BUMP.value(np.array([0.0, 1.0, 1e-3]))[:2].tolist() == [0.0, 0.0]


def test_box():
    assert BOX.value(np.array([-0.1, 0.5, 1.1])).tolist() == [0.0, 1.0, 0.0]
    assert not BOX.differentiable
    with pytest.raises(ValueError):
        BOX.derivative(0.5)


@pytest.mark.parametrize("scale,offset", [(1.0, 0.0), (2.0, 1.0), (3.0, -2.5), (0.5, 7.0)])
def test_scaled_factor_keeps_unit_norm(scale, offset):
    assert factor_norm_sq(ClosedFactor(BUMP, scale, offset)) == pytest.approx(1.0, abs=1e-13)


def test_registry():
    assert set(PROFILES) == {"bump", "box"}
    assert get_profile("bump") is BUMP
    with pytest.raises(ValueError):
        get_profile("triangle")
