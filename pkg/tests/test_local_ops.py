import math

import numpy as np
import pytest

from asqg.ansatz import sample_ansatz
from asqg.errors import DegenerateFit, UnderResolved
from asqg.local_ops import (
    bar_lambda,
    bar_v_r,
    commutator_defect,
    commutator_envelope,
    fit_rate,
    local_symbol,
    operator_error,
    pointwise_multiplier,
    radial_component,
    STANDARD_GRID,
    standard_family,
    surrogate_constant,
)
from asqg.quadrature import K_alpha
from asqg.radial import bump_profile
from asqg.spectral import Grid, riesz_velocity

GRID = STANDARD_GRID


def test_surrogate_constants():
    assert surrogate_constant(-0.5) == 1.0 and surrogate_constant(0.5) == 1.0
    assert surrogate_constant(-1, "kernel") == pytest.approx(2 * math.pi)
    assert surrogate_constant(-0.5, "kernel") == pytest.approx(K_alpha(0.5))
    assert surrogate_constant(0.5, "kernel") == pytest.approx(1 / K_alpha(0.5))


def test_local_symbol_formula():
    a = standard_family()(10)
    r = np.array([0.8, 1.0, 1.3])
    expected = (10 / r) ** 2 + (10 * 0.6 * (r - 1)) ** 2
    assert np.allclose(local_symbol(a, r), expected, rtol=1e-13)


def test_multiplier_vanishes_off_support():
    a = standard_family()(8)
    m = pointwise_multiplier(a, GRID, -0.5)
    r, _ = GRID.polar
    assert np.all(m[(r < 0.6) | (r > 1.4)] == 0)
    assert np.all(m[(r > 0.7) & (r < 1.3)] > 0)
    with pytest.raises(ValueError):
        pointwise_multiplier(a, GRID, 0.0)


def test_resolution_is_enforced():
    with pytest.raises(UnderResolved):
        bar_lambda(standard_family()(200), GRID, -0.5)


@pytest.mark.parametrize("which", ["lambda_minus_alpha", "lambda_plus_alpha", "radial_velocity"])
def test_surrogate_error_shrinks_relative_to_the_operator(which):
    # error relative to the size of the exact output goes down as N doubles
    fam = standard_family()
    out = []
    for N in (8, 16, 32):
        a = fam(N)
        scale = {"lambda_minus_alpha": N**-0.5, "lambda_plus_alpha": N**0.5, "radial_velocity": 1.0}[which]
        out.append(operator_error(a, GRID, which) / scale)
    assert out[2] < out[1] < out[0]


def test_radial_velocity_surrogate_sign_and_size():
    a = standard_family()(32)
    w = sample_ansatz(a, GRID)
    exact = radial_component(riesz_velocity(w))
    approx = bar_v_r(a, GRID).physical
    corr = np.sum(exact * approx) / math.sqrt(np.sum(exact**2) * np.sum(approx**2))
    assert corr > 0.99


def test_fit_rate_on_exact_power_law():
    N = [8, 16, 32, 64]
    fit = fit_rate(N, [3.0 * n**-1.5 for n in N])
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert fit.r2 == pytest.approx(1.0)
    assert len(fit.rows()) == 4


def test_fit_rate_guards():
    with pytest.raises(DegenerateFit):
        fit_rate([8, 16, 32], [1.0, 0.5, 0.25])
    with pytest.raises(DegenerateFit):
        fit_rate([8, 16, 32, 64], [1.0, 0.0, 0.25, 0.1])
    with pytest.raises(DegenerateFit):
        fit_rate([8, 16, 32, 64], [1.0, 0.1, 1.0, 0.1])
    with pytest.raises(ValueError):
        fit_rate([8, 8, 32, 64], [1.0, 0.5, 0.25, 0.1])
    fit = fit_rate([8, 16, 32, 64, 128], [1.0, 0.5, 0.25, 0.125, 1e-17], floor=1e-15)
    assert fit.excluded == [128] and fit.slope == pytest.approx(-1.0)


def test_commutator_defect_shrinks_and_checks_envelope():
    fam = standard_family()
    env = commutator_envelope()
    d = [commutator_defect(fam(N), env, "sin", 1, GRID) for N in (8, 16, 32)]
    assert d[2] < d[1] < d[0]
    with pytest.raises(ValueError):
        commutator_defect(fam(8), bump_profile(1.0, 0.5, 0.5), "sin", 1, GRID)
    with pytest.raises(ValueError):
        commutator_defect(fam(8), env, "sin", 3, GRID)
