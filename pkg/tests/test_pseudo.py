import math

import numpy as np
import pytest

from asqg.ansatz import design_base_radial
from asqg.errors import InvalidRegime, NoAdmissibleK, UnderResolved
from asqg.pseudo import (
    PseudoModel,
    PseudoParams,
    PseudoState,
    build_phase_and_damping,
    check_pseudo_resolution,
    choose_K,
    closure_residual,
    couple_inverse,
    couple_parameters,
    eval_pseudo,
    evolve_radial_heat,
    forcing_terms,
    initial_values,
    pseudowpert_residual,
)
from asqg.radial import RadialProfile
from asqg.spectral import Grid, SpectralField

GRID = Grid(1024, 1.2)


@pytest.fixture(scope="module")
def model(designed):
    return PseudoModel(PseudoParams(0.4, 1.2, 16, 4.0, K=4.0, eps_tilde=0.4), designed)


# -- parameters ----------------------------------------------------------------------------


def test_coupling_example():
    lam = couple_parameters(0.5, 1.2, 64)
    assert lam == pytest.approx((8 * math.log(64)) ** (1 / 0.3), rel=1e-14)
    assert lam == pytest.approx(1.18e5, rel=0.01)


@pytest.mark.parametrize("N", [2.5, 16, 64, 1000])
def test_coupling_round_trip(N):
    assert couple_inverse(0.5, 1.2, couple_parameters(0.5, 1.2, N)) == pytest.approx(N, rel=1e-10)


def test_coupling_is_monotone_and_checks_regime():
    lams = [couple_parameters(0.4, 1.2, N) for N in (8, 16, 32, 64)]
    assert all(b > a for a, b in zip(lams, lams[1:]))
    with pytest.raises(InvalidRegime):
        couple_parameters(0.5, 1.6, 16)


def test_params_validation():
    p = PseudoParams.from_coupling(0.4, 1.2, 16)
    assert p.coupled
    assert p.amplitude == pytest.approx(p.lam**-0.2 * 16**-1.2)
    assert p.deformation_time() == pytest.approx(p.lam**-0.8 * math.sqrt(math.log(16)))
    for bad in ({"alpha": 1.0}, {"beta": 1.7}, {"N": 4}, {"lam": 0.5}, {"K": 0.0}, {"eps_tilde": 0.6}):
        with pytest.raises(InvalidRegime):
            p.with_(**bad)
    with pytest.raises(InvalidRegime):
        PseudoParams(0.4, 1.2, 16, 5.0, coupled=True)


# -- radial evolution and phase -------------------------------------------------------------


def test_initial_state(model, designed):
    p = model.params
    s = model.state(0.0)
    assert np.all(s.G_damp.values == 0) and np.all(s.phase_shift.values == 0)
    r = np.linspace(0.05, 0.8, 16)
    assert np.allclose(s.g_bar(r), p.lam ** (1 - p.beta) * designed(p.lam * r), atol=1e-10)
    omega0 = designed.spectral.angular_velocity(p.lam * r)
    assert np.allclose(s.Theta(r), -p.K * omega0, atol=1e-10)


def test_radial_part_is_the_rescaled_heat_flow(model, designed):
    p, t = model.params, 0.1
    r = np.linspace(0.05, 0.8, 16)
    heat = evolve_radial_heat(designed, p.alpha, p.lam**p.alpha * t)
    assert np.allclose(model.state(t).g_bar(r), p.lam ** (1 - p.beta) * heat(p.lam * r), atol=1e-9)


def test_phase_moves_with_the_angular_velocity(model):
    ev, K, t, h = model.evolution, model.params.K, 0.1, 1e-5
    dtheta = (ev.theta(K, t + h) - ev.theta(K, t - h)) / (2 * h)
    assert np.allclose(dtheta, -ev.omega_bar(t), atol=1e-6 * np.max(np.abs(ev.omega_bar(t))))


def test_theta_r_is_the_radial_derivative(model):
    ev, K = model.evolution, model.params.K
    dr = model.r[1] - model.r[0]
    fd = np.gradient(ev.theta(K, 0.1), dr)
    inner = slice(10, -10)
    assert np.allclose(ev.theta_r(K, 0.1)[inner], fd[inner], atol=1e-4 * np.max(np.abs(fd)))


def test_damping_grows_and_dominates_the_angular_part(model):
    p = model.params
    r = np.linspace(0.6, 1.4, 9) / p.lam
    prev = np.zeros_like(r)
    for t in (0.05, 0.1, 0.2):
        G = model.state(t).G_damp(r)
        assert np.all(G > prev)
        assert np.all(G >= p.N**p.alpha * t * r**-p.alpha * (1 - 1e-9))
        prev = G


def test_quadrature_self_check(model):
    s = build_phase_and_damping(model.params, model.base, 0.2, model=model)
    assert s.t == 0.2


def test_state_csv_round_trip(model, tmp_path):
    s = model.state(0.1)
    s.to_csv(tmp_path / "s.csv")
    back = PseudoState.from_csv(tmp_path / "s.csv")
    assert back.t == s.t
    assert np.array_equal(back.G_damp.values, s.G_damp.values)
    assert np.array_equal(back.Theta.r, s.Theta.r)


# -- offset choice ----------------------------------------------------------------------------


def test_choose_K_on_the_designed_base(designed):
    p = PseudoParams(0.4, 1.2, 16, 4.0, eps_tilde=0.4)
    K_wide = choose_K(p, designed, 0.25)
    K_narrow = choose_K(p.with_(eps_tilde=0.2), designed, 0.25)
    assert (K_wide, K_narrow) == (4.0, 8.0)
    m = PseudoModel(p.with_(K=K_wide), designed)
    assert all(m.maximocentro_margin(t) >= 0 for t in np.linspace(0, 0.25, 8)[1:])


def test_zero_base_admits_no_offset():
    zero = design_base_radial((0.0, 0.0, 0.0))
    with pytest.raises(NoAdmissibleK):
        choose_K(PseudoParams(0.4, 1.2, 16, 4.0), zero, 0.25, max_power=4)


# -- grid evaluation --------------------------------------------------------------------------


def test_naive_and_full_agree_at_time_zero(model):
    s = model.state(0.0)
    full = eval_pseudo(model, s, GRID)
    naive = eval_pseudo(model, s, GRID, "naive")
    assert (full - naive).l2() < 1e-13 * full.l2()


def test_initial_values_match_the_grid_field(model):
    x1, x2 = GRID.mesh
    direct = SpectralField.from_physical(GRID, initial_values(model, x1, x2)).without_mean()
    grid_field = eval_pseudo(model, model.state(0.0), GRID)
    assert (direct - grid_field).l2() < 1e-10 * grid_field.l2()


def test_resolution_guard(designed):
    big = PseudoModel(PseudoParams(0.4, 1.2, 128, 4.0, K=4.0, eps_tilde=0.4), designed)
    with pytest.raises(UnderResolved):
        check_pseudo_resolution(big, big.state(0.0), Grid(256, 1.2))
    with pytest.raises(UnderResolved):
        check_pseudo_resolution(big, big.state(0.0), Grid(1024, 0.5))


def test_perturbation_equation_residual(model):
    T = model.params.T_max()
    for t in (0.25 * T, 0.75 * T):
        out = pseudowpert_residual(model, GRID, t)
        assert out["ratio"] <= 1.0


def test_closure_residual(model):
    out = closure_residual(model, GRID, 0.5 * model.params.T_max())
    assert out["ratio"] <= 1.0


def test_forcing_interaction_term_vanishes_without_base():
    zero = design_base_radial((0.0, 0.0, 0.0))
    m = PseudoModel(PseudoParams(0.4, 1.2, 16, 4.0, K=1.0, eps_tilde=0.4), zero)
    f = forcing_terms(m, m.state(0.05), GRID)
    assert f["norms"]["F3"][0] == 0.0
    assert f["norms"]["F1"][0] > 0


def test_dissipation_forcing_is_small_relative_to_dissipation(designed):
    rel = []
    for N in (8, 16, 32):
        m = PseudoModel(PseudoParams(0.4, 1.2, N, 4.0, K=4.0, eps_tilde=0.4), designed)
        s = m.state(0.05)
        f = forcing_terms(m, s, GRID)
        pert = eval_pseudo(m, s, GRID, parts=True)[1]
        rel.append(f["norms"]["F1"][0] / ((N * 4.0) ** 0.4 * pert.l2()))
    assert rel[2] < rel[1] < rel[0]
