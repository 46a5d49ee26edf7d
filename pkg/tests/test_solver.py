import math

import numpy as np
import pytest

from asqg.errors import CheckpointIOFailure, NaNDetected, NonzeroMean, VelocityBlowup
from asqg.solver import (
    DIAG_COLUMNS,
    Observer,
    SolverConfig,
    SolverState,
    _workspace,
    half_norm_sq,
    nonlinear_term,
    read_checkpoint,
    restart,
    run,
    step,
    write_checkpoint,
)
from asqg.spectral import Grid, SpectralField, heat_semigroup

GRID = Grid(64, math.pi)


def vortices(grid=GRID, amp=1.0):
    x1, x2 = grid.mesh
    values = amp * (np.exp(-4 * ((x1 - 0.6) ** 2 + x2**2)) - np.exp(-4 * ((x1 + 0.6) ** 2 + (x2 - 0.3) ** 2))
                    + 0.3 * np.cos(x1 + 2 * x2))
    return SpectralField.from_physical(grid, values).without_mean()


def test_config_validation():
    for bad in ({"alpha": 0.0}, {"cfl": 1.5}, {"t_end": -1.0}, {"dt_max": 0.0}, {"checkpoint_every": 2}):
        with pytest.raises(ValueError):
            SolverConfig(**{"alpha": 0.5, "t_end": 1.0, **bad})


def test_initial_state_needs_zero_mean():
    x1, _ = GRID.mesh
    with pytest.raises(NonzeroMean):
        SolverState.initial(SpectralField.from_physical(GRID, 1 + np.cos(x1)))


def test_half_spectrum_norms_match_full_field():
    w = vortices()
    s = SolverState.initial(w)
    assert math.sqrt(half_norm_sq(GRID, s.half)) == pytest.approx(w.l2(), rel=1e-12)
    assert np.allclose(s.w.physical, w.physical, atol=1e-13)


def test_linear_evolution_is_exact():
    w = vortices()
    out = run(w, SolverConfig(alpha=0.7, t_end=0.37, dt_max=0.05, nonlinear=False))
    exact = heat_semigroup(w, 0.7, 0.37)
    assert (out.w - exact).l2() < 1e-13 * w.l2()


def test_single_shell_field_does_not_self_advect():
    # modes sharing one |k| give psi proportional to w, so v . grad w = 0
    x1, x2 = GRID.mesh
    values = np.cos(3 * x1 + 4 * x2) + 0.7 * np.sin(5 * x1) - 0.4 * np.cos(4 * x1 - 3 * x2 + 0.2) + np.sin(5 * x2)
    half = SolverState.initial(SpectralField.from_physical(GRID, values)).half
    term = nonlinear_term(_workspace(GRID), half)
    assert np.max(np.abs(term)) < 1e-13 * np.max(np.abs(half))


def test_self_convergence_order():
    w = vortices()
    final = lambda dt: run(w, SolverConfig(alpha=0.5, t_end=0.4, dt_max=dt, cfl=1.0)).w
    ref = final(0.0025)
    errs = [(final(dt) - ref).l2() for dt in (0.04, 0.02, 0.01)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) >= 2.5


def test_energy_identity():
    # d/dt ||w||^2 = -2 ||Lambda^{alpha/2} w||^2
    w = vortices()
    cfg = SolverConfig(alpha=0.5, t_end=0.5, dt_max=0.01)
    out = run(w, cfg)
    rows = list(out.diagnostics)
    t = np.array([0.0] + [r["t"] for r in rows])
    d = np.array([math.sqrt(half_norm_sq(GRID, SolverState.initial(w).half, 0.25))] + [r["hdot_half_alpha"] for r in rows])
    lost = 2 * np.trapezoid(d**2, t)
    drop = w.l2() ** 2 - rows[-1]["l2"] ** 2
    assert drop == pytest.approx(lost, rel=0.05)


def test_observers_fire_at_requested_times():
    seen = []
    run(vortices(), SolverConfig(alpha=0.5, t_end=0.3, dt_max=0.1),
        [Observer([0.0, 0.05, 0.3, 0.15], lambda t, w: seen.append((t, w.l2())))])
    assert [t for t, _ in seen] == [0.0, 0.05, 0.15, 0.3]
    assert all(b < a for (_, a), (_, b) in zip(seen, seen[1:]))


def test_diagnostics_file(tmp_path):
    path = tmp_path / "diag.csv"
    run(vortices(), SolverConfig(alpha=0.5, t_end=0.3, dt_max=0.1, diagnostics_path=path))
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == DIAG_COLUMNS
    assert len(lines) == 4


def test_checkpoint_restart_is_bit_exact(tmp_path):
    w = vortices()
    cfg = SolverConfig(alpha=0.5, t_end=0.4, dt_max=0.05, checkpoint_every=4, checkpoint_dir=tmp_path)
    full = run(w, cfg)
    ckpts = sorted(tmp_path.glob("ckpt_*.bin"))
    assert len(ckpts) == 2
    state, alpha = read_checkpoint(ckpts[0])
    assert alpha == 0.5 and state.t == pytest.approx(0.2)
    resumed = restart(ckpts[0], SolverConfig(alpha=0.5, t_end=0.4, dt_max=0.05))
    assert np.array_equal(resumed.half, full.half)
    assert resumed.step_count == full.step_count


def test_checkpoint_header_round_trip(tmp_path):
    s = SolverState.initial(vortices())
    s.t, s.step_count = 1.25, 17
    path = write_checkpoint(s, 0.3, tmp_path / "x.bin")
    back, alpha = read_checkpoint(path)
    assert (back.t, back.step_count, back.grid, alpha) == (1.25, 17, GRID, 0.3)
    assert np.array_equal(back.half, s.half)


def test_bad_checkpoints_are_rejected(tmp_path):
    path = write_checkpoint(SolverState.initial(vortices()), 0.5, tmp_path / "x.bin")
    data = path.read_bytes()
    (tmp_path / "short.bin").write_bytes(data[:-8])
    (tmp_path / "magic.bin").write_bytes(b"NOTACKPT" + data[8:])
    for name in ("short.bin", "magic.bin", "missing.bin"):
        with pytest.raises(CheckpointIOFailure):
            read_checkpoint(tmp_path / name)
    with pytest.raises(CheckpointIOFailure):
        restart(path, SolverConfig(alpha=0.6, t_end=0.1))


def test_non_finite_states_are_detected():
    s = SolverState.initial(vortices())
    s.half[3, 2] = np.nan
    with pytest.raises(NaNDetected):
        step(s, SolverConfig(alpha=0.5, t_end=1.0, nonlinear=False), 0.01)
    with pytest.raises(VelocityBlowup):
        run(s, SolverConfig(alpha=0.5, t_end=1.0))
