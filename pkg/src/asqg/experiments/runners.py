"""Experiment drivers. Each takes an ``ExperimentConfig`` and returns an
``ExperimentReport``; nothing here draws random numbers, so a config hash
pins the rows."""

from __future__ import annotations

import math
import time
from functools import lru_cache
from typing import Callable

import numpy as np

from ..ansatz import BaseProfile, design_base_radial
from ..errors import BoxTooSmall, ConfigError
from ..local_ops import (
    approximation_rate_sweep,
    commutator_envelope,
    commutator_sweep,
    standard_family,
)
from ..pseudo import (
    PseudoModel,
    PseudoParams,
    check_pseudo_resolution,
    choose_K,
    eval_pseudo,
    initial_values,
)
from ..quadrature import K_alpha, cos_power_integral, dirichlet_C0, sin_power_integral
from ..solver import Observer, SolverConfig, run
from ..spectral import SpectralField, sobolev_norm
from .config import ExperimentConfig, format_value
from .report import ExperimentReport, PlotSpec


@lru_cache(maxsize=1)
def designed_base() -> BaseProfile:
    return design_base_radial()


def _parameters(cfg: ExperimentConfig) -> dict[str, str]:
    return {key: format_value(cfg.values[key]) for key in sorted(cfg.values)}


def _report(cfg: ExperimentConfig, columns, rows, summary, started, plot=None) -> ExperimentReport:
    return ExperimentReport(cfg.experiment, cfg.hash, list(columns), rows, _parameters(cfg), summary,
                            time.perf_counter() - started, plot)


def _pseudo_params(cfg: ExperimentConfig, N: int, K: float = 1.0) -> PseudoParams:
    return PseudoParams(cfg["alpha"], cfg["beta"], int(N), cfg["lam"], K=K, eps_tilde=cfg["eps_tilde"])


def _model(cfg: ExperimentConfig, N: int, T: float | None = None) -> PseudoModel:
    """Model with K fixed by the config or chosen from the ladder."""
    base = designed_base()
    K = cfg["K"]
    params = _pseudo_params(cfg, N, 1.0 if K == "auto" else K)
    model = PseudoModel(params, base)
    if K == "auto":
        T = params.T_max() if T is None else T
        model = model.with_K(choose_K(params, base, T, model=model))
    return model


# -- constants ----------------------------------------------------------------------------


def run_constants(cfg: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    c0 = dirichlet_C0()
    rows = [{"alpha": a, "K_alpha": K_alpha(a), "cos_power_integral": cos_power_integral(a),
             "sin_power_integral": sin_power_integral(a), "C0": c0} for a in cfg["alpha_values"]]
    columns = ["alpha", "K_alpha", "cos_power_integral", "sin_power_integral", "C0"]
    return _report(cfg, columns, rows, {"C0": c0}, started, PlotSpec("alpha", ["K_alpha"]))


# -- surrogate rates ----------------------------------------------------------------------


RATE_OPERATORS = ("lambda_minus_alpha", "lambda_plus_alpha", "velocity", "radial_velocity", "commutator")


def run_approx_rates(cfg: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    grid = cfg.grid()
    family = standard_family(cfg["lam"])
    N_values = cfg["N_values"]
    if len(N_values) < 4:
        raise ConfigError("approx_rates needs at least four N values")
    rows, summary = [], {}
    for op in cfg["operators"]:
        if op not in RATE_OPERATORS:
            raise ConfigError(f"unknown operator {op!r}; choose from {', '.join(RATE_OPERATORS)}")
        if op == "commutator":
            fit = commutator_sweep(family, commutator_envelope(), N_values, grid)
        else:
            fit = approximation_rate_sweep(family, N_values, op, grid, alpha=cfg["alpha"])
        for N, err in zip(fit.N_values, fit.errors):
            rows.append({"operator": op, "N": N, "error": err, "slope": fit.slope, "intercept": fit.intercept,
                         "r2": fit.r2})
        summary[f"slope_{op}"] = fit.slope
        summary[f"r2_{op}"] = fit.r2
    columns = ["operator", "N", "error", "slope", "intercept", "r2"]
    return _report(cfg, columns, rows, summary, started, PlotSpec("N", ["error"], "operator", loglog=True))


# -- pseudo-solution against the solver ---------------------------------------------------


def run_pseudo_error(cfg: ExperimentConfig) -> ExperimentReport:
    """Solver started from the pseudo-solution at t = 0, compared at ``samples``
    times in [0, T_max] with the full pseudo-solution, its radial part, and the
    naive variant."""
    started = time.perf_counter()
    grid = cfg.grid()
    rows, summary = [], {}
    peaks = []
    for N in cfg["N_values"]:
        params0 = _pseudo_params(cfg, N)
        T = params0.T_max(cfg["horizon"])
        model = _model(cfg, N, T)
        p = model.params
        check_pseudo_resolution(model, model.state(T, cfg["n_quad"]), grid)
        w0 = eval_pseudo(model, model.state(0.0, cfg["n_quad"]), grid)
        yardstick = 1.0 / (N ** (p.beta + 1) * p.lam**p.beta)
        records: list[dict] = []

        def observe(t, w, model=model, N=N, yardstick=yardstick, records=records):
            state = model.state(t, cfg["n_quad"])
            radial, pert = eval_pseudo(model, state, grid, parts=True, check=False)
            naive = eval_pseudo(model, state, grid, "naive", check=False)
            records.append({
                "N": N, "t": float(t), "err_full": (w - radial - pert).l2(), "err_naive": (w - naive).l2(),
                "err_radial": (w - radial).l2(), "pert_l2": pert.l2(), "yardstick": yardstick,
            })

        times = np.linspace(0.0, T, cfg["samples"])
        run(w0, SolverConfig(alpha=p.alpha, t_end=T, dt_max=cfg["dt_max"], cfl=cfg["cfl"]),
            [Observer(times, observe)])
        rows.extend(records)
        peak = max(r["err_full"] for r in records)
        peaks.append(peak)
        summary[f"K_N{N}"] = p.K
        summary[f"T_max_N{N}"] = T
        summary[f"peak_full_N{N}"] = peak
        summary[f"naive_exceeds_full_N{N}"] = records[-1]["err_naive"] > records[-1]["err_full"]
    for (Na, a), (Nb, b) in zip(zip(cfg["N_values"], peaks), zip(cfg["N_values"][1:], peaks[1:])):
        summary[f"peak_ratio_N{Na}_N{Nb}"] = b / a if a > 0 else math.nan
    columns = ["N", "t", "err_full", "err_naive", "err_radial", "pert_l2", "yardstick"]
    return _report(cfg, columns, rows, summary, started, PlotSpec("t", ["err_full", "err_naive"], "N"))


# -- norm inflation ------------------------------------------------------------------------


def pert_h1_proxy(model: PseudoModel, t: float, n_quad: int = 32) -> float:
    """Leading-order ||wpert||_{Hdot^1}: the angular average of |xi|^2 amp^2 cos^2 over the annulus."""
    p = model.params
    state = model.state(t, n_quad)
    r = np.linspace((1 - p.eps_tilde) / p.lam, (1 + p.eps_tilde) / p.lam, 2001)
    amp = p.amplitude * model.f(p.lam * r) * np.exp(-state.G_damp(r))
    xi2 = p.N**2 * (1.0 / r**2 + state.Theta_r(r) ** 2)
    return float(np.sqrt(np.pi * np.trapezoid(amp**2 * xi2 * r, r)))


def run_norm_inflation(cfg: ExperimentConfig) -> ExperimentReport:
    """||w(t)||_{Hdot^beta} / ||w(0)||_{H^beta} up to t* = lam^{-2+beta} (ln N)^{1/2}."""
    started = time.perf_counter()
    grid = cfg.grid()
    rows, summary = [], {}
    finals = []
    for N in cfg["N_values"]:
        params0 = _pseudo_params(cfg, N)
        t_star = params0.deformation_time()
        model = _model(cfg, N, t_star)
        p = model.params
        w0 = eval_pseudo(model, model.state(0.0, cfg["n_quad"]), grid)
        base_norm = sobolev_norm(w0, p.beta)
        records: list[dict] = []

        def observe(t, w, model=model, N=N, base_norm=base_norm, records=records):
            hdot = sobolev_norm(w, model.params.beta, homogeneous=True)
            records.append({"N": N, "t": float(t), "ratio": hdot / base_norm, "hdot_beta": hdot,
                            "pert_h1_proxy": pert_h1_proxy(model, t, cfg["n_quad"])})

        times = np.linspace(0.0, t_star, cfg["samples"])
        run(w0, SolverConfig(alpha=p.alpha, t_end=t_star, dt_max=cfg["dt_max"], cfl=cfg["cfl"]),
            [Observer(times, observe)])
        rows.extend(records)
        finals.append(records[-1]["ratio"])
        summary[f"t_star_N{N}"] = t_star
        summary[f"K_N{N}"] = p.K
        summary[f"ratio_at_t_star_N{N}"] = records[-1]["ratio"]
    summary["ratio_increases_with_N"] = bool(all(b > a for a, b in zip(finals, finals[1:])))
    columns = ["N", "t", "ratio", "hdot_beta", "pert_h1_proxy"]
    return _report(cfg, columns, rows, summary, started, PlotSpec("t", ["ratio"], "N"))


# -- radial decay --------------------------------------------------------------------------


def decay_bound(alpha: float) -> float:
    return -(3 + 2 * alpha) / 3


def run_radial_decay(cfg: ExperimentConfig) -> ExperimentReport:
    """|d_r g(r, t)| of the heat-evolved base flow on [r_min, r_max], with log-log slopes.

    The evolution is exact in the radial Fourier variable, so the whole plane
    is represented; ``grid_L`` only bounds the sampled radii.
    """
    started = time.perf_counter()
    r_min, r_max = cfg["r_min"], cfg["r_max"]
    if cfg["grid_L"] < 16:
        raise ConfigError("radial_decay needs grid_L >= 16")
    if not 0 < r_min < r_max <= cfg["grid_L"]:
        raise ConfigError("need 0 < r_min < r_max <= grid_L")
    base = designed_base()
    radii = np.geomspace(r_min, r_max, cfg["samples"])
    rows, summary = [], {"tail_t0": float(np.max(np.abs(base(radii, 1))))}
    for alpha in cfg["alpha_values"]:
        if not 0 < alpha < 1:
            raise ConfigError("alpha values must lie in (0, 1)")
        slopes = []
        for t in cfg["t_values"]:
            d = np.abs(base.spectral.heat(alpha, t).radial_derivative(radii))
            slope = float(np.polyfit(np.log(radii), np.log(d), 1)[0])
            slopes.append(slope)
            rows.extend({"alpha": alpha, "t": t, "r": float(r), "abs_dr_g": float(v), "exponent": slope}
                        for r, v in zip(radii, d))
        summary[f"exponent_alpha{alpha}"] = slopes[0]
        summary[f"worst_exponent_alpha{alpha}"] = max(slopes)
        summary[f"bound_alpha{alpha}"] = decay_bound(alpha)
    columns = ["alpha", "t", "r", "abs_dr_g", "exponent"]
    return _report(cfg, columns, rows, summary, started, PlotSpec("r", ["abs_dr_g"], "t", loglog=True))


# -- translated superpositions --------------------------------------------------------------


def _periodic_gap(a: float, b: float, period: float) -> float:
    d = abs(a - b) % period
    return min(d, period - d)


def translate_centers(R: float, J: int) -> np.ndarray:
    """Centers of T_{R_j} with R_j = 2^j R, shifted so that they average to zero."""
    shifts = R * 2.0 ** np.arange(J)
    return -shifts + shifts.mean()


def run_compose_translates(cfg: ExperimentConfig) -> ExperimentReport:
    """Interaction defect || w_J(t) - sum_j T_{R_j} w_j(t) ||_{H^1} of J rescaled,
    translated copies of the initial data, against the base translation R."""
    started = time.perf_counter()
    grid = cfg.grid()
    J = cfg["J"]
    if J not in (1, 2, 3):
        raise ConfigError("J must be 1, 2 or 3")
    scales = cfg["rescale"]
    if len(scales) < J:
        raise ConfigError("rescale needs one factor per summand")
    model = _model(cfg, cfg["N"])
    p = model.params
    radius = designed_base().support[1] / p.lam
    x1, x2 = grid.mesh
    period = 2 * grid.L
    solver = SolverConfig(alpha=p.alpha, t_end=cfg["t_end"], dt_max=cfg["dt_max"], cfl=cfg["cfl"])
    check_pseudo_resolution(model, model.state(0.0, cfg["n_quad"]), grid)

    def summand(center: float, scale: float) -> SpectralField:
        shifted = (x1 - center + grid.L) % period - grid.L
        values = initial_values(model, scale * shifted, scale * x2) / scale ** (1 - p.alpha)
        return SpectralField.from_physical(grid, values).without_mean()

    rows = []
    for R in cfg["R_values"]:
        centers = translate_centers(R, J)
        for i in range(J):
            for j in range(i + 1, J):
                need = 2 * max(radius / scales[i], radius / scales[j])
                if _periodic_gap(centers[i], centers[j], period) < need:
                    raise BoxTooSmall(f"translates {i} and {j} are closer than {need:.3g} for R = {R}")
        parts = [summand(c, s) for c, s in zip(centers, scales)]
        total = parts[0]
        for part in parts[1:]:
            total = total + part
        combined = run(total, solver).w
        separate = run(parts[0], solver).w
        for part in parts[1:]:
            separate = separate + run(part, solver).w
        rows.append({
            "R": R, "J": J, "defect_h1": sobolev_norm(combined - separate, 1.0),
            "initial_norm_of_sum": sobolev_norm(total, p.beta),
            "sum_of_initial_norms": float(sum(sobolev_norm(q, p.beta) for q in parts)),
            "t_end": cfg["t_end"],
        })
    defects = [r["defect_h1"] for r in rows]
    summary = {"K": p.K, "support_radius": radius,
               "defect_decreasing": bool(all(b < a for a, b in zip(defects, defects[1:])))}
    columns = ["R", "J", "defect_h1", "initial_norm_of_sum", "sum_of_initial_norms", "t_end"]
    return _report(cfg, columns, rows, summary, started, PlotSpec("R", ["defect_h1"], loglog=True))


RUNNERS: dict[str, Callable[[ExperimentConfig], ExperimentReport]] = {
    "approx_rates": run_approx_rates,
    "pseudo_error": run_pseudo_error,
    "norm_inflation": run_norm_inflation,
    "radial_decay": run_radial_decay,
    "compose_translates": run_compose_translates,
    "constants": run_constants,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    return RUNNERS[cfg.experiment](cfg)
