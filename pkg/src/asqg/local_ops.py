"""Pointwise surrogates for nonlocal operators acting on oscillatory fields,
and empirical rate measurements against the exact spectral operators.

On ``w = f(lam r) cos(N (theta + g(lam r)) + p(lam r))`` the local
wavenumber is ``|xi|^2 = (N / r)^2 + (N lam g'(lam r))^2`` and the
surrogates are

* ``Lambda^s w  ~  const_s |xi|^s w``
* ``v_r(w)      ~  C f(lam r) sin(phase) / sqrt(1 + (lam r g'(lam r))^2)``

With the spectral normalization of the solver every constant is 1 (the
radial-velocity constant is +1). The kernel normalization uses
``const_s = K_|s|^{-sign s}`` (``2 pi`` for ``s = -1``) and ``C = -C0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from .ansatz import OscillatoryAnsatz, polynomial_profile, sample_ansatz
from .errors import DegenerateFit
from .quadrature import K_alpha, dirichlet_C0
from .radial import Convention, RadialProfile, bump_profile
from .spectral import (
    Grid,
    SpectralField,
    VelocityField,
    apply_multiplier,
    fractional_laplacian,
    gradient,
    riesz_velocity,
    sobolev_norm,
)

Which = Literal["lambda_minus_alpha", "lambda_plus_alpha", "velocity", "radial_velocity"]


def surrogate_constant(exponent: float, convention: Convention = "spectral") -> float:
    if convention == "spectral":
        return 1.0
    if exponent == -1:
        return 2.0 * np.pi
    a = abs(exponent)
    return K_alpha(a) if exponent < 0 else 1.0 / K_alpha(a)


def _check_exponent(exponent: float):
    if not (exponent == -1 or (-1 < exponent < 1 and exponent != 0)):
        raise ValueError(f"exponent must be -1 or lie in (-1, 1) without 0, got {exponent}")


def local_symbol(a: OscillatoryAnsatz, r: np.ndarray) -> np.ndarray:
    """|xi|^2 = (N / r)^2 + (N lam g'(lam r))^2 (the offset p is ignored, as in the surrogate)."""
    with np.errstate(divide="ignore"):
        return (a.N / r) ** 2 + (a.N * a.lam * a.g_phase(a.lam * r, 1)) ** 2


def _support_mask(a: OscillatoryAnsatz, r: np.ndarray) -> np.ndarray:
    lo, hi = a.support
    return (r >= lo) & (r <= hi) & (r > 0)


def pointwise_multiplier(a: OscillatoryAnsatz, grid: Grid, exponent: float,
                         convention: Convention = "spectral") -> np.ndarray:
    """const * |xi|^exponent on supp f(lam .), zero elsewhere."""
    _check_exponent(exponent)
    r, _ = grid.polar
    mask = _support_mask(a, r)
    out = np.zeros_like(r)
    out[mask] = surrogate_constant(exponent, convention) * local_symbol(a, r[mask]) ** (exponent / 2)
    return out


def bar_lambda(a: OscillatoryAnsatz, grid: Grid, exponent: float, convention: Convention = "spectral",
               field_values: np.ndarray | None = None) -> SpectralField:
    """Local surrogate of Lambda^exponent applied to the sampled ansatz (or to
    ``field_values``, a physical-space field of the same oscillatory form)."""
    a.check_resolution(grid)
    values = sample_ansatz(a, grid, check=False).physical if field_values is None else field_values
    out = SpectralField.from_physical(grid, values * pointwise_multiplier(a, grid, exponent, convention))
    return out


def bar_v_r(a: OscillatoryAnsatz, grid: Grid, convention: Convention = "spectral") -> SpectralField:
    """Local surrogate of the radial velocity of the sampled ansatz."""
    a.check_resolution(grid)
    r, theta = grid.polar
    rho = a.lam * r
    const = 1.0 if convention == "spectral" else -dirichlet_C0()
    values = a.evaluate(r, theta, np.sin) / np.sqrt(1.0 + (rho * a.g_phase(rho, 1)) ** 2)
    return SpectralField.from_physical(grid, const * values)


def radial_component(v: VelocityField) -> np.ndarray:
    r, theta = v.v1.grid.polar
    return v.v1.physical * np.cos(theta) + v.v2.physical * np.sin(theta)


def bar_velocity(a: OscillatoryAnsatz, grid: Grid, field_values: np.ndarray | None = None) -> VelocityField:
    """(-d2, d1) of the local surrogate of Lambda^{-1}, differentiated spectrally."""
    psi = bar_lambda(a, grid, -1.0, "spectral", field_values)
    d1, d2 = gradient(psi)
    return VelocityField(-d2, d1)


def _vector_l2(u1: np.ndarray, u2: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(np.sum(u1**2 + u2**2)) * grid.dx)


def _l2(u: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(np.sum(u**2)) * grid.dx)


def operator_error(a: OscillatoryAnsatz, grid: Grid, which: Which, alpha: float = 0.5, beta: float = 0.0) -> float:
    """Norm of (exact - surrogate) for one ansatz. ``beta`` > 0 measures in the homogeneous
    H^beta norm for the scalar operators and in L2 otherwise."""
    w = sample_ansatz(a, grid)
    if which in ("lambda_minus_alpha", "lambda_plus_alpha"):
        s = -alpha if which == "lambda_minus_alpha" else alpha
        diff = fractional_laplacian(w, s) - bar_lambda(a, grid, s, field_values=w.physical)
        diff = diff.without_mean()
        return sobolev_norm(diff, beta, homogeneous=True) if beta else diff.l2()
    if which == "velocity":
        v = riesz_velocity(w)
        vb = bar_velocity(a, grid, w.physical)
        return _vector_l2(v.v1.physical - vb.v1.physical, v.v2.physical - vb.v2.physical, grid)
    if which == "radial_velocity":
        v = riesz_velocity(w)
        return _l2(radial_component(v) - bar_v_r(a, grid).physical, grid)
    raise ValueError(f"unknown operator {which!r}")


@dataclass
class RateFit:
    N_values: list
    errors: list
    slope: float
    intercept: float
    r2: float
    excluded: list = field(default_factory=list)

    def rows(self) -> list[dict]:
        return [{"N": n, "error": e, "slope": self.slope, "r2": self.r2} for n, e in zip(self.N_values, self.errors)]


def fit_rate(N_values: Sequence[float], errors: Sequence[float], floor: float = 0.0,
             min_points: int = 4, min_r2: float = 0.9) -> RateFit:
    """Least-squares slope of log(error) against log(N).

    The largest N is dropped if its error sits below ``floor`` (a noise-floor
    guard); at most one point is dropped.
    """
    N = np.asarray(N_values, float)
    e = np.asarray(errors, float)
    if np.any(np.diff(N) <= 0):
        raise ValueError("N values must increase strictly")
    if np.any(e <= 0):
        raise DegenerateFit("errors must be positive for a log-log fit")
    excluded = []
    if floor > 0 and e[-1] < floor:
        excluded.append(int(N[-1]))
        N, e = N[:-1], e[:-1]
    if len(N) < min_points:
        raise DegenerateFit(f"need at least {min_points} points, have {len(N)}")
    x, y = np.log(N), np.log(e)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid**2) / ss) if ss > 0 else 1.0
    fit = RateFit([int(n) for n in N], [float(v) for v in e], float(slope), float(intercept), r2, excluded)
    if r2 < min_r2:
        raise DegenerateFit(f"fit quality r^2 = {r2:.3f} below {min_r2}")
    return fit


def approximation_rate_sweep(
    family: Callable[[int], OscillatoryAnsatz],
    N_values: Sequence[int],
    which: Which,
    grid: Grid,
    alpha: float = 0.5,
    beta: float = 0.0,
) -> RateFit:
    """Surrogate error for each N and the fitted log-log slope."""
    errors = []
    norms = []
    for N in N_values:
        a = family(int(N))
        a.check_resolution(grid)
        errors.append(operator_error(a, grid, which, alpha, beta))
        norms.append(sample_ansatz(a, grid).l2())
    floor = 10 * np.finfo(float).eps * max(norms)
    return fit_rate(N_values, errors, floor)


def standard_family(lam: float = 1.0) -> Callable[[int], OscillatoryAnsatz]:
    """f = bump at 1 of half-width 0.4, g = 0.3 (r - 1)^2, p = 0."""
    f = bump_profile(1.0, 0.4, 0.5)
    g = polynomial_profile([0.0, 0.0, 0.3], center=1.0)
    return lambda N: OscillatoryAnsatz(f, g, N=N, lam=lam)


STANDARD_GRID = Grid(1024, 6.0)


def commutator_defect(
    w: OscillatoryAnsatz,
    envelope: RadialProfile,
    trig: Literal["sin", "cos"],
    i: int,
    grid: Grid,
    normalized: bool = True,
) -> float:
    """|| v_i(E w) - E v_i(w) ||_2 with E = envelope(lam r) trig(theta).

    With ``normalized`` the defect is divided by ``||envelope||_{C^1} ||w||_2``
    (the unscaled envelope's C^1 norm).
    """
    if i not in (1, 2):
        raise ValueError("axis must be 1 or 2")
    lo, hi = envelope.support if envelope.support is not None else (0.0, envelope.r_max)
    if lo < 1.0 - 1e-12 or hi > 4.0 + 1e-12:
        raise ValueError("envelope must be supported in [1, 4] before scaling")
    wf = sample_ansatz(w, grid)
    if np.max(np.abs(wf.coeffs)) == 0:
        return 0.0
    r, theta = grid.polar
    E = envelope(w.lam * r) * (np.sin(theta) if trig == "sin" else np.cos(theta))
    prod = SpectralField.from_physical(grid, E * wf.physical)
    vw = riesz_velocity(wf)
    vprod = riesz_velocity(prod.without_mean())
    comp = (lambda v: v.v1) if i == 1 else (lambda v: v.v2)
    defect = _l2(comp(vprod).physical - E * comp(vw).physical, grid)
    if not normalized:
        return defect
    rho = np.linspace(lo, hi, 4001)
    c1 = float(np.max(np.abs(envelope(rho))) + np.max(np.abs(envelope(rho, 1))))
    return defect / (c1 * wf.l2())


def commutator_sweep(family: Callable[[int], OscillatoryAnsatz], envelope: RadialProfile, N_values: Sequence[int],
                     grid: Grid, trig: Literal["sin", "cos"] = "sin", i: int = 1) -> RateFit:
    errors = [commutator_defect(family(int(N)), envelope, trig, i, grid) for N in N_values]
    return fit_rate(N_values, errors, 10 * np.finfo(float).eps)


def commutator_envelope() -> RadialProfile:
    """Bump filling [1, 4] (before scaling)."""
    return bump_profile(2.5, 1.5, 0.5)
