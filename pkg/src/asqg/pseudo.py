"""Explicit pseudo-solution: a heat-evolved radial flow plus a damped,
sheared oscillatory perturbation, and the forcing it leaves behind.

Everything uses the solver's velocity normalization (``v = grad^perp
Lambda^{-1} w``), in which the local surrogates carry unit constants and the
radial-velocity constant is +1; see ``asqg.local_ops``.

With ``rho = lam r`` and ``g(., tau) = exp(-tau Lambda^alpha) g`` for the base
profile ``g``:

* ``gbar(r, t)   = lam^{1-beta} g(rho, lam^alpha t)``
* ``Theta(r, t)  = -K Omega(rho, 0) - lam^{2-beta} int_0^t Omega(rho, lam^alpha s) ds``
* ``G(r, t)      = N^alpha int_0^t (r^{-2} + Theta_r(r, s)^2)^{alpha/2} ds``
* ``phi(r, t)    = -int_0^t d_r gbar(r, s) / sqrt(1 + r^2 Theta_r(r, s)^2) ds``
* ``wpert        = lam^{1-beta} N^{-beta} f(rho) cos(N (theta + Theta) - phi) exp(-G)``

where ``Omega = v_theta / r``. The heat flow is diagonal in the radial Fourier
variable, so the time integrals inside ``Theta`` are exact; ``G`` and ``phi``
use Gauss-Legendre in time.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from scipy import optimize, special

from .ansatz import BaseProfile
from .errors import InvalidRegime, NoAdmissibleK, NonConvergence, UnderResolved
from .radial import RadialProfile, SpectralRadial, bump_profile
from .spectral import (
    Grid,
    SpectralField,
    fractional_laplacian,
    gradient,
    heat_semigroup,
    riesz_velocity,
    sobolev_norm,
)

Variant = Literal["full", "naive"]


# -- parameters ---------------------------------------------------------------------


def couple_parameters(alpha: float, beta: float, N: float) -> float:
    """lam with N^alpha ln N = lam^{2 - beta - alpha}."""
    expo = 2.0 - beta - alpha
    if expo <= 0:
        raise InvalidRegime(f"2 - beta - alpha = {expo:.3g} must be positive")
    if N <= 1:
        raise InvalidRegime("N must exceed 1")
    return float((N**alpha * np.log(N)) ** (1.0 / expo))


def couple_inverse(alpha: float, beta: float, lam: float) -> float:
    """N solving the same relation for a given lam (monotone root find)."""
    expo = 2.0 - beta - alpha
    if expo <= 0:
        raise InvalidRegime(f"2 - beta - alpha = {expo:.3g} must be positive")
    target = expo * np.log(lam)
    h = lambda x: alpha * x + np.log(x) - target  # x = ln N
    if target <= h(1e-300) + target:
        raise InvalidRegime("lam too small for a solution with N > 1")
    hi = max(1.0, target / max(alpha, 1e-12) + 1.0)
    while h(hi) < 0:
        hi *= 2
    x = optimize.brentq(h, 1e-300, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    return float(np.exp(x))


@dataclass(frozen=True)
class PseudoParams:
    alpha: float
    beta: float
    N: int
    lam: float
    K: float = 1.0
    eps_tilde: float = 0.2
    coupled: bool = False

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InvalidRegime(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 1 < self.beta < 2 - self.alpha:
            raise InvalidRegime(f"beta must lie in (1, 2 - alpha), got {self.beta}")
        if int(self.N) != self.N or self.N < 8:
            raise InvalidRegime(f"N must be an integer >= 8, got {self.N}")
        if self.lam < 1:
            raise InvalidRegime("lam must be at least 1")
        if not self.K > 0:
            raise InvalidRegime("K must be positive")
        if not 0 < self.eps_tilde < 0.5:
            raise InvalidRegime("eps_tilde must lie in (0, 1/2)")
        if self.coupled:
            lhs = self.N**self.alpha * np.log(self.N)
            rhs = self.lam ** (2 - self.beta - self.alpha)
            if abs(lhs - rhs) / rhs >= 1e-10:
                raise InvalidRegime("coupled parameters violate N^alpha ln N = lam^{2-beta-alpha}")
        object.__setattr__(self, "N", int(self.N))

    @classmethod
    def from_coupling(cls, alpha: float, beta: float, N: int, **kw) -> "PseudoParams":
        return cls(alpha, beta, N, couple_parameters(alpha, beta, N), coupled=True, **kw)

    def with_(self, **kw) -> "PseudoParams":
        data = {k: getattr(self, k) for k in ("alpha", "beta", "N", "lam", "K", "eps_tilde", "coupled")}
        data.update(kw)
        return PseudoParams(**data)

    @property
    def amplitude(self) -> float:
        return self.lam ** (1 - self.beta) * float(self.N) ** (-self.beta)

    def deformation_time(self) -> float:
        return self.lam ** (-2 + self.beta) * np.sqrt(np.log(self.N))

    def T_max(self, horizon: float = np.inf) -> float:
        return float(min(self.deformation_time(), horizon))

    def full_window(self) -> float:
        return float((self.N * self.lam) ** (-self.alpha) * np.log(self.N) ** 2)


def perturbation_envelope(eps_tilde: float) -> RadialProfile:
    """f = 1 on [1 - eps/2, 1 + eps/2], supported in [1 - eps, 1 + eps]."""
    return bump_profile(1.0, eps_tilde, 0.5)


# -- radial heat flow --------------------------------------------------------------------


def spectral_of(profile: RadialProfile, tol: float = 1e-13) -> SpectralRadial:
    if isinstance(profile, BaseProfile) and profile.spectral is not None:
        return profile.spectral
    return SpectralRadial.from_profile(profile, tol=tol)


def evolve_radial_heat(g0: RadialProfile, alpha: float, t: float, spectral: Optional[SpectralRadial] = None
                       ) -> RadialProfile:
    """exp(-t Lambda^alpha) applied to a radial function through its planar Fourier transform."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return g0
    sr = spectral_of(g0) if spectral is None else spectral
    return RadialProfile.from_samples(g0.r, sr.heat(alpha, t).value(g0.r))


def _ratio(x: np.ndarray, nu: int) -> np.ndarray:
    """J_nu(x) / x with its small-x limit."""
    small = x < 1e-8
    safe = np.where(small, 1.0, x)
    return np.where(small, (0.5 if nu == 1 else x / 8.0), special.jv(nu, safe) / safe)


@dataclass(frozen=True, eq=False)
class RadialEvolution:
    """Radial quantities of the pseudo-solution sampled on ``rho`` (= lam r)."""

    spectral: SpectralRadial
    alpha: float
    beta: float
    lam: float
    rho: np.ndarray

    @cached_property
    def _mats(self):
        k = self.spectral.k
        kr = np.outer(self.rho, k)
        w = self.spectral.weights * self.spectral.F / (2.0 * np.pi)
        return {
            "value": special.j0(kr) * (k * w),
            "deriv": -special.j1(kr) * (k**2 * w),
            "omega": -_ratio(kr, 1) * (k**2 * w),
            "omega_r": _ratio(kr, 2) * (k**3 * w),
        }

    def _apply(self, name: str, mult: np.ndarray) -> np.ndarray:
        return self._mats[name] @ mult

    def decay(self, t: float) -> np.ndarray:
        return np.exp(-t * (self.lam * self.spectral.k) ** self.alpha)

    def elapsed(self, t: float) -> np.ndarray:
        """int_0^t exp(-(lam k)^alpha s) ds."""
        q = (self.lam * self.spectral.k) ** self.alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(q * t > 1e-12, -np.expm1(-q * t) / np.where(q > 0, q, 1.0), t)
        return out

    def gbar(self, t: float) -> np.ndarray:
        return self.lam ** (1 - self.beta) * self._apply("value", self.decay(t))

    def gbar_r(self, t: float) -> np.ndarray:
        return self.lam ** (2 - self.beta) * self._apply("deriv", self.decay(t))

    def omega_bar(self, t: float) -> np.ndarray:
        """v_theta(gbar) / r."""
        return self.lam ** (2 - self.beta) * self._apply("omega", self.decay(t))

    def theta(self, K: float, t: float) -> np.ndarray:
        ones = np.ones_like(self.spectral.k)
        return -K * self._apply("omega", ones) - self.lam ** (2 - self.beta) * self._apply("omega", self.elapsed(t))

    def theta_r(self, K: float, t: float) -> np.ndarray:
        ones = np.ones_like(self.spectral.k)
        return -self.lam * (K * self._apply("omega_r", ones)
                            + self.lam ** (2 - self.beta) * self._apply("omega_r", self.elapsed(t)))


# -- phase, damping and state ------------------------------------------------------------


STATE_SAMPLES = 4096


@dataclass(frozen=True, eq=False)
class PseudoState:
    t: float
    g_bar: RadialProfile
    Theta: RadialProfile
    G_damp: RadialProfile
    phase_shift: RadialProfile
    Theta_r: RadialProfile
    omega_bar: RadialProfile
    gbar_r: RadialProfile

    def to_csv(self, path: Optional[Path] = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        cols = ["g_bar", "Theta", "G_damp", "phase_shift", "Theta_r", "omega_bar", "gbar_r"]
        writer.writerow(["r", *cols])
        for i, r in enumerate(self.g_bar.r):
            writer.writerow([repr(float(r))] + [repr(float(getattr(self, c).values[i])) for c in cols])
        text = f"# t={self.t!r}\n" + buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "PseudoState":
        text = Path(source).read_text() if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source) else source
        lines = text.splitlines()
        t = float(lines[0].split("=", 1)[1])
        rows = list(csv.reader(lines[1:]))
        header, data = rows[0], np.array([[float(x) for x in row] for row in rows[1:]])
        r = data[:, 0]
        profiles = {name: RadialProfile.from_samples(r, data[:, j + 1]) for j, name in enumerate(header[1:])}
        return cls(t=t, **profiles)


class PseudoModel:
    """Pseudo-solution machinery for one parameter set and base flow."""

    def __init__(self, params: PseudoParams, base: RadialProfile, samples: int = STATE_SAMPLES,
                 r_max: Optional[float] = None):
        self.params = params
        self.base = base
        self.spectral = spectral_of(base)
        r_max = (base.r_max if r_max is None else r_max) / params.lam
        self.r = np.linspace(0.0, r_max, samples)
        self.evolution = RadialEvolution(self.spectral, params.alpha, params.beta, params.lam, params.lam * self.r)
        self.f = perturbation_envelope(params.eps_tilde)

    def with_K(self, K: float) -> "PseudoModel":
        clone = object.__new__(PseudoModel)
        clone.__dict__.update(self.__dict__)
        clone.params = self.params.with_(K=K)
        return clone

    def _time_nodes(self, t: float, n_quad: int):
        x, w = special.roots_legendre(n_quad)
        return 0.5 * t * (x + 1.0), 0.5 * t * w

    def damping_and_shift(self, t: float, n_quad: int = 32) -> tuple[np.ndarray, np.ndarray]:
        p, ev, r = self.params, self.evolution, self.r
        G = np.zeros_like(r)
        phi = np.zeros_like(r)
        if t == 0:
            return G, phi
        with np.errstate(divide="ignore"):
            inv_r2 = np.where(r > 0, 1.0 / r**2, np.inf)
        for s, w in zip(*self._time_nodes(t, n_quad)):
            th_r = ev.theta_r(p.K, s)
            G += w * (inv_r2 + th_r**2) ** (p.alpha / 2)
            phi -= w * ev.gbar_r(s) / np.sqrt(1.0 + (r * th_r) ** 2)
        G *= float(p.N) ** p.alpha
        G[0] = G[1] if len(G) > 1 else 0.0
        return G, phi

    def state(self, t: float, n_quad: int = 32) -> PseudoState:
        if t < 0:
            raise ValueError("t must be nonnegative")
        if n_quad < 8:
            raise ValueError("n_quad must be at least 8")
        p, ev, r = self.params, self.evolution, self.r
        G, phi = self.damping_and_shift(t, n_quad)
        mk = lambda v: RadialProfile.from_samples(r, v)
        return PseudoState(
            t=t, g_bar=mk(ev.gbar(t)), Theta=mk(ev.theta(p.K, t)), G_damp=mk(G), phase_shift=mk(phi),
            Theta_r=mk(ev.theta_r(p.K, t)), omega_bar=mk(ev.omega_bar(t)), gbar_r=mk(ev.gbar_r(t)),
        )

    def center_band(self, points: int = 64) -> np.ndarray:
        """Radii in [(1 - e)/lam, (1 - e/2)/lam] and [(1 + e/2)/lam, (1 + e)/lam]."""
        e, lam = self.params.eps_tilde, self.params.lam
        return np.concatenate([np.linspace(1 - e, 1 - e / 2, points), np.linspace(1 + e / 2, 1 + e, points)]) / lam

    def maximocentro_margin(self, t: float, n_quad: int = 32) -> float:
        """min over the band of G(r, t) - G(1/lam, t), relative to G(1/lam, t)."""
        G, _ = self.damping_and_shift(t, n_quad)
        spline = RadialProfile.from_samples(self.r, G)
        center = float(spline(np.array([1.0 / self.params.lam]))[0])
        band = spline(self.center_band())
        return float(np.min(band - center) / max(abs(center), 1e-300))


def build_phase_and_damping(params: PseudoParams, base: RadialProfile, t: float, n_quad: int = 32,
                            model: Optional[PseudoModel] = None, check: bool = True) -> PseudoState:
    """State at time t; with ``check`` the quadrature is compared against doubled order."""
    model = PseudoModel(params, base) if model is None else model
    state = model.state(t, n_quad)
    if check and t > 0:
        G2, _ = model.damping_and_shift(t, 2 * n_quad)
        G = state.G_damp.values
        if np.max(np.abs(G2 - G)) > 1e-6 * max(np.max(np.abs(G2)), 1e-300):
            raise NonConvergence("damping quadrature did not settle under order doubling")
    return state


def choose_K(params: PseudoParams, base: RadialProfile, T_max: Optional[float] = None, max_power: int = 16,
             test_times: int = 8, model: Optional[PseudoModel] = None) -> float:
    """Smallest K in {1, 2, 4, ...} with G(1/lam, t) <= G(r, t) on the band at the test times."""
    model = PseudoModel(params, base) if model is None else model
    T_max = params.T_max() if T_max is None else T_max
    times = np.linspace(0.0, T_max, test_times)[1:]
    for j in range(max_power + 1):
        K = float(2**j)
        trial = model.with_K(K)
        if all(trial.maximocentro_margin(t) >= -1e-12 for t in times):
            return K
    raise NoAdmissibleK(f"no K up to 2^{max_power} satisfies the damping ordering")


# -- sampling on the grid -----------------------------------------------------------------


POINTS_PER_WAVELENGTH = 3.0


def local_wavenumber(model: PseudoModel, state: PseudoState) -> float:
    p = model.params
    lo, hi = (1 - p.eps_tilde) / p.lam, (1 + p.eps_tilde) / p.lam
    r = np.linspace(lo, hi, 512)
    k = p.N * np.sqrt(1.0 / r**2 + state.Theta_r(r) ** 2)
    envelope = p.lam * np.max(np.abs(model.f(np.linspace(1 - p.eps_tilde, 1 + p.eps_tilde, 2001), 1)))
    return float(np.max(k) + envelope)


def check_pseudo_resolution(model: PseudoModel, state: PseudoState, grid: Grid,
                            points: float = POINTS_PER_WAVELENGTH):
    k = local_wavenumber(model, state)
    if grid.wavelength_points(k) < points:
        raise UnderResolved(f"pseudo-solution wavenumber {k:.0f} has {grid.wavelength_points(k):.2f} "
                            f"points per wavelength on n={grid.n}, L={grid.L}")
    support = model.base.support
    if support is not None and support[1] / model.params.lam > grid.L:
        raise UnderResolved("radial base flow does not fit in the box")


def sample_radial(model: PseudoModel, grid: Grid) -> SpectralField:
    """gbar(., 0) sampled from the exact base profile, mean removed."""
    r, _ = grid.polar
    p = model.params
    values = p.lam ** (1 - p.beta) * model.base(p.lam * r)
    return SpectralField.from_physical(grid, values).without_mean()


def _pert_parts(model: PseudoModel, state: PseudoState, grid: Grid):
    p = model.params
    r, theta = grid.polar
    mask = (r >= (1 - p.eps_tilde) / p.lam) & (r <= (1 + p.eps_tilde) / p.lam)
    rr, tt = r[mask], theta[mask]
    amp = p.amplitude * model.f(p.lam * rr) * np.exp(-state.G_damp(rr))
    phase = p.N * (tt + state.Theta(rr)) - state.phase_shift(rr)
    return mask, rr, amp, phase


def pert_physical(model: PseudoModel, state: PseudoState, grid: Grid) -> np.ndarray:
    mask, rr, amp, phase = _pert_parts(model, state, grid)
    out = np.zeros((grid.n, grid.n))
    out[mask] = amp * np.cos(phase)
    return out


def naive_pert_physical(model: PseudoModel, t: float, grid: Grid) -> np.ndarray:
    """Frozen-profile transport with uniform damping exp(-(N lam)^alpha t)."""
    p, ev = model.params, model.evolution
    r, theta = grid.polar
    mask = (r >= (1 - p.eps_tilde) / p.lam) & (r <= (1 + p.eps_tilde) / p.lam)
    rr, tt = r[mask], theta[mask]
    omega0 = RadialProfile.from_samples(model.r, ev.omega_bar(0.0))(rr)
    theta0 = RadialProfile.from_samples(model.r, ev.theta(p.K, 0.0))(rr)
    rate = p.lam**p.alpha
    shear = omega0 * (-np.expm1(-rate * t) / rate if t > 0 else 0.0)
    out = np.zeros((grid.n, grid.n))
    out[mask] = (p.amplitude * model.f(p.lam * rr) * np.exp(-((p.N * p.lam) ** p.alpha) * t)
                 * np.cos(p.N * (tt + theta0 - shear)))
    return out


def eval_pseudo(model: PseudoModel, state: PseudoState, grid: Grid, variant: Variant = "full",
                parts: bool = False, check: bool = True):
    """Pseudo-solution on the grid. The radial part is the exact heat flow of the
    sampled initial radial field, matching the solver's linear propagator.

    With ``parts`` returns ``(radial, perturbation)``.
    """
    if check:
        check_pseudo_resolution(model, state, grid)
    p = model.params
    g0 = sample_radial(model, grid)
    if variant == "full":
        radial = heat_semigroup(g0, p.alpha, state.t)
        pert = SpectralField.from_physical(grid, pert_physical(model, state, grid))
    elif variant == "naive":
        radial = g0 * float(np.exp(-(p.lam**p.alpha) * state.t))
        pert = SpectralField.from_physical(grid, naive_pert_physical(model, state.t, grid))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    pert = pert.without_mean()
    if parts:
        return radial, pert
    return radial + pert


# -- residuals and forcing -----------------------------------------------------------------


def _l2(values: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(np.sum(values**2)) * grid.dx)


def bar_lambda_pert(model: PseudoModel, state: PseudoState, grid: Grid, exponent: float) -> np.ndarray:
    """Pointwise |xi|^exponent w_pert with |xi|^2 = N^2 (r^-2 + Theta_r^2)."""
    p = model.params
    mask, rr, amp, phase = _pert_parts(model, state, grid)
    out = np.zeros((grid.n, grid.n))
    xi = p.N * np.sqrt(1.0 / rr**2 + state.Theta_r(rr) ** 2)
    out[mask] = amp * np.cos(phase) * xi**exponent
    return out


def bar_v_r_pert(model: PseudoModel, state: PseudoState, grid: Grid) -> np.ndarray:
    mask, rr, amp, phase = _pert_parts(model, state, grid)
    out = np.zeros((grid.n, grid.n))
    out[mask] = amp * np.sin(phase) / np.sqrt(1.0 + (rr * state.Theta_r(rr)) ** 2)
    return out


def pseudowpert_residual(model: PseudoModel, grid: Grid, t: float, dt: Optional[float] = None,
                         n_quad: int = 32) -> dict:
    """L2 norm of d_t w + Omega(gbar) d_theta w + vbar_r(w) d_r gbar + Lambdabar^alpha w for w = wpert.

    The time derivative is a centered difference of the sampled perturbation.
    """
    p = model.params
    dt = 1e-4 * p.T_max() if dt is None else dt
    if t - dt < 0:
        raise ValueError("t must exceed dt for a centered difference")
    s0, sm, sp = (model.state(x, n_quad) for x in (t, t - dt, t + dt))
    w0 = pert_physical(model, s0, grid)
    dwdt = (pert_physical(model, sp, grid) - pert_physical(model, sm, grid)) / (2 * dt)
    mask, rr, amp, phase = _pert_parts(model, s0, grid)
    transport = np.zeros_like(w0)
    transport[mask] = s0.omega_bar(rr) * (-p.N * amp * np.sin(phase))
    coupling = bar_v_r_pert(model, s0, grid)
    coupling[mask] *= s0.gbar_r(rr)
    damping = bar_lambda_pert(model, s0, grid, p.alpha)
    residual = dwdt + transport + coupling + damping
    norm = _l2(w0, grid)
    bound = 1e-3 * norm * (p.N * p.lam) ** p.alpha
    return {"residual": _l2(residual, grid), "pert_l2": norm, "bound": bound,
            "ratio": _l2(residual, grid) / bound if bound > 0 else np.inf}


def _advect(v, grad) -> np.ndarray:
    return v.v1.physical * grad[0].physical + v.v2.physical * grad[1].physical


def forcing_terms(model: PseudoModel, state: PseudoState, grid: Grid) -> dict:
    """F1 = (Lambdabar^alpha - Lambda^alpha) wpert, F2 = -v(wpert).grad wpert,
    F3 = (vbar(wpert) - v(wpert)).grad gbar, with vbar = grad^perp of the local
    surrogate of Lambda^{-1} wpert. Returns the fields and their H^s norms."""
    p = model.params
    radial, pert = eval_pseudo(model, state, grid, parts=True)
    if np.max(np.abs(pert.coeffs)) == 0:
        zero = SpectralField.zeros(grid)
        return {"F1": zero, "F2": zero, "F3": zero,
                "norms": {name: {s: 0.0 for s in (0, 1, 2)} for name in ("F1", "F2", "F3", "F")}}
    lam_bar = SpectralField.from_physical(grid, bar_lambda_pert(model, state, grid, p.alpha))
    F1 = lam_bar - fractional_laplacian(pert, p.alpha)
    v = riesz_velocity(pert)
    F2 = SpectralField.from_physical(grid, -_advect(v, gradient(pert)))
    psi_bar = SpectralField.from_physical(grid, bar_lambda_pert(model, state, grid, -1.0))
    d1, d2 = gradient(psi_bar)
    g1, g2 = gradient(radial)
    F3 = SpectralField.from_physical(
        grid, (-d2.physical - v.v1.physical) * g1.physical + (d1.physical - v.v2.physical) * g2.physical)
    fields = {"F1": F1.without_mean(), "F2": F2.without_mean(), "F3": F3.without_mean()}
    fields["F"] = fields["F1"] + fields["F2"] + fields["F3"]
    norms = {name: {s: sobolev_norm(f, s) for s in (0, 1, 2)} for name, f in fields.items()}
    return {**fields, "norms": norms}


def closure_residual(model: PseudoModel, grid: Grid, t: float, dt: Optional[float] = None,
                     n_quad: int = 32) -> dict:
    """L2 norm of d_t wbar + v(wbar).grad wbar + Lambda^alpha wbar + F on the grid."""
    p = model.params
    dt = 1e-4 * p.T_max() if dt is None else dt
    states = {x: model.state(x, n_quad) for x in (t - dt, t, t + dt)}
    wm, w0, wp = (eval_pseudo(model, states[x], grid) for x in (t - dt, t, t + dt))
    dwdt = (wp - wm) * (1.0 / (2 * dt))
    v = riesz_velocity(w0)
    adv = SpectralField.from_physical(grid, _advect(v, gradient(w0)))
    forcing = forcing_terms(model, states[t], grid)
    total = dwdt + adv + fractional_laplacian(w0, p.alpha) + forcing["F"]
    pert = eval_pseudo(model, states[t], grid, parts=True)[1]
    bound = 1e-3 * pert.l2() * (p.N * p.lam) ** p.alpha
    return {"residual": total.without_mean().l2(), "pert_l2": pert.l2(), "bound": bound,
            "ratio": total.without_mean().l2() / bound}


def initial_values(model: PseudoModel, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """gbar(., 0) + wpert(., 0) at arbitrary points (mean not removed)."""
    p = model.params
    r = np.hypot(x1, x2)
    theta = np.arctan2(x2, x1)
    out = p.lam ** (1 - p.beta) * model.base(p.lam * r)
    mask = (r >= (1 - p.eps_tilde) / p.lam) & (r <= (1 + p.eps_tilde) / p.lam)
    theta0 = RadialProfile.from_samples(model.r, model.evolution.theta(p.K, 0.0))
    rr = r[mask]
    out[mask] += p.amplitude * model.f(p.lam * rr) * np.cos(p.N * (theta[mask] + theta0(rr)))
    return out
