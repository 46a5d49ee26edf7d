"""Structured initial data: the oscillatory ansatz and radial base flows whose
angular velocity has prescribed derivatives at r = 1.

Two base-flow constructions are provided.

``construct_base_radial``
    Combination of three concentrated ring profiles ``h1``, ``h2 = r^{-1}
    (r h1)''`` and ``h3 = r^{-1} (r h1)''''`` whose far fields behave like
    ``r^{-2}``, ``r^{-4}``, ``r^{-6}``, high-pass filtered and mixed so that
    the first three derivatives of ``v_theta / r`` at r = 1 take given values.
    The profiles are extremely peaked, so evaluation goes through exact
    moments rather than samples.
``design_base_radial``
    Zero-mass combination of smooth Gaussian rings fitted so that
    ``d/dr (v_theta / r)`` follows the quadratic Taylor polynomial of the
    targets over a window around r = 1. Cheap to simulate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from .errors import InvalidGeometry, SingularSystem, TargetMiss, UnderResolved
from .radial import (
    EXP_BUMP,
    KERNEL_TO_SPECTRAL,
    R_MAX,
    SAMPLES,
    Convention,
    RadialProfile,
    SpectralRadial,
    chebyshev_derivatives,
    smoothstep,
    velocity_scale,
)
from .spectral import Grid, SpectralField

IDEAL_TRIPLES = np.array([[1.0, -4.0, 20.0], [1.0, -6.0, 42.0], [1.0, -8.0, 72.0]])
H1_SUPPORT = (0.25, 0.5)
CUTOFF_C = 0.5


# -- base flows -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BaseProfile(RadialProfile):
    """Radial base flow with a reliable evaluator for ``v_theta / r``.

    ``omega(r)`` returns the kernel-normalized angular velocity; samples of the
    profile itself may be too peaked to integrate numerically.
    """

    omega: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    spectral: Optional[SpectralRadial] = field(default=None, repr=False)
    coefficients: tuple = ()
    info: dict = field(default_factory=dict)

    def angular_velocity(self, r, convention: Convention = "kernel") -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, float))
        if self.omega is None:
            raise ValueError("profile has no angular-velocity evaluator")
        return self.omega(r) * velocity_scale(convention)

    def slope_derivatives(self, r0: float = 1.0, orders=(1, 2, 3), convention: Convention = "kernel",
                          half: float = 0.1) -> np.ndarray:
        """d^j/dr^j (v_theta / r) at r0."""
        f = lambda rr: self.angular_velocity(rr, convention)
        return chebyshev_derivatives(f, r0, half, orders)[:, 0]


def _zero_base() -> BaseProfile:
    r = np.linspace(0.0, R_MAX, SAMPLES)
    zero = lambda rr, nu=0: np.zeros_like(np.asarray(rr, float))
    return BaseProfile(r, np.zeros_like(r), exact=zero, support=(0.0, 0.0), max_exact_order=99,
                       omega=lambda rr: np.zeros_like(rr), coefficients=(0.0, 0.0, 0.0))


@dataclass(frozen=True)
class RingFamily:
    """h1 (unit ``int s h1 ds``, supported in (1/4, 1/2)) and its two descendants,
    concentrated by the factor ``lam_h``: ``g_i(r) = lam_h^{2i} h_i(lam_h r)``."""

    lam_h: float

    @cached_property
    def _quad(self):
        t, w = special.roots_legendre(400)
        a, b = H1_SUPPORT
        return 0.5 * (b - a) * t + 0.5 * (a + b), 0.5 * (b - a) * w

    @cached_property
    def amplitude(self) -> float:
        s, w = self._quad
        return 1.0 / float(np.sum(w * s * self._shape(s, 0)))

    @staticmethod
    def _shape(s, nu):
        a, b = H1_SUPPORT
        half = 0.5 * (b - a)
        return EXP_BUMP((np.asarray(s, float) - 0.5 * (a + b)) / half, nu) / half**nu

    def h(self, i: int, s) -> np.ndarray:
        """Unscaled h_i = r^{-1} d^m (r h1) = h1^{(m)} + m h1^{(m-1)} / r with m = 2 (i - 1)."""
        s = np.asarray(s, float)
        m = 2 * (i - 1)
        A = self.amplitude
        if m == 0:
            return A * self._shape(s, 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = A * (self._shape(s, m) + m * self._shape(s, m - 1) / s)
        return np.where(s > 0, out, 0.0)

    def g(self, i: int, r) -> np.ndarray:
        return self.lam_h ** (2 * i) * self.h(i, self.lam_h * np.asarray(r, float))

    @cached_property
    def h1_moments(self) -> np.ndarray:
        """M_{2n+1}(h1) = int s^{2n+1} h1 ds for n = 0..39."""
        s, w = self._quad
        h1 = self.amplitude * self._shape(s, 0)
        return np.array([np.sum(w * s ** (2 * n + 1) * h1) for n in range(40)])

    def moments(self, i: int) -> np.ndarray:
        """Odd moments of g_i, from integrating by parts against s^{2n}."""
        M = self.h1_moments
        out = np.zeros(len(M))
        for n in range(len(M)):
            p = 2 * n
            if i == 1:
                val = M[n]
            elif i == 2:
                val = p * (p - 1) * M[n - 1] if n >= 1 else 0.0
            else:
                val = p * (p - 1) * (p - 2) * (p - 3) * M[n - 2] if n >= 2 else 0.0
            out[n] = val * self.lam_h ** (2 * (i - 1) - 2 * n)
        return out

    @property
    def outer_radius(self) -> float:
        return H1_SUPPORT[1] / self.lam_h

    def transform(self, i: int, k) -> np.ndarray:
        """Planar Fourier transform of g_i from its moment series (small k only)."""
        k = np.asarray(k, float)
        M = self.moments(i)
        n = np.arange(len(M))
        coef = 2.0 * np.pi * (-1.0) ** n * M / (4.0**n * special.factorial(n) ** 2)
        return np.polynomial.polynomial.polyval(k * k, coef)

    def far_omega(self, i: int, r) -> np.ndarray:
        """Kernel-normalized v_theta / r of g_i outside its support:
        2 pi sum_n a_n^2 (2n+1) M_{2n+1} r^{-2n-3} with a_n = binom(2n, n) / 4^n."""
        r = np.atleast_1d(np.asarray(r, float))
        if np.any(r <= self.outer_radius):
            raise ValueError("multipole series used inside the support")
        M = self.moments(i)
        out = np.zeros_like(r)
        for n in range(len(M)):
            a = special.comb(2 * n, n) / 4.0**n
            out += a * a * (2 * n + 1) * M[n] * r ** (-2 * n - 3)
        return 2.0 * np.pi * out


def highpass_weight(k, c: float = CUTOFF_C) -> np.ndarray:
    """p(k / c): 0 for k <= c, 1 for k >= 2c."""
    return smoothstep(np.asarray(k, float) / c - 1.0)


@dataclass(frozen=True)
class _LowPass:
    """The part of a ring profile removed by the high-pass filter, on k in [0, 2c]."""

    family: RingFamily
    c: float

    @cached_property
    def nodes(self):
        t, w = special.roots_legendre(96)
        k = self.c * (1.0 + t)
        return k, self.c * w * (1.0 - highpass_weight(k, self.c))

    def value(self, i: int, r) -> np.ndarray:
        k, w = self.nodes
        F = self.family.transform(i, k)
        r = np.atleast_1d(np.asarray(r, float))
        return special.j0(np.outer(r, k)) @ (w * F * k) / (2.0 * np.pi)

    def omega(self, i: int, r) -> np.ndarray:
        """Kernel-normalized v_theta / r = r^{-1} int (1 - p) F J1(k r) k dk."""
        k, w = self.nodes
        F = self.family.transform(i, k)
        r = np.atleast_1d(np.asarray(r, float))
        return special.j1(np.outer(r, k)) @ (w * F * k) / r


def ring_triples(lam_h: float, c: Optional[float] = CUTOFF_C, r0: float = 1.0) -> np.ndarray:
    """Rows: d^j/dr^j (v_theta(g_i) / r) at r0 for j = 1, 2, 3 (kernel normalization)."""
    fam = RingFamily(lam_h)
    low = _LowPass(fam, c) if c else None
    rows = []
    for i in (1, 2, 3):
        f = lambda rr, i=i: fam.far_omega(i, rr) - (low.omega(i, rr) if low else 0.0)
        rows.append(chebyshev_derivatives(f, r0, 0.1)[:, 0])
    return np.array(rows)


def ideal_deviation(triples: np.ndarray) -> np.ndarray:
    """Largest relative componentwise deviation of each row from its ideal direction,
    after matching the first component."""
    out = []
    for row, ideal in zip(triples, IDEAL_TRIPLES):
        scale = row[0] / ideal[0]
        out.append(np.max(np.abs(row - scale * ideal) / np.abs(scale * ideal)))
    return np.array(out)


def choose_concentration(c: Optional[float] = CUTOFF_C, tol: float = 0.05, max_lam: int = 64) -> int:
    """Smallest integer lam_h whose three derivative triples lie within ``tol`` of the ideal vectors."""
    for lam_h in range(1, max_lam + 1):
        if np.all(ideal_deviation(ring_triples(lam_h, c)) < tol):
            return lam_h
    raise TargetMiss(f"no concentration up to {max_lam} reaches the {tol:.0%} ideal-triple tolerance")


def construct_base_radial(
    targets: Sequence[float] = (1.0, 0.0, 1.0),
    convention: Convention = "kernel",
    c: float = CUTOFF_C,
    lam_h: Optional[int] = None,
    tol: float = 0.02,
    r_max: float = R_MAX,
    samples: int = SAMPLES,
) -> BaseProfile:
    """High-pass filtered ring combination with prescribed d^j (v_theta / r)(1), j = 1..3.

    Targets refer to the velocity normalization ``convention``. The returned
    profile evaluates exactly (no samples are used for the velocity).
    """
    targets = np.asarray(targets, float)
    if targets.shape != (3,):
        raise ValueError("targets must have three entries")
    if np.all(targets == 0):
        return _zero_base()
    kernel_targets = targets / velocity_scale(convention)
    lam_h = choose_concentration(c) if lam_h is None else lam_h
    triples = ring_triples(lam_h, c)
    if abs(np.linalg.det(triples)) < 1e-12 * np.prod(np.linalg.norm(triples, axis=1)):
        raise SingularSystem("ring derivative triples are linearly dependent")
    coef = np.linalg.solve(triples.T, kernel_targets)

    fam = RingFamily(lam_h)
    low = _LowPass(fam, c)

    def omega(r):
        return sum(ci * (fam.far_omega(i, r) - low.omega(i, r)) for i, ci in zip((1, 2, 3), coef))

    def func(r, nu=0):
        r = np.asarray(r, float)
        core = sum(ci * fam.g(i, r) for i, ci in zip((1, 2, 3), coef))
        return core - sum(ci * low.value(i, r.ravel()).reshape(r.shape) for i, ci in zip((1, 2, 3), coef))

    r = np.linspace(0.0, r_max, samples)
    base = BaseProfile(r, func(r), exact=func, support=(0.0, r_max), max_exact_order=0, omega=omega,
                       coefficients=tuple(coef), info={"lambda_h": lam_h, "cutoff": c, "kind": "rings"})
    measured = base.slope_derivatives(1.0, convention=convention)
    miss = np.abs(measured - targets) > tol * np.maximum(np.abs(targets), 1.0)
    if np.any(miss):
        raise TargetMiss(f"measured {measured} for targets {targets}")
    return base


# -- smooth designed base ---------------------------------------------------------------


def gaussian_ring(center: float, width: float) -> Callable:
    def f(r, nu=0):
        r = np.asarray(r, float)
        out = 0.0
        for c in (center, -center):
            x = (r - c) / width
            e = np.exp(-x * x)
            if nu == 0:
                out = out + e
            elif nu == 1:
                out = out - 2 * x * e / width
            elif nu == 2:
                out = out + (4 * x * x - 2) * e / width**2
            else:
                raise ValueError("derivative order above 2 not provided")
        return out
    return f


def design_base_radial(
    targets: Sequence[float] = (1.0, 0.0, 1.0),
    convention: Convention = "spectral",
    window: float = 0.45,
    width: float = 0.15,
    centers: Optional[np.ndarray] = None,
    regularization: float = 1e-4,
    tol: float = 0.02,
    r_max: float = R_MAX,
    samples: int = SAMPLES,
    vanishing_moments: int = 3,
) -> BaseProfile:
    """Zero-mass Gaussian-ring combination whose ``d/dr (v_theta / r)`` matches
    ``a1 + a2 (r - 1) + a3 (r - 1)^2 / 2`` on ``|r - 1| <= window``.

    The three derivatives at r = 1 and the moments ``int g r^{2j+1} dr`` for
    ``j < vanishing_moments`` are imposed exactly (``j = 0`` is the mass; the
    higher ones speed up the far-field decay, which keeps periodic images
    weak); the window fit is least squares with a small ridge penalty.
    """
    targets = np.asarray(targets, float)
    if np.all(targets == 0):
        return _zero_base()
    centers = np.arange(0.0, 2.61, 0.1) if centers is None else np.asarray(centers, float)
    if centers.max() + 6 * width > r_max:
        raise InvalidGeometry("Gaussian rings do not fit inside r_max")
    scale = velocity_scale(convention)
    k_max = 12.0 / width
    basis = [RadialProfile.from_function(gaussian_ring(c, width), r_max, samples, max_exact_order=2)
             for c in centers]
    spec = [SpectralRadial.from_profile(b, k_max=k_max) for b in basis]

    x = np.cos(np.pi * (np.arange(41) + 0.5) / 41)
    half = 0.5
    omegas = np.array([sr.angular_velocity(1.0 + half * x) * scale / KERNEL_TO_SPECTRAL for sr in spec]).T
    coefs = np.polynomial.chebyshev.chebfit(x, omegas, 40)
    der = lambda m, u: np.polynomial.chebyshev.chebval(u, np.polynomial.chebyshev.chebder(coefs, m)).T / half**m
    at_one = np.stack([der(m, 0.0) for m in (1, 2, 3)])
    s = np.linspace(1.0 - window, 1.0 + window, 91)
    design = der(1, (s - 1.0) / half)
    wanted = targets[0] + targets[1] * (s - 1.0) + 0.5 * targets[2] * (s - 1.0) ** 2
    moments = np.array([[np.trapezoid(b.values * b.r ** (2 * j + 1), b.r) for b in basis]
                        for j in range(vanishing_moments)])

    A = np.vstack([at_one, moments])
    b = np.concatenate([targets, np.zeros(vanishing_moments)])
    n, c = len(centers), len(b)
    kkt = np.block([[design.T @ design + regularization * np.eye(n), A.T], [A, np.zeros((c, c))]])
    sol = np.linalg.solve(kkt, np.concatenate([design.T @ wanted, b]))
    coef = sol[:n]

    combined = SpectralRadial(spec[0].k, spec[0].weights, sum(ci * sr.F for ci, sr in zip(coef, spec)))
    rings = [gaussian_ring(c, width) for c in centers]

    def func(r, nu=0):
        return sum(ci * g(r, nu) for ci, g in zip(coef, rings))

    r = np.linspace(0.0, r_max, samples)
    base = BaseProfile(
        r, func(r), exact=func, support=(0.0, float(centers.max() + 6 * width)), max_exact_order=2,
        omega=lambda rr: combined.angular_velocity(rr, "kernel"), spectral=combined, coefficients=tuple(coef),
        info={"kind": "gaussian_rings", "width": width, "window": window, "regularization": regularization,
              "vanishing_moments": vanishing_moments},
    )
    measured = base.slope_derivatives(1.0, convention=convention)
    if np.any(np.abs(measured - targets) > tol * np.maximum(np.abs(targets), 1.0)):
        raise TargetMiss(f"measured {measured} for targets {targets}")
    return base


def minimum_margins(base: BaseProfile, eps_tilde: float, convention: Convention = "spectral",
                    radii: Optional[Sequence[float]] = None) -> dict:
    """Measured ``D(r0) - D(1) - (r0 - 1)^2 / 10`` with ``D = d/dr (v_theta / r)``,
    at ``r0 in {1 +- eps/2, 1 +- eps}`` by default."""
    radii = [1 - eps_tilde, 1 - eps_tilde / 2, 1 + eps_tilde / 2, 1 + eps_tilde] if radii is None else radii
    half = max(abs(r - 1) for r in radii) + 0.02
    D = lambda rr: chebyshev_derivatives(lambda u: base.angular_velocity(u, convention), 1.0, half, (1,),
                                         degree=40, at=rr)[0]
    values = D(np.array([1.0, *radii]))
    return {r0: float(v - values[0] - 0.1 * (r0 - 1) ** 2) for r0, v in zip(radii, values[1:])}


def minimum_holds(base: BaseProfile, eps_tilde: float, convention: Convention = "spectral",
                  slack: float = 0.1) -> bool:
    """The growth inequality with the bound relaxed by ``slack``."""
    margins = minimum_margins(base, eps_tilde, convention)
    return all(m + slack * 0.1 * (r0 - 1) ** 2 >= 0 for r0, m in margins.items())


def admissible_eps_tilde(base: BaseProfile, convention: Convention = "spectral",
                         candidates: Sequence[float] = (0.4, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005)) -> float:
    """Largest candidate half-width for which the growth inequality holds without slack."""
    for eps in candidates:
        if minimum_holds(base, eps, convention, slack=0.0):
            return eps
    raise InvalidGeometry("no admissible support half-width among the candidates")


# -- oscillatory ansatz --------------------------------------------------------------


def polynomial_profile(coeffs: Sequence[float], center: float = 0.0, r_max: float = R_MAX,
                       samples: int = SAMPLES) -> RadialProfile:
    """sum_j coeffs[j] (r - center)^j with exact derivatives."""
    poly = np.polynomial.Polynomial(coeffs)

    def func(r, nu=0):
        return (poly.deriv(nu) if nu else poly)(np.asarray(r, float) - center)

    return RadialProfile.from_function(func, r_max, samples, max_exact_order=50)


ZERO = polynomial_profile([0.0])


@dataclass(frozen=True, eq=False)
class OscillatoryAnsatz:
    """``amplitude * f(lam r) cos(N (theta + g(lam r)) + p(lam r))``."""

    f: RadialProfile
    g_phase: RadialProfile = ZERO
    p: RadialProfile = ZERO
    N: int = 8
    lam: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        if self.lam < 1:
            raise ValueError("lam must be at least 1")
        object.__setattr__(self, "N", int(self.N))

    @cached_property
    def support(self) -> tuple[float, float]:
        """Support of f(lam r) in physical radius."""
        if self.f.support is not None:
            lo, hi = self.f.support
        else:
            nz = np.nonzero(np.abs(self.f.values) > 1e-14 * max(self.f.sup_norm(), 1e-300))[0]
            lo, hi = (self.f.r[nz[0]], self.f.r[nz[-1]]) if len(nz) else (0.0, 0.0)
        return lo / self.lam, hi / self.lam

    def in_canonical_annulus(self) -> bool:
        lo, hi = self.support
        return lo >= 0.5 / self.lam - 1e-12 and hi <= 1.5 / self.lam + 1e-12

    def local_wavenumber(self) -> float:
        """Largest local wavenumber of the oscillation plus the envelope scale, in physical units."""
        lo, hi = self.support
        if hi <= 0:
            return 0.0
        rho = np.linspace(max(lo * self.lam, 1e-6), hi * self.lam, 2001)
        radial = self.lam * np.abs(self.N * self.g_phase(rho, 1) + self.p(rho, 1))
        angular = self.N * self.lam / rho
        envelope = self.lam * np.max(np.abs(self.f(rho, 1))) / max(np.max(np.abs(self.f(rho))), 1e-300)
        return float(np.max(np.hypot(angular, radial)) + envelope)

    def check_resolution(self, grid: Grid, points_per_wavelength: float = 4.0):
        k = self.local_wavenumber()
        if grid.wavelength_points(k) < points_per_wavelength:
            raise UnderResolved(
                f"local wavenumber {k:.1f} has {grid.wavelength_points(k):.2f} points per wavelength "
                f"(need {points_per_wavelength}) on n={grid.n}, L={grid.L}"
            )
        lo, hi = self.support
        if hi > grid.L:
            raise UnderResolved("ansatz support exceeds the box")

    def phase(self, r: np.ndarray, theta: np.ndarray) -> np.ndarray:
        rho = self.lam * r
        return self.N * (theta + self.g_phase(rho)) + self.p(rho)

    def evaluate(self, r: np.ndarray, theta: np.ndarray, trig=np.cos) -> np.ndarray:
        return self.amplitude * self.f(self.lam * r) * trig(self.phase(r, theta))

    def scaled(self, lam: float) -> "OscillatoryAnsatz":
        return OscillatoryAnsatz(self.f, self.g_phase, self.p, self.N, lam, self.amplitude)

    def with_N(self, N: int) -> "OscillatoryAnsatz":
        return OscillatoryAnsatz(self.f, self.g_phase, self.p, N, self.lam, self.amplitude)


MEAN_TOL = 1e-8


def sample_ansatz(a: OscillatoryAnsatz, grid: Grid, trig=np.cos, check: bool = True) -> SpectralField:
    """Evaluate the ansatz on the grid and transform. The mean is removed after
    checking it is negligible."""
    if check:
        a.check_resolution(grid)
    r, theta = grid.polar
    values = a.evaluate(r, theta, trig)
    field_ = SpectralField.from_physical(grid, values)
    scale = max(float(np.max(np.abs(values))), 1e-300)
    if abs(field_.mean) > MEAN_TOL * scale:
        raise UnderResolved(f"sampled ansatz has mean {abs(field_.mean):.2e}")
    return field_.without_mean()


def derivative_sup_norms(profile: RadialProfile, order: int = 5, lam: float = 1.0, points: int = 20001) -> np.ndarray:
    """sup |d^j/dr^j f(lam r)| for j = 0..order by repeated centered differences
    on a fine uniform grid covering the support."""
    lo, hi = profile.support if profile.support is not None else (0.0, profile.r_max)
    pad = 0.05 * (hi - lo)
    rho = np.linspace(max(lo - pad, 0.0), hi + pad, points)
    vals = profile(rho)
    out = [np.max(np.abs(vals))]
    h = rho[1] - rho[0]
    for _ in range(order):
        vals = np.gradient(vals, h, edge_order=2)
        out.append(np.max(np.abs(vals[order:-order])))
    return np.array(out) * lam ** np.arange(order + 1)


def c5_ratio(profile: RadialProfile, lam: float = 1.0) -> float:
    """||f(lam .)||_{C^5} / ||f||_{L^inf}."""
    norms = derivative_sup_norms(profile, 5, lam)
    return float(np.max(norms) / norms[0])
