"""Absolute constants and truncated oscillatory double integrals.

One-dimensional improper integrals are split into a finite head, handled by
adaptive quadrature over whole periods, and a tail ``int_X^inf e^{ix} x^{-p}``
summed from its integration-by-parts expansion. Each constant is evaluated at
two truncation points as a Cauchy check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy import integrate, special

from .errors import NonConvergence

TAIL_TERMS = 12


def _tail_series(p: float, X: float, omega: float = 1.0, terms: int = TAIL_TERMS) -> tuple[complex, float]:
    """int_X^inf exp(i omega x) x^{-p} dx and a bound on the truncation error.

    Repeated integration by parts gives
    ``i/omega e^{i omega X} X^{-p} sum_k (-i)^k (p)_k (omega X)^{-k}``.
    """
    u = omega * X
    total = 0.0 + 0.0j
    term = 1.0
    for k in range(terms):
        total += (-1j) ** k * term
        term *= (p + k) / u
    value = 1j / omega * np.exp(1j * u) * X ** (-p) * total
    return value, abs(term) * X ** (-p) / omega


def _fourier_power_integral(p: float, kind: Literal["sin", "cos"], periods: int, nodes: int = 48) -> tuple[float, float]:
    """int_0^inf trig(x) x^{-p} dx with the head cut at x = 2 pi periods.

    The first period carries the x^{-p} singularity as a Gauss-Jacobi weight;
    the remaining periods use Gauss-Legendre panels.
    """
    trig = np.sin if kind == "sin" else np.cos
    if kind == "sin":
        t, w = special.roots_jacobi(nodes, 0.0, 1.0 - p)
        x = np.pi * (1.0 + t)
        head = np.pi ** (2.0 - p) * np.sum(w * np.sinc(x / np.pi))
    else:
        t, w = special.roots_jacobi(nodes, 0.0, -p)
        head = np.pi ** (1.0 - p) * np.sum(w * np.cos(np.pi * (1.0 + t)))
    if periods > 1:
        t, w = special.roots_legendre(nodes)
        starts = 2.0 * np.pi * np.arange(1, periods)
        x = starts[:, None] + np.pi * (1.0 + t)[None, :]
        head += np.pi * np.sum(w[None, :] * trig(x) * x ** (-p))
    tail, bound = _tail_series(p, 2.0 * np.pi * periods)
    part = tail.imag if kind == "sin" else tail.real
    return head + part, bound


def _converged(p: float, kind: Literal["sin", "cos"], tol: float, periods: int = 8) -> float:
    """Refine both the truncation point and the panel order until they agree to ``tol``."""
    while periods <= 1024:
        v1, b1 = _fourier_power_integral(p, kind, periods)
        v2, b2 = _fourier_power_integral(p, kind, 2 * periods)
        v3, _ = _fourier_power_integral(p, kind, 2 * periods, nodes=96)
        if max(b1, b2) < tol and abs(v1 - v2) < tol and abs(v2 - v3) < tol:
            return v3
        periods *= 2
    raise NonConvergence(f"{kind} power integral with p={p} did not settle below {tol}")


@lru_cache(maxsize=None)
def dirichlet_C0(tol: float = 1e-8) -> float:
    """C0 = 4 int_0^inf sin(x)/x dx."""
    return 4.0 * _converged(1.0, "sin", tol)


def _check_alpha(alpha: float):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


@lru_cache(maxsize=None)
def cos_power_integral(alpha: float, tol: float = 1e-9) -> float:
    """int_0^inf cos(R) R^{alpha-1} dR for alpha in (0, 1)."""
    _check_alpha(alpha)
    value = _converged(1.0 - alpha, "cos", tol)
    if not value > 0:
        raise NonConvergence(f"cos power integral is not positive for alpha={alpha}: {value}")
    return value


@lru_cache(maxsize=None)
def sin_power_integral(alpha: float) -> float:
    """int_0^{pi/2} sin(A)^{-alpha} dA, with the endpoint singularity as an algebraic weight."""
    _check_alpha(alpha)
    value, err = integrate.quad(lambda a: np.sinc(a / np.pi) ** (-alpha), 0.0, np.pi / 2,
                                weight="alg", wvar=(-alpha, 0.0), epsabs=1e-14, epsrel=1e-13)
    if err > 1e-9:
        raise NonConvergence(f"sin power integral error estimate {err:.2e}")
    return value


@lru_cache(maxsize=None)
def K_alpha(alpha: float) -> float:
    """K_alpha = 4 (int_0^{pi/2} sin^{-alpha}) (int_0^inf cos(R) R^{alpha-1} dR)."""
    value = 4.0 * sin_power_integral(alpha) * cos_power_integral(alpha)
    if not value > 0:
        raise NonConvergence(f"K_alpha not positive for alpha={alpha}")
    return value


def riesz_potential_constant(alpha: float) -> float:
    """c_alpha with Lambda^{-alpha} f = c_alpha * int f(y) |x-y|^{alpha-2} dy in the plane.

    The unnormalized kernel integral is ``Lambda^{-alpha} / c_alpha``; for
    ``alpha = 1`` this is ``1 / (2 pi)``.
    """
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")
    return special.gamma(1 - alpha / 2) / (2**alpha * np.pi * special.gamma(alpha / 2))


@dataclass(frozen=True)
class OscillatoryIntegralSpec:
    alpha: float
    r: float
    gprime: float
    N: float
    epsilon_prime: float = 0.25

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.r > 0:
            raise ValueError("r must be positive")
        if not self.N >= 2:
            raise ValueError("N must be at least 2")
        if not 0 < self.epsilon_prime < 0.5:
            raise ValueError("epsilon_prime must lie in (0, 1/2)")

    def diffusion_limit(self) -> float:
        return K_alpha(self.alpha) / (1 / self.r**2 + self.gprime**2) ** (self.alpha / 2)

    def radial_velocity_limit(self) -> float:
        return dirichlet_C0() / np.sqrt(1 + (self.r * self.gprime) ** 2)


_QUAD = dict(epsabs=1e-11, epsrel=1e-10, limit=400)


def _quad(f, a, b, **kw):
    opts = {**_QUAD, **kw}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err = integrate.quad(f, a, b, **opts)
    return value, err


def _oscillatory_line(
    q: float, c: float, lead: int, a: float, b: float, omega: float, kind: Literal["sin", "cos"]
) -> float:
    """int_a^b trig(omega s) s^lead (c^2 + s^2)^{-q} ds for smooth decaying envelopes.

    The near part uses QAWO; beyond ``X`` the envelope is expanded in powers of
    ``s`` and each power is integrated with the tail series.
    """
    if b <= a:
        return 0.0
    envelope = lambda s: s**lead * (c * c + s * s) ** (-q)
    X = max(a, 12.0 * c, 60.0 / omega)
    near_end = min(X, b)
    near = _quad(envelope, a, near_end, weight=kind, wvar=omega)[0] if near_end > a else 0.0
    if b <= X:
        return near
    far = 0.0 + 0.0j
    coef = 1.0
    for j in range(16):
        p = 2 * q + 2 * j - lead
        upper = _tail_series(p, X, omega)[0] - _tail_series(p, b, omega)[0]
        far += coef * c ** (2 * j) * upper
        coef *= (-q - j) / (j + 1)
        if abs(coef) * (c / X) ** (2 * j + 2) < 1e-17:
            break
    return near + (far.imag if kind == "sin" else far.real)


def _polar_cap(integrand, rho0: float) -> float:
    """4 * int_0^{pi/2} int_0^{rho0} integrand(rho, A) drho dA."""
    inner = lambda A: _quad(lambda rho: integrand(rho, A), 0.0, rho0)[0]
    return 4.0 * _quad(inner, 0.0, np.pi / 2)[0]


def H_N(spec: OscillatoryIntegralSpec, kind: Literal["diffusion", "radial_velocity"]) -> float:
    """Truncated double integral whose large-N limit defines K_alpha or C0.

    diffusion: int over |s2| <= r pi N, |s1| <= N^eps' of
        cos(s2 / r) cos(s1 g') |s|^{alpha - 2}
    radial_velocity: int over |s1| <= N^{1/2}, |s2| <= N^eps' / r of
        s1 sin(s1) cos(r s2 g') |s|^{-3}
    A quarter disk around the origin is integrated in polar coordinates, which
    removes the singularity; the rest is an iterated integral whose inner,
    long oscillatory direction is treated by QAWO plus the tail series.
    """
    alpha, r, gp, N, ep = spec.alpha, spec.r, spec.gprime, spec.N, spec.epsilon_prime
    if kind == "diffusion":
        S_short, S_long = N**ep, r * np.pi * N
        rho0 = 0.5 * min(S_short, S_long, 1.0)
        q = (2.0 - alpha) / 2.0
        cap = _polar_cap(
            lambda rho, A: np.cos(rho * np.sin(A) / r) * np.cos(gp * rho * np.cos(A)) * rho ** (alpha - 1.0),
            rho0,
        )

        def outer(s1):
            lo = np.sqrt(max(rho0**2 - s1**2, 0.0))
            return np.cos(gp * s1) * _oscillatory_line(q, s1, 0, lo, S_long, 1.0 / r, "cos")

        rest = 4.0 * _quad(outer, 0.0, S_short, points=[rho0], limit=200)[0]
        return cap + rest
    if kind == "radial_velocity":
        S_long, S_short = np.sqrt(N), N**ep / r
        b = r * gp
        rho0 = 0.5 * min(S_short, S_long, 1.0)
        cap = _polar_cap(
            lambda rho, A: np.cos(A) * np.sinc(rho * np.cos(A) / np.pi) * np.cos(A)
            * np.cos(b * rho * np.sin(A)),
            rho0,
        )

        def outer(s2):
            lo = np.sqrt(max(rho0**2 - s2**2, 0.0))
            return np.cos(b * s2) * _oscillatory_line(1.5, s2, 1, lo, S_long, 1.0, "sin")

        rest = 4.0 * _quad(outer, 0.0, S_short, points=[rho0], limit=200)[0]
        return cap + rest
    raise ValueError(f"unknown kind {kind!r}")
