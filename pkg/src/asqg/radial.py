"""Radial profiles, two-dimensional Fourier transforms of radial functions,
and the angular velocity induced by a radial scalar.

Two velocity normalizations appear throughout the package:

``"kernel"``
    The unnormalized principal-value kernel
    ``int r' (r - r' cos t) / |x - y|^3 (h(r') - h(r)) dt dr'``. A unit
    ring mass at small radius gives ``v_theta = 2 pi / r^2``.
``"spectral"``
    The velocity ``grad^perp Lambda^{-1} h`` of the Fourier solver. It equals
    ``-1 / (2 pi)`` times the kernel value.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Literal, Optional

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from .errors import InvalidGeometry, NonConvergence

Convention = Literal["kernel", "spectral"]
KERNEL_TO_SPECTRAL = -1.0 / (2.0 * np.pi)

R_MAX = 4.0
SAMPLES = 4096


def velocity_scale(convention: Convention) -> float:
    """Factor converting a kernel-normalized velocity to ``convention``."""
    if convention == "kernel":
        return 1.0
    if convention == "spectral":
        return KERNEL_TO_SPECTRAL
    raise ValueError(f"unknown convention {convention!r}")


# -- smooth compactly supported building blocks -------------------------------


@dataclass(frozen=True)
class ExpBump:
    """``exp(-1 / (1 - x^2))`` on ``(-1, 1)`` with exact derivatives of any order.

    The n-th derivative is ``P_n(x) / (1 - x^2)^{2n}`` times the bump, with
    ``P_{n+1} = P_n' (1 - x^2)^2 + P_n (4 n x (1 - x^2) - 2 x)``.
    """

    max_order: int = 8

    @cached_property
    def polys(self) -> list[np.ndarray]:
        q = np.array([1.0, 0.0, -1.0])
        q2 = P.polymul(q, q)
        out = [np.array([1.0])]
        for n in range(self.max_order):
            pn = out[-1]
            lead = P.polymul(P.polyder(pn), q2) if len(pn) > 1 else np.zeros(1)
            out.append(P.polyadd(lead, P.polymul(pn, P.polysub(P.polymul([0.0, 4.0 * n], q), [0.0, 2.0]))))
        return out

    def __call__(self, x, nu: int = 0) -> np.ndarray:
        if nu > self.max_order:
            raise ValueError(f"derivative order {nu} exceeds {self.max_order}")
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        inside = np.abs(x) < 1
        xi = x[inside]
        one = 1.0 - xi * xi
        out[inside] = np.exp(-1.0 / one) * P.polyval(xi, self.polys[nu]) / one ** (2 * nu)
        return out


EXP_BUMP = ExpBump()


def smoothstep(x) -> np.ndarray:
    """C-infinity transition: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


# -- radial profiles ------------------------------------------------------------


Evaluator = Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """A radial function sampled uniformly on ``[0, r_max]``.

    If ``exact`` is given it is used for evaluation (``exact(r, nu)`` returns
    the ``nu``-th derivative); otherwise a cubic spline through the samples is
    used. Outside ``[0, r_max]`` the profile is zero.
    """

    r: np.ndarray
    values: np.ndarray
    exact: Optional[Evaluator] = field(default=None, repr=False)
    support: Optional[tuple[float, float]] = None
    max_exact_order: int = 0

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or len(r) < 4:
            raise ValueError("r and values must be matching 1-D arrays with at least 4 samples")
        if r[0] != 0.0 or np.any(np.diff(r) <= 0):
            raise ValueError("r must start at 0 and increase")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(
        cls,
        func: Evaluator,
        r_max: float = R_MAX,
        samples: int = SAMPLES,
        support: Optional[tuple[float, float]] = None,
        max_exact_order: int = 0,
    ) -> "RadialProfile":
        r = np.linspace(0.0, r_max, samples)
        return cls(r, func(r, 0), exact=func, support=support, max_exact_order=max_exact_order)

    @classmethod
    def from_samples(cls, r, values) -> "RadialProfile":
        return cls(np.asarray(r, float), np.asarray(values, float))

    @classmethod
    def zero(cls, r_max: float = R_MAX, samples: int = SAMPLES) -> "RadialProfile":
        return cls.from_function(lambda r, nu=0: np.zeros_like(np.asarray(r, float)), r_max, samples,
                                 support=(0.0, 0.0), max_exact_order=99)

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    @cached_property
    def spline(self) -> CubicSpline:
        return CubicSpline(self.r, self.values)

    def __call__(self, r, nu: int = 0) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.exact is not None and nu <= self.max_exact_order:
            out = np.asarray(self.exact(np.minimum(r, self.r_max), nu), dtype=float)
        else:
            out = self.spline(np.clip(r, 0.0, self.r_max), nu)
        return np.where(r <= self.r_max, out, 0.0)

    def scaled(self, lam: float, amplitude: float = 1.0) -> "RadialProfile":
        """The profile ``r -> amplitude * f(lam * r)``."""
        base = self

        def func(r, nu=0):
            return amplitude * lam**nu * base(lam * np.asarray(r, float), nu)

        support = None if self.support is None else (self.support[0] / lam, self.support[1] / lam)
        order = self.max_exact_order if self.exact is not None else 3
        return RadialProfile.from_function(func, self.r_max / lam, len(self.r), support, order)

    def with_values(self, values) -> "RadialProfile":
        return RadialProfile(self.r, np.asarray(values, float))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def to_csv(self, path: Optional[Path] = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r", "value"])
        for ri, vi in zip(self.r, self.values):
            writer.writerow([repr(float(ri)), repr(float(vi))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "RadialProfile":
        text = Path(source).read_text() if isinstance(source, (str, Path)) and Path(str(source)).exists() else str(source)
        rows = list(csv.reader(io.StringIO(text)))
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        return cls.from_samples(data[:, 0], data[:, 1])


def bump_profile(
    center: float,
    half_width: float,
    plateau_fraction: float,
    r_max: float = R_MAX,
    samples: int = SAMPLES,
) -> RadialProfile:
    """Bump equal to 1 on ``|r - center| <= plateau_fraction * half_width`` and 0
    beyond ``half_width``, with C-infinity exponential transitions."""
    if not 0.0 < plateau_fraction < 1.0:
        raise InvalidGeometry(f"plateau_fraction must lie in (0, 1), got {plateau_fraction}")
    if not 0.0 < half_width < center:
        raise InvalidGeometry(f"need 0 < half_width < center, got {half_width}, {center}")
    if center + half_width > r_max:
        raise InvalidGeometry("bump extends beyond r_max")
    ramp = half_width * (1.0 - plateau_fraction)

    def func(r, nu=0):
        return smoothstep((half_width - np.abs(np.asarray(r, float) - center)) / ramp)

    return RadialProfile.from_function(func, r_max, samples, support=(center - half_width, center + half_width))


# -- two-dimensional Fourier transform of radial functions ----------------------


def _panels(a: float, b: float, width: float, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    count = max(1, int(np.ceil((b - a) / width)))
    t, w = special.roots_legendre(order)
    edges = np.linspace(a, b, count + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def hankel_forward(profile: RadialProfile, k: np.ndarray, r_lo: float = 0.0, r_hi: Optional[float] = None,
                   chunk: int = 512) -> np.ndarray:
    """F(k) = 2 pi int f(s) J0(k s) s ds, the planar Fourier transform of a radial f."""
    k = np.atleast_1d(np.asarray(k, float))
    r_hi = profile.r_max if r_hi is None else r_hi
    width = min(0.1, 2.0 * np.pi / max(float(np.max(k)), 1.0))
    s, w = _panels(r_lo, r_hi, width)
    ws = 2.0 * np.pi * w * s * profile(s)
    out = np.empty_like(k)
    for i in range(0, len(k), chunk):
        out[i:i + chunk] = special.j0(np.outer(k[i:i + chunk], s)) @ ws
    return out


@dataclass(frozen=True)
class SpectralRadial:
    """A radial function represented by its planar Fourier transform on [0, k_max].

    Evaluation uses composite Gauss-Legendre in k; ``F`` is stored at the nodes.
    """

    k: np.ndarray
    weights: np.ndarray
    F: np.ndarray

    @classmethod
    def from_profile(cls, profile: RadialProfile, k_max: Optional[float] = None, tol: float = 1e-13,
                     r_hi: Optional[float] = None) -> "SpectralRadial":
        if k_max is None:
            k_max = bandwidth(profile, tol, r_hi=r_hi)
        k, w = _panels(0.0, k_max, min(1.0, k_max / 64.0))
        return cls(k, w, hankel_forward(profile, k, r_hi=r_hi))

    def heat(self, alpha: float, t: float) -> "SpectralRadial":
        return SpectralRadial(self.k, self.weights, self.F * np.exp(-t * self.k**alpha))

    def _apply(self, r: np.ndarray, kernel) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, float))
        out = np.empty_like(r)
        for i in range(0, len(r), 512):
            rr = r[i:i + 512]
            out[i:i + 512] = kernel(np.outer(rr, self.k), rr[:, None]) @ (self.weights * self.F)
        return out / (2.0 * np.pi)

    def value(self, r) -> np.ndarray:
        return self._apply(r, lambda kr, rr: special.j0(kr) * self.k)

    def radial_derivative(self, r) -> np.ndarray:
        return self._apply(r, lambda kr, rr: -special.j1(kr) * self.k**2)

    def velocity(self, r, convention: Convention = "spectral") -> np.ndarray:
        """Azimuthal velocity; spectral normalization is d/dr Lambda^{-1} f."""
        v = self._apply(r, lambda kr, rr: -special.j1(kr) * self.k)
        return v if convention == "spectral" else v / KERNEL_TO_SPECTRAL

    def angular_velocity(self, r, convention: Convention = "spectral") -> np.ndarray:
        """v_theta / r, continuous at r = 0."""
        def kern(kr, rr):
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(kr > 1e-8, special.j1(kr) / np.where(kr > 1e-8, kr, 1.0), 0.5 - kr**2 / 16)
            return -ratio * self.k**2
        v = self._apply(r, kern)
        return v if convention == "spectral" else v / KERNEL_TO_SPECTRAL

    def angular_velocity_slope(self, r, convention: Convention = "spectral") -> np.ndarray:
        """d/dr (v_theta / r) = (1 / 2 pi) int F k^3 J2(k r) / (k r) dk in spectral form."""
        def kern(kr, rr):
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(kr > 1e-8, special.jv(2, kr) / np.where(kr > 1e-8, kr, 1.0), kr / 8)
            return ratio * self.k**3
        v = self._apply(r, kern)
        return v if convention == "spectral" else v / KERNEL_TO_SPECTRAL

    def l2_squared(self) -> float:
        """Planar L2 norm squared, by Plancherel: (1 / 2 pi) int |F|^2 k dk."""
        return float(np.sum(self.weights * self.F**2 * self.k) / (2.0 * np.pi))

    def energy_below(self, c: float) -> float:
        mask = self.k < c
        return float(np.sum(self.weights[mask] * self.F[mask] ** 2 * self.k[mask]) / (2.0 * np.pi))


def bandwidth(profile: RadialProfile, tol: float = 1e-13, r_hi: Optional[float] = None,
              k_ceiling: float = 4096.0) -> float:
    """Smallest k beyond which |F(k)| stays below ``tol * max |F|`` (checked on a coarse grid)."""
    k_max = 16.0
    while True:
        k = np.linspace(0.0, k_max, 257)
        F = np.abs(hankel_forward(profile, k, r_hi=r_hi))
        peak = max(float(F.max()), 1e-300)
        tail = F[k > 0.75 * k_max]
        if tail.max() <= tol * peak or k_max >= k_ceiling:
            above = np.nonzero(F > tol * peak)[0]
            return float(k[above[-1]] * 1.25 + 1.0) if len(above) else k_max
        k_max *= 2.0


# -- velocity of a radial scalar --------------------------------------------------


def _kernel_I(r: float, rp: np.ndarray) -> np.ndarray:
    """int_{-pi}^{pi} (r - r' cos t) / (r^2 + r'^2 - 2 r r' cos t)^{3/2} dt in closed form.

    With m = 4 r r' / (r + r')^2 the angular integral of |x - y|^{-1} is
    4 K(m) / (r + r'); differentiating in r gives
    4 K / (r + r')^2 + 2 (E - (1 - m) K) / (r (r - r')).
    """
    rp = np.asarray(rp, dtype=float)
    s = r + rp
    m1 = ((r - rp) / s) ** 2
    m = 1.0 - m1
    K = special.ellipkm1(m1)
    E = special.ellipe(m)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 4.0 * K / s**2 + 2.0 * (E - m1 * K) / (r * (r - rp))
    return out


def kernel_angular_integral_gl(r: float, rp: float, nodes: int = 256, tol: float = 1e-7) -> float:
    """Gauss-Legendre evaluation of the same angular integral, doubling until settled."""
    prev = None
    while nodes <= 1 << 16:
        t, w = special.roots_legendre(nodes)
        theta = np.pi * t
        val = np.pi * np.sum(w * (r - rp * np.cos(theta)) / (r * r + rp * rp - 2 * r * rp * np.cos(theta)) ** 1.5)
        if prev is not None and abs(val - prev) < tol * max(1.0, abs(val)):
            return float(val)
        prev = val
        nodes *= 2
    raise NonConvergence("angular quadrature did not settle")


def _far_subtraction(r: float, R: float, terms: int = 40) -> float:
    """int_R^inf r' I(r, r') dr' for r < R, from the Legendre expansion of the kernel."""
    total = 0.0
    for n in range(1, terms):
        a = special.comb(2 * n, n) / 4.0**n
        total += a * a * 2 * n * r ** (2 * n - 1) * R ** (1 - 2 * n) / (2 * n - 1)
    return -2.0 * np.pi * total


def v_theta_radial(h: RadialProfile, r: float, convention: Convention = "kernel",
                   epsabs: float = 1e-11, epsrel: float = 1e-10) -> float:
    """Azimuthal velocity at radius ``r`` of the radial scalar ``h``.

    Principal-value double integral with the angular part in closed form; the
    radial integral is split at ``r' = r`` where the subtraction
    ``h(r') - h(r)`` cancels the 1/(r - r') singularity.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    lo, hi = h.support if h.support is not None else (0.0, h.r_max)
    hr = float(h(np.array([r]))[0])
    if hi <= 0.0 or (hr == 0.0 and np.max(np.abs(h.values)) == 0.0):
        return 0.0
    if hr == 0.0:
        a, b = lo, hi
    else:
        a, b = 0.0, h.r_max

    def integrand(rp):
        return rp * _kernel_I(r, np.array([rp]))[0] * (float(h(np.array([rp]))[0]) - hr)

    pieces = [a] + [x for x in (r,) if a < x < b] + [b]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for x0, x1 in zip(pieces[:-1], pieces[1:]):
            inner = sorted({x0, x1} | {p for p in np.linspace(x0, x1, 9)[1:-1]})
            for y0, y1 in zip(inner[:-1], inner[1:]):
                val, _ = integrate.quad(integrand, y0, y1, epsabs=epsabs, epsrel=epsrel, limit=400)
                total += val
    if hr != 0.0 and r < h.r_max:
        total -= hr * _far_subtraction(r, h.r_max)
    return total * velocity_scale(convention)


def chebyshev_derivatives(func: Callable[[np.ndarray], np.ndarray], center: float, half: float,
                          orders=(1, 2, 3), degree: int = 28, at: Optional[np.ndarray] = None) -> np.ndarray:
    """Derivatives of a smooth function from a Chebyshev fit on [center - half, center + half].

    Returns an array of shape ``(len(orders), len(at))`` (``at`` defaults to the center).
    """
    x = np.cos(np.pi * (np.arange(degree + 1) + 0.5) / (degree + 1))
    values = func(center + half * x)
    coef = C.chebfit(x, values, degree)
    pts = np.atleast_1d(np.array([center] if at is None else at, float))
    u = (pts - center) / half
    return np.array([C.chebval(u, C.chebder(coef, m)) / half**m for m in orders])


def angular_velocity_derivatives(h: RadialProfile, r0: float = 1.0, orders=(1, 2, 3),
                                 convention: Convention = "kernel", half: float = 0.1,
                                 degree: int = 24) -> np.ndarray:
    """d^j/dr^j (v_theta(h) / r) at r0 from the principal-value quadrature."""
    omega = lambda rr: np.array([v_theta_radial(h, float(x), convention) / x for x in rr])
    return chebyshev_derivatives(omega, r0, half, orders, degree)[:, 0]
