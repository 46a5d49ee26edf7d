"""Fourier representation of fields on the periodic box [-L, L)^2.

Coefficients are stored in FFT order and normalized so that the (0, 0)
entry is the spatial mean: ``coeffs = fft2(u) / n**2``. Wavenumbers are
angular, ``k = pi * m / L``, so the symbol of the fractional Laplacian is
``|k|**s`` with no extra constant.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.fft as sfft

from .errors import NonzeroMean, NonzeroMeanWithSingularSymbol

MEAN_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``n x n`` points on ``[-L, L)^2``.

    Arrays use ``indexing="ij"``: axis 0 runs along x1, axis 1 along x2.
    """

    n: int
    L: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 16, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "L", float(self.L))

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def k_nyquist(self) -> float:
        return np.pi * self.n / (2.0 * self.L)

    @property
    def k_dealias(self) -> float:
        """Largest wavenumber per axis kept by the 2/3 rule."""
        return np.pi * (self.n // 3) / self.L

    @cached_property
    def x(self) -> np.ndarray:
        return -self.L + self.dx * np.arange(self.n)

    @cached_property
    def m(self) -> np.ndarray:
        """Integer mode numbers in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)

    @cached_property
    def k(self) -> np.ndarray:
        return np.pi * self.m / self.L

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.x, indexing="ij")

    @cached_property
    def polar(self) -> tuple[np.ndarray, np.ndarray]:
        x1, x2 = self.mesh
        return np.hypot(x1, x2), np.arctan2(x2, x1)

    @cached_property
    def wavevectors(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.k, self.k, indexing="ij")

    @cached_property
    def kmag(self) -> np.ndarray:
        k1, k2 = self.wavevectors
        return np.hypot(k1, k2)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on modes with m1 or m2 equal to -n/2."""
        edge = self.m == -self.n // 2
        return edge[:, None] | edge[None, :]

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True on modes kept by the 2/3 rule."""
        keep = np.abs(self.m) <= self.n // 3
        return keep[:, None] & keep[None, :]

    def wavelength_points(self, kmax: float) -> float:
        """Grid points per wavelength of a wave with wavenumber ``kmax``."""
        return np.inf if kmax <= 0 else 2.0 * np.pi / (kmax * self.dx)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Immutable real field stored by its Fourier coefficients."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"coefficient array has shape {c.shape}, expected {(self.grid.n,) * 2}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_physical(cls, grid: Grid, values: np.ndarray) -> "SpectralField":
        values = np.asarray(values, dtype=float)
        return cls(grid, sfft.fft2(values) / grid.n**2)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros((grid.n, grid.n), dtype=complex))

    @cached_property
    def physical(self) -> np.ndarray:
        out = sfft.ifft2(self.coeffs * self.grid.n**2).real
        out.setflags(write=False)
        return out

    @property
    def mean(self) -> complex:
        return self.coeffs[0, 0]

    def l2(self) -> float:
        """L2 norm over the box via Plancherel."""
        return 2.0 * self.grid.L * float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def symmetry_defect(self) -> float:
        """Relative deviation from conjugate symmetry c(-m) = conj(c(m))."""
        c = self.coeffs
        flipped = np.roll(np.flip(c, axis=(0, 1)), 1, axis=(0, 1))
        scale = np.max(np.abs(c)) or 1.0
        return float(np.max(np.abs(c - np.conj(flipped))) / scale)

    def _check_grid(self, other: "SpectralField"):
        if other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        if isinstance(other, SpectralField):
            self._check_grid(other)
            return SpectralField(self.grid, self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, SpectralField):
            self._check_grid(other)
            return SpectralField(self.grid, self.coeffs - other.coeffs)
        return NotImplemented

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs)

    def __mul__(self, scalar):
        if np.isscalar(scalar):
            return SpectralField(self.grid, self.coeffs * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def without_mean(self) -> "SpectralField":
        c = self.coeffs.copy()
        c[0, 0] = 0.0
        return SpectralField(self.grid, c)


@dataclass(frozen=True)
class VelocityField:
    v1: SpectralField
    v2: SpectralField

    def divergence(self) -> SpectralField:
        k1, k2 = self.v1.grid.wavevectors
        return SpectralField(self.v1.grid, 1j * k1 * self.v1.coeffs + 1j * k2 * self.v2.coeffs)

    def max_speed(self) -> float:
        return float(np.max(np.hypot(self.v1.physical, self.v2.physical)))


def _mean_is_negligible(field: SpectralField) -> bool:
    scale = max(1.0, float(np.max(np.abs(field.coeffs))))
    return abs(field.mean) <= MEAN_TOL * scale


def require_zero_mean(field: SpectralField, what: str = "field"):
    if not _mean_is_negligible(field):
        raise NonzeroMean(f"{what} has mean {field.mean:.3e}; a zero-mean field is required")


def apply_multiplier(
    field: SpectralField,
    symbol: Callable[..., np.ndarray],
    vector: bool = False,
) -> SpectralField:
    """Multiply every Fourier coefficient by ``symbol``.

    ``symbol`` receives ``|k|`` (or ``(k1, k2)`` when ``vector`` is true) as
    arrays. If it is not finite at ``k = 0`` the field must have zero mean and
    the mean of the output is set to zero. Nyquist modes are always zeroed.
    """
    grid = field.grid
    with np.errstate(divide="ignore", invalid="ignore"):
        values = symbol(*grid.wavevectors) if vector else symbol(grid.kmag)
        values = np.broadcast_to(np.asarray(values), (grid.n, grid.n))
        singular = not np.isfinite(values[0, 0])
        if singular and not _mean_is_negligible(field):
            raise NonzeroMeanWithSingularSymbol(
                f"symbol is singular at k=0 but field mean is {field.mean:.3e}"
            )
        out = field.coeffs * values
    if singular:
        out[0, 0] = 0.0
    out[grid.nyquist_mask] = 0.0
    return SpectralField(grid, out)


def fractional_laplacian(field: SpectralField, s: float) -> SpectralField:
    """Lambda^s = (-Delta)^(s/2) with symbol |k|^s; the zero mode maps to 0 for s < 0."""
    if s == 0:
        return apply_multiplier(field, lambda k: np.ones_like(k))
    return apply_multiplier(field, lambda k: k**s)


def heat_semigroup(field: SpectralField, alpha: float, t: float) -> SpectralField:
    """exp(-t Lambda^alpha) applied exactly."""
    return apply_multiplier(field, lambda k: np.exp(-t * k**alpha))


def gradient(field: SpectralField) -> tuple[SpectralField, SpectralField]:
    return (
        apply_multiplier(field, lambda k1, k2: 1j * k1, vector=True),
        apply_multiplier(field, lambda k1, k2: 1j * k2, vector=True),
    )


def angular_derivative(field: SpectralField) -> np.ndarray:
    """d/dtheta = x1 d/dx2 - x2 d/dx1, evaluated in physical space."""
    d1, d2 = gradient(field)
    x1, x2 = field.grid.mesh
    return x1 * d2.physical - x2 * d1.physical


def riesz_velocity(w: SpectralField) -> VelocityField:
    """v = (-d2 psi, d1 psi) with psi = Lambda^{-1} w."""
    require_zero_mean(w, "w")
    v1 = apply_multiplier(w, lambda k1, k2: -1j * k2 / np.hypot(k1, k2), vector=True)
    v2 = apply_multiplier(w, lambda k1, k2: 1j * k1 / np.hypot(k1, k2), vector=True)
    return VelocityField(v1.without_mean(), v2.without_mean())


def sobolev_norm(w: SpectralField, s: float, homogeneous: bool = False) -> float:
    """Sobolev norm by Plancherel.

    The inhomogeneous norm is the sum ``||w||_2 + ||Lambda^s w||_2``, not the
    square root of the sum of squares.
    """
    if not -2.0 <= s <= 6.0:
        raise ValueError(f"s must lie in [-2, 6], got {s}")
    if s < 0:
        require_zero_mean(w, "w")
    kmag = w.grid.kmag
    weight = np.ones_like(kmag)
    nz = kmag > 0
    weight[nz] = kmag[nz] ** (2 * s)
    if s != 0:
        weight[~nz] = 0.0
    weight[w.grid.nyquist_mask] = 0.0 if s != 0 else 1.0
    dot = 2.0 * w.grid.L * float(np.sqrt(np.sum(weight * np.abs(w.coeffs) ** 2)))
    return dot if homogeneous else w.l2() + dot


def dealias(field: SpectralField) -> SpectralField:
    """Zero every mode with max(|m1|, |m2|) > n/3."""
    return SpectralField(field.grid, np.where(field.grid.dealias_mask, field.coeffs, 0.0))
