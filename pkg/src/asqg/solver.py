"""Dissipative alpha-SQG on the periodic box:

    w_t + v . grad w + Lambda^alpha w = 0,    v = grad^perp Lambda^{-1} w.

Integrating-factor SSP-RK3 (Shu-Osher) on real-to-complex FFTs. The
dissipation is propagated exactly; the advection term is evaluated
pseudospectrally and truncated by the 2/3 rule.

Time advances on a fixed grid of macro steps of length ``dt_max`` (global
boundaries ``j * dt_max`` and ``t_end``). Each macro step is split into equal
substeps from the CFL bound at its start, so a run restarted from a
checkpoint written at a macro boundary retraces the uninterrupted run bit for
bit.
"""

from __future__ import annotations

import csv
import math
import struct
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import scipy.fft as sfft

from .errors import CheckpointIOFailure, NaNDetected, VelocityBlowup
from .spectral import Grid, SpectralField, require_zero_mean

CHECKPOINT_MAGIC = b"ASQGCKPT"
CHECKPOINT_VERSION = 1
# e^{|k|^alpha dt / 2} appears inside a stage; keep it far from overflow
MAX_STAGE_EXPONENT = 30.0


@dataclass(frozen=True)
class SolverConfig:
    alpha: float
    t_end: float
    dt_max: float = 1e-2
    cfl: float = 0.5
    checkpoint_every: int = 0
    dealias: bool = True
    checkpoint_dir: Optional[Path] = None
    diagnostics_path: Optional[Path] = None
    nonlinear: bool = True
    history: int = 4096

    def __post_init__(self):
        if not 0 < self.alpha <= 2:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not self.t_end >= 0:
            raise ValueError("t_end must be nonnegative")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if self.checkpoint_every < 0:
            raise ValueError("checkpoint_every must be nonnegative")
        if self.checkpoint_every and self.checkpoint_dir is None:
            raise ValueError("checkpoint_every needs a checkpoint_dir")


# -- spectral workspace -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _Workspace:
    grid: Grid
    k1: np.ndarray
    k2: np.ndarray
    kmag: np.ndarray
    keep: np.ndarray
    dealias_keep: np.ndarray

    @classmethod
    def build(cls, grid: Grid) -> "_Workspace":
        n = grid.n
        k = grid.k
        kr = np.pi * np.arange(n // 2 + 1) / grid.L
        k1, k2 = np.meshgrid(k, kr, indexing="ij")
        m1 = np.abs(grid.m)[:, None]
        m2 = np.arange(n // 2 + 1)[None, :]
        keep = (m1 != n // 2) & (m2 != n // 2)
        dealias_keep = keep & (m1 <= n // 3) & (m2 <= n // 3)
        return cls(grid, k1, k2, np.hypot(k1, k2), keep, dealias_keep)

    def propagator(self, alpha: float, tau: float) -> np.ndarray:
        return np.where(self.keep, np.exp(-tau * self.kmag**alpha), 0.0)


@lru_cache(maxsize=8)
def _workspace(grid: Grid) -> _Workspace:
    return _Workspace.build(grid)


def to_half(w: SpectralField) -> np.ndarray:
    return np.array(w.coeffs[:, : w.grid.n // 2 + 1])


def from_half(grid: Grid, half: np.ndarray) -> SpectralField:
    n = grid.n
    full = np.empty((n, n), dtype=complex)
    full[:, : n // 2 + 1] = half
    cols = np.arange(n // 2 + 1, n)
    rows = (-np.arange(n)) % n
    full[:, cols] = np.conj(half[rows][:, n - cols])
    return SpectralField(grid, full)


def _physical(ws: _Workspace, half: np.ndarray) -> np.ndarray:
    n = ws.grid.n
    return sfft.irfft2(half * n**2, s=(n, n))


def _velocity(ws: _Workspace, half: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(ws.kmag > 0, 1.0 / ws.kmag, 0.0)
    v1 = -1j * ws.k2 * inv * half
    v2 = 1j * ws.k1 * inv * half
    v1[~ws.keep] = 0.0
    v2[~ws.keep] = 0.0
    return _physical(ws, v1), _physical(ws, v2)


def max_speed(ws: _Workspace, half: np.ndarray) -> float:
    v1, v2 = _velocity(ws, half)
    return float(np.sqrt(np.max(v1**2 + v2**2)))


def nonlinear_term(ws: _Workspace, half: np.ndarray, dealias: bool = True) -> np.ndarray:
    """Half-spectrum of -v . grad w, truncated and with zero mean."""
    n = ws.grid.n
    v1, v2 = _velocity(ws, half)
    d1 = 1j * ws.k1 * half
    d2 = 1j * ws.k2 * half
    d1[~ws.keep] = 0.0
    d2[~ws.keep] = 0.0
    adv = v1 * _physical(ws, d1) + v2 * _physical(ws, d2)
    out = -sfft.rfft2(adv) / n**2
    out[~(ws.dealias_keep if dealias else ws.keep)] = 0.0
    out[0, 0] = 0.0
    return out


# -- state -----------------------------------------------------------------------------


@dataclass
class SolverState:
    t: float
    half: np.ndarray
    grid: Grid
    step_count: int = 0
    diagnostics: deque = field(default_factory=lambda: deque(maxlen=4096))

    @classmethod
    def initial(cls, w0: SpectralField, t0: float = 0.0, history: int = 4096) -> "SolverState":
        require_zero_mean(w0, "initial vorticity")
        if w0.symmetry_defect() > 1e-10:
            raise ValueError("initial field is not real")
        half = to_half(w0)
        half[0, 0] = 0.0
        return cls(t0, half, w0.grid, 0, deque(maxlen=history))

    @property
    def w(self) -> SpectralField:
        return from_half(self.grid, self.half)

    def copy(self) -> "SolverState":
        return SolverState(self.t, self.half.copy(), self.grid, self.step_count, deque(self.diagnostics,
                                                                                       maxlen=self.diagnostics.maxlen))


def half_norm_sq(grid: Grid, half: np.ndarray, s: float = 0.0) -> float:
    """||Lambda^s w||_2^2 from a half spectrum (Plancherel with the doubled interior columns)."""
    ws = _workspace(grid)
    weight = np.full(half.shape[1], 2.0)
    weight[0] = 1.0
    if grid.n % 2 == 0:
        weight[-1] = 1.0
    power = np.abs(half) ** 2 * weight[None, :]
    if s:
        with np.errstate(divide="ignore"):
            power = np.where(ws.kmag > 0, power * ws.kmag ** (2 * s), 0.0)
    return float((2.0 * grid.L) ** 2 * np.sum(power))


def cfl_dt(state: SolverState, config: SolverConfig) -> float:
    ws = _workspace(state.grid)
    speed = max_speed(ws, state.half) if config.nonlinear else 0.0
    if not math.isfinite(speed):
        raise VelocityBlowup("velocity is not finite")
    dt = config.dt_max
    if speed > 0:
        dt = min(dt, config.cfl * state.grid.dx / speed)
    k_top = float(np.max(ws.kmag[ws.keep]))
    dt = min(dt, 2.0 * MAX_STAGE_EXPONENT / k_top**config.alpha)
    if not dt > 0:
        raise VelocityBlowup(f"time step collapsed to {dt}")
    return dt


def step(state: SolverState, config: SolverConfig, dt: float) -> SolverState:
    """One integrating-factor SSP-RK3 step.

    With E(tau) = exp(-tau Lambda^alpha) and N the truncated advection term:
    u1 = E(dt) (u + dt N(u)),
    u2 = 3/4 E(dt/2) u + 1/4 E(-dt/2) (u1 + dt N(u1)),
    u  <- 1/3 E(dt) u + 2/3 E(dt/2) (u2 + dt N(u2)).
    """
    ws = _workspace(state.grid)
    u = state.half
    if config.nonlinear:
        E = ws.propagator(config.alpha, dt)
        Eh = ws.propagator(config.alpha, dt / 2)
        Einv = np.where(ws.keep, np.exp(0.5 * dt * ws.kmag**config.alpha), 0.0)
        N = lambda x: nonlinear_term(ws, x, config.dealias)
        u1 = E * (u + dt * N(u))
        u2 = 0.75 * Eh * u + 0.25 * Einv * (u1 + dt * N(u1))
        new = E * u / 3.0 + (2.0 / 3.0) * Eh * (u2 + dt * N(u2))
    else:
        new = ws.propagator(config.alpha, dt) * u
    new[0, 0] = 0.0
    if not np.all(np.isfinite(new)):
        raise NaNDetected(f"non-finite coefficients at t = {state.t + dt:.6g}")
    return SolverState(state.t + dt, new, state.grid, state.step_count + 1, state.diagnostics)


# -- checkpoints -------------------------------------------------------------------------


_HEADER = struct.Struct("<8sIIdddQ")


def write_checkpoint(state: SolverState, alpha: float, path: Path) -> Path:
    """Header (magic, version, n, L, alpha, t, step) then the half spectrum as little-endian complex128."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(path.suffix + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, state.grid.n, state.grid.L, alpha,
                                  state.t, state.step_count))
            fh.write(np.ascontiguousarray(state.half, dtype="<c16").tobytes())
        tmp.replace(path)
    except OSError as exc:
        raise CheckpointIOFailure(f"cannot write checkpoint {path}: {exc}") from exc
    return path


def read_checkpoint(path: Path) -> tuple[SolverState, float]:
    """Returns the state and the alpha it was written with."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointIOFailure(f"cannot read checkpoint {path}: {exc}") from exc
    if len(data) < _HEADER.size:
        raise CheckpointIOFailure("checkpoint truncated before header end")
    magic, version, n, L, alpha, t, steps = _HEADER.unpack_from(data)
    if magic != CHECKPOINT_MAGIC or version != CHECKPOINT_VERSION:
        raise CheckpointIOFailure(f"not a version-{CHECKPOINT_VERSION} checkpoint: {path}")
    body = data[_HEADER.size:]
    expected = n * (n // 2 + 1) * 16
    if len(body) != expected:
        raise CheckpointIOFailure(f"checkpoint body has {len(body)} bytes, expected {expected}")
    half = np.frombuffer(body, dtype="<c16").reshape(n, n // 2 + 1).astype(complex)
    return SolverState(t, half, Grid(n, L), int(steps)), alpha


# -- driver ------------------------------------------------------------------------------


@dataclass
class Observer:
    """Calls ``fn(t, w)`` at each trigger time; ``w`` is linearly interpolated between steps."""

    times: Sequence[float]
    fn: Callable[[float, SpectralField], None]

    def __post_init__(self):
        self.times = sorted(float(t) for t in self.times)
        self._next = 0

    def pending(self, upto: float) -> list[float]:
        out = []
        while self._next < len(self.times) and self.times[self._next] <= upto:
            out.append(self.times[self._next])
            self._next += 1
        return out


DIAG_COLUMNS = ["t", "step", "dt", "l2", "hdot_half_alpha", "max_speed"]


def _diagnostics_row(state: SolverState, config: SolverConfig, dt: float, speed: float) -> dict:
    return {
        "t": state.t,
        "step": state.step_count,
        "dt": dt,
        "l2": math.sqrt(half_norm_sq(state.grid, state.half)),
        "hdot_half_alpha": math.sqrt(half_norm_sq(state.grid, state.half, config.alpha / 2)),
        "max_speed": speed,
    }


def _append_diagnostics(path: Path, row: dict):
    path = Path(path)
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=DIAG_COLUMNS, lineterminator="\n")
        if new:
            writer.writeheader()
        writer.writerow({k: repr(float(v)) if k != "step" else int(v) for k, v in row.items()})


def _macro_boundaries(t0: float, t_end: float, dt_max: float) -> list[float]:
    j = math.floor(t0 / dt_max + 1e-9) + 1
    out = []
    while j * dt_max < t_end - 1e-12 * max(1.0, t_end):
        out.append(j * dt_max)
        j += 1
    out.append(t_end)
    return out


def _fire(observers: Iterable[Observer], t_a: float, w_a: np.ndarray, t_b: float, w_b: np.ndarray, grid: Grid,
          inclusive_start: bool):
    for obs in observers:
        for tau in obs.pending(t_b):
            if tau < t_a and not inclusive_start:
                continue
            if tau <= t_a:
                half = w_a
            elif tau >= t_b:
                half = w_b
            else:
                theta = (tau - t_a) / (t_b - t_a)
                half = (1.0 - theta) * w_a + theta * w_b
            obs.fn(tau, from_half(grid, half))


def run(w0, config: SolverConfig, observers: Sequence[Observer] = ()) -> SolverState:
    """Advance to ``config.t_end``. ``w0`` is a SpectralField or a SolverState (restart)."""
    state = w0 if isinstance(w0, SolverState) else SolverState.initial(w0, history=config.history)
    if config.t_end < state.t:
        raise ValueError("t_end lies before the initial time")
    grid = state.grid
    _fire(observers, state.t, state.half, state.t, state.half, grid, inclusive_start=True)
    if config.t_end == state.t:
        return state
    macro = 0
    t_start = state.t
    for boundary in _macro_boundaries(t_start, config.t_end, config.dt_max):
        span = boundary - state.t
        dt = cfl_dt(state, config)
        substeps = max(1, math.ceil(span / dt - 1e-12))
        h = span / substeps
        ws = _workspace(grid)
        for _ in range(substeps):
            prev_t, prev = state.t, state.half
            state = step(state, config, h)
            _fire(observers, prev_t, prev, state.t, state.half, grid, inclusive_start=False)
        state.t = boundary
        speed = max_speed(ws, state.half) if config.nonlinear else 0.0
        row = _diagnostics_row(state, config, h, speed)
        state.diagnostics.append(row)
        if config.diagnostics_path is not None:
            _append_diagnostics(config.diagnostics_path, row)
        macro += 1
        if config.checkpoint_every and macro % config.checkpoint_every == 0:
            write_checkpoint(state, config.alpha, Path(config.checkpoint_dir) / f"ckpt_{state.step_count:08d}.bin")
    _fire(observers, state.t, state.half, state.t, state.half, grid, inclusive_start=True)
    return state


def restart(path: Path, config: SolverConfig, observers: Sequence[Observer] = ()) -> SolverState:
    state, alpha = read_checkpoint(path)
    if alpha != config.alpha:
        raise CheckpointIOFailure(f"checkpoint alpha {alpha} differs from config alpha {config.alpha}")
    state.diagnostics = deque(maxlen=config.history)
    return run(state, config, observers)
