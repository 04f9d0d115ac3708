"""Pseudo-spectral integration of the viscous fractional Burgers equation

    theta_t + M theta theta_x + (-Delta)^s theta - eps1 theta_xx = 0

on a periodic domain.  The linear part |k|^(2s) + eps1 k^2 is integrated
exactly by an integrating factor; the conservative flux -(M theta^2 / 2)_x is
dealiased and advanced with a Lawson-type Runge-Kutta scheme.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import ParameterError, ResampleError
from .field import SpectralField, grid, parseval_weights, wavenumbers
from .fraclap import WORKING_RANGE
from .rng import SplitMix64

log = logging.getLogger(__name__)

SCHEMES = {"ifrk4": 4, "ifrk2": 2}
SERIES_COLUMNS = ("t", "l2", "hs", "h1", "sup_abs", "max", "min", "max_grad", "edge")


@dataclass(frozen=True)
class SolverConfig:
    s: float
    eps1: float = 0.0
    n: int = 1024
    domain_length: float = 64.0
    dt: float | str = "auto"
    t_end: float = 1.0
    dealias_fraction: float = 2.0 / 3.0
    output_every: int = 1
    seed: int = 0
    scheme: str = "ifrk4"
    drift: float = 1.0
    cfl_safety: float = 1.0
    blowup_grad_fraction: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.s <= WORKING_RANGE[1]:
            raise ParameterError(f"s must lie in (0, 1/2], got {self.s}")
        if self.s < WORKING_RANGE[0]:
            log.warning("s=%g is below the working range [1/4, 1/2]; exploratory run", self.s)
        if self.eps1 < 0:
            raise ParameterError("eps1 must be nonnegative")
        if self.n < 8 or self.n & (self.n - 1):
            raise ParameterError(f"n must be a power of two >= 8, got {self.n}")
        if not self.domain_length > 0:
            raise ParameterError("domain_length must be positive")
        if isinstance(self.dt, str):
            if self.dt != "auto":
                raise ParameterError(f"dt must be a positive number or 'auto', got {self.dt!r}")
        elif not self.dt > 0:
            raise ParameterError("dt must be positive")
        if not self.t_end >= 0:
            raise ParameterError("t_end must be nonnegative")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ParameterError("dealias_fraction must lie in (0, 1]")
        if self.dealias_fraction * self.n / 2 < 4:
            raise ParameterError("dealiasing keeps fewer than 4 modes")
        if self.output_every < 1:
            raise ParameterError("output_every must be >= 1")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"scheme must be one of {sorted(SCHEMES)}")
        if self.blowup_grad_fraction < 0:
            raise ParameterError("blowup_grad_fraction must be nonnegative")
        if not 0 <= self.seed < 2 ** 64:
            raise ParameterError("seed must be a 64-bit unsigned integer")

    @property
    def dx(self) -> float:
        return self.domain_length / self.n

    @property
    def order(self) -> int:
        return SCHEMES[self.scheme]

    def auto_dt(self, sup_abs: float) -> float:
        kmax = math.pi * self.n / self.domain_length
        advective = self.dx / max(1.0, sup_abs)
        dissipative = 1.0 / (self.eps1 * kmax ** 2 + kmax ** (2.0 * self.s))
        return 0.4 * min(advective, dissipative) * self.cfl_safety

    def resolve_dt(self, initial: SpectralField) -> tuple[float, int]:
        """Time step and step count; the step is shrunk so t_end is hit exactly."""
        if self.t_end == 0:
            return (self.dt if not isinstance(self.dt, str) else 0.0), 0
        dt = self.auto_dt(float(np.max(np.abs(initial.values)))) if self.dt == "auto" else float(self.dt)
        nsteps = max(1, math.ceil(self.t_end / dt - 1e-9))
        return self.t_end / nsteps, nsteps

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class InitialData:
    """Initial profile generator.

    kinds: ``gaussian_bump`` (amplitude, width, center),
    ``band_limited_random`` (max_mode, amplitude, seed; scaled so sup|theta0| = amplitude),
    ``steep_shock`` (amplitude, steepness): -A tanh(k x) under a Gaussian envelope of width L/16.
    """

    kind: str = "gaussian_bump"
    amplitude: float = 1.0
    width: float = 1.0
    center: float = 0.0
    max_mode: int = 8
    steepness: float = 1.0
    seed: int | None = None
    mean: float = 0.0

    KINDS = ("gaussian_bump", "band_limited_random", "steep_shock", "constant", "sine")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ParameterError(f"unknown initial data kind {self.kind!r}")
        if not math.isfinite(self.amplitude):
            raise ParameterError("amplitude must be finite")
        if self.kind == "gaussian_bump" and not self.width > 0:
            raise ParameterError("width must be positive")
        if self.kind == "band_limited_random" and self.max_mode < 1:
            raise ParameterError("max_mode must be >= 1")

    def generate(self, n: int, domain_length: float, seed: int = 0) -> SpectralField:
        x = grid(n, domain_length)
        L = domain_length
        if self.kind == "gaussian_bump":
            v = self.amplitude * np.exp(-((x - self.center) / self.width) ** 2)
        elif self.kind == "steep_shock":
            envelope = np.exp(-0.5 * (x / (L / 16.0)) ** 2)
            v = -self.amplitude * np.tanh(self.steepness * x) * envelope
        elif self.kind == "constant":
            v = np.full(n, self.amplitude)
        elif self.kind == "sine":
            v = self.amplitude * np.sin(2 * np.pi * self.max_mode * (x + L / 2) / L)
        else:
            if self.max_mode >= n // 2:
                raise ParameterError("max_mode must be below the Nyquist index")
            rng = SplitMix64(self.seed if self.seed is not None else seed)
            u = rng.uniform(2 * self.max_mode)
            amp = u[: self.max_mode]
            phase = 2 * np.pi * u[self.max_mode:]
            modes = np.zeros(n // 2 + 1, dtype=complex)
            k = np.arange(1, self.max_mode + 1)
            modes[1:self.max_mode + 1] = amp / k * np.exp(1j * phase)
            v = np.fft.irfft(modes, n=n)
            peak = np.max(np.abs(v))
            v = v * (self.amplitude / peak) if peak > 0 else v
        return SpectralField(v + self.mean, domain_length)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items()}

    @classmethod
    def gaussian_with_l2(cls, l2: float, width: float, center: float = 0.0) -> "InitialData":
        """Gaussian bump whose L2 norm on the line equals ``l2``."""
        amp = l2 / math.sqrt(width * math.sqrt(math.pi / 2.0))
        return cls("gaussian_bump", amplitude=amp, width=width, center=center)


class Blowup(NamedTuple):
    step: int
    t: float
    reason: str
    grad_history: np.ndarray


class BlowupSignal(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class _Stepper:
    """Precomputed integrating factors and masks for a fixed (config, dt)."""

    def __init__(self, config: SolverConfig, dt: float):
        self.config = config
        self.dt = dt
        n, L = config.n, config.domain_length
        k = wavenumbers(n, L)
        self.k = k
        self.linear = np.abs(k) ** (2.0 * config.s) + config.eps1 * k ** 2
        self.half = np.exp(-0.5 * dt * self.linear)
        self.full = self.half ** 2
        keep = np.arange(k.size) <= config.dealias_fraction * n / 2
        self.mask = keep.astype(float)
        kd = k.astype(complex)
        kd[-1] = 0.0
        # -(M u^2/2)_x, with the 1/n of irfft/rfft folded in implicitly
        self.flux = -0.5j * config.drift * kd * self.mask
        self.ik = 1j * kd
        self.weights = parseval_weights(n)
        self.n = n
        self.L = L
        self.retained_kmax = k[keep].max()

    def nonlinear(self, u_hat):
        u = np.fft.irfft(self.mask * u_hat, n=self.n)
        return self.flux * np.fft.rfft(u * u)

    def advance(self, u_hat):
        # overflow on the way to a blowup is detected by the caller, not warned about
        with np.errstate(over="ignore", invalid="ignore"):
            return self._advance(u_hat)

    def _advance(self, u_hat):
        dt, E, E2, N = self.dt, self.half, self.full, self.nonlinear
        if self.config.scheme == "ifrk4":
            k1 = N(u_hat)
            k2 = N(E * (u_hat + 0.5 * dt * k1))
            k3 = N(E * u_hat + 0.5 * dt * k2)
            k4 = N(E2 * u_hat + dt * E * k3)
            return E2 * u_hat + dt / 6.0 * (E2 * k1 + 2.0 * E * (k2 + k3) + k4)
        k1 = N(u_hat)
        k2 = N(E2 * (u_hat + dt * k1))
        return E2 * u_hat + 0.5 * dt * (E2 * k1 + k2)

    def record(self, t, u_hat, values=None):
        c2 = np.abs(u_hat / self.n) ** 2 * self.weights * self.L
        if values is None:
            values = np.fft.irfft(u_hat, n=self.n)
        grad = np.fft.irfft(self.ik * u_hat, n=self.n)
        sup_abs = float(np.max(np.abs(values)))
        edge = float(max(abs(values[0]), abs(values[-1])) / sup_abs) if sup_abs > 0 else 0.0
        return (
            t,
            math.sqrt(float(np.sum(c2))),
            math.sqrt(float(np.sum(c2 * np.abs(self.k) ** (2.0 * self.config.s)))),
            math.sqrt(float(np.sum(c2 * self.k ** 2))),
            sup_abs,
            float(np.max(values)),
            float(np.min(values)),
            float(np.max(np.abs(grad))),
            edge,
        )


def step(state: SpectralField, t: float, config: SolverConfig, dt: float | None = None) -> SpectralField:
    """Advance ``state`` from ``t`` by one step; raises BlowupSignal on non-finite output."""
    if dt is None:
        if isinstance(config.dt, str):
            raise ParameterError("step needs a resolved dt")
        dt = float(config.dt)
    if state.n != config.n or state.domain_length != config.domain_length:
        raise ParameterError("state grid does not match config")
    out = _Stepper(config, dt).advance(state.modes)
    if not np.all(np.isfinite(out)):
        raise BlowupSignal(f"non-finite state after step from t={t}")
    return state.with_modes(out)


@dataclass
class Trajectory:
    config: SolverConfig
    init: InitialData | None
    dt: float
    times: np.ndarray
    snapshots: list
    series: dict
    status: str = "completed"
    blowup: Blowup | None = None
    boundary_contamination: float = 0.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)

    @property
    def final(self) -> SpectralField:
        return self.snapshots[-1]

    def series_array(self) -> np.ndarray:
        return np.column_stack([self.series[c] for c in SERIES_COLUMNS])

    def snapshot_index(self, t: float) -> int:
        return int(np.argmin(np.abs(self.times - t)))

    def field_at(self, t: float) -> SpectralField:
        """Snapshot linearly interpolated in time."""
        times = self.times
        if t <= times[0]:
            return self.snapshots[0]
        if t >= times[-1]:
            return self.snapshots[-1]
        i = int(np.searchsorted(times, t)) - 1
        w = (t - times[i]) / (times[i + 1] - times[i])
        v = (1 - w) * self.snapshots[i].values + w * self.snapshots[i + 1].values
        return self.snapshots[i].with_values(v)


def run(config: SolverConfig, init: InitialData | SpectralField) -> Trajectory:
    """Integrate to ``config.t_end``, or until a blowup marker fires."""
    if isinstance(init, SpectralField):
        state, init_spec = init, None
    else:
        state, init_spec = init.generate(config.n, config.domain_length, config.seed), init
    if state.n != config.n or state.domain_length != config.domain_length:
        raise ParameterError("initial field grid does not match config")
    dt, nsteps = config.resolve_dt(state)
    stepper = _Stepper(config, dt if dt > 0 else 1.0)
    u_hat = state.modes.copy()
    rows = [stepper.record(0.0, u_hat, state.values)]
    times, snaps = [0.0], [state]
    status, blowup = "completed", None
    grad_limit = None
    if config.blowup_grad_fraction > 0:
        grad_limit = config.blowup_grad_fraction * stepper.retained_kmax
    for i in range(1, nsteps + 1):
        t = i * dt
        new = stepper.advance(u_hat)
        reason = None
        if not np.all(np.isfinite(new)):
            reason = "non-finite state"
        else:
            row = stepper.record(t, new)
            if not all(math.isfinite(v) for v in row):
                reason = "non-finite diagnostics"
            elif grad_limit is not None and row[7] >= grad_limit * row[4]:
                reason = "gradient reached grid scale"
        if reason is not None:
            grads = np.array([r[7] for r in rows])
            blowup = Blowup(i, t, reason, grads)
            status = "blowup"
            log.info("blowup marker at step %d (t=%g): %s", i, t, reason)
            if times[-1] != rows[-1][0]:
                times.append(rows[-1][0])
                snaps.append(SpectralField(modes=u_hat, n=config.n, domain_length=config.domain_length))
            break
        u_hat = new
        rows.append(row)
        if i % config.output_every == 0 or i == nsteps:
            times.append(t)
            snaps.append(SpectralField(modes=u_hat.copy(), n=config.n, domain_length=config.domain_length))
    table = np.array(rows, dtype=float)
    series = {c: table[:, j].copy() for j, c in enumerate(SERIES_COLUMNS)}
    contamination = float(np.max(series["edge"]))
    if contamination > 1e-8:
        log.info("boundary contamination %.3g exceeds 1e-8 of sup|theta|", contamination)
    return Trajectory(config, init_spec, dt, np.array(times), snaps, series, status, blowup, contamination)


def energy_identity_residual(traj: Trajectory, per_unit_time: bool = False) -> np.ndarray:
    """Relative defect of the energy equality over each output interval.

    |Delta ||theta||^2 + 2 int (||theta||_{H^s}^2 + eps1 ||theta||_{H^1}^2) dt| / ||theta0||^2,
    with the time integral by the trapezoid rule over the per-step series.
    """
    ser = traj.series
    t = ser["t"]
    energy = ser["l2"] ** 2
    dissipation = 2.0 * (ser["hs"] ** 2 + traj.config.eps1 * ser["h1"] ** 2)
    scale = max(energy[0], np.finfo(float).eps)
    edges = np.searchsorted(t, traj.times)
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        seg = slice(a, b + 1)
        integral = np.trapezoid(dissipation[seg], t[seg])
        r = abs(energy[b] - energy[a] + integral) / scale
        if per_unit_time:
            r /= t[b] - t[a]
        out.append(r)
    return np.array(out)


# ---------------------------------------------------------------------------
# scalings


class Rescaled(NamedTuple):
    field: SpectralField
    time_factor: float
    drift_factor: float
    viscosity_factor: float


def _rescale(state: SpectralField, r: float, amplitude: float, resample: bool, tol: float) -> SpectralField:
    if not r > 0:
        raise ParameterError("r must be positive")
    if not resample:
        return SpectralField(amplitude * state.values, state.domain_length / r)
    L = state.domain_length
    x = state.x
    vals = state.values
    scale = max(np.max(np.abs(vals)), 1e-300)
    if r < 1:
        outside = np.abs(x) > 0.5 * r * L
        if np.any(outside) and np.max(np.abs(vals[outside])) > tol * scale:
            raise ResampleError("field content outside the dilated window would be lost")
    else:
        energy = np.abs(state.modes) ** 2
        cutoff = (2.0 / 3.0) * state.n / 2 / r
        high = energy[np.arange(energy.size) > cutoff].sum()
        if high > tol ** 2 * energy.sum():
            raise ResampleError("compressed field aliases beyond the dealiasing band")
    src = r * x
    inside = np.abs(src) < 0.5 * L
    out = np.zeros(state.n)
    out[inside] = state.evaluate(src[inside])
    return SpectralField(amplitude * out, L)


def rescale_equation(state: SpectralField, r: float, s: float, *, resample: bool = False,
                     tol: float = 1e-10) -> Rescaled:
    """theta_r(x) = r^(2s-1) theta(r x): maps solutions to solutions.

    ``time_factor`` r^(2s): the rescaled solution at time t matches the original
    at r^(2s) t.  The viscosity coefficient transforms by ``viscosity_factor``.
    Without ``resample`` the same samples are placed on a domain of length L/r;
    with it they are interpolated back onto the original grid.
    """
    f = _rescale(state, r, r ** (2 * s - 1), resample, tol)
    return Rescaled(f, r ** (2 * s), 1.0, r ** (2 * s - 2))


def rescale_holder(state: SpectralField, r: float, alpha: float, s: float, *,
                   resample: bool = False, tol: float = 1e-10) -> Rescaled:
    """theta_r(x) = r^(-alpha) theta(r x), preserving the C^alpha seminorm.

    The drift coefficient of the transformed equation is r^(2s-1+alpha).
    """
    f = _rescale(state, r, r ** (-alpha), resample, tol)
    return Rescaled(f, r ** (2 * s), r ** (2 * s - 1 + alpha), r ** (2 * s - 2))


def rescaled_config(config: SolverConfig, rescaled: Rescaled, **overrides) -> SolverConfig:
    """Config for evolving a rescaled field over the correspondingly dilated time."""
    f = rescaled.field
    fields = dict(
        n=f.n,
        domain_length=f.domain_length,
        eps1=config.eps1 * rescaled.viscosity_factor,
        drift=config.drift * rescaled.drift_factor,
        t_end=config.t_end / rescaled.time_factor,
    )
    fields.update(overrides)
    return replace(config, **fields)
