"""Diagnostics along computed trajectories: sup-norm decay, Hoelder seminorms,
oscillation over nested parabolic cylinders, and the barrier ODE."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .field import SpectralField
from .fraclap import cauchy_schwarz_constant, normalization_constant
from .solver import Trajectory


# ---------------------------------------------------------------------------
# L-infinity decay


def decay_constant(s: float) -> float:
    """C(s) = 2s / C_s^(1/(4s)) * sqrt(2 / (1 + 4s))."""
    return 2.0 * s / normalization_constant(s) ** (1.0 / (4.0 * s)) * cauchy_schwarz_constant(s)


def decay_bound(t, s: float, l2_initial: float):
    t = np.asarray(t, dtype=float)
    return decay_constant(s) * t ** (-1.0 / (4.0 * s)) * l2_initial


@dataclass
class DecayReport:
    s: float
    l2_initial: float
    c_of_s: float
    t_min: float
    rows: np.ndarray  # columns: t, sup|theta|, bound, ratio
    applicable: bool = True
    reason: str = ""

    COLUMNS = ("t", "sup_abs", "bound", "ratio")

    @property
    def passed(self) -> bool:
        return self.applicable and bool(np.all(self.rows[:, 3] <= 1.0))

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.rows[:, 3])) if len(self.rows) else 0.0

    def slope(self, t_lo: float, t_hi: float) -> float:
        """Least-squares slope of log sup|theta| against log t on [t_lo, t_hi]."""
        t, sup = self.rows[:, 0], self.rows[:, 1]
        sel = (t >= t_lo) & (t <= t_hi) & (sup > 0)
        if sel.sum() < 2:
            raise ParameterError("fewer than two samples in the fit window")
        return float(np.polyfit(np.log(t[sel]), np.log(sup[sel]), 1)[0])

    def summary(self) -> dict:
        return {
            "s": self.s,
            "l2_initial": self.l2_initial,
            "c_of_s": self.c_of_s,
            "c_s": normalization_constant(self.s),
            "t_min": self.t_min,
            "applicable": self.applicable,
            "reason": self.reason,
            "passed": self.passed,
            "max_ratio": self.max_ratio,
            "rows": int(len(self.rows)),
        }


def linf_decay_check(traj: Trajectory, t_min: float, t_max: float | None = None) -> DecayReport:
    if not t_min > 0:
        raise ParameterError("t_min must be positive")
    s = traj.config.s
    ser = traj.series
    l2_initial = float(ser["l2"][0])
    c = decay_constant(s)
    t = ser["t"]
    sel = t >= t_min
    if t_max is not None:
        sel &= t <= t_max
    if traj.status == "blowup" and traj.blowup.t <= t_min:
        return DecayReport(s, l2_initial, c, t_min, np.empty((0, 4)), False,
                           f"trajectory ended by blowup at t={traj.blowup.t:g}")
    tt = t[sel]
    sup = ser["sup_abs"][sel]
    bound = decay_bound(tt, s, l2_initial)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, sup / bound, 0.0)
    if l2_initial == 0:
        ratio = np.zeros_like(sup)
    return DecayReport(s, l2_initial, c, t_min, np.column_stack([tt, sup, bound, ratio]))


def empirical_t_star(traj: Trajectory, level: float = 1.0) -> float | None:
    """First recorded time with sup|theta| <= level (operational T*)."""
    below = np.nonzero(traj.series["sup_abs"] <= level)[0]
    return float(traj.series["t"][below[0]]) if below.size else None


# ---------------------------------------------------------------------------
# Hoelder seminorm


def ladder_offsets(m_min: int, m_max: int, mantissa_bits: int = 7) -> np.ndarray:
    """Integer offsets in [m_min, m_max] with at most ``mantissa_bits`` significant bits.

    The set does not depend on m_min (other than the cut), so the resulting
    seminorm is monotone in the minimum separation; it contains every
    m 2^j for m < 2^mantissa_bits.
    """
    m_max = max(m_max, 0)
    out = []
    for m in range(1, min(m_max, 2 ** mantissa_bits) + 1):
        out.append(m)
    j = 1
    base = np.arange(2 ** (mantissa_bits - 1), 2 ** mantissa_bits)
    while True:
        vals = base << j
        vals = vals[vals <= m_max]
        if vals.size == 0:
            break
        out.extend(int(v) for v in vals if v > 2 ** mantissa_bits)
        j += 1
    arr = np.unique(np.array(out, dtype=np.int64))
    return arr[arr >= m_min]


def holder_seminorm(f: SpectralField, alpha: float, min_sep: float, *, exact: bool = False,
                    periodic: bool = True) -> float:
    """max |f(x) - f(y)| / |x - y|^alpha over sampled pairs with |x - y| >= min_sep.

    Default sampling uses the offset ladder from ``ladder_offsets`` up to L/4;
    ``exact`` scans every offset up to L/2 (all pairs; n <= 4096).
    """
    if not 0 < alpha < 1:
        raise ParameterError("alpha must lie in (0, 1)")
    dx = f.dx
    if min_sep < dx * (1 - 1e-12):
        raise ParameterError("min_sep must be at least one grid spacing")
    v = f.values
    n = f.n
    m_min = int(math.ceil(min_sep / dx - 1e-9))
    if exact:
        if n > 4096:
            raise ParameterError("exact mode is limited to n <= 4096")
        offsets = np.arange(m_min, n // 2 + 1)
    else:
        offsets = ladder_offsets(m_min, n // 4)
    best = 0.0
    for m in offsets:
        if periodic:
            diff = np.abs(np.roll(v, -int(m)) - v)
        else:
            diff = np.abs(v[m:] - v[:-m])
        if diff.size:
            best = max(best, float(diff.max()) / (m * dx) ** alpha)
    return best


def default_min_sep(f: SpectralField, eps1: float, s: float, c: float = 1.0) -> dict:
    """Grid floor (4 cells) and the viscous floor c eps1^(2-2s); the larger is used."""
    grid_floor = 4.0 * f.dx
    viscous_floor = c * eps1 ** (2.0 - 2.0 * s) if eps1 > 0 else 0.0
    return {"grid": grid_floor, "viscous": viscous_floor, "used": max(grid_floor, viscous_floor)}


# ---------------------------------------------------------------------------
# oscillation over nested cylinders


@dataclass
class OscillationLadder:
    rho: float
    alpha: float
    center: tuple
    r0: float
    s: float
    levels: list = field(default_factory=list)  # dicts: k, radius, depth, osc, normalized_osc, n_x, n_t
    omitted: list = field(default_factory=list)  # dicts: k, reason

    COLUMNS = ("k", "radius", "depth", "osc", "normalized_osc", "n_x", "n_t")

    def column(self, name) -> np.ndarray:
        return np.array([lv[name] for lv in self.levels], dtype=float)

    def summary(self) -> dict:
        norm = self.column("normalized_osc")
        return {
            "rho": self.rho,
            "alpha": self.alpha,
            "center": list(self.center),
            "r0": self.r0,
            "s": self.s,
            "levels": len(self.levels),
            "omitted": self.omitted,
            "max_normalized_over_level0": float(norm.max() / norm[0]) if len(norm) and norm[0] > 0 else 0.0,
            "note": "osc uses raw grid samples in space and linear interpolation in time (conservative)",
        }


def _time_samples(times, t_lo, t_hi, minimum=4):
    inside = times[(times >= t_lo) & (times <= t_hi)]
    pts = np.unique(np.concatenate([inside, [t_lo, t_hi]]))
    if pts.size < minimum:
        pts = np.unique(np.concatenate([pts, np.linspace(t_lo, t_hi, minimum)]))
    return pts


def cylinder_osc(traj: Trajectory, x0: float, t0: float, radius: float, depth: float):
    """(osc, n_x, n_t) over [x0-radius, x0+radius] x [t0-depth, t0] on grid samples."""
    f0 = traj.snapshots[0]
    x = f0.x
    sel = np.abs(x - x0) <= radius * (1 + 1e-12)
    ts = _time_samples(traj.times, t0 - depth, t0)
    lo, hi = np.inf, -np.inf
    for t in ts:
        v = traj.field_at(t).values[sel]
        lo = min(lo, float(v.min()))
        hi = max(hi, float(v.max()))
    return hi - lo, int(sel.sum()), int(ts.size)


def oscillation_ladder(traj: Trajectory, center, rho: float, alpha: float, r0: float, k_max: int,
                       *, t_min: float = 0.0, min_points: int = 3) -> OscillationLadder:
    """osc over Q_{rho^k r0}(center) for k = 0..k_max, with rho^(-alpha k) normalization.

    Levels whose cylinder leaves the data window (in space, or before
    ``t_min`` in time) or contains fewer than ``min_points`` spatial samples
    are omitted with a reason.
    """
    if not 0 < rho < 1:
        raise ParameterError("rho must lie in (0, 1)")
    x0, t0 = center
    s = traj.config.s
    L = traj.config.domain_length
    lad = OscillationLadder(rho, alpha, (float(x0), float(t0)), r0, s)
    if t0 > traj.times[-1] + 1e-12:
        lad.omitted.append({"k": -1, "reason": "center time beyond recorded trajectory"})
        return lad
    for k in range(k_max + 1):
        radius = r0 * rho ** k
        depth = radius ** (2.0 * s)
        if abs(x0) + radius > 0.5 * L:
            lad.omitted.append({"k": k, "reason": "cylinder leaves the spatial domain"})
            continue
        if t0 - depth < max(t_min, traj.times[0]) - 1e-12:
            lad.omitted.append({"k": k, "reason": "cylinder starts before the admissible time window"})
            continue
        osc, nx, nt = cylinder_osc(traj, x0, t0, radius, depth)
        if nx < min_points:
            lad.omitted.append({"k": k, "reason": f"under-resolved: {nx} spatial samples"})
            continue
        lad.levels.append({
            "k": k, "radius": radius, "depth": depth, "osc": osc,
            "normalized_osc": osc / rho ** (alpha * k), "n_x": nx, "n_t": nt,
        })
    return lad


# ---------------------------------------------------------------------------
# barrier ODE m' = c0 |{theta <= 0}| - C1 m


@dataclass
class BarrierTrace:
    times: np.ndarray
    zero_set_measure: np.ndarray
    m_values: np.ndarray  # stepped (RK2)
    m_closed_form: np.ndarray  # exponential convolution, trapezoid
    c0: float
    c1_const: float
    m0_const: float
    mu: float  # space-time measure of the zero set over the early half-window
    discrepancy: float
    lower_bound: float
    lower_bound_holds: bool

    def summary(self) -> dict:
        return {
            "c0": self.c0, "c1_const": self.c1_const, "m0_const": self.m0_const, "mu": self.mu,
            "discrepancy": self.discrepancy, "lower_bound": self.lower_bound,
            "lower_bound_holds": self.lower_bound_holds,
            "m_max": float(np.max(self.m_values)) if self.m_values.size else 0.0,
        }


def barrier_ode_track(times, zero_set_measure, c0: float, c1_const: float, m0_const: float) -> BarrierTrace:
    """Track m(t) on rescaled times covering [-2/M0, 0].

    ``zero_set_measure[i]`` is |{x in [-1,1] : theta(x, t_i) <= 0}|.  m is
    computed by Heun's method on the given grid (measure linear between nodes)
    and by the closed-form exponential convolution with the trapezoid rule.
    """
    t = np.asarray(times, dtype=float)
    z = np.asarray(zero_set_measure, dtype=float)
    if t.size != z.size or t.size < 2:
        raise ParameterError("times and measures must be equal-length arrays of size >= 2")
    start = -2.0 / m0_const
    if abs(t[0] - start) > 1e-9 or abs(t[-1]) > 1e-9:
        raise ParameterError("time grid must cover [-2/M0, 0]")
    dt = np.diff(t)
    m = np.zeros(t.size)
    cf = np.zeros(t.size)
    for i in range(t.size - 1):
        h = dt[i]
        k1 = c0 * z[i] - c1_const * m[i]
        pred = m[i] + h * k1
        k2 = c0 * z[i + 1] - c1_const * pred
        m[i + 1] = m[i] + 0.5 * h * (k1 + k2)
        decay = math.exp(-c1_const * h)
        cf[i + 1] = decay * cf[i] + 0.5 * h * c0 * (z[i] * decay + z[i + 1])
    half = t <= -1.0 / m0_const + 1e-12
    mu = float(np.trapezoid(z[half], t[half]))
    bound = c0 * math.exp(-2.0 * c1_const / m0_const) * mu
    late = t >= -1.0 / m0_const - 1e-12
    holds = bool(np.all(cf[late] >= bound * (1 - 1e-12)))
    return BarrierTrace(t, z, m, cf, c0, c1_const, m0_const, mu,
                        float(np.max(np.abs(m - cf))), bound, holds)


def zero_set_window(traj: Trajectory, t_start: float, t_stop: float, m0_const: float,
                    x_center: float = 0.0, x_scale: float = 1.0, samples: int = 201):
    """Rescale a trajectory window to [-2/M0, 0] and measure {theta <= 0} on [-1, 1].

    Physical x = x_center + x_scale * x', t = t_stop + (t' * (t_stop - t_start) M0 / 2).
    Returns (rescaled times, measures).
    """
    tp = np.linspace(-2.0 / m0_const, 0.0, samples)
    tphys = t_stop + tp * (t_stop - t_start) * m0_const / 2.0
    x = traj.snapshots[0].x
    sel = np.abs(x - x_center) <= x_scale
    cell = traj.snapshots[0].dx / x_scale
    meas = np.array([cell * np.count_nonzero(traj.field_at(t).values[sel] <= 0) for t in tphys])
    return tp, np.minimum(meas, 2.0)


# ---------------------------------------------------------------------------
# gradient monitor


def gradient_growth(traj: Trajectory) -> np.ndarray:
    """(t, max|theta_x|) rows from the per-step series; non-finite rows dropped."""
    t = traj.series["t"]
    g = traj.series["max_grad"]
    ok = np.isfinite(t) & np.isfinite(g)
    return np.column_stack([t[ok], g[ok]])


def max_gradient(f: SpectralField) -> float:
    return float(np.max(np.abs(f.derivative().values)))


def measure_to_point_check(traj: Trajectory, t_start: float, t_stop: float, m0_const: float,
                           lam: float, mu: float, x_center: float = 0.0, x_scale: float = 1.0,
                           samples: int = 201) -> dict:
    """Check the measure-to-point conclusion theta <= 1 - lam on [-1,1] x [-1/M0, 0].

    Runs only when the hypotheses are certified on the rescaled window
    (theta <= 1 on the whole grid, zero-set measure >= mu on the early half);
    otherwise the result is ``skipped`` with the failing hypothesis recorded.
    """
    tp, meas = zero_set_window(traj, t_start, t_stop, m0_const, x_center, x_scale, samples)
    tphys = t_stop + tp * (t_stop - t_start) * m0_const / 2.0
    fields = [traj.field_at(t).values for t in tphys]
    if max(float(v.max()) for v in fields) > 1.0:
        return {"status": "skipped", "reason": "theta exceeds 1 in the window"}
    early = tp <= -1.0 / m0_const + 1e-12
    measured = float(np.trapezoid(meas[early], tp[early]))
    if measured < mu:
        return {"status": "skipped", "reason": f"zero-set measure {measured:.4g} below mu={mu:.4g}"}
    x = traj.snapshots[0].x
    sel = np.abs(x - x_center) <= x_scale
    late = ~early | (np.abs(tp + 1.0 / m0_const) < 1e-12)
    top = max(float(fields[i][sel].max()) for i in np.nonzero(late)[0])
    return {"status": "passed" if top <= 1.0 - lam else "failed", "max_inner": top,
            "threshold": 1.0 - lam, "measured_mu": measured}
