"""The fractional Laplacian in two independent representations.

``apply_spectral`` multiplies Fourier modes by ``|xi|^(2s)``.
``apply_singular_integral`` evaluates

    C_s * integral over h > 0 of (2 f(x) - f(x+h) - f(x-h)) / h^(1+2s) dh

by a midpoint rule in ``h`` plus an analytic far-field tail, and
``singular_integral_grid`` is the same quadrature on a uniform grid,
computed for every node at once by FFT convolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import zeta

from .errors import ContractViolation, ParameterError
from .field import SpectralField
from .special import gamma

WORKING_RANGE = (0.25, 0.5)


def normalization_constant(s: float) -> float:
    """C_s such that the singular integral has Fourier symbol |xi|^(2s).

    C_s = 4^s s Gamma(1/2 + s) / (sqrt(pi) Gamma(1 - s)); equals 1/pi at s = 1/2.
    """
    if not 0.0 < s < 1.0:
        raise ParameterError(f"normalization constant needs 0 < s < 1, got {s}")
    return 4.0 ** s * s * gamma(0.5 + s) / (math.sqrt(math.pi) * gamma(1.0 - s))


@dataclass(frozen=True)
class FracLapParams:
    s: float
    relaxed: bool = False
    c_s: float = field(init=False)

    def __post_init__(self):
        lo, hi = WORKING_RANGE
        if self.relaxed:
            if not 0.0 < self.s < 1.0:
                raise ParameterError(f"s must lie in (0, 1), got {self.s}")
        elif not lo <= self.s <= hi:
            raise ParameterError(
                f"s must lie in [{lo}, {hi}] (pass relaxed=True for (0, 1)), got {self.s}"
            )
        object.__setattr__(self, "c_s", normalization_constant(self.s))


def _params(params) -> FracLapParams:
    if isinstance(params, FracLapParams):
        return params
    return FracLapParams(float(params), relaxed=True)


def symbol(k, s: float) -> np.ndarray:
    return np.abs(k) ** (2.0 * s)


def apply_spectral(f: SpectralField, params) -> SpectralField:
    """(-Delta)^s as the multiplier |2 pi k / L|^(2s); the mean mode is annihilated."""
    p = _params(params)
    return f.with_modes(f.modes * symbol(f.wavenumbers, p.s))


# ---------------------------------------------------------------------------
# tails beyond the resolved window


@dataclass(frozen=True)
class Tail:
    """Model of ``f(y)`` for ``|y - x| > r_cut``.

    kind ``zero``: f = 0; ``constant``: f = value; ``power``: f = amplitude |y|^(2 alpha),
    centred at the origin (requires ``r_cut > |x|`` and ``alpha < s``).
    """

    kind: str = "zero"
    value: float = 0.0
    amplitude: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "power"):
            raise ParameterError(f"unknown tail model {self.kind!r}")

    @classmethod
    def zero(cls) -> "Tail":
        return cls("zero")

    @classmethod
    def constant(cls, value: float) -> "Tail":
        return cls("constant", value=float(value))

    @classmethod
    def power(cls, amplitude: float, alpha: float) -> "Tail":
        return cls("power", amplitude=float(amplitude), alpha=float(alpha))

    def integral(self, fx, x, r: float, s: float):
        """Analytic value of int_r^inf (2 f(x) - f(x+h) - f(x-h)) h^(-1-2s) dh."""
        fx = np.asarray(fx, dtype=float)
        base = 2.0 * r ** (-2.0 * s) / (2.0 * s)
        if self.kind == "zero":
            return fx * base
        if self.kind == "constant":
            return (fx - self.value) * base
        return fx * base - self.amplitude * _power_tail(np.asarray(x, dtype=float), r, s, self.alpha)


def _power_tail(x, r, s, alpha, tol=1e-17, max_terms=400):
    """int_r^inf (|x+h|^a + |x-h|^a) h^(-1-2s) dh with a = 2 alpha, for |x| < r.

    Expands (1 +- x/h)^a binomially; odd powers cancel between the two terms.
    """
    a = 2.0 * alpha
    if not a < 2.0 * s:
        raise ParameterError("power tail needs alpha < s for integrability")
    if np.any(np.abs(x) >= r):
        raise ContractViolation("power tail needs r_cut > |x|")
    total = np.zeros_like(x, dtype=float)
    coef = 1.0  # binom(a, k)
    for k in range(0, max_terms):
        if k % 2 == 0:
            term = 2.0 * coef * x ** k * r ** (a - k - 2.0 * s) / (k + 2.0 * s - a)
            total = total + term
            if k > 0 and np.all(np.abs(term) <= tol * np.maximum(np.abs(total), 1e-300)):
                break
        coef *= (a - k) / (k + 1)
    return total


# ---------------------------------------------------------------------------
# pointwise singular integral


def periodized_kernel(h, s: float, period: float) -> np.ndarray:
    """sum over m of |h + m L|^(-1-2s), via the Hurwitz zeta function."""
    p = 1.0 + 2.0 * s
    q = np.asarray(h, dtype=float) / period
    return period ** (-p) * (zeta(p, q) + zeta(p, 1.0 - q))


def apply_singular_integral(
    f: Callable[[np.ndarray], np.ndarray],
    x,
    params,
    r_cut: float,
    *,
    h: float = 1e-3,
    tail: Tail | None = None,
    period: float | None = None,
    chunk_elems: int = 2_000_000,
):
    """Singular-integral fractional Laplacian of a vectorized callable at points ``x``.

    Parameters
    ----------
    f : callable
        Vectorized function of position.
    x : float or array
        Evaluation points.
    params : FracLapParams or float
        The exponent; requires 2s < 1.
    r_cut : float
        Radius of the numerically resolved window; ignored when ``period`` is set.
    h : float
        Target midpoint cell width in the offset variable.
    tail : Tail
        Far-field model beyond ``r_cut``.  Required unless ``period`` is given.
    period : float, optional
        Treat ``f`` as periodic and integrate offsets over ``(0, period/2]``
        against the periodized kernel.
    """
    p = _params(params)
    s = p.s
    if s >= 0.5:
        raise ParameterError("the singular-integral form is restricted to s < 1/2")
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))

    if period is not None:
        r = 0.5 * period
    else:
        if tail is None:
            raise ContractViolation("a tail model is required outside the resolved window")
        if not r_cut > 0:
            raise ParameterError("r_cut must be positive")
        r = float(r_cut)
    ncell = max(1, int(math.ceil(r / h)))
    dh = r / ncell
    mids = (np.arange(ncell) + 0.5) * dh
    if period is not None:
        weights = periodized_kernel(mids, s, period) * dh
    else:
        weights = mids ** (-1.0 - 2.0 * s) * dh

    fx = np.asarray(f(xs), dtype=float)
    out = np.empty(xs.size)
    step = max(1, chunk_elems // ncell)
    for start in range(0, xs.size, step):
        xc = xs[start:start + step, None]
        fc = fx[start:start + step, None]
        g = 2.0 * fc - f(xc + mids) - f(xc - mids)
        out[start:start + step] = g @ weights
    if period is None:
        out = out + tail.integral(fx, xs, r, s)
    out *= p.c_s
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# grid version (all nodes at once)


def _moment(a, b, s):
    """int_a^b h^(1-2s) dh."""
    e = 2.0 - 2.0 * s
    return (b ** e - a ** e) / e


def grid_weights(n_offsets: int, dx: float, s: float, period: float | None = None) -> np.ndarray:
    """Weights w_j (j = 1..n_offsets) for the second difference 2f_i - f_{i+j} - f_{i-j}.

    Writing the second difference as g(h) = h^2 phi(h) with phi smooth, cell j
    (offsets [(j-1/2)dx, (j+1/2)dx]) uses phi(j dx) against the exact moment
    of h^(1-2s); the innermost half cell [0, dx/2] is folded into j = 1.  The
    rule is exact whenever g is quadratic in h.  With a period, images
    |h + mL|, m != 0, are added node-wise.
    """
    j = np.arange(1, n_offsets + 1, dtype=float)
    lo = np.maximum((j - 0.5) * dx, 0.0)
    lo[0] = 0.0
    w = _moment(lo, (j + 0.5) * dx, s) / (j * dx) ** 2
    if period is not None:
        h = j * dx
        images = periodized_kernel(h, s, period) - h ** (-1.0 - 2.0 * s)
        w = w + images * dx
    return w


def singular_integral_grid(values, dx: float, params, *, tail: Tail | None = None,
                           periodic: bool = False, edge_tol: float = 1e-12) -> np.ndarray:
    """Singular-integral (-Delta)^s at every node of a uniform grid.

    Non-periodic samples describe ``f`` on the window they cover; outside it
    ``tail`` (zero or constant) applies.  Without a tail the samples must vanish
    at both edges (compact support), otherwise ``ContractViolation``.
    Periodic samples use the periodized kernel, folded so each offset class
    j = 1..n-1 appears once.
    """
    p = _params(params)
    s = p.s
    if s >= 0.5:
        raise ParameterError("the singular-integral form is restricted to s < 1/2")
    f = np.asarray(values, dtype=float)
    n = f.size
    if periodic:
        period = n * dx
        half = n // 2
        w = grid_weights(half, dx, s, period=period)
        # the outermost offset class j = n/2 only reaches h = L/2: half a cell
        lo, hi = (half - 0.5) * dx, half * dx
        last = _moment(lo, hi, s) / hi ** 2
        last += (periodized_kernel(hi, s, period) - hi ** (-1.0 - 2.0 * s)) * 0.5 * dx
        # one-sided form: I_i = sum_{j=1}^{n-1} full_j (f_i - f_{i+j}), offsets j and n-j coincide
        full = np.zeros(n)
        full[1:half] = w[:half - 1]
        full[n - half + 1:] = w[:half - 1][::-1]
        full[half] = 2.0 * last
        conv = np.fft.irfft(np.fft.rfft(full) * np.fft.rfft(f), n=n)
        return p.c_s * (f * full.sum() - conv)

    if tail is None:
        scale = max(np.max(np.abs(f)), 1e-300)
        if abs(f[0]) > edge_tol * scale or abs(f[-1]) > edge_tol * scale:
            raise ContractViolation("samples do not vanish at the window edges and no tail model was given")
        tail = Tail.zero()
    if tail.kind == "power":
        raise ParameterError("grid quadrature supports only zero and constant tails")
    pad_value = tail.value if tail.kind == "constant" else 0.0
    J = n - 1
    w = grid_weights(J, dx, s)
    size = 1
    while size < n + 2 * J:
        size *= 2
    kernel = np.zeros(size)
    kernel[1:J + 1] = w
    kernel[size - J:] = w[::-1]
    g = np.full(size, pad_value)
    g[:n] = f
    # circular convolution on the padded buffer reaches padding only beyond the window
    conv = np.fft.irfft(np.fft.rfft(kernel) * np.fft.rfft(g), n=size)[:n]
    near = 2.0 * f * w.sum() - conv
    r = (J + 0.5) * dx
    return p.c_s * (near + tail.integral(f, None, r, s))


# ---------------------------------------------------------------------------
# Cauchy-Schwarz tail estimate used by the sup-norm decay argument


class TailBound(NamedTuple):
    lower_bound: float
    cauchy_schwarz_bound: float


def cauchy_schwarz_constant(s: float) -> float:
    """(2 / (1 + 4s))^(1/2): the L2 norm of |h|^(-1-2s) on |h| > 1."""
    return math.sqrt(2.0 / (1.0 + 4.0 * s))


def far_field_integral(x, values, x0: float, r: float, s: float, tail: Tail | None = None) -> float:
    """int_{|y - x0| > r} f(y) |y - x0|^(-1-2s) dy for gridded samples.

    Each node carries the exact kernel mass of its cell, clipped at the cut
    radius; beyond the sampled window ``tail`` (zero or constant) applies.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(values, dtype=float)
    dx = x[1] - x[0]
    d = x - x0
    lo = d - 0.5 * dx
    hi = d + 0.5 * dx

    def antideriv(u):
        # primitive of |u|^(-1-2s) on u > 0, vanishing at infinity
        return -(u ** (-2.0 * s)) / (2.0 * s)

    mass = np.zeros_like(d)
    right = hi > r
    a = np.maximum(lo[right], r)
    mass[right] = antideriv(hi[right]) - antideriv(a)
    left = lo < -r
    b = np.maximum(-hi[left], r)
    mass[left] += antideriv(-lo[left]) - antideriv(b)
    total = float(np.sum(mass * f))
    tail = tail or Tail.zero()
    if tail.kind == "constant" and tail.value != 0.0:
        edge_right = max(x[-1] + 0.5 * dx - x0, r)
        edge_left = max(x0 - (x[0] - 0.5 * dx), r)
        total += tail.value * (edge_right ** (-2.0 * s) + edge_left ** (-2.0 * s)) / (2.0 * s)
    elif tail.kind == "power":
        raise ParameterError("far-field estimate supports only zero and constant tails")
    return total


def tail_lower_bound(f, x0: float, r: float, params, l2_bound: float, *,
                     tail: Tail | None = None, rtol: float = 1e-12) -> TailBound:
    """Lower bound for (-Delta)^s f(x0) at a maximum point, and the L2 bound on its tail.

    Returns ``(C_s f(x0) / (s r^2s) - C_s * far_field, C~_s l2_bound / r^(1/2+2s))``.
    ``f`` is a SpectralField or an ``(x, values)`` pair; ``x0`` must be a grid node
    where the samples attain their maximum.
    """
    p = _params(params)
    s = p.s
    if not r > 0:
        raise ParameterError(f"r must be positive, got {r}")
    if isinstance(f, SpectralField):
        x, values = f.x, f.values
    else:
        x, values = (np.asarray(a, dtype=float) for a in f)
    i0 = int(np.argmin(np.abs(x - x0)))
    if abs(x[i0] - x0) > 1e-9 * max(1.0, abs(x0)):
        raise ContractViolation("x0 must be a grid node")
    f0 = values[i0]
    top = float(np.max(values))
    if tail is not None and tail.kind == "constant":
        top = max(top, tail.value)
    if f0 < top - rtol * max(abs(top), 1.0):
        raise ContractViolation("x0 is not a maximum point of f")
    far = far_field_integral(x, values, x[i0], r, s, tail)
    lower = p.c_s * (f0 / (s * r ** (2.0 * s)) - far)
    cs = cauchy_schwarz_constant(s) * l2_bound / r ** (0.5 + 2.0 * s)
    return TailBound(float(lower), float(cs))
