"""Numeric certification of the explicit constants in the oscillation argument.

Covers the smooth bump and travelling barrier, the threshold beta1 below
which the barrier is convex with nonpositive fractional Laplacian, the
oscillation gain lambda, and the feasible exponents alpha for the three
rescaling inequalities at a given contraction ratio rho.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConstructionError, InfeasibleError, ParameterError
from .fraclap import FracLapParams, Tail, apply_singular_integral, singular_integral_grid

INNER = 400.0  # cylinder ratio in the oscillation-improvement step
DEFAULT_GROWTH = 500.0  # any value above INNER works
M0_LEMMA = 2.0 * math.sqrt(10.0)


def _check_rho(rho):
    if not 0.0 < rho < 1.0 / INNER:
        raise ParameterError(f"rho must lie in (0, 1/{INNER:g}), got {rho}")


def _check_growth(growth):
    if not growth > INNER:
        raise ParameterError(f"growth constant must exceed {INNER:g}, got {growth}")


# ---------------------------------------------------------------------------
# the three inequalities


class InequalityCheck(NamedTuple):
    c1: bool
    c2: bool
    c3: bool
    margins: dict


def inner_reach(rho, alpha):
    """1/(400 rho) - (1/rho)(1 - rho^alpha), computed without cancellation."""
    return 1.0 / (INNER * rho) + np.expm1(alpha * np.log(rho)) / rho


def f_alpha(alpha, rho, growth=DEFAULT_GROWTH):
    """rho^a (G^(2a) + 1 - rho^a) - G^(2a) rho^(2a^2), G the growth constant.

    Evaluated through expm1 so values of order a^2 keep full relative accuracy.
    """
    a = np.asarray(alpha, dtype=float)
    u = math.log(rho)
    v = math.log(growth)
    e1 = np.expm1(a * u)
    e2 = np.expm1(2.0 * a * v)
    return -(1.0 + e2) * np.expm1(2.0 * a * a * u) + e1 * e2 - e1 * e1


def inequality_margins(rho, alpha, growth=DEFAULT_GROWTH) -> dict:
    """Signed margins (right side minus left side) of the three inequalities.

    Works elementwise on array ``alpha``.  Algebraically identical to the
    inequalities as written; rearranged to survive alpha down to 1e-12.
    """
    a = np.asarray(alpha, dtype=float)
    u = math.log(rho)
    reach = inner_reach(rho, a)
    m1 = reach - 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        # lhs2 - 1 = 2 (rho^-a - 1);  rhs2 = (G * reach)^(2a)
        rhs2_m1 = np.where(reach > 0, np.expm1(2.0 * a * np.log(growth * np.where(reach > 0, reach, 1.0))), -np.inf)
    m2 = rhs2_m1 - 2.0 * np.expm1(-a * u)
    m3 = -f_alpha(a, rho, growth) * np.exp(-2.0 * a * u)
    return {"c1": m1, "c2": m2, "c3": m3}


def inequalities_as_written(rho, alpha, growth=DEFAULT_GROWTH) -> tuple:
    """Direct transcription, (lhs, rhs) per inequality; loses accuracy for tiny alpha."""
    ra = rho ** alpha
    reach = 1.0 / (INNER * rho) - (1.0 / rho) * (1.0 - ra)
    g2a = growth ** (2 * alpha)
    c1 = (1.0, reach)
    c2 = (rho ** -alpha * (2.0 - ra), g2a * reach ** (2 * alpha) if reach > 0 else float("nan"))
    c3 = (rho ** -alpha * (g2a + 1.0 - ra), g2a * (1.0 / rho - (1.0 / rho) * (1.0 - ra)) ** (2 * alpha))
    return c1, c2, c3


def c2_root_form(rho, alpha, growth=DEFAULT_GROWTH) -> tuple:
    """Both sides of the second inequality raised to the power 1/(2 alpha).

    (rho^(-1/2) (2 - rho^a)^(1/(2a)), G * reach); they tend to 1/rho and
    G/(400 rho) as alpha -> 0.
    """
    a = float(alpha)
    lhs = rho ** -0.5 * math.exp(math.log1p(-math.expm1(a * math.log(rho))) / (2.0 * a))
    return lhs, growth * float(inner_reach(rho, a))


def check_inequalities(rho: float, alpha: float, growth: float = DEFAULT_GROWTH) -> InequalityCheck:
    _check_rho(rho)
    _check_growth(growth)
    if not 0.0 < alpha < 0.5:
        raise ParameterError(f"alpha must lie in (0, 1/2), got {alpha}")
    m = {k: float(v) for k, v in inequality_margins(rho, alpha, growth).items()}
    return InequalityCheck(m["c1"] > 0, m["c2"] > 0, m["c3"] > 0, m)


def _all_hold(rho, alpha, growth):
    m = inequality_margins(rho, alpha, growth)
    return (m["c1"] > 0) & (m["c2"] > 0) & (m["c3"] > 0)


def max_alpha(rho: float, tol: float = 1e-10, growth: float = DEFAULT_GROWTH,
              per_decade: int = 256, alpha_floor: float = 1e-12) -> float:
    """Largest alpha such that every scanned alpha below it satisfies all three inequalities.

    Log-spaced scan from ``alpha_floor`` to 1/2 with ``per_decade`` points per
    decade, then bisection between the last feasible and first infeasible
    scan point down to ``tol``.
    """
    _check_rho(rho)
    _check_growth(growth)
    if not tol > 0:
        raise ParameterError("tol must be positive")
    decades = math.log10(0.5 / alpha_floor)
    scan = np.logspace(math.log10(alpha_floor), math.log10(0.5), int(math.ceil(decades * per_decade)) + 1,
                       endpoint=False)
    ok = _all_hold(rho, scan, growth)
    if not ok[0]:
        raise InfeasibleError(f"no feasible alpha above {alpha_floor:g} for rho={rho:g}")
    bad = np.nonzero(~ok)[0]
    if bad.size == 0:
        return float(scan[-1])
    lo, hi = float(scan[bad[0] - 1]), float(scan[bad[0]])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bool(_all_hold(rho, mid, growth)):
            lo = mid
        else:
            hi = mid
    return lo


def c1_threshold(rho: float) -> float:
    """Root of 1/(400 rho) - (1/rho)(1 - rho^alpha) = 1 in alpha."""
    _check_rho(rho)
    return math.log1p(-rho * (1.0 / (INNER * rho) - 1.0)) / math.log(rho)


# ---------------------------------------------------------------------------
# the local-maximum function


def f_second_derivative(rho: float, growth: float = DEFAULT_GROWTH) -> float:
    """ln(rho) (4 ln G - 4 - 2 ln rho), the curvature of ``f_alpha`` at alpha = 0."""
    _check_rho(rho)
    lr = math.log(rho)
    return lr * (4.0 * math.log(growth) - 4.0 - 2.0 * lr)


def f_derivatives_fd(rho: float, h: float = 1e-5, growth: float = DEFAULT_GROWTH) -> tuple:
    """(f(0), f'(0), f''(0)) by central differences on ``f_alpha``."""
    fm, f0, fp = f_alpha(np.array([-h, 0.0, h]), rho, growth)
    return float(f0), float((fp - fm) / (2 * h)), float((fp - 2 * f0 + fm) / h ** 2)


def nonpositive_radius(rho: float, growth: float = DEFAULT_GROWTH, per_decade: int = 64) -> float:
    """Largest scanned alpha* with f_alpha <= 0 on the whole scanned (0, alpha*]."""
    scan = np.logspace(-12, math.log10(0.5), int(11.7 * per_decade))
    vals = f_alpha(scan, rho, growth)
    bad = np.nonzero(vals > 0)[0]
    if bad.size == 0:
        return float(scan[-1])
    if bad[0] == 0:
        return 0.0
    return float(scan[bad[0] - 1])


# ---------------------------------------------------------------------------
# lambda and alpha


def lambda_value(c0: float, c1_const: float, m0_const: float, mu: float) -> float:
    """Oscillation gain c0 exp(-2 C1 / M0) mu / 2."""
    if not (c0 > 0 and m0_const > 0 and mu > 0) or c1_const < 0:
        raise ParameterError("c0, M0, mu must be positive and C1 nonnegative")
    if not c0 < 1.0 / 8.0:
        raise ParameterError("c0 must be below 1/8")
    return c0 * math.exp(-2.0 * c1_const / m0_const) * mu / 2.0


def alpha_from_lambda(lam: float, rho: float) -> float:
    """alpha with 2 - lam = 2 rho^alpha."""
    if not 0 < lam < 2:
        raise ParameterError("lambda must lie in (0, 2)")
    return math.log1p(-lam / 2.0) / math.log(rho)


# ---------------------------------------------------------------------------
# bump profile and barrier


@dataclass(frozen=True)
class BumpProfile:
    """Smooth nonincreasing step: 1 on (-inf, 1], 0 on [2, inf).

    beta = phi(2-x) / (phi(2-x) + phi(x-1)) with phi(y) = exp(-1/y) for y > 0.
    On (1, 2) this is a logistic function of q(x) = 1/(2-x) - 1/(x-1); the
    profile is point-symmetric about x = 3/2, where it takes the value 1/2.
    """

    lo: float = 1.0
    hi: float = 2.0

    @property
    def inflection(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def beta0(self) -> float:
        return float(self.value(self.inflection))

    def _q(self, x):
        a = self.hi - x
        b = x - self.lo
        return 1.0 / a - 1.0 / b, 1.0 / a ** 2 + 1.0 / b ** 2, 2.0 / a ** 3 - 2.0 / b ** 3

    def _eval(self, x, order):
        x0 = np.asarray(x, dtype=float)
        x = np.atleast_1d(x0)
        out = np.zeros((3,) + x.shape)
        out[0] = np.where(x <= self.lo, 1.0, 0.0)
        mid = (x > self.lo) & (x < self.hi)
        if np.any(mid):
            xm = x[mid]
            q, q1, q2 = self._q(xm)
            with np.errstate(over="ignore"):
                beta = 0.5 * (1.0 - np.tanh(0.5 * q))
                pq = 0.25 / np.cosh(0.5 * q) ** 2  # beta (1 - beta)
            d1 = np.where(pq > 0, -pq * q1, 0.0)
            d2 = np.where(pq > 0, -pq * (q2 - q1 ** 2 * (1.0 - 2.0 * beta)), 0.0)
            out[0][mid] = beta
            out[1][mid] = d1
            out[2][mid] = d2
        return out[order].reshape(x0.shape) if x0.ndim else float(out[order][0])

    def value(self, x):
        return self._eval(x, 0)

    def d1(self, x):
        return self._eval(x, 1)

    def d2(self, x):
        return self._eval(x, 2)


def barrier(profile: BumpProfile, x, t, m0_const: float):
    """b(x, t) = beta(|x| + M0 t)."""
    return profile.value(np.abs(x) + m0_const * t)


def barrier_xx(profile: BumpProfile, x, t, m0_const: float):
    # |x| is harmless: beta is flat wherever |x| + M0 t <= 1, which includes x = 0 for t <= 0
    return profile.d2(np.abs(x) + m0_const * t)


@dataclass
class BarrierCertificate:
    beta1: float
    beta0: float
    s: float
    m0_const: float
    dx: float
    times: list
    lap_bound: float
    fraclap_bound: float
    violations: list = field(default_factory=list)
    max_frac_outside_support: float = -math.inf  # must be < 0

    def to_dict(self) -> dict:
        return asdict(self)


def _barrier_frac(profile, t, m0_const, s, dx, margin):
    edge = profile.hi + m0_const * abs(t)
    half = edge + margin
    n = int(math.ceil(2 * half / dx)) | 1
    x = np.linspace(-half, half, n)
    b = barrier(profile, x, t, m0_const)
    frac = singular_integral_grid(b, x[1] - x[0], FracLapParams(s))
    return x, b, frac


def certify_barrier(profile: BumpProfile, m0_const: float, s: float, dx: float = 1e-3,
                    n_times: int = 5, margin: float = 2.0, lap_tol: float = 1e-12,
                    frac_tol: float = 1e-10) -> BarrierCertificate:
    """Largest beta1 <= beta0 such that b_xx >= 0 and (-Delta)^s b <= 0 on {b <= beta1}.

    Checked on a uniform grid of spacing ``dx`` over the support plus ``margin``
    at ``n_times`` times in [-2/M0, 0].  Also reports global bounds on |b_xx|
    and |(-Delta)^s b| over the same samples.
    """
    if not 0.25 <= s < 0.5:
        raise ParameterError("barrier certification needs s in [1/4, 1/2)")
    if dx > 1e-3 * (profile.hi - profile.lo):
        raise ParameterError("grid must resolve the transition with >= 1000 points")
    beta0 = profile.beta0
    times = np.linspace(-2.0 / m0_const, 0.0, n_times)
    min_violation = beta0
    lap_bound = frac_bound = 0.0
    violations = []
    outside = -math.inf
    used_dx = dx
    for t in times:
        x, b, frac = _barrier_frac(profile, t, m0_const, s, dx, margin)
        used_dx = x[1] - x[0]
        bxx = barrier_xx(profile, x, t, m0_const)
        lap_bound = max(lap_bound, float(np.max(np.abs(bxx))))
        frac_bound = max(frac_bound, float(np.max(np.abs(frac))))
        bad = (b <= beta0) & ((bxx < -lap_tol) | (frac > frac_tol))
        if np.any(bad):
            lowest = float(np.min(b[bad]))
            violations.append({"t": float(t), "lowest_b": lowest, "count": int(bad.sum())})
            min_violation = min(min_violation, lowest)
        zero = b == 0
        if np.any(zero):
            outside = max(outside, float(np.max(frac[zero])))
    # largest sampled barrier value strictly inside the violation-free sublevel set
    beta1 = 0.0
    for t in times:
        x, b, _ = _barrier_frac(profile, t, m0_const, s, dx, margin)
        cand = b[b < min_violation] if min_violation < beta0 else b[b <= beta0]
        if cand.size:
            beta1 = max(beta1, float(cand.max()))
    beta1 = min(beta1, min_violation)
    if not beta1 > 0:
        raise ConstructionError("no positive beta1 certified")
    if not outside < 0:
        raise ConstructionError("fractional Laplacian of the barrier is not negative off its support")
    return BarrierCertificate(beta1, beta0, s, m0_const, used_dx, [float(t) for t in times],
                              lap_bound, frac_bound, violations, outside)


def barrier_fraclap_at(profile: BumpProfile, x, t, m0_const: float, s: float, h: float = 1e-3):
    """Pointwise singular integral of b(., t) at x (zero tail beyond the support)."""
    edge = profile.hi + m0_const * abs(t)
    r_cut = edge + float(np.max(np.abs(x))) + 1.0
    return apply_singular_integral(lambda y: barrier(profile, y, t, m0_const), x, FracLapParams(s),
                                   r_cut, h=h, tail=Tail.zero())


# ---------------------------------------------------------------------------
# truncation error of min(theta, 1) under power growth


def truncation_error(alpha: float, growth: float = DEFAULT_GROWTH, const: float = 1.0) -> float:
    """const * int_{|y|>1} (|G y|^(2 alpha) - 1) |y|^(-3/2) dy, finite for alpha < 1/4."""
    if not 0 <= alpha < 0.25:
        raise ParameterError("alpha must lie in [0, 1/4)")
    return const * 2.0 * (growth ** (2 * alpha) / (0.5 - 2 * alpha) - 2.0)


# ---------------------------------------------------------------------------
# certificate


@dataclass
class ConstantsCertificate:
    rho: float
    alpha1: float
    growth: float
    f_second_at_zero: float
    f_second_fd: float
    f_nonpositive_radius: float
    margins: list
    lambda_: float
    alpha_from_lambda: float
    beta1: float
    c0: float
    c1_const: float
    m0_const: float
    mu: float
    s: float
    barrier: dict
    epsilon0: float | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lambda_")
        return d


def certify_constants(rho: float, s: float = 0.45, growth: float = DEFAULT_GROWTH, tol: float = 1e-12,
                      m0_const: float = M0_LEMMA, barrier_dx: float = 1e-3, eps1_max: float = 10 ** 1.5,
                      n_alpha: int = 64) -> ConstantsCertificate:
    """Assemble the full constants certificate for one rho.

    c0 = min(1/8, (3/4) C_s / 25) shrunk by 1%; C1 = C / beta1 where C bounds
    |(-Delta)^s b| + eps1_max |b_xx| on the barrier; mu = 1/M0.
    """
    from .fraclap import normalization_constant

    a1 = max_alpha(rho, tol=tol, growth=growth)
    grid_alpha = np.logspace(-12, math.log10(a1), n_alpha)
    margins = inequality_margins(rho, grid_alpha, growth)
    rows = [{"alpha": float(a), **{k: float(margins[k][i]) for k in margins}} for i, a in enumerate(grid_alpha)]
    cert_b = certify_barrier(BumpProfile(), m0_const, s, dx=barrier_dx)
    c_total = cert_b.fraclap_bound + eps1_max * cert_b.lap_bound
    c1_const = c_total / cert_b.beta1
    c0 = 0.99 * min(1.0 / 8.0, 0.75 * normalization_constant(s) / 25.0)
    mu = 1.0 / m0_const
    lam = lambda_value(c0, c1_const, m0_const, mu)
    return ConstantsCertificate(
        rho=rho, alpha1=a1, growth=growth,
        f_second_at_zero=f_second_derivative(rho, growth),
        f_second_fd=f_derivatives_fd(rho, growth=growth)[2],
        f_nonpositive_radius=nonpositive_radius(rho, growth),
        margins=rows, lambda_=lam, alpha_from_lambda=alpha_from_lambda(lam, rho) if lam > 0 else 0.0,
        beta1=cert_b.beta1, c0=c0, c1_const=c1_const, m0_const=m0_const, mu=mu, s=s,
        barrier=cert_b.to_dict(),
        notes=["epsilon0 is not estimated: no family of test subsolutions is fixed"],
    )


def feasibility_map(rhos, alphas, growth: float = DEFAULT_GROWTH) -> list:
    """Rows (rho, alpha, c1, c2, c3 truth values and margins) for plotting."""
    out = []
    for rho in rhos:
        m = inequality_margins(rho, np.asarray(alphas, dtype=float), growth)
        for i, a in enumerate(alphas):
            out.append({
                "rho": float(rho), "alpha": float(a),
                "c1": bool(m["c1"][i] > 0), "c2": bool(m["c2"][i] > 0), "c3": bool(m["c3"][i] > 0),
                "margin_c1": float(m["c1"][i]), "margin_c2": float(m["c2"][i]), "margin_c3": float(m["c3"][i]),
            })
    return out
