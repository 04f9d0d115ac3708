import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracburgers.diagnostics import holder_seminorm
from fracburgers.errors import ParameterError, ResampleError
from fracburgers.field import SpectralField
from fracburgers.solver import (
    InitialData,
    SolverConfig,
    energy_identity_residual,
    rescale_equation,
    rescale_holder,
    rescaled_config,
    run,
    step,
)


def small_config(**kw):
    base = dict(s=0.45, eps1=1e-3, n=256, domain_length=32.0, dt=1e-2, t_end=1.0, output_every=10)
    base.update(kw)
    return SolverConfig(**base)


@pytest.mark.parametrize("bad", [
    dict(s=0.6), dict(s=0.0), dict(eps1=-1.0), dict(n=100), dict(n=4), dict(domain_length=0.0),
    dict(dt=-1.0), dict(dt="fast"), dict(t_end=-1.0), dict(dealias_fraction=0.0),
    dict(output_every=0), dict(scheme="euler"), dict(seed=-1), dict(n=8, dealias_fraction=0.5),
])
def test_config_validation(bad):
    with pytest.raises(ParameterError):
        small_config(**bad)


def test_below_working_range_warns(caplog):
    with caplog.at_level("WARNING"):
        small_config(s=0.2)
    assert "below the working range" in caplog.text


def test_resolve_dt_hits_t_end_exactly():
    cfg = small_config(dt=0.3, t_end=1.0)
    dt, nsteps = cfg.resolve_dt(SpectralField(np.zeros(256), 32.0))
    assert nsteps == 4 and dt * nsteps == pytest.approx(1.0, abs=1e-15)


def test_auto_dt_rule():
    cfg = small_config(dt="auto")
    kmax = math.pi * 256 / 32
    expect = 0.4 * min(cfg.dx / 2.0, 1 / (1e-3 * kmax ** 2 + kmax ** 0.9))
    assert cfg.auto_dt(2.0) == pytest.approx(expect)


def test_zero_stays_zero():
    tr = run(small_config(), InitialData("constant", amplitude=0.0))
    assert all(np.all(f.values == 0.0) for f in tr.snapshots)


def test_constant_stays_constant():
    tr = run(small_config(), InitialData("constant", amplitude=0.7))
    assert np.max(np.abs(tr.final.values - 0.7)) < 1e-14


def test_linear_single_mode_decay():
    L, amp = 32.0, 1e-8
    cfg = small_config(eps1=0.0, domain_length=L, t_end=2.0)
    tr = run(cfg, InitialData("sine", amplitude=amp, max_mode=1))
    expect = amp * math.exp(-(2 * math.pi / L) ** 0.9 * 2.0)
    got = np.max(np.abs(tr.final.values))
    assert abs(got - expect) / expect < 1e-6


def test_t_end_zero_single_snapshot():
    tr = run(small_config(t_end=0.0), InitialData())
    assert len(tr.snapshots) == 1 and tr.times.tolist() == [0.0]


def test_step_matches_run():
    cfg = small_config(t_end=0.02, dt=0.01, output_every=1)
    f0 = InitialData().generate(cfg.n, cfg.domain_length)
    tr = run(cfg, f0)
    f = step(step(f0, 0.0, cfg), 0.01, cfg)
    assert np.array_equal(f.values, tr.final.values)


def test_energy_nonincreasing_and_max_principle():
    cfg = SolverConfig(s=0.45, eps1=1e-3, n=512, domain_length=64.0, dt=5e-3, t_end=5.0, output_every=100)
    tr = run(cfg, InitialData.gaussian_with_l2(1.0, 1.0))
    l2 = tr.series["l2"]
    assert np.all(np.diff(l2) <= 1e-15 * l2[0])
    sup0 = tr.series["max"][0]
    drift = 1e-8 * sup0 * tr.series["t"][1:]
    assert np.all(np.maximum.accumulate(tr.series["max"])[1:] <= sup0 + drift + 1e-15)
    assert np.all(tr.series["min"][1:] >= tr.series["min"][0] - drift - 1e-15)


def test_energy_residual_zero_solution():
    tr = run(small_config(), InitialData("constant", amplitude=0.0))
    assert np.all(energy_identity_residual(tr) == 0.0)


def test_determinism_bitwise():
    cfg = small_config(seed=99)
    init = InitialData("band_limited_random", amplitude=2.0, max_mode=6)
    a, b = run(cfg, init), run(cfg, init)
    assert np.array_equal(a.series_array(), b.series_array())
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a.snapshots, b.snapshots))


def test_band_limited_sup_and_seed():
    f = InitialData("band_limited_random", amplitude=3.0, max_mode=4).generate(1024, 64.0, seed=5)
    assert np.max(np.abs(f.values)) == pytest.approx(3.0, rel=1e-15)
    g = InitialData("band_limited_random", amplitude=3.0, max_mode=4).generate(1024, 64.0, seed=6)
    assert not np.array_equal(f.values, g.values)
    assert np.all(np.abs(f.modes[5:]) < 1e-9)


def test_gaussian_with_l2():
    f = InitialData.gaussian_with_l2(1.0, 0.8).generate(2048, 64.0)
    assert f.l2_norm() == pytest.approx(1.0, rel=1e-12)


def test_self_convergence_order():
    def final(n, dt):
        cfg = SolverConfig(s=0.45, eps1=1e-2, n=n, domain_length=32.0, dt=dt, t_end=1.0, output_every=10 ** 6)
        return run(cfg, InitialData("gaussian_bump", amplitude=1.0, width=2.0)).final.values

    a = final(256, 0.1)
    b = final(512, 0.05)[::2]
    c = final(1024, 0.025)[::4]
    e1, e2 = np.max(np.abs(a - b)), np.max(np.abs(b - c))
    assert e1 / e2 > 2 ** 4 * 0.7


def test_steep_data_blowup_marker():
    cfg = SolverConfig(s=0.2, eps1=0.0, n=256, domain_length=32.0, dt=1e-3, t_end=2.0, output_every=100,
                       blowup_grad_fraction=0.2)
    tr = run(cfg, InitialData("steep_shock", amplitude=10.0, steepness=1.0))
    assert tr.status == "blowup" and tr.blowup.reason == "gradient reached grid scale"
    assert tr.blowup.t < 2.0 and tr.times[-1] < tr.blowup.t


def test_nonfinite_blowup_is_data():
    cfg = small_config(dt=5.0, t_end=50.0, eps1=0.0, s=0.25)
    tr = run(cfg, InitialData("gaussian_bump", amplitude=1e3, width=0.2))
    assert tr.status == "blowup"
    assert np.all(np.isfinite(tr.final.values))


def test_rescale_identity():
    f = InitialData().generate(128, 16.0)
    for res in (rescale_equation(f, 1.0, 0.4), rescale_holder(f, 1.0, 0.1, 0.4)):
        assert np.array_equal(res.field.values, f.values) and res.field.domain_length == 16.0
        assert res.time_factor == 1.0 and res.drift_factor == 1.0


def test_rescale_critical_keeps_amplitude():
    f = InitialData().generate(128, 16.0)
    res = rescale_equation(f, 0.5, 0.5)
    assert np.array_equal(res.field.values, f.values)
    assert res.field.domain_length == 32.0 and res.time_factor == 0.5


@settings(max_examples=20, deadline=None)
@given(st.floats(0.25, 0.5), st.floats(0.01, 0.99), st.floats(0.05, 0.99))
def test_holder_drift_factor_below_one(s, alpha_frac, r):
    alpha = (1 - 2 * s) + alpha_frac * (1 - (1 - 2 * s)) * 0.999
    if not 0 < alpha < 1:
        return
    res = rescale_holder(SpectralField(np.zeros(8), 1.0), r, alpha, s)
    assert res.drift_factor < 1.0 or alpha == 1 - 2 * s


def test_holder_rescale_preserves_seminorm():
    f = InitialData("band_limited_random", amplitude=1.0, max_mode=5).generate(1024, 32.0, seed=3)
    alpha = 0.3
    g = rescale_holder(f, 0.5, alpha, 0.45).field
    a = holder_seminorm(f, alpha, 4 * f.dx)
    b = holder_seminorm(g, alpha, 4 * g.dx)
    assert b == pytest.approx(a, rel=1e-12)


def test_resample_errors():
    f = SpectralField.from_function(lambda x: np.exp(-x ** 2), 128, 16.0)
    with pytest.raises(ResampleError):
        rescale_equation(f, 0.05, 0.45, resample=True)  # bump leaves the window
    noisy = InitialData("band_limited_random", amplitude=1.0, max_mode=40).generate(128, 16.0, seed=1)
    with pytest.raises(ResampleError):
        rescale_equation(noisy, 3.0, 0.45, resample=True)  # compression aliases


def test_resample_round_trip_smooth():
    f = SpectralField.from_function(lambda x: np.exp(-x ** 2), 512, 32.0)
    g = rescale_equation(f, 0.5, 0.5, resample=True).field
    np.testing.assert_allclose(g.values, np.exp(-(0.5 * f.x) ** 2), atol=1e-10)


def test_rescaled_config():
    cfg = small_config(eps1=1e-3, t_end=1.0)
    res = rescale_equation(InitialData().generate(256, 32.0), 0.5, 0.45)
    c2 = rescaled_config(cfg, res, dt=7e-3)
    assert c2.domain_length == 64.0 and c2.dt == 7e-3
    assert c2.eps1 == pytest.approx(1e-3 * 0.5 ** (0.9 - 2))
    assert c2.t_end == pytest.approx(0.5 ** -0.9)
