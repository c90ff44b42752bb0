import math

import numpy as np
import pytest

from spde_blowup import (
    DomainSpec,
    ModelParams,
    ModelParams2D,
    OdeSystemKind,
    SimGrid,
    initial_mass,
    integrate,
    sample_path,
    sandwich_check,
    solve_eigenpair,
)

DOM = DomainSpec("interval", (math.pi,))
SP = solve_eigenpair(DOM)


def _params(**kw):
    base = dict(m=1.0, n=1.0, p=1.0, q=1.0, k1=1.0, k2=1.0, C1=1.0, C2=1.0, domain=DOM)
    base.update(kw)
    return ModelParams(**base)


def _zero_path(dt, horizon):
    return sample_path(SimGrid(dt=dt, horizon=horizon), zero_noise=True)


@pytest.mark.parametrize("m,t_star", [(0.5, 1.0), (1.0, 0.5), (2.0, 0.25)])
def test_zero_noise_blowup_matches_closed_form(m, t_star):
    # Symmetric start h1 = h2 = h0 collapses the system to dh/dt = 2 h^(1+m)
    # with explosion at t* = h0^(-m) / (2m); here h0 = 1.
    params = _params(m=m, n=m, p=m, q=m)
    path = _zero_path(dt=1e-4, horizon=1.5)
    res = integrate(OdeSystemKind("plain"), params, (1.0, 1.0), path)
    assert res.blew_up
    assert abs(res.time - t_star) / t_star < 1e-3


def test_zero_noise_blowup_scales_with_initial_mass():
    params = _params()
    path = _zero_path(dt=1e-4, horizon=2.0)
    for h0 in (0.5, 1.0, 2.0):
        res = integrate(OdeSystemKind("plain"), params, (h0, h0), path)
        assert res.blew_up
        assert abs(res.time - 0.5 / h0) / (0.5 / h0) < 1e-3


def test_damped_decay_survives():
    params = _params()
    path = _zero_path(dt=1e-3, horizon=5.0)
    res = integrate(OdeSystemKind("damped", damping=10.0), params, (0.1, 0.1), path)
    assert res.status == "survived"
    assert res.peak <= 0.2 + 1e-12


def test_blowup_cap_insensitivity():
    # Super-linear growth makes the reported time insensitive to the cap.
    params = _params()
    path = _zero_path(dt=1e-3, horizon=3.0)
    masses = initial_mass(params, SP)
    t_hi = integrate(OdeSystemKind("plain"), params, masses, path, blowup_cap=1e12).time
    t_lo = integrate(OdeSystemKind("plain"), params, masses, path, blowup_cap=1e10).time
    assert abs(t_hi - t_lo) / t_hi < 0.01


def test_blowup_time_monotone_in_initial_mass():
    params = _params()
    grid = SimGrid(dt=1e-3, horizon=8.0)
    ladder = (0.3, 0.6, 1.0, 1.6, 2.5)
    for pid in range(100):
        path = sample_path(grid, seed=77, path_id=pid)
        last = math.inf
        for h0 in ladder:
            res = integrate(OdeSystemKind("plain"), params, (h0, 0.2), path)
            t = res.time if res.blew_up else math.inf
            assert t <= last + 2.0 * grid.dt
            last = t


def test_general_k_matches_plain_when_consistent():
    params = _params()
    grid = SimGrid(dt=1e-3, horizon=4.0)
    masses = initial_mass(params, SP)
    for pid in range(10):
        path = sample_path(grid, seed=13, path_id=pid)
        a = integrate(OdeSystemKind("plain"), params, masses, path)
        b = integrate(OdeSystemKind("general_k"), params, masses, path)
        assert a.status == b.status
        assert a.time == pytest.approx(b.time, abs=1e-12)


def test_integrate_validations():
    params = _params()
    path = _zero_path(dt=1e-3, horizon=1.0)
    with pytest.raises(ValueError):
        integrate(OdeSystemKind("plain"), params, (0.0, 1.0), path)
    with pytest.raises(ValueError):
        OdeSystemKind("plain", damping=1.0)
    with pytest.raises(ValueError):
        OdeSystemKind("rk45")
    inconsistent = _params(m=2.0, n=1.5, p=1.2, q=1.0, k1=1.0, k2=0.8)
    with pytest.raises(ValueError):
        integrate(OdeSystemKind("plain"), inconsistent, (1.0, 1.0), path)
    integrate(OdeSystemKind("general_k"), inconsistent, (1.0, 1.0), path)


def test_damped_2d_survives_and_blows():
    # Shared per-component weights: m * k1j = q * k2j.
    p2 = ModelParams2D(
        m=3.0, n=1.0, p=3.0, q=1.0,
        k11=0.5, k12=0.2, k21=1.5, k22=0.6,
        C11=1.0, C12=1.0, C21=1.0, C22=1.0,
        M1=0.05, M2=0.05, domain=DOM,
    )
    grid = SimGrid(dt=1e-3, horizon=3.0)
    path2 = sample_path(grid, dims=2, seed=5, path_id=0, zero_noise=True)
    l1 = 0.5 * (p2.k11 ** 2 + p2.k21 ** 2)
    l2 = 0.5 * (p2.k12 ** 2 + p2.k22 ** 2)
    damping = SP.lam + l1 + l2
    res = integrate(OdeSystemKind("damped_2d", damping=damping), p2,
                    (0.05, 0.05), path2)
    assert res.status == "survived"
    big = integrate(OdeSystemKind("damped_2d", damping=damping), p2,
                    (20.0, 20.0), path2)
    assert big.blew_up


def test_sandwich_zero_noise_exact_triple(equal_params, pi_spectral):
    path = _zero_path(dt=1e-3, horizon=5.0)
    rep = sandwich_check(equal_params, pi_spectral, path)
    assert rep.ok
    assert rep.tau_lower == pytest.approx(1.0 / 3.0, rel=1e-3)
    assert rep.tau_ode == pytest.approx(4.0 / math.pi, rel=1e-3)
    assert rep.tau_upper == pytest.approx(8.0 / math.pi, rel=1e-3)


def test_sandwich_holds_on_noisy_paths(equal_params, pi_spectral):
    grid = SimGrid(dt=1e-3, horizon=20.0)
    for pid in range(200):
        path = sample_path(grid, seed=404, path_id=pid)
        rep = sandwich_check(equal_params, pi_spectral, path)
        assert rep.ok, (pid, rep)
