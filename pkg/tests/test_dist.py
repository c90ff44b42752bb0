import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import gammainc, gammaincc

from spde_blowup import (
    DomainSpec,
    ModelParams,
    ModelParams2D,
    SimGrid,
    blowup_probability_closed_form,
    blowup_probability_mc,
    compare_noise_predicate,
    inv_gamma_density,
    ks_distance,
    noise_comparison_inputs,
    reg_gamma_lower,
    reg_gamma_upper,
    solve_eigenpair,
    yor_oracle,
)
from spde_blowup.dist import NoiseComparisonInputs, drift_regime, truncation_tail_bound

DOM = DomainSpec("interval", (math.pi,))
SP = solve_eigenpair(DOM)


def test_reg_gamma_hand_values():
    assert reg_gamma_lower(1.0, 1.0) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-14)
    x = math.pi / 4.0
    series = math.exp(-x) * (1.0 + x + x ** 2 / 2.0 + x ** 3 / 6.0)
    assert reg_gamma_upper(4.0, x) == pytest.approx(series, abs=1e-14)
    assert reg_gamma_lower(3.3, 0.0) == 0.0
    assert reg_gamma_upper(3.3, 0.0) == 1.0


def test_reg_gamma_domain_errors():
    with pytest.raises(ValueError):
        reg_gamma_lower(0.0, 1.0)
    with pytest.raises(ValueError):
        reg_gamma_lower(-2.0, 1.0)
    with pytest.raises(ValueError):
        reg_gamma_upper(1.0, -0.5)


def test_reg_gamma_complement_and_scipy_agreement():
    a_grid = np.logspace(math.log10(0.1), math.log10(50.0), 24)
    x_grid = np.concatenate(([0.0], np.logspace(-3, math.log10(200.0), 30)))
    for a in a_grid:
        for x in x_grid:
            p = reg_gamma_lower(a, x)
            q = reg_gamma_upper(a, x)
            assert abs(p + q - 1.0) < 1e-14
            assert abs(p - gammainc(a, x)) < 1e-12
            assert abs(q - gammaincc(a, x)) < 1e-12


def test_inv_gamma_density_integrates_to_gamma_tail():
    rng = np.random.default_rng(11)
    for _ in range(5):
        a = rng.uniform(0.5, 8.0)
        theta = rng.uniform(0.2, 5.0)
        n_level = rng.uniform(0.1, 10.0)
        val, err = quad(lambda y: inv_gamma_density(a, theta, y), 0.0, n_level,
                        epsabs=1e-12, epsrel=1e-12, limit=200)
        assert val == pytest.approx(reg_gamma_upper(a, theta / n_level), abs=1e-9)


def _section6_params(**kw):
    base = dict(m=1.0, n=1.0, p=1.0, q=1.0, k1=1.0, k2=1.0, C1=1.0, C2=1.0, domain=DOM)
    base.update(kw)
    return ModelParams(**base)


def test_closed_form_reference_case():
    # lambda = 1, k1 = k2 = 1, beta = 1, C1 = C2 = 1: mu = 2, rho = 1,
    # shape = 4, threshold = 8/pi, argument = pi/4.
    report = blowup_probability_closed_form(_section6_params(), SP)
    assert report.part == 1
    assert report.shape == pytest.approx(4.0, abs=1e-14)
    assert report.threshold == pytest.approx(8.0 / math.pi, rel=1e-14)
    assert report.prob_stay_bounded == pytest.approx(
        reg_gamma_upper(4.0, math.pi / 4.0), abs=1e-14
    )
    assert report.prob_stay_bounded == pytest.approx(0.9914688, abs=1e-6)
    assert report.prob_blowup_lower == pytest.approx(1.0 - report.prob_stay_bounded, abs=1e-15)


def test_closed_form_monotone_in_threshold():
    # Larger initial mass shrinks the crossing level, hence the integral.
    values = []
    for c in (0.5, 1.0, 2.0, 4.0):
        rep = blowup_probability_closed_form(_section6_params(C1=c, C2=c), SP)
        values.append(rep.prob_stay_bounded)
    assert all(a >= b for a, b in zip(values, values[1:]))


def test_closed_form_two_level_and_vacuous():
    params = _section6_params(m=3.0, n=1.0, p=3.0, q=1.0, k1=1.0, k2=2.0,
                              C1=20.0, C2=20.0)
    rep = blowup_probability_closed_form(params, SP)
    assert rep.part == 2
    assert not rep.vacuous
    assert 0.0 <= rep.prob_stay_bounded <= 1.0

    # tiny masses give a nonpositive reduced threshold or failed rate
    small = _section6_params(m=3.0, n=1.0, p=3.0, q=1.0, k1=1.0, k2=2.0,
                             C1=0.02, C2=0.002)
    rep = blowup_probability_closed_form(small, SP)
    assert rep.vacuous
    assert rep.reason


def test_closed_form_strict_chain_requires_k2_gt_k1():
    # (m,n,p,q) = (4,3,2,1.4) with k2 = 1.25 k1 satisfies both identities.
    params = _section6_params(m=4.0, n=3.0, p=2.0, q=1.4, k1=1.0, k2=1.25,
                              C1=30.0, C2=30.0)
    rep = blowup_probability_closed_form(params, SP)
    assert rep.part == 3
    bad = _section6_params(m=4.0, n=3.0, p=2.0, q=1.4, k1=-1.0, k2=-1.25,
                           C1=30.0, C2=30.0)
    with pytest.raises(ValueError):
        blowup_probability_closed_form(bad, SP)


def test_substitution_identity_random_draws():
    # Quadrature of the density over (0, N] matches the regularized upper
    # gamma tail; the full-line integral is 1.
    rng = np.random.default_rng(2027)
    checked = 0
    while checked < 8:
        kind = checked % 3
        lam = rng.uniform(0.3, 2.0)
        k1 = rng.uniform(0.4, 1.5)
        c1 = rng.uniform(0.5, 20.0)
        c2 = rng.uniform(0.5, 20.0)
        if kind == 0:
            beta = rng.uniform(0.4, 2.5)
            params = _section6_params(m=beta, n=beta, p=beta, q=beta, k1=k1, k2=k1,
                                      C1=c1, C2=c2, lambda_override=lam)
        elif kind == 1:
            gamma = rng.uniform(0.3, 1.2)
            beta = gamma + rng.uniform(0.3, 1.5)
            k2 = (1.0 + beta) * k1 / (1.0 + gamma)
            params = _section6_params(m=beta, n=gamma, p=beta, q=gamma, k1=k1, k2=k2,
                                      C1=c1, C2=c2, lambda_override=lam)
        else:
            m, n, p, q = 4.0, 3.0, 2.0, 1.4
            k2 = 1.25 * k1
            params = _section6_params(m=m, n=n, p=p, q=q, k1=k1, k2=k2,
                                      C1=c1, C2=c2, lambda_override=lam)
        rep = blowup_probability_closed_form(params, SP)
        if rep.vacuous:
            continue
        checked += 1
        a, theta, n_level = rep.shape, rep.theta, rep.threshold
        val, _ = quad(lambda y: inv_gamma_density(a, theta, y), 0.0, n_level,
                      epsabs=1e-12, epsrel=1e-12, limit=400)
        assert abs(val - rep.prob_stay_bounded) < 1e-8
        total, _ = quad(lambda y: inv_gamma_density(a, theta, y), 0.0, np.inf,
                        epsabs=1e-12, epsrel=1e-12, limit=400)
        assert abs(total - 1.0) < 1e-8


def test_truncation_tail_bound():
    assert truncation_tail_bound(1.0, 2.0, 8.0) == pytest.approx(
        math.exp(-1.5 * 8.0) / 1.5, rel=1e-14
    )
    assert truncation_tail_bound(2.0, 1.0, 8.0) == math.inf


def test_mc_probability_small_run_matches_closed_form():
    report = blowup_probability_mc(
        _section6_params(), SP, n_paths=4000,
        grid=SimGrid(dt=1e-3, horizon=8.0), seed=20,
    )
    tol = 3.0 * report.mc_stderr + 0.02
    assert abs(report.mc_estimate - report.closed_form) < tol
    assert report.tail_bound < 1e-4 * report.threshold


def test_mc_probability_rejects_weak_drift():
    # mu * beta <= rho^2 / 2 leaves an unbounded truncation bias.
    params = _section6_params(k1=4.0, k2=4.0, lambda_override=0.0)
    regime = drift_regime(params, SP)
    assert regime.mu * regime.damping <= 0.5 * regime.rho ** 2
    with pytest.raises(ValueError):
        blowup_probability_mc(params, SP, n_paths=10,
                              grid=SimGrid(dt=1e-3, horizon=4.0))


def test_yor_zero_noise_limit():
    # With W = 0 the functional is int_0^T exp(-2 nu t) dt -> 1/(2 nu).
    rep = yor_oracle(2.0, 4, SimGrid(dt=1e-4, horizon=10.0), zero_noise=True)
    assert rep.mean_functional == pytest.approx(0.25, abs=1e-6)


def test_yor_oracle_smoke():
    rep = yor_oracle(4.0, 1500, SimGrid(dt=2e-3, horizon=12.0), seed=5)
    # generous bound at this sample size: 1.63/sqrt(n) + allowance
    assert rep.ks_distance < 1.63 / math.sqrt(1500) + 0.01
    assert abs(rep.mean_functional - 1.0 / 6.0) < 4.0 * rep.mean_stderr + 0.005


def test_yor_oracle_preconditions():
    with pytest.raises(ValueError):
        yor_oracle(1.0, 10, SimGrid(dt=1e-3, horizon=20.0))
    with pytest.raises(ValueError):
        yor_oracle(2.0, 10, SimGrid(dt=1e-3, horizon=2.0))


def test_yor_ks_shrinks_under_refinement():
    # Same underlying fine paths, coarsened: the KS distance decreases as
    # dt halves and the horizon doubles.
    nu = 2.0
    fine = SimGrid(dt=1e-3, horizon=20.0)
    n_paths = 4000
    t_fine = fine.times
    levels = {4: 5.0, 2: 10.0, 1: 20.0}
    funcs = {f: np.empty(n_paths) for f in levels}
    from spde_blowup import sample_path

    for pid in range(n_paths):
        w = sample_path(fine, seed=606, path_id=pid).values[0]
        for f, horizon in levels.items():
            idx = np.arange(0, len(w), f)
            t = t_fine[idx]
            keep = t <= horizon + 1e-12
            g = np.exp(2.0 * (w[idx][keep] - nu * t[keep]))
            funcs[f][pid] = np.trapezoid(g, dx=fine.dt * f)
    ks = {}
    for f in levels:
        v = 1.0 / (2.0 * funcs[f])
        ks[f] = ks_distance(v, lambda x: reg_gamma_lower(nu, x))
    assert ks[1] <= ks[2] <= ks[4]


def test_compare_noise_reference_scalars():
    inputs = NoiseComparisonInputs(rho1=1.0, rho2=1.0, l1=0.5, l2=0.5, lam=1.0,
                                   beta=3.0, gamma=1.0, eps0=0.5, e0=2.0, c3=1.0)
    rep = compare_noise_predicate(inputs)
    assert rep.gamma_bar == pytest.approx(0.5, abs=1e-14)
    assert rep.k3 == pytest.approx(0.0, abs=1e-14)
    assert rep.alpha1 == pytest.approx(3.0, abs=1e-14)
    assert rep.alpha2 == pytest.approx(2.0, abs=1e-14)
    assert rep.big_lambda == pytest.approx(8.0 / 3.0, rel=1e-14)
    by_name = {h.name: h.holds for h in rep.hypotheses}
    # e^(2*1*1*0.5) = e < (8/3) * 2^1
    assert by_name["noise_balance"]
    assert by_name["gamma_tail_ratio"]


def test_compare_noise_eps0_window_failure():
    inputs = NoiseComparisonInputs(rho1=1.0, rho2=1.0, l1=0.5, l2=0.5, lam=1.0,
                                   beta=3.0, gamma=1.0, eps0=4.0, e0=2.0, c3=1.0)
    rep = compare_noise_predicate(inputs)
    by_name = {h.name: h.holds for h in rep.hypotheses}
    assert not by_name["eps0_window"]
    assert not rep.ordering_certified


def test_compare_noise_probabilities_are_gamma_tails():
    inputs = NoiseComparisonInputs(rho1=1.0, rho2=1.0, l1=0.5, l2=0.5, lam=1.0,
                                   beta=3.0, gamma=1.0, eps0=0.5, e0=2.0, c3=1.0)
    rep = compare_noise_predicate(inputs)
    w = 2.0 * rep.witness_level
    assert rep.p1_inf == pytest.approx(reg_gamma_upper(4.0, w / 1.0), abs=1e-14)
    assert rep.p2_inf == pytest.approx(reg_gamma_upper(3.0, w / 2.0), abs=1e-14)
    assert rep.p1_finite == pytest.approx(1.0 - rep.p1_inf)


def test_noise_comparison_inputs_builder():
    p2 = ModelParams2D(
        m=3.0, n=1.0, p=3.0, q=1.0,
        k11=0.5, k12=0.2, k21=1.5, k22=0.6,
        C11=1.0, C12=1.0, C21=1.0, C22=1.0,
        M1=2.0, M2=2.0, domain=DOM,
    )
    inputs = noise_comparison_inputs(p2, SP)
    assert inputs.rho1 == pytest.approx(1.5, abs=1e-14)
    assert inputs.rho2 == pytest.approx(0.6, abs=1e-14)
    assert inputs.l1 == pytest.approx(0.5 * (0.25 + 2.25), abs=1e-14)
    assert inputs.c3 == pytest.approx(1.0, abs=1e-12)
    rep = compare_noise_predicate(inputs)
    assert 0.0 <= rep.p1_inf <= 1.0

    bad = ModelParams2D(
        m=3.0, n=1.0, p=3.0, q=1.0,
        k11=0.5, k12=0.2, k21=1.0, k22=0.6,
        C11=1.0, C12=1.0, C21=1.0, C22=1.0,
        M1=2.0, M2=2.0, domain=DOM,
    )
    with pytest.raises(ValueError):
        noise_comparison_inputs(bad, SP)
