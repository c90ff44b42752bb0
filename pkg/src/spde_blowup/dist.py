"""Gamma tails, closed-form never-blow-up probabilities, and the Yor oracle.

The killed system (zero potential, damping mu = lambda + (k1^2 + k2^2)/2)
turns the upper-bound stopping time into the first crossing of a drifted
exponential functional int_0^t exp(rho W_s - mu*c*s) ds.  Sending t to
infinity and rescaling time by 4/rho^2 reduces the never-crossing event to
the law of the perpetuity int_0^inf exp(2(W - nu t)) dt, which equals
1/(2 Z_nu) in distribution with Z_nu a standard gamma variable of shape
nu = 2*mu*c/rho^2.  The never-crossing probability of a threshold N is then

    P( A(inf) <= N ) = P( Z_nu >= 2/(rho^2 N) ) = Q(nu, 2/(rho^2 N))

with Q the regularized upper incomplete gamma function, equivalently the
integral over (0, N] of the inverse-gamma density

    h(y) = (theta/y)^a * exp(-theta/y) / (y * Gamma(a)),   theta = 2/rho^2.

P and Q are computed from the classic series (x < a + 1) and continued
fraction (x >= a + 1) with absolute error below 1e-12; the complete gamma
function comes from math.lgamma, whose relative error is well under 1e-13
over the needed range.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import (
    ModelParams,
    ModelParams2D,
    CaseTag,
    classify_case,
    check_epsilon_conditions,
    check_rho_conditions,
    check_rho_conditions_2d,
    young_constant,
)
from .paths import SimGrid, sample_path
from .spectral import SpectralData, initial_mass

__all__ = [
    "GammaParams",
    "ClosedFormReport",
    "ProbabilityReport",
    "YorReport",
    "NoiseComparisonInputs",
    "NoiseComparisonReport",
    "reg_gamma_lower",
    "reg_gamma_upper",
    "inv_gamma_density",
    "blowup_probability_closed_form",
    "blowup_probability_mc",
    "yor_oracle",
    "ks_distance",
    "compare_noise_predicate",
    "noise_comparison_inputs",
    "drift_regime",
]

_MAX_ITER = 600
_EPS = 1e-16
# Expected neglected tail of the truncated drifted functional must stay
# below this fraction of the threshold.
TAIL_FRACTION = 1e-4


@dataclass(frozen=True)
class GammaParams:
    """Shape/scale of a gamma law (densities x^(a-1) e^(-x/scale))."""

    shape: float
    scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.shape) and self.shape > 0.0):
            raise ValueError("shape must be positive and finite")
        if not (math.isfinite(self.scale) and self.scale > 0.0):
            raise ValueError("scale must be positive and finite")


def _gamma_series(a: float, x: float) -> float:
    # Lower tail by power series; converges fast for x < a + 1.
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cont_fraction(a: float, x: float) -> float:
    # Upper tail by Lentz-evaluated continued fraction; for x >= a + 1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def _check_domain(a: float, x: float):
    if not (math.isfinite(a) and a > 0.0):
        raise ValueError(f"shape a must be positive, got {a}")
    if not (math.isfinite(x) and x >= 0.0):
        raise ValueError(f"argument x must be nonnegative, got {x}")


def reg_gamma_lower(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x); P + Q = 1."""
    _check_domain(a, x)
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cont_fraction(a, x)


def reg_gamma_upper(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x); P + Q = 1."""
    _check_domain(a, x)
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cont_fraction(a, x)


def inv_gamma_density(a: float, theta: float, y) -> np.ndarray:
    """Density (theta/y)^a exp(-theta/y) / (y Gamma(a)) on y > 0.

    This is the law of theta divided by a standard gamma variable of shape
    a; its integral over (0, N] equals Q(a, theta/N).
    """
    if a <= 0.0 or theta <= 0.0:
        raise ValueError("a and theta must be positive")
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    pos = y > 0.0
    yp = y[pos]
    log_h = a * (math.log(theta) - np.log(yp)) - theta / yp - np.log(yp) - math.lgamma(a)
    out[pos] = np.exp(log_h)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DriftRegime:
    """Scalars of one drifted-functional crossing problem.

    rho       exponential weight of the Brownian argument
    damping   drift coefficient c in exp(rho W - mu*c*s) (c is the relevant
              exponent: the common one, gamma, or q)
    mu        lambda + (k1^2 + k2^2)/2 (lambda possibly overridden)
    threshold crossing level (after the 1/(mu*c) reduction for parts 2-3)
    shape     2*mu*c/rho^2, the gamma shape of the perpetuity reciprocal
    theta     2/rho^2, its scale
    part      1, 2, or 3 following the exponent case
    vacuous   True when the reduced threshold is nonpositive (the stated
              bound carries no information)
    """

    rho: float
    damping: float
    mu: float
    threshold: float
    shape: float
    theta: float
    part: int
    vacuous: bool
    reason: str | None = None


def drift_regime(params: ModelParams, spectral: SpectralData, case: CaseTag | None = None) -> DriftRegime:
    """Reduce zero-potential parameters to one drifted crossing problem."""
    case = classify_case(params) if case is None else case
    rho_info = check_rho_conditions(params)
    if not rho_info.consistent:
        raise ValueError(
            "noise-consistency identities fail "
            f"(mismatches {rho_info.mismatch1:.3g}, {rho_info.mismatch2:.3g}); "
            "no drifted-functional reduction applies"
        )
    lam = params.lambda_override if params.lambda_override is not None else spectral.lam
    mu = lam + 0.5 * (params.k1 ** 2 + params.k2 ** 2)
    e0 = initial_mass(params, spectral).e0

    if case.variant == "equal_exponents":
        beta = params.m
        rho = rho_info.rho1
        threshold = 2.0 ** beta / (beta * e0 ** beta)
        return DriftRegime(
            rho=rho,
            damping=beta,
            mu=mu,
            threshold=threshold,
            shape=2.0 * mu * beta / rho ** 2,
            theta=2.0 / rho ** 2,
            part=1,
            vacuous=False,
        )

    if case.variant in ("two_level", "strict_chain"):
        if not params.k2 > params.k1:
            raise ValueError("parts 2 and 3 require k2 > k1")
        eps = check_epsilon_conditions(params, spectral)
        rho2 = rho_info.rho2
        if case.variant == "two_level":
            beta, gam = params.m, params.n
            d3 = eps.constants["D3"]
            rate = eps.eps0 / 2.0 ** (1.0 + gam) - eps.eps0 ** (
                (1.0 + beta) / (beta - gam)
            ) * d3 / e0 ** (1.0 + gam)
            part = 2
            exponent = gam
        else:
            m, n, p, q = params.m, params.n, params.p, params.q
            d1, d2 = eps.constants["D1"], eps.constants["D2"]
            rate = eps.eps0 / 2.0 ** n - (
                eps.eps0 ** ((1.0 + m) / (m - n)) * d1
                + eps.eps0 ** ((1.0 + p) / (p - q)) * d2
            ) / e0 ** (1.0 + q)
            part = 3
            exponent = q
        if rate <= 0.0:
            return DriftRegime(
                rho=rho2, damping=exponent, mu=mu, threshold=math.nan,
                shape=math.nan, theta=2.0 / rho2 ** 2, part=part, vacuous=True,
                reason="growth-rate condition fails; no finite crossing level",
            )
        reduced = 1.0 / (exponent * e0 ** exponent * rate) - 1.0 / (mu * exponent)
        if reduced <= 0.0:
            return DriftRegime(
                rho=rho2, damping=exponent, mu=mu, threshold=reduced,
                shape=math.nan, theta=2.0 / rho2 ** 2, part=part, vacuous=True,
                reason="reduced threshold is nonpositive; the bound is vacuous",
            )
        return DriftRegime(
            rho=rho2,
            damping=exponent,
            mu=mu,
            threshold=reduced,
            shape=2.0 * mu * exponent / rho2 ** 2,
            theta=2.0 / rho2 ** 2,
            part=part,
            vacuous=False,
        )

    raise ValueError("no closed-form probability for the general exponent case")


@dataclass(frozen=True)
class ClosedFormReport:
    """Both closed-form integrals attached to the never-crossing event.

    prob_stay_bounded is the integral of the matching density over (0, N]
    (the probability that the drifted functional never crosses), and
    prob_blowup_lower is its complement (the integral over (N, inf)).  Both
    are reported side by side; no claim is made here about which one bounds
    the true blow-up probability of the field equation.
    """

    part: int
    shape: float
    theta: float
    threshold: float
    mu: float
    rho: float
    prob_stay_bounded: float
    prob_blowup_lower: float
    vacuous: bool
    reason: str | None = None


def blowup_probability_closed_form(
    params: ModelParams, spectral: SpectralData, case: CaseTag | None = None
) -> ClosedFormReport:
    """Closed-form never-crossing probability Q(shape, theta/threshold)."""
    regime = drift_regime(params, spectral, case)
    if regime.vacuous:
        return ClosedFormReport(
            part=regime.part, shape=regime.shape, theta=regime.theta,
            threshold=regime.threshold, mu=regime.mu, rho=regime.rho,
            prob_stay_bounded=math.nan, prob_blowup_lower=math.nan,
            vacuous=True, reason=regime.reason,
        )
    stay = reg_gamma_upper(regime.shape, regime.theta / regime.threshold)
    return ClosedFormReport(
        part=regime.part,
        shape=regime.shape,
        theta=regime.theta,
        threshold=regime.threshold,
        mu=regime.mu,
        rho=regime.rho,
        prob_stay_bounded=stay,
        prob_blowup_lower=1.0 - stay,
        vacuous=False,
    )


@dataclass(frozen=True)
class ProbabilityReport:
    """Closed form next to its Monte Carlo estimate; nothing is clamped."""

    closed_form: float
    mc_estimate: float
    mc_stderr: float
    n_paths: int
    truncation_horizon: float
    tail_bound: float
    threshold: float


def truncation_tail_bound(rho: float, decay: float, horizon: float) -> float:
    """Expected neglected mass int_T^inf E[exp(rho W - decay*s)] ds.

    E[exp(rho W_s)] = exp(rho^2 s / 2), so the bound is finite only when
    decay > rho^2/2.
    """
    rate = decay - 0.5 * rho ** 2
    if rate <= 0.0:
        return math.inf
    return math.exp(-rate * horizon) / rate


def suggest_horizon(rho: float, decay: float, threshold: float) -> float:
    """Smallest horizon keeping the neglected tail below TAIL_FRACTION*threshold."""
    rate = decay - 0.5 * rho ** 2
    if rate <= 0.0:
        raise ValueError(
            "the drift does not dominate the noise variance "
            f"(decay {decay} <= rho^2/2 = {0.5 * rho**2}); "
            "no truncation horizon achieves the bias target"
        )
    return max(1.0, -math.log(TAIL_FRACTION * threshold * rate) / rate)


def blowup_probability_mc(
    params: ModelParams,
    spectral: SpectralData,
    case: CaseTag | None = None,
    n_paths: int = 10_000,
    grid: SimGrid | None = None,
    seed: int = 0,
) -> ProbabilityReport:
    """Estimate the never-crossing probability of the drifted functional.

    The functional is truncated at the grid horizon (by monotonicity the
    event "never crossed" is exactly "A(horizon) < threshold" up to the
    neglected tail).  Warns when the truncation bias bound exceeds the
    Monte Carlo standard error.
    """
    regime = drift_regime(params, spectral, case)
    if regime.vacuous:
        raise ValueError(f"vacuous bound: {regime.reason}")
    decay = regime.mu * regime.damping
    if grid is None:
        grid = SimGrid(dt=1e-3, horizon=suggest_horizon(regime.rho, decay, regime.threshold))
    tail = truncation_tail_bound(regime.rho, decay, grid.horizon)
    if not math.isfinite(tail):
        raise ValueError(
            "the drift does not dominate the noise variance; "
            "the truncated estimate would be biased by an unbounded tail"
        )
    t = grid.times
    n_below = 0
    for path_id in range(n_paths):
        w = sample_path(grid, dims=1, seed=seed, path_id=path_id).values[0]
        g = np.exp(regime.rho * w - decay * t)
        a_end = float(np.trapezoid(g, dx=grid.dt))
        if a_end < regime.threshold:
            n_below += 1
    p_hat = n_below / n_paths
    stderr = math.sqrt(p_hat * (1.0 - p_hat) / n_paths)
    if tail > max(stderr, 1e-300):
        warnings.warn(
            f"truncation tail bound {tail:.3g} exceeds the MC standard error "
            f"{stderr:.3g}; extend the horizon",
            stacklevel=2,
        )
    closed = blowup_probability_closed_form(params, spectral, case)
    return ProbabilityReport(
        closed_form=closed.prob_stay_bounded,
        mc_estimate=p_hat,
        mc_stderr=stderr,
        n_paths=n_paths,
        truncation_horizon=grid.horizon,
        tail_bound=tail,
        threshold=regime.threshold,
    )


def ks_distance(sample: np.ndarray, cdf) -> float:
    """One-sample Kolmogorov-Smirnov distance against a callable CDF."""
    xs = np.sort(np.asarray(sample, dtype=float))
    n = xs.size
    f = np.array([cdf(x) for x in xs])
    upper = np.max(np.arange(1, n + 1) / n - f)
    lower = np.max(f - np.arange(0, n) / n)
    return float(max(upper, lower))


@dataclass(frozen=True)
class YorReport:
    """Empirical check of the perpetuity law against Gamma(nu, 1).

    The simulated functionals T_i = int_0^T exp(2(W - nu t)) dt induce
    V_i = 1/(2 T_i), whose law should be Gamma(nu, 1); ks_distance is the
    one-sample KS statistic of that comparison.  mean_theory = 1/(2(nu-1))
    is the exact mean of the functional for nu > 1.
    """

    nu: float
    n_paths: int
    ks_distance: float
    mean_functional: float
    mean_theory: float
    mean_stderr: float
    tail_bound: float
    dt: float
    horizon: float


def yor_oracle(
    nu: float,
    n_paths: int,
    grid: SimGrid,
    seed: int = 0,
    zero_noise: bool = False,
) -> YorReport:
    """Simulate the perpetuity and compare with the gamma law.

    Requires nu > 1 and a horizon long enough that the expected neglected
    tail exp(-2(nu-1)T)/(2(nu-1)) is below 1e-4.
    """
    if nu <= 1.0:
        raise ValueError("nu must exceed 1 for the truncated mean to converge")
    tail = math.exp(-2.0 * (nu - 1.0) * grid.horizon) / (2.0 * (nu - 1.0))
    if tail >= 1e-4:
        raise ValueError(
            f"horizon {grid.horizon} leaves a tail bound {tail:.3g} >= 1e-4; extend it"
        )
    t = grid.times
    funcs = np.empty(n_paths)
    for path_id in range(n_paths):
        w = sample_path(grid, dims=1, seed=seed, path_id=path_id, zero_noise=zero_noise).values[0]
        g = np.exp(2.0 * (w - nu * t))
        funcs[path_id] = np.trapezoid(g, dx=grid.dt)
    v = 1.0 / (2.0 * funcs)
    ks = ks_distance(v, lambda x: reg_gamma_lower(nu, x))
    mean = float(np.mean(funcs))
    stderr = float(np.std(funcs, ddof=1) / math.sqrt(n_paths))
    return YorReport(
        nu=nu,
        n_paths=n_paths,
        ks_distance=ks,
        mean_functional=mean,
        mean_theory=1.0 / (2.0 * (nu - 1.0)),
        mean_stderr=stderr,
        tail_bound=tail,
        dt=grid.dt,
        horizon=grid.horizon,
    )


@dataclass(frozen=True)
class NoiseComparisonInputs:
    """Scalars feeding the one- vs two-noise ordering predicate."""

    rho1: float
    rho2: float
    l1: float
    l2: float
    lam: float
    beta: float
    gamma: float
    eps0: float
    e0: float
    c3: float


@dataclass(frozen=True)
class Hypothesis:
    name: str
    holds: bool


@dataclass(frozen=True)
class NoiseComparisonReport:
    """Derived constants, itemized hypotheses, and the two gamma tails.

    ordering_certified is True only when every hypothesis holds; the two
    never-blow-up probabilities p1_inf/p2_inf (single noise and double
    noise) are reported either way.
    """

    gamma_bar: float
    k3: float
    alpha1: float
    alpha2: float
    delta1: float
    delta2: float
    big_lambda: float
    witness_level: float
    hypotheses: tuple[Hypothesis, ...]
    ordering_certified: bool
    p1_inf: float
    p2_inf: float

    @property
    def p1_finite(self) -> float:
        return 1.0 - self.p1_inf

    @property
    def p2_finite(self) -> float:
        return 1.0 - self.p2_inf


# Grid over which a positive witness x0 is sought for the last hypothesis.
_X0_GRID = np.logspace(-6.0, 6.0, 97)


def compare_noise_predicate(inputs: NoiseComparisonInputs) -> NoiseComparisonReport:
    """Evaluate the hypotheses under which one noise blows up more often.

    The certified conclusion, when all hypotheses hold, is that the
    single-noise system has a strictly larger finite-blow-up probability
    than the two-noise system.  The witness hypothesis is resolved over a
    log grid of candidate levels in [1e-6, 1e6].
    """
    r1sq = inputs.rho1 ** 2
    r2sq = inputs.rho2 ** 2
    gam = inputs.gamma
    gamma_bar = r2sq / (r1sq * (r1sq + r2sq))
    k3 = 2.0 * (inputs.l1 * r2sq - inputs.l2 * r1sq) * gam / (r1sq * (r1sq + r2sq))
    alpha1 = 2.0 * (inputs.lam + inputs.l1) * gam / r1sq
    alpha2 = 2.0 * (inputs.lam + inputs.l1 + inputs.l2) * gam / (r1sq + r2sq)
    delta1 = r1sq
    delta2 = r1sq + r2sq
    big_lambda = math.exp(
        math.lgamma(alpha2 + 1.0)
        + (alpha2 + 1.0) * math.log(delta2)
        - math.lgamma(alpha1 + 1.0)
        - (alpha1 + 1.0) * math.log(delta1)
    )

    h1 = inputs.l2 * r1sq - inputs.l1 * r2sq < inputs.lam * r2sq
    expo = 2.0 * inputs.lam * gam * gamma_bar + k3
    base = 2.0 * inputs.lam * gam + k3 / gamma_bar
    h2 = base > 0.0 and math.exp(expo) < big_lambda * base ** expo
    eps_cap = (inputs.e0 ** (1.0 + gam) / inputs.c3) ** (
        (inputs.beta - gam) / (gam + 1.0)
    )
    h3 = 0.0 < inputs.eps0 < eps_cap
    level = gam * (
        inputs.eps0 * inputs.e0 ** gam
        - inputs.c3 * inputs.eps0 ** ((1.0 + inputs.beta) / (inputs.beta - gam)) / inputs.e0
    )
    h4 = bool(np.any(level > _X0_GRID))

    hypotheses = (
        Hypothesis("noise_balance", bool(h1)),
        Hypothesis("gamma_tail_ratio", bool(h2)),
        Hypothesis("eps0_window", bool(h3)),
        Hypothesis("positive_witness", h4),
    )
    w = 2.0 * level
    p1 = reg_gamma_upper(alpha1 + 1.0, max(w, 0.0) / delta1)
    p2 = reg_gamma_upper(alpha2 + 1.0, max(w, 0.0) / delta2)
    return NoiseComparisonReport(
        gamma_bar=gamma_bar,
        k3=k3,
        alpha1=alpha1,
        alpha2=alpha2,
        delta1=delta1,
        delta2=delta2,
        big_lambda=big_lambda,
        witness_level=level,
        hypotheses=hypotheses,
        ordering_certified=all(h.holds for h in hypotheses),
        p1_inf=p1,
        p2_inf=p2,
    )


def noise_comparison_inputs(
    params: ModelParams2D, spectral: SpectralData
) -> NoiseComparisonInputs:
    """Derive the predicate scalars from two-noise parameters.

    Requires the two-level exponent pattern and column-degenerate
    consistency (the two equations share the same weight per noise
    component).
    """
    case = classify_case(params)
    if case.variant != "two_level":
        raise ValueError("the noise comparison is stated for the two-level case")
    # The shared-weight identification: both equations carry the same
    # exponential weight per noise component, i.e. the self weights satisfy
    # m*k1j = q*k2j.  (The four cross identities cannot hold simultaneously
    # with this identification when the exponent levels differ.)
    if params.k12 == 0.0:
        raise ValueError(
            "the comparison scalars describe the two-noise system; "
            "the second noise column must be nonzero"
        )
    rho1 = params.m * params.k11
    rho2 = params.m * params.k12
    if not _close(rho1, params.q * params.k21, rtol=1e-9):
        raise ValueError(
            "the comparison requires the shared weight m*k11 = q*k21 per component"
        )
    if not _close(rho2, params.q * params.k22, rtol=1e-9):
        raise ValueError(
            "the comparison requires the shared weight m*k12 = q*k22 per component"
        )
    eps = check_epsilon_conditions(params, spectral)
    masses = initial_mass(params, spectral)
    return NoiseComparisonInputs(
        rho1=rho1,
        rho2=rho2,
        l1=0.5 * (params.k11 ** 2 + params.k21 ** 2),
        l2=0.5 * (params.k12 ** 2 + params.k22 ** 2),
        lam=spectral.lam,
        beta=case.beta,
        gamma=case.gamma,
        eps0=eps.eps0,
        e0=masses.e0,
        c3=eps.constants["D3"],
    )


def _close(a, b, rtol=1e-12):
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)
