"""Closed-form crossing thresholds bracketing the blow-up time.

Lower bounds.  With consistent noise weights (rho1, rho2) the blow-up time
is bounded below by the first time either of the two plain exponential
functionals reaches

    theta_min = min(T1, T2),
    T1 = 1 / ((m+n+1) (C1^m s^m + C1^n s^n)),
    T2 = 1 / ((p+q+1) (C2^p s^p + C2^q s^q)),       s = sup|psi|.

Without consistency, four functionals (weights m k1, (1+n)k2 - k1,
(1+p)k1 - k2, q k2) are monitored against T1, T1, T2, T2 with "or"
semantics.

Upper bounds.  Each exponent case yields one crossing level for a single
or min-combined exponential functional; the bracketed growth rate must be
positive, otherwise no finite upper bound is claimed and the computation
reports "unavailable" rather than guessing.  In the strict-chain case the
statement-level rate eps0/2^n is used by default; the tighter rate
(2^-(1+n) + 2^-(1+q)) eps0 that the comparison argument actually yields is
available behind tight_rate=True.

E(0) always comes from the psi-weighted initial masses, never from the raw
multipliers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .functionals import FunctionalSpec, Term, accumulate, first_crossing, multi_crossing
from .model import (
    ModelParams,
    ModelParams2D,
    CaseTag,
    classify_case,
    check_epsilon_conditions,
    check_rho_conditions,
    check_rho_conditions_2d,
)
from .paths import BrownianPath
from .spectral import SpectralData, initial_mass

__all__ = [
    "UpperBoundUnavailable",
    "ThresholdSet",
    "lower_thresholds",
    "upper_threshold",
    "lower_thresholds_2d",
    "upper_threshold_2d",
    "threshold_set",
    "threshold_constants",
    "global_solution_check",
]


class UpperBoundUnavailable(RuntimeError):
    """No finite upper bound is claimed for these parameters."""


def _single(coef: float) -> FunctionalSpec:
    return FunctionalSpec(terms=(Term(coeffs=(coef,)),), combine="single")


def _min_combine(*coefs) -> FunctionalSpec:
    terms = tuple(Term(coeffs=c if isinstance(c, tuple) else (c,)) for c in coefs)
    return FunctionalSpec(terms=terms, combine="min")


def _max_combine(*coefs) -> FunctionalSpec:
    terms = tuple(Term(coeffs=c if isinstance(c, tuple) else (c,)) for c in coefs)
    return FunctionalSpec(terms=terms, combine="max")


def _denominators(params: ModelParams, spectral: SpectralData) -> tuple[float, float]:
    s = spectral.sup_norm
    m, n, p, q = params.m, params.n, params.p, params.q
    d1 = (m + n + 1.0) * (params.C1 ** m * s ** m + params.C1 ** n * s ** n)
    d2 = (p + q + 1.0) * (params.C2 ** p * s ** p + params.C2 ** q * s ** q)
    if not (math.isfinite(d1) and math.isfinite(d2) and d1 > 0.0 and d2 > 0.0):
        raise ValueError("threshold denominators must be positive and finite")
    return 1.0 / d1, 1.0 / d2


def general_weights(params: ModelParams) -> tuple[float, float, float, float]:
    """The four exponential weights of the uncoupled comparison system."""
    m, n, p, q = params.m, params.n, params.p, params.q
    k1, k2 = params.k1, params.k2
    return (
        m * k1,
        (1.0 + n) * k2 - k1,
        (1.0 + p) * k1 - k2,
        q * k2,
    )


def lower_thresholds(
    params: ModelParams, spectral: SpectralData
) -> tuple[tuple[FunctionalSpec, float], ...]:
    """(FunctionalSpec, threshold) pairs whose earliest crossing lower-bounds tau.

    Routes automatically: the two-functional min-threshold form when the
    noise-consistency identities hold, else the four-functional form.
    """
    t1, t2 = _denominators(params, spectral)
    rho = check_rho_conditions(params)
    if rho.consistent:
        theta = min(t1, t2)
        return (
            (_single(rho.rho1), theta),
            (_single(rho.rho2), theta),
        )
    a1, a2, a3, a4 = general_weights(params)
    return (
        (_single(a1), t1),
        (_single(a2), t1),
        (_single(a3), t2),
        (_single(a4), t2),
    )


def corollary_prime_pair(
    params: ModelParams, spectral: SpectralData
) -> tuple[FunctionalSpec, float]:
    """Max-combined functional against min(T1, T2); crosses no later than
    the four-functional lower bound on every path."""
    t1, t2 = _denominators(params, spectral)
    return _max_combine(*general_weights(params)), min(t1, t2)


def upper_threshold(
    params: ModelParams,
    spectral: SpectralData,
    case: CaseTag | None = None,
    tight_rate: bool = False,
) -> tuple[FunctionalSpec, float]:
    """(FunctionalSpec, threshold) whose crossing upper-bounds tau.

    With consistent noise weights the functional is exp(rho W) (equal
    exponents) or the min of the two rho-weighted exponentials; otherwise
    the min runs over all four general weights.  Raises
    UpperBoundUnavailable when the growth-rate condition fails or the
    exponent pattern is general.
    """
    case = classify_case(params) if case is None else case
    if case.variant == "general":
        raise UpperBoundUnavailable(
            "no closed-form upper bound exists for the general exponent pattern"
        )
    masses = initial_mass(params, spectral)
    e0 = masses.e0
    if e0 <= 0.0:
        raise ValueError("E(0) must be positive")
    rho = check_rho_conditions(params)
    if rho.consistent:
        if case.variant == "equal_exponents":
            spec = _single(rho.rho1)
        else:
            spec = _min_combine(rho.rho1, rho.rho2)
    else:
        spec = _min_combine(*general_weights(params))

    if case.variant == "equal_exponents":
        m = params.m
        return spec, 2.0 ** m / (m * e0 ** m)

    eps = check_epsilon_conditions(params, spectral)
    if case.variant == "two_level":
        beta, gam = params.m, params.n
        d3 = eps.constants["D3"]
        rate = eps.eps0 / 2.0 ** (1.0 + gam) - eps.eps0 ** (
            (1.0 + beta) / (beta - gam)
        ) * d3 / e0 ** (1.0 + gam)
        if rate <= 0.0:
            raise UpperBoundUnavailable(
                "upper bound unavailable: the two-level growth-rate condition fails"
            )
        return spec, 1.0 / (gam * e0 ** gam * rate)

    m, n, p, q = params.m, params.n, params.p, params.q
    d1, d2 = eps.constants["D1"], eps.constants["D2"]
    base = (2.0 ** -(1.0 + n) + 2.0 ** -(1.0 + q)) if tight_rate else 2.0 ** -n
    rate = base * eps.eps0 - (
        eps.eps0 ** ((1.0 + m) / (m - n)) * d1
        + eps.eps0 ** ((1.0 + p) / (p - q)) * d2
    ) / e0 ** (1.0 + q)
    if rate <= 0.0:
        raise UpperBoundUnavailable(
            "upper bound unavailable: the strict-chain growth-rate condition fails"
        )
    return spec, 1.0 / (q * e0 ** q * rate)


def _denominators_2d(params: ModelParams2D, spectral: SpectralData):
    s = spectral.sup_norm
    m, n, p, q = params.m, params.n, params.p, params.q
    d1 = params.eta1 * (m + n + 1.0) * (params.M1 ** m * s ** m + params.M1 ** n * s ** n)
    d2_sym = params.eta2 * (p + q + 1.0) * (params.M2 ** p * s ** p + params.M2 ** q * s ** q)
    # As printed, the second denominator carries s**(q-1) in its last factor;
    # the symmetric s**q variant is the default and the printed one is
    # reported alongside for inspection.
    d2_printed = params.eta2 * (p + q + 1.0) * (
        params.M2 ** p * s ** p + params.M2 ** q * s ** (q - 1.0)
    )
    return 1.0 / d1, 1.0 / d2_sym, 1.0 / d2_printed


def lower_thresholds_2d(
    params: ModelParams2D, spectral: SpectralData, printed_variant: bool = False
) -> tuple[tuple[FunctionalSpec, float], ...]:
    """Two-noise lower-bound pairs: both mixed exponentials against the
    minimum of the weighted denominators."""
    rho = check_rho_conditions_2d(params)
    if not rho.consistent:
        raise ValueError(
            "two-noise consistency identities fail; no lower-bound form applies"
        )
    t1, t2_sym, t2_printed = _denominators_2d(params, spectral)
    theta = min(t1, t2_printed if printed_variant else t2_sym)
    spec_a = FunctionalSpec(terms=(Term(coeffs=(rho.rho11, rho.rho12)),), combine="single")
    spec_b = FunctionalSpec(terms=(Term(coeffs=(rho.rho21, rho.rho22)),), combine="single")
    return ((spec_a, theta), (spec_b, theta))


def upper_threshold_2d(
    params: ModelParams2D,
    spectral: SpectralData,
    case: CaseTag | None = None,
) -> tuple[FunctionalSpec, float]:
    """Two-noise upper bound per exponent case.

    Equal exponents need all four weights to coincide; the two-level case
    min-combines the per-component exponentials; the strict chain
    min-combines all four (component, weight) exponentials with the
    sigma-weighted rate.
    """
    case = classify_case(params) if case is None else case
    if case.variant == "general":
        raise UpperBoundUnavailable(
            "no closed-form upper bound exists for the general exponent pattern"
        )
    rho = check_rho_conditions_2d(params)
    if not rho.consistent:
        raise ValueError("two-noise consistency identities fail")
    masses = initial_mass(params, spectral)
    e0 = masses.e0
    sig = params.sigma1 + params.sigma2

    if case.variant == "equal_exponents":
        weights = (rho.rho11, rho.rho12, rho.rho21, rho.rho22)
        if max(weights) - min(weights) > 1e-12 * max(abs(w) for w in weights):
            raise ValueError("equal-exponent case requires a single shared weight")
        m = params.m
        spec = FunctionalSpec(
            terms=(Term(coeffs=(rho.rho11, rho.rho12)),), combine="single"
        )
        return spec, 2.0 ** (1.0 + m) / (m * sig) * e0 ** -m

    eps = check_epsilon_conditions(params, spectral)
    if case.variant == "two_level":
        if not (_near(rho.rho11, rho.rho21) and _near(rho.rho12, rho.rho22)):
            raise ValueError(
                "two-level case requires shared per-component weights"
            )
        beta, gam = params.m, params.n
        c3 = eps.constants["D3"]
        rate = eps.eps0 / 2.0 ** (1.0 + gam) - eps.eps0 ** (
            (1.0 + beta) / (beta - gam)
        ) * c3 / e0 ** (1.0 + gam)
        if rate <= 0.0:
            raise UpperBoundUnavailable(
                "upper bound unavailable: the two-level growth-rate condition fails"
            )
        spec = _min_combine((rho.rho11, 0.0), (0.0, rho.rho12))
        return spec, 1.0 / (sig * gam * e0 ** gam * rate)

    m, n, p, q = params.m, params.n, params.p, params.q
    c1, c2 = eps.constants["D1"], eps.constants["D2"]
    rate = sig * eps.eps0 / 2.0 ** n - (
        params.sigma1 * eps.eps0 ** ((1.0 + m) / (m - n)) * c1
        + params.sigma2 * eps.eps0 ** ((1.0 + p) / (p - q)) * c2
    ) / e0 ** (1.0 + q)
    if rate <= 0.0:
        raise UpperBoundUnavailable(
            "upper bound unavailable: the strict-chain growth-rate condition fails"
        )
    spec = _min_combine(
        (rho.rho11, 0.0), (0.0, rho.rho12), (rho.rho21, 0.0), (0.0, rho.rho22)
    )
    return spec, 1.0 / (q * e0 ** q * rate)


def _near(a, b, rtol=1e-12):
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


@dataclass(frozen=True)
class ThresholdSet:
    """Lower pairs, optional upper pair, and the named constants of a run."""

    lower: tuple[tuple[FunctionalSpec, float], ...]
    upper: tuple[FunctionalSpec, float] | None
    constants: dict
    upper_unavailable_reason: str | None = None


def threshold_constants(
    params: ModelParams,
    spectral: SpectralData,
    tight_rate: bool = False,
) -> dict:
    """Reporting map with the fixed key set used by the command line."""
    case = classify_case(params)
    rho = check_rho_conditions(params)
    masses = initial_mass(params, spectral)
    t1, t2 = _denominators(params, spectral)
    out = {
        "rho1": rho.rho1 if rho.consistent else None,
        "rho2": rho.rho2 if rho.consistent else None,
        "D1": None,
        "D2": None,
        "D3": None,
        "eps0": None,
        "E0": masses.e0,
        "T1": t1,
        "T2": t2,
        "theta_lower": min(t1, t2),
        "theta_upper": None,
        "case": case.variant,
    }
    if case.variant in ("two_level", "strict_chain"):
        eps = check_epsilon_conditions(params, spectral)
        out["eps0"] = eps.eps0
        out["D1"] = eps.constants.get("D1")
        out["D2"] = eps.constants.get("D2")
        out["D3"] = eps.constants.get("D3")
    try:
        _, theta_upper = upper_threshold(params, spectral, case, tight_rate)
        out["theta_upper"] = theta_upper
    except UpperBoundUnavailable:
        pass
    return out


def threshold_set(
    params: ModelParams,
    spectral: SpectralData,
    tight_rate: bool = False,
) -> ThresholdSet:
    """Assemble lower pairs, the upper pair when available, and constants."""
    lower = lower_thresholds(params, spectral)
    constants = threshold_constants(params, spectral, tight_rate)
    upper = None
    reason = None
    try:
        upper = upper_threshold(params, spectral, tight_rate=tight_rate)
    except UpperBoundUnavailable as exc:
        reason = str(exc)
    return ThresholdSet(
        lower=lower, upper=upper, constants=constants, upper_unavailable_reason=reason
    )


def global_solution_check(
    params: ModelParams, spectral: SpectralData, path: BrownianPath
) -> bool:
    """True when no blow-up is certified on this path within its horizon.

    Checks, for each subsystem, that the accumulated matching exponential
    functional stays strictly below T_i at the horizon.  Under consistent
    noise weights the matching functional is exp(rho_i W); otherwise the
    pointwise max of the two weights feeding subsystem i is used, which is
    the conservative reading (and reduces to the former when the weights
    coincide).  An overflowed accumulation always fails the check.
    """
    t1, t2 = _denominators(params, spectral)
    rho = check_rho_conditions(params)
    if rho.consistent:
        spec1 = _single(rho.rho1)
        spec2 = _single(rho.rho2)
    else:
        a1, a2, a3, a4 = general_weights(params)
        spec1 = _max_combine(a1, a2)
        spec2 = _max_combine(a3, a4)
    for spec, level in ((spec1, t1), (spec2, t2)):
        acc = accumulate(path, spec)
        if acc.overflowed:
            return False
        if first_crossing(acc, level).crossed:
            return False
    return True
