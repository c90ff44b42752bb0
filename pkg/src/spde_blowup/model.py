"""Run parameters, exponent-case classification, and structural conditions.

The coupled system carries four positive exponents (m, n, p, q), per-equation
noise intensities, and eigenfunction initial data f_i = c_i psi.  Three
exponent patterns admit closed-form upper bounds:

    equal_exponents   m = n = p = q
    two_level         m = p = beta, n = q = gamma, beta > gamma
    strict_chain      m > n > p > q

everything else is "general" (only the lower-bound constructions apply).

The noise-consistency identities

    (1+m) k1 - k1 = (1+n) k2 - k1 =: rho1
    (1+p) k1 - k2 = (1+q) k2 - k2 =: rho2

collapse the four exponential weights of the comparison ODE to two; when
they fail (within rounding) the general four-functional bounds are used
instead.  Checking them is an algebraic identity on user inputs, so only
relative rounding noise (1e-12) is tolerated.

The Young-inequality constants

    D(hi, lo) = (hi - lo)/(1 + hi) * ((1 + hi)/(1 + lo))^((1 + lo)/(hi - lo))

and the derived eps0 gate the upper bounds; both inequalities of the
growth-rate condition must hold before a finite upper bound is claimed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .spectral import DomainSpec, SpectralData, initial_mass

__all__ = [
    "ModelParams",
    "ModelParams2D",
    "CaseTag",
    "RhoConditions",
    "RhoConditions2D",
    "EpsilonReport",
    "classify_case",
    "check_rho_conditions",
    "check_rho_conditions_2d",
    "check_epsilon_conditions",
    "young_constant",
]

RHO_RTOL = 1e-12


def _require_positive(name, value):
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be positive and finite, got {value}")


def _check_exponents(m, n, p, q):
    for name, v in (("m", m), ("n", n), ("p", p), ("q", q)):
        _require_positive(name, v)
    ordered = m >= n >= p >= q
    two_level = (m == p) and (n == q) and (m > n)
    # The two-level pattern (m = p > n = q) breaks the m >= n >= p >= q
    # chain yet is an explicitly supported case, so it is admitted alongside
    # the ordered chain.
    if not (ordered or two_level):
        raise ValueError(
            "exponents must satisfy m >= n >= p >= q > 0 "
            "or the two-level pattern m = p > n = q > 0"
        )


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the one-noise system; single source of truth for a run.

    The potentials V_i are never user-supplied: the bound machinery fixes
    V_i = lambda + k_i^2/2, and the blow-up probability machinery uses
    V_i = 0 with damping mu = lambda + (k1^2 + k2^2)/2.  lambda_override,
    when set, replaces the domain eigenvalue in that damping rate.
    """

    m: float
    n: float
    p: float
    q: float
    k1: float
    k2: float
    C1: float
    C2: float
    domain: DomainSpec
    lambda_override: float | None = None

    def __post_init__(self):
        _check_exponents(self.m, self.n, self.p, self.q)
        if self.k1 == 0.0 or self.k2 == 0.0:
            raise ValueError("noise intensities k1, k2 must be nonzero")
        _require_positive("C1", self.C1)
        _require_positive("C2", self.C2)
        if self.lambda_override is not None and self.lambda_override < 0.0:
            raise ValueError("lambda_override must be nonnegative")


@dataclass(frozen=True)
class ModelParams2D:
    """Parameters of the two-noise system with coupling weights C_ij.

    k12 = k22 = 0 is the one retained degeneracy (the single-noise
    comparison); every other intensity must be nonzero.
    """

    m: float
    n: float
    p: float
    q: float
    k11: float
    k12: float
    k21: float
    k22: float
    C11: float
    C12: float
    C21: float
    C22: float
    M1: float
    M2: float
    domain: DomainSpec

    def __post_init__(self):
        _check_exponents(self.m, self.n, self.p, self.q)
        if self.k11 == 0.0 or self.k21 == 0.0:
            raise ValueError("noise intensities k11, k21 must be nonzero")
        second_col_zero = self.k12 == 0.0 and self.k22 == 0.0
        if (self.k12 == 0.0 or self.k22 == 0.0) and not second_col_zero:
            raise ValueError(
                "k12 and k22 may only vanish together (single-noise comparison)"
            )
        for name in ("C11", "C12", "C21", "C22", "M1", "M2"):
            _require_positive(name, getattr(self, name))

    @property
    def eta1(self) -> float:
        return max(self.C11, self.C12)

    @property
    def eta2(self) -> float:
        return max(self.C21, self.C22)

    @property
    def sigma1(self) -> float:
        return min(self.C11, self.C12)

    @property
    def sigma2(self) -> float:
        return min(self.C21, self.C22)


@dataclass(frozen=True)
class CaseTag:
    """Which closed-form regime the exponents fall in.

    variant is one of "equal_exponents", "two_level", "strict_chain",
    "general"; beta/gamma are populated for two_level only.
    """

    variant: str
    beta: float | None = None
    gamma: float | None = None


def classify_case(params) -> CaseTag:
    """Classify the exponent pattern; exhaustive and mutually exclusive.

    Comparison is exact on the user-supplied floats: the user declares the
    case through the inputs, and near-equal exponents are never silently
    reclassified.
    """
    m, n, p, q = params.m, params.n, params.p, params.q
    if m == n == p == q:
        return CaseTag("equal_exponents")
    if m == p and n == q and m > n:
        return CaseTag("two_level", beta=m, gamma=n)
    if m > n > p > q:
        return CaseTag("strict_chain")
    return CaseTag("general")


@dataclass(frozen=True)
class RhoConditions:
    """Outcome of the two noise-consistency identities.

    rho1 and rho2 always carry the canonical expressions m*k1 and
    (1+p)*k1 - k2; they are meaningful as shared weights only when
    consistent is True.  mismatch1/2 are the absolute discrepancies of the
    two identities (zero when consistent), so a failing check doubles as a
    violation report.
    """

    consistent: bool
    rho1: float
    rho2: float
    mismatch1: float
    mismatch2: float


def _matches(lhs, rhs, rtol=RHO_RTOL):
    return abs(lhs - rhs) <= rtol * max(abs(lhs), abs(rhs))


def check_rho_conditions(params: ModelParams, rtol: float = RHO_RTOL) -> RhoConditions:
    """Check the two defining identities for rho1, rho2 to relative rtol."""
    m, n, p, q = params.m, params.n, params.p, params.q
    k1, k2 = params.k1, params.k2
    lhs1 = (1.0 + m) * k1 - k1
    rhs1 = (1.0 + n) * k2 - k1
    lhs2 = (1.0 + p) * k1 - k2
    rhs2 = (1.0 + q) * k2 - k2
    ok = _matches(lhs1, rhs1, rtol) and _matches(lhs2, rhs2, rtol)
    return RhoConditions(
        consistent=ok,
        rho1=m * k1,
        rho2=(1.0 + p) * k1 - k2,
        mismatch1=abs(lhs1 - rhs1),
        mismatch2=abs(lhs2 - rhs2),
    )


@dataclass(frozen=True)
class RhoConditions2D:
    """Two-noise analogue: four identities, one weight per (equation, noise)."""

    consistent: bool
    rho11: float
    rho12: float
    rho21: float
    rho22: float
    mismatches: tuple[float, float, float, float]


def check_rho_conditions_2d(
    params: ModelParams2D, rtol: float = RHO_RTOL
) -> RhoConditions2D:
    m, n, p, q = params.m, params.n, params.p, params.q
    pairs = (
        (m * params.k11, (1.0 + n) * params.k21 - params.k11),
        (m * params.k12, (1.0 + n) * params.k22 - params.k12),
        (q * params.k21, (1.0 + p) * params.k11 - params.k21),
        (q * params.k22, (1.0 + p) * params.k12 - params.k22),
    )
    mism = tuple(abs(a - b) for a, b in pairs)
    ok = all(_matches(a, b, rtol) for a, b in pairs)
    return RhoConditions2D(
        consistent=ok,
        rho11=m * params.k11,
        rho12=m * params.k12,
        rho21=(1.0 + p) * params.k11 - params.k21,
        rho22=(1.0 + p) * params.k12 - params.k22,
        mismatches=mism,
    )


def young_constant(hi: float, lo: float) -> float:
    """Young-inequality constant for splitting a power hi above a power lo."""
    if not hi > lo > 0.0:
        raise ValueError("young_constant requires hi > lo > 0")
    return ((hi - lo) / (1.0 + hi)) * ((1.0 + hi) / (1.0 + lo)) ** (
        (1.0 + lo) / (hi - lo)
    )


@dataclass(frozen=True)
class EpsilonReport:
    """eps0, its Young constants, and every gating inequality.

    conditions maps a condition name to its boolean outcome; all_hold is
    their conjunction.  "mass_sufficient" is the simpler sufficient
    condition min_i h_i(0) > max_k D_k^(1/(1+exponent)); when it holds the
    growth-rate inequalities follow.
    """

    case: CaseTag
    eps0: float
    constants: dict = field(default_factory=dict)
    conditions: dict = field(default_factory=dict)

    @property
    def all_hold(self) -> bool:
        growth = [v for k, v in self.conditions.items() if k.startswith("growth")]
        return all(growth)


def _epsilon_two_level(beta, gamma, h1_0, h2_0, e0) -> EpsilonReport:
    d3 = young_constant(beta, gamma)
    eps0 = min(
        1.0,
        (h1_0 / d3 ** (1.0 / (1.0 + gamma))) ** (beta - gamma),
        (2.0 ** -(1.0 + gamma) * e0 ** (1.0 + gamma) / d3) ** ((beta - gamma) / (1.0 + beta)),
    )
    growth = (
        2.0 ** -(1.0 + gamma) * eps0 * e0 ** (1.0 + gamma)
        >= eps0 ** ((1.0 + beta) / (beta - gamma)) * d3
    )
    mass = min(h1_0, h2_0) > d3 ** (1.0 / (1.0 + gamma))
    return EpsilonReport(
        case=CaseTag("two_level", beta=beta, gamma=gamma),
        eps0=eps0,
        constants={"D3": d3, "h1_0": h1_0, "E0": e0},
        conditions={"growth_rate": growth, "mass_sufficient": mass},
    )


def _epsilon_strict_chain(m, n, p, q, h1_0, h2_0, e0) -> EpsilonReport:
    d1 = young_constant(m, n)
    d2 = young_constant(p, q)
    eps0 = min(
        1.0,
        (h1_0 / d1 ** (1.0 / (1.0 + n))) ** (m - n),
        (2.0 ** -(1.0 + n) * e0 ** (1.0 + n) / d1) ** ((m - n) / (1.0 + m)),
        (h1_0 / d2 ** (1.0 / (1.0 + q))) ** (p - q),
        (2.0 ** -(1.0 + q) * e0 ** (1.0 + q) / d2) ** ((p - q) / (1.0 + p)),
    )
    growth1 = (
        2.0 ** -(1.0 + n) * eps0 * e0 ** (1.0 + n)
        >= eps0 ** ((1.0 + m) / (m - n)) * d1
    )
    growth2 = (
        2.0 ** -(1.0 + q) * eps0 * e0 ** (1.0 + q)
        >= eps0 ** ((1.0 + p) / (p - q)) * d2
    )
    mass = min(h1_0, h2_0) > max(d1 ** (1.0 / (1.0 + n)), d2 ** (1.0 / (1.0 + q)))
    return EpsilonReport(
        case=CaseTag("strict_chain"),
        eps0=eps0,
        constants={"D1": d1, "D2": d2, "h1_0": h1_0, "E0": e0},
        conditions={
            "growth_rate_1": growth1,
            "growth_rate_2": growth2,
            "mass_sufficient": mass,
        },
    )


def check_epsilon_conditions(params, spectral: SpectralData) -> EpsilonReport:
    """Evaluate eps0 and the upper-bound gating conditions for the case.

    Only the two_level and strict_chain cases carry eps0 machinery; other
    cases raise ValueError.  Accepts both one- and two-noise parameter sets
    (the constants depend only on exponents and initial masses).
    """
    case = classify_case(params)
    masses = initial_mass(params, spectral)
    if case.variant == "two_level":
        return _epsilon_two_level(case.beta, case.gamma, masses.h1_0, masses.h2_0, masses.e0)
    if case.variant == "strict_chain":
        return _epsilon_strict_chain(
            params.m, params.n, params.p, params.q, masses.h1_0, masses.h2_0, masses.e0
        )
    raise ValueError(f"eps0 conditions are defined only for two_level/strict_chain, not {case.variant}")
