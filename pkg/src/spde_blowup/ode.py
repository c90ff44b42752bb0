"""Pathwise integration of the comparison ODE systems to empirical blow-up.

The weighted solution masses (h1, h2) of the transformed system obey a
coupled random ODE driven by exponentials of the Brownian path:

    h1' = -r h1 + exp(g1(t)) h1^(1+e1) + exp(g2(t)) h2^(1+e2)
    h2' = -r h2 + exp(g3(t)) h1^(1+e3) + exp(g4(t)) h2^(1+e4)

with g_i(t) linear in the path components.  All four supported variants are
instances of this template:

    plain        r = 0,   g = (rho1, rho1, rho2, rho2) W,   e = (m, n, p, q)
    general_k    r = 0,   g = four general weights W,       e = (m, n, p, q)
    damped       r = mu,  otherwise as plain
    damped_2d    r = lambda + l1 + l2, all g = rho1 W1 + rho2 W2,
                 e = (beta, gamma, beta, gamma)

Integration is classical RK4 on the path grid with step halving near
growth; the path is piecewise-linearly interpolated inside refined
sub-steps (a Brownian bridge would change results at O(sqrt(dt)), below the
comparison tolerances, and would break bitwise reproducibility across
refinement levels).  Once a component exceeds 1e6 the state switches to log
coordinates, which delays overflow and sharpens the blow-up estimate.
Blow-up is declared when E = h1 + h2 first exceeds blowup_cap, reported at
the first grid node after exceedance; if the sub-step underflows
(dt * 2^-20) without resolving the growth, blow-up is reported at the
current time with a step_exhausted note.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import threshold_set, general_weights
from .functionals import accumulate, first_crossing, multi_crossing
from .model import ModelParams, ModelParams2D, check_rho_conditions
from .paths import BrownianPath
from .spectral import SpectralData, initial_mass

try:  # pragma: no cover - exercised implicitly
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap


__all__ = [
    "OdeSystemKind",
    "BlowupResult",
    "SandwichReport",
    "integrate",
    "sandwich_check",
    "BLOWUP_CAP",
]

BLOWUP_CAP = 1e12
LOG_SWITCH = 1e6
_EXP_GUARD = 700.0
_MIN_SUB_FRACTION = 2.0 ** -20

BLEW_UP = "blew_up"
SURVIVED = "survived"


@dataclass(frozen=True)
class OdeSystemKind:
    """Which comparison system to integrate; damping carries the linear
    decay rate for the damped variants (mu, or lambda + l1 + l2)."""

    variant: str
    damping: float = 0.0

    def __post_init__(self):
        if self.variant not in ("plain", "general_k", "damped", "damped_2d"):
            raise ValueError(f"unknown ODE variant {self.variant!r}")
        if self.variant in ("plain", "general_k") and self.damping != 0.0:
            raise ValueError(f"{self.variant} takes no damping")


@dataclass(frozen=True)
class BlowupResult:
    """Numerical surrogate for explosion of the comparison system.

    status is "blew_up" or "survived"; time is the blow-up estimate or the
    horizon; peak is the largest E = h1 + h2 reached.  note is
    "step_exhausted" when the adaptive step underflowed.
    """

    status: str
    time: float
    peak: float
    note: str | None = None

    @property
    def blew_up(self) -> bool:
        return self.status == BLEW_UP

    @property
    def time_or_inf(self) -> float:
        return self.time if self.blew_up else np.inf


@njit(cache=True)
def _rhs(a, b, wv1, wv2, damping, cw1, cw2, expo, logmode):
    g1 = cw1[0] * wv1 + cw2[0] * wv2
    g2 = cw1[1] * wv1 + cw2[1] * wv2
    g3 = cw1[2] * wv1 + cw2[2] * wv2
    g4 = cw1[3] * wv1 + cw2[3] * wv2
    if logmode:
        a1 = g1 + expo[0] * a
        a2 = g2 + (1.0 + expo[1]) * b - a
        a3 = g3 + (1.0 + expo[2]) * a - b
        a4 = g4 + expo[3] * b
        if a1 > _EXP_GUARD:
            a1 = _EXP_GUARD
        if a2 > _EXP_GUARD:
            a2 = _EXP_GUARD
        if a3 > _EXP_GUARD:
            a3 = _EXP_GUARD
        if a4 > _EXP_GUARD:
            a4 = _EXP_GUARD
        d1 = -damping + math.exp(a1) + math.exp(a2)
        d2 = -damping + math.exp(a3) + math.exp(a4)
        return d1, d2
    if a <= 0.0 or b <= 0.0:
        return math.nan, math.nan
    if g1 > _EXP_GUARD:
        g1 = _EXP_GUARD
    if g2 > _EXP_GUARD:
        g2 = _EXP_GUARD
    if g3 > _EXP_GUARD:
        g3 = _EXP_GUARD
    if g4 > _EXP_GUARD:
        g4 = _EXP_GUARD
    d1 = -damping * a + math.exp(g1) * a ** (1.0 + expo[0]) + math.exp(g2) * b ** (1.0 + expo[1])
    d2 = -damping * b + math.exp(g3) * a ** (1.0 + expo[2]) + math.exp(g4) * b ** (1.0 + expo[3])
    return d1, d2


@njit(cache=True)
def _state_mass(a, b, logmode):
    if logmode:
        ea = a if a < _EXP_GUARD else _EXP_GUARD
        eb = b if b < _EXP_GUARD else _EXP_GUARD
        return math.exp(ea) + math.exp(eb)
    return a + b


@njit(cache=True)
def _blowup_kernel(w1, w2, dt, damping, cw1, cw2, expo, h1_0, h2_0, cap, log_switch):
    # Returns (status, time, peak, note): status 0 survived / 1 blew up,
    # note 0 none / 1 step_exhausted.
    n = w1.shape[0] - 1
    a = h1_0
    b = h2_0
    logmode = False
    peak = h1_0 + h2_0
    min_sub = dt * _MIN_SUB_FRACTION
    for k in range(n):
        wa1 = w1[k]
        wd1 = w1[k + 1] - w1[k]
        wa2 = w2[k]
        wd2 = w2[k + 1] - w2[k]
        s = 0.0
        sub = dt
        while dt - s > 1e-12 * dt:
            h = sub if sub < dt - s else dt - s
            f0 = s / dt
            fm = (s + 0.5 * h) / dt
            f1 = (s + h) / dt
            w01 = wa1 + f0 * wd1
            w02 = wa2 + f0 * wd2
            wm1 = wa1 + fm * wd1
            wm2 = wa2 + fm * wd2
            w11 = wa1 + f1 * wd1
            w12 = wa2 + f1 * wd2

            k1a, k1b = _rhs(a, b, w01, w02, damping, cw1, cw2, expo, logmode)
            k2a, k2b = _rhs(a + 0.5 * h * k1a, b + 0.5 * h * k1b, wm1, wm2,
                            damping, cw1, cw2, expo, logmode)
            k3a, k3b = _rhs(a + 0.5 * h * k2a, b + 0.5 * h * k2b, wm1, wm2,
                            damping, cw1, cw2, expo, logmode)
            k4a, k4b = _rhs(a + h * k3a, b + h * k3b, w11, w12,
                            damping, cw1, cw2, expo, logmode)
            na = a + (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
            nb = b + (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)

            e_old = _state_mass(a, b, logmode)
            e_new = _state_mass(na, nb, logmode)
            bad = (
                not math.isfinite(na)
                or not math.isfinite(nb)
                or ((not logmode) and (na <= 0.0 or nb <= 0.0))
                or e_new > 2.0 * e_old
            )
            if bad:
                sub *= 0.5
                if sub < min_sub:
                    return 1, k * dt + s, peak, 1
                continue
            s += h
            a = na
            b = nb
            if e_new > peak:
                peak = e_new
            if e_new >= cap:
                return 1, (k + 1) * dt, peak, 0
            if not logmode and (a > log_switch or b > log_switch):
                a = math.log(a)
                b = math.log(b)
                logmode = True
            sub = sub * 2.0 if sub * 2.0 < dt else dt
    return 0, n * dt, peak, 0


def _warm_kernel():
    # One tiny call so that forked workers inherit the compiled kernel.
    z = np.zeros(2)
    _blowup_kernel(
        z, z, 1e-3, 0.0, np.zeros(4), np.zeros(4), np.ones(4), 1e-3, 1e-3,
        BLOWUP_CAP, LOG_SWITCH,
    )


def _coefficients(kind: OdeSystemKind, params):
    if kind.variant in ("plain", "damped"):
        rho = check_rho_conditions(params)
        if not rho.consistent:
            raise ValueError(
                "the plain/damped comparison system needs consistent noise weights; "
                "use the general_k variant instead"
            )
        cw1 = np.array([rho.rho1, rho.rho1, rho.rho2, rho.rho2])
        cw2 = np.zeros(4)
        expo = np.array([params.m, params.n, params.p, params.q])
        return cw1, cw2, expo, kind.damping
    if kind.variant == "general_k":
        cw1 = np.array(general_weights(params))
        cw2 = np.zeros(4)
        expo = np.array([params.m, params.n, params.p, params.q])
        return cw1, cw2, expo, 0.0
    # damped_2d: both equations share one exponential weight per component
    # (the self weights must agree: m*k1j = q*k2j).
    if not isinstance(params, ModelParams2D):
        raise ValueError("damped_2d requires two-noise parameters")
    rho1 = params.m * params.k11
    rho2 = params.m * params.k12
    if abs(rho1 - params.q * params.k21) > 1e-9 * max(abs(rho1), 1e-300) or (
        params.k12 != 0.0
        and abs(rho2 - params.q * params.k22) > 1e-9 * max(abs(rho2), 1e-300)
    ):
        raise ValueError(
            "damped_2d requires shared per-component weights (m*k1j = q*k2j)"
        )
    beta, gam = params.m, params.n
    cw1 = np.full(4, rho1)
    cw2 = np.full(4, rho2)
    expo = np.array([beta, gam, beta, gam])
    return cw1, cw2, expo, kind.damping


def integrate(
    kind: OdeSystemKind,
    params,
    initial,
    path: BrownianPath,
    blowup_cap: float = BLOWUP_CAP,
) -> BlowupResult:
    """Integrate the comparison system along one path.

    initial is anything with h1_0/h2_0 attributes (e.g. InitialMass) or a
    pair of positive floats.
    """
    if hasattr(initial, "h1_0"):
        h1_0, h2_0 = initial.h1_0, initial.h2_0
    else:
        h1_0, h2_0 = initial
    if h1_0 <= 0.0 or h2_0 <= 0.0:
        raise ValueError("initial masses must be positive")
    cw1, cw2, expo, damping = _coefficients(kind, params)
    w1 = np.ascontiguousarray(path.values[0])
    if kind.variant == "damped_2d":
        if path.dims < 2:
            raise ValueError("damped_2d requires a two-component path")
        w2 = np.ascontiguousarray(path.values[1])
    else:
        w2 = np.zeros_like(w1)
    status, time, peak, note = _blowup_kernel(
        w1, w2, path.grid.dt, damping, cw1, cw2, expo,
        float(h1_0), float(h2_0), float(blowup_cap), LOG_SWITCH,
    )
    if status == 0:
        return BlowupResult(SURVIVED, path.grid.horizon, peak)
    return BlowupResult(
        BLEW_UP, min(time, path.grid.horizon), peak,
        "step_exhausted" if note == 1 else None,
    )


@dataclass(frozen=True)
class SandwichReport:
    """Per-path ordering of lower crossing, ODE blow-up, upper crossing.

    Censored/survived entries compare as +infinity, except that a censored
    lower bound makes the first inequality vacuous (the crossing may simply
    lie beyond the horizon).  Each comparison carries a 2*dt tolerance.
    """

    tau_lower: float
    lower_status: str
    tau_ode: float
    ode_status: str
    tau_upper: float
    upper_status: str
    ok: bool


def sandwich_check(
    params: ModelParams,
    spectral: SpectralData,
    path: BrownianPath,
    tight_rate: bool = False,
) -> SandwichReport:
    """Check tau_lower <= tau_ode <= tau_upper on one path."""
    ts = threshold_set(params, spectral, tight_rate=tight_rate)
    if ts.upper is None:
        raise ValueError(f"upper bound unavailable: {ts.upper_unavailable_reason}")
    lower = multi_crossing(path, ts.lower)
    upper_spec, upper_level = ts.upper
    upper = first_crossing(accumulate(path, upper_spec), upper_level)
    rho = check_rho_conditions(params)
    kind = OdeSystemKind("plain") if rho.consistent else OdeSystemKind("general_k")
    ode = integrate(kind, params, initial_mass(params, spectral), path)

    tol = 2.0 * path.grid.dt
    t_ode = ode.time_or_inf
    t_upper = upper.time_or_inf
    ok_first = (not lower.crossed) or (lower.time <= t_ode + tol)
    ok_second = t_ode <= t_upper + tol
    return SandwichReport(
        tau_lower=lower.time,
        lower_status=lower.status,
        tau_ode=ode.time,
        ode_status=ode.status,
        tau_upper=upper.time,
        upper_status=upper.status,
        ok=bool(ok_first and ok_second),
    )
