"""Exponential functionals of Brownian paths and first-crossing detection.

The monitored quantity is always

    A(t) = int_0^t combine_i exp( sum_j c_ij W_j(r) + delta_i r ) dr

where combine is a pointwise min or max over the listed integrands (or the
single integrand itself).  A is accumulated with the trapezoidal rule on the
path grid, which halves the discretization bias of crossing times relative
to left-endpoint sums at negligible cost.  Crossing times are refined by
linear interpolation of A between the two bracketing nodes; A is the
monitored quantity and is piecewise smooth, so interpolating it (rather
than the integrand) is the natural refinement.

Censoring at the horizon is a first-class outcome: the stopping times are
a.s. finite only under conditions the caller may violate, and the
never-crossing probabilities are estimated from censoring frequencies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paths import BrownianPath, SimGrid

__all__ = [
    "Term",
    "FunctionalSpec",
    "ExpFunctional",
    "StoppingOutcome",
    "integrand_values",
    "accumulate",
    "first_crossing",
    "multi_crossing",
]

# Integrand values above this saturate and mark the accumulation overflowed.
OVERFLOW_CAP = 1e300
_LOG_CAP = np.log(OVERFLOW_CAP)

CROSSED = "crossed"
CENSORED = "censored"


@dataclass(frozen=True)
class Term:
    """One integrand descriptor exp(sum_j coeffs[j] * W_j(t) + drift * t)."""

    coeffs: tuple[float, ...]
    drift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))


@dataclass(frozen=True)
class FunctionalSpec:
    """Integrand of one exponential functional.

    combine is "single" (exactly one term), or "min"/"max" over the terms
    evaluated pointwise before integration.
    """

    terms: tuple[Term, ...]
    combine: str = "single"

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("at least one term is required")
        if self.combine not in ("single", "min", "max"):
            raise ValueError(f"unknown combine mode {self.combine!r}")
        if self.combine == "single" and len(self.terms) != 1:
            raise ValueError("combine='single' requires exactly one term")

    @property
    def dims(self) -> int:
        return max(len(t.coeffs) for t in self.terms)


def single(*coeffs: float, drift: float = 0.0) -> FunctionalSpec:
    """Convenience constructor for a one-term functional."""
    return FunctionalSpec(terms=(Term(coeffs=coeffs, drift=drift),), combine="single")


def combine(mode: str, *term_coeffs, drift: float = 0.0) -> FunctionalSpec:
    """Convenience constructor for a min/max combination of drift-free terms."""
    terms = tuple(
        Term(coeffs=c if isinstance(c, tuple) else (c,), drift=drift)
        for c in term_coeffs
    )
    return FunctionalSpec(terms=terms, combine=mode)


@dataclass(frozen=True)
class ExpFunctional:
    """Accumulated functional A(t_k) on the path grid, plus overflow flag."""

    values: np.ndarray
    grid: SimGrid
    overflowed: bool


@dataclass(frozen=True)
class StoppingOutcome:
    """First-crossing time of a threshold, or a censored marker.

    crossed: time is the interpolated crossing time (<= horizon) and
    functional_at_end is the functional value there (the threshold).
    censored: time equals the horizon and functional_at_end is A(horizon),
    which is below the threshold.
    """

    status: str
    time: float
    functional_at_end: float

    @property
    def crossed(self) -> bool:
        return self.status == CROSSED

    @property
    def time_or_inf(self) -> float:
        return self.time if self.crossed else np.inf


def integrand_values(path: BrownianPath, spec: FunctionalSpec) -> tuple[np.ndarray, bool]:
    """Evaluate the (combined) integrand at the grid nodes.

    Returns (values, overflowed); values are clipped at OVERFLOW_CAP when the
    exponent would overflow.
    """
    if spec.dims > path.dims:
        raise ValueError(
            f"functional references component {spec.dims} but path has {path.dims}"
        )
    t = path.grid.times
    rows = []
    overflowed = False
    for term in spec.terms:
        z = term.drift * t
        for j, c in enumerate(term.coeffs):
            if c != 0.0:
                z = z + c * path.values[j]
        if np.any(z > _LOG_CAP):
            overflowed = True
            z = np.minimum(z, _LOG_CAP)
        rows.append(np.exp(z))
    if spec.combine == "single":
        return rows[0], overflowed
    op = np.minimum if spec.combine == "min" else np.maximum
    out = rows[0]
    for row in rows[1:]:
        out = op(out, row)
    return out, overflowed


def accumulate(path: BrownianPath, spec: FunctionalSpec) -> ExpFunctional:
    """Trapezoidal accumulation of the functional along the path.

    A(0) = 0 and A is nondecreasing (the integrand is an exponential, hence
    nonnegative).  If the integrand saturates at OVERFLOW_CAP the result is
    marked overflowed.
    """
    g, overflowed = integrand_values(path, spec)
    dt = path.grid.dt
    a = np.empty_like(g)
    a[0] = 0.0
    np.cumsum(0.5 * dt * (g[1:] + g[:-1]), out=a[1:])
    return ExpFunctional(values=a, grid=path.grid, overflowed=overflowed)


def first_crossing(A, threshold: float, grid: SimGrid | None = None) -> StoppingOutcome:
    """Smallest grid-bracketed crossing time of a nondecreasing functional.

    A may be an ExpFunctional or a plain array (then grid is required).  The
    crossing time is refined by linear interpolation of A between the two
    bracketing nodes; if the refined time exceeds the horizon, or A never
    reaches the threshold, the outcome is censored at the horizon.
    """
    if isinstance(A, ExpFunctional):
        values = A.values
        grid = A.grid if grid is None else grid
    else:
        values = np.asarray(A, dtype=float)
        if grid is None:
            raise ValueError("grid is required when A is a bare array")
    if threshold <= 0.0:
        raise ValueError("threshold must be positive")
    horizon = grid.horizon
    times = grid.times
    a_end = float(np.interp(horizon, times, values))
    idx = int(np.searchsorted(values, threshold, side="left"))
    if idx >= len(values):
        return StoppingOutcome(CENSORED, horizon, a_end)
    if idx == 0:
        return StoppingOutcome(CROSSED, 0.0, float(values[0]))
    lo, hi = values[idx - 1], values[idx]
    frac = (threshold - lo) / (hi - lo) if hi > lo else 0.0
    t_cross = times[idx - 1] + frac * grid.dt
    if t_cross > horizon:
        return StoppingOutcome(CENSORED, horizon, a_end)
    return StoppingOutcome(CROSSED, float(t_cross), float(threshold))


def multi_crossing(
    path: BrownianPath,
    pairs,
) -> StoppingOutcome:
    """Earliest crossing among (FunctionalSpec, threshold) pairs.

    "Or" semantics: crossed as soon as any functional reaches its threshold;
    censored only if all are.  For a censored outcome the reported
    functional value is that of the pair closest to crossing (largest
    A(horizon)/threshold ratio).
    """
    pairs = tuple(pairs)
    if not pairs:
        raise ValueError("at least one (spec, threshold) pair is required")
    best = None
    best_progress = -np.inf
    for spec, threshold in pairs:
        outcome = first_crossing(accumulate(path, spec), threshold)
        if outcome.crossed:
            if best is None or not best.crossed or outcome.time < best.time:
                best = outcome
        elif best is None or not best.crossed:
            progress = outcome.functional_at_end / threshold
            if progress > best_progress:
                best_progress = progress
                best = outcome
    return best
