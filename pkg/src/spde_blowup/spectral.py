"""First Dirichlet eigenpair on explicitly solvable domains.

Every threshold in this package consumes exactly three scalars derived from
the principal eigenfunction psi of -Laplace on the domain D (normalized so
that the integral of psi over D equals 1): the eigenvalue, the sup norm of
psi, and the integral of psi^2.  On intervals and boxes all three are closed
form, which is why only those domains are supported; a numerical eigensolver
would add nothing downstream.

Interval (0, L):
    lambda = (pi/L)^2,   psi(x) = (pi/(2L)) sin(pi x / L)
Box prod_j (0, L_j):
    lambda = sum_j (pi/L_j)^2,   psi(x) = prod_j (pi/(2 L_j)) sin(pi x_j / L_j)

The sup norm equals the product of the per-axis amplitudes (the maximum sits
at the center of the box), and int psi^2 = prod_j pi^2/(8 L_j).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainSpec",
    "SpectralData",
    "InitialMass",
    "solve_eigenpair",
    "eval_psi",
    "initial_mass",
]


@dataclass(frozen=True)
class DomainSpec:
    """Bounded domain on which the Dirichlet eigenproblem is solved.

    kind is "interval" (exactly one length) or "box" (one length per axis,
    d >= 1).  All lengths must be positive.
    """

    kind: str
    lengths: tuple[float, ...]

    def __post_init__(self):
        if self.kind not in ("interval", "box"):
            raise ValueError(f"unsupported domain kind {self.kind!r}")
        lengths = tuple(float(v) for v in self.lengths)
        object.__setattr__(self, "lengths", lengths)
        if self.kind == "interval" and len(lengths) != 1:
            raise ValueError("interval domain takes exactly one length")
        if len(lengths) < 1:
            raise ValueError("box domain needs at least one length")
        if any(not math.isfinite(v) or v <= 0.0 for v in lengths):
            raise ValueError("domain lengths must be positive and finite")

    @property
    def dim(self) -> int:
        return len(self.lengths)


@dataclass(frozen=True)
class SpectralData:
    """Closed-form spectral quantities of the L1-normalized eigenfunction.

    lam            first Dirichlet eigenvalue of -Laplace (units 1/time)
    amp            amplitude making the integral of psi equal 1
    sup_norm       sup norm of psi (equals amp for sine products)
    psi_sq_integral   integral of psi^2 over the domain
    """

    lam: float
    amp: float
    sup_norm: float
    psi_sq_integral: float

    def __post_init__(self):
        if self.lam <= 0.0 or self.sup_norm <= 0.0 or self.psi_sq_integral <= 0.0:
            raise ValueError("spectral quantities must be positive")
        # int psi^2 <= sup|psi| * int psi = sup|psi|
        if self.psi_sq_integral > self.sup_norm * (1.0 + 1e-12):
            raise ValueError("psi_sq_integral cannot exceed the sup norm")


@dataclass(frozen=True)
class InitialMass:
    """psi-weighted initial data: h_i(0) = int f_i psi and their sum."""

    h1_0: float
    h2_0: float
    e0: float


def solve_eigenpair(domain: DomainSpec) -> SpectralData:
    """Return the closed-form first Dirichlet eigenpair data for the domain."""
    lam = sum((math.pi / L) ** 2 for L in domain.lengths)
    amp = math.prod(math.pi / (2.0 * L) for L in domain.lengths)
    psi_sq = math.prod(math.pi ** 2 / (8.0 * L) for L in domain.lengths)
    return SpectralData(lam=lam, amp=amp, sup_norm=amp, psi_sq_integral=psi_sq)


def eval_psi(domain: DomainSpec, x: np.ndarray) -> np.ndarray:
    """Evaluate psi at points inside the domain.

    For an interval, x has shape (npts,); for a d-dimensional box, shape
    (npts, d).  Values outside the domain are not clipped; callers that need
    the Dirichlet extension by zero should mask themselves.
    """
    x = np.asarray(x, dtype=float)
    amp = math.prod(math.pi / (2.0 * L) for L in domain.lengths)
    if domain.dim == 1:
        xs = x.reshape(-1)
        return amp * np.sin(math.pi * xs / domain.lengths[0])
    if x.ndim != 2 or x.shape[1] != domain.dim:
        raise ValueError(f"expected points of shape (npts, {domain.dim})")
    out = np.full(x.shape[0], amp)
    for j, L in enumerate(domain.lengths):
        out = out * np.sin(math.pi * x[:, j] / L)
    return out


def initial_mass(params, spectral: SpectralData) -> InitialMass:
    """psi-weighted mass of eigenfunction initial data f_i = c_i psi.

    h_i(0) = int f_i psi = c_i * int psi^2 (not c_i itself), and
    E(0) = h_1(0) + h_2(0).  Works for both the one- and two-noise parameter
    sets: c_i is C_i in the first case and M_i in the second.
    """
    c1 = getattr(params, "C1", None)
    c2 = getattr(params, "C2", None)
    if c1 is None or c2 is None:
        c1 = params.M1
        c2 = params.M2
    h1 = c1 * spectral.psi_sq_integral
    h2 = c2 * spectral.psi_sq_integral
    return InitialMass(h1_0=h1, h2_0=h2, e0=h1 + h2)
