"""Monte Carlo driver: per-path rows, summaries, CSV/JSON reports.

All randomness flows from the single sim.seed through per-path keyed
streams, so the set of rows is a pure function of (config, seed); workers
only shard path ids, and rows are re-sorted by path id before writing.
Reports are therefore bitwise identical across worker counts.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import ode as ode_mod
from .bounds import ThresholdSet, UpperBoundUnavailable, threshold_set
from .config import RunConfig
from .dist import (
    blowup_probability_closed_form,
    blowup_probability_mc,
    compare_noise_predicate,
    drift_regime,
    noise_comparison_inputs,
    suggest_horizon,
    yor_oracle,
)
from .functionals import accumulate, first_crossing, multi_crossing
from .model import check_rho_conditions
from .ode import OdeSystemKind, integrate, sandwich_check
from .paths import SimGrid, sample_path
from .spectral import solve_eigenpair, initial_mass

__all__ = [
    "SIMULATE_COLUMNS",
    "SANDWICH_COLUMNS",
    "MonteCarloSummary",
    "simulate_rows",
    "run_simulate",
    "run_ode_sandwich",
    "run_thresholds",
    "run_probability",
    "run_yor",
    "run_compare",
    "write_csv",
]

SIMULATE_COLUMNS = (
    "path_id",
    "tau_lower",
    "lower_status",
    "tau_upper",
    "upper_status",
    "tau_ode",
    "ode_status",
)
SANDWICH_COLUMNS = (
    "path_id",
    "tau_lower",
    "lower_status",
    "tau_ode",
    "ode_status",
    "tau_upper",
    "upper_status",
    "ok",
)


@dataclass(frozen=True)
class MonteCarloSummary:
    """Per-quantity summary; mean/stderr/median are over resolved paths."""

    mean: float | None
    stderr: float | None
    median: float | None
    censor_fraction: float
    n: int

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "median": self.median,
            "censor_fraction": self.censor_fraction,
            "n": self.n,
        }


@dataclass(frozen=True)
class _PathJob:
    """Everything a worker needs to produce one row; fully picklable."""

    params: object
    thresholds: ThresholdSet
    h1_0: float
    h2_0: float
    ode_variant: str
    grid: SimGrid
    seed: int
    zero_noise: bool


def _one_row(job: _PathJob, path_id: int) -> tuple:
    path = sample_path(job.grid, dims=1, seed=job.seed, path_id=path_id,
                       zero_noise=job.zero_noise)
    lower = multi_crossing(path, job.thresholds.lower)
    spec, level = job.thresholds.upper
    upper = first_crossing(accumulate(path, spec), level)
    ode = integrate(
        OdeSystemKind(job.ode_variant), job.params, (job.h1_0, job.h2_0), path
    )
    tol = 2.0 * job.grid.dt
    ok_first = (not lower.crossed) or (lower.time <= ode.time_or_inf + tol)
    ok_second = ode.time_or_inf <= upper.time_or_inf + tol
    return (
        path_id,
        lower.time,
        lower.status,
        upper.time,
        upper.status,
        ode.time,
        ode.status,
        int(ok_first and ok_second),
    )


def _chunk_rows(job: _PathJob, lo: int, hi: int) -> list[tuple]:
    return [_one_row(job, i) for i in range(lo, hi)]


def _make_job(config: RunConfig, zero_noise: bool, tight_rate: bool) -> _PathJob:
    if config.is_2d:
        raise ValueError("the simulate/ode-sandwich drivers run the one-noise system")
    spectral = solve_eigenpair(config.params.domain)
    ts = threshold_set(config.params, spectral, tight_rate=tight_rate)
    if ts.upper is None:
        raise UpperBoundUnavailable(ts.upper_unavailable_reason)
    masses = initial_mass(config.params, spectral)
    rho = check_rho_conditions(config.params)
    return _PathJob(
        params=config.params,
        thresholds=ts,
        h1_0=masses.h1_0,
        h2_0=masses.h2_0,
        ode_variant="plain" if rho.consistent else "general_k",
        grid=config.grid,
        seed=config.seed,
        zero_noise=zero_noise,
    )


def simulate_rows(
    config: RunConfig,
    zero_noise: bool = False,
    tight_rate: bool = False,
    workers: int = 1,
) -> tuple[list[tuple], ThresholdSet]:
    """Compute one row per path, sorted by path id."""
    job = _make_job(config, zero_noise, tight_rate)
    ode_mod._warm_kernel()
    n = config.n_paths
    if workers <= 1:
        rows = _chunk_rows(job, 0, n)
    else:
        edges = np.linspace(0, n, num=min(workers * 4, n) + 1, dtype=int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_chunk_rows, job, int(lo), int(hi))
                for lo, hi in zip(edges[:-1], edges[1:])
                if hi > lo
            ]
            rows = []
            for fut in futures:
                rows.extend(fut.result())
        rows.sort(key=lambda r: r[0])
    return rows, job.thresholds


def _summary(times, statuses, resolved_status) -> MonteCarloSummary:
    times = np.asarray(times, dtype=float)
    resolved = np.array([s == resolved_status for s in statuses])
    n = len(statuses)
    censor = 1.0 - float(np.count_nonzero(resolved)) / n
    if not np.any(resolved):
        return MonteCarloSummary(None, None, None, censor, n)
    vals = times[resolved]
    stderr = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
    return MonteCarloSummary(
        mean=float(np.mean(vals)),
        stderr=stderr,
        median=float(np.median(vals)),
        censor_fraction=censor,
        n=n,
    )


def summarize_rows(rows) -> dict:
    cols = list(zip(*rows))
    return {
        "tau_lower": _summary(cols[1], cols[2], "crossed").as_dict(),
        "tau_upper": _summary(cols[3], cols[4], "crossed").as_dict(),
        "tau_ode": _summary(cols[5], cols[6], "blew_up").as_dict(),
    }


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header, rows):
    """Write rows atomically; no partial file survives a failure."""
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, payload):
    tmp = f"{path}.tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_simulate(
    config: RunConfig,
    out_csv,
    out_json,
    zero_noise: bool = False,
    tight_rate: bool = False,
    workers: int = 1,
) -> dict:
    """Per-path bound evaluation; writes the CSV and returns the summary."""
    rows, ts = simulate_rows(config, zero_noise, tight_rate, workers)
    if out_csv is not None:
        write_csv(out_csv, SIMULATE_COLUMNS, [r[:7] for r in rows])
    payload = {
        "constants": ts.constants,
        "n_paths": config.n_paths,
        "seed": config.seed,
        "dt": config.grid.dt,
        "horizon": config.grid.horizon,
        "workers": workers,
        "zero_noise": zero_noise,
        "tight_rate": tight_rate,
        "summaries": summarize_rows(rows),
    }
    if out_json is not None:
        write_json(out_json, payload)
    return payload


def run_ode_sandwich(
    config: RunConfig,
    out_csv,
    out_json,
    zero_noise: bool = False,
    tight_rate: bool = False,
    workers: int = 1,
) -> dict:
    """Sandwich-ordering rows (with ok flag); writes CSV, returns summary."""
    rows, ts = simulate_rows(config, zero_noise, tight_rate, workers)
    reordered = [
        (r[0], r[1], r[2], r[5], r[6], r[3], r[4], r[7]) for r in rows
    ]
    if out_csv is not None:
        write_csv(out_csv, SANDWICH_COLUMNS, reordered)
    n_ok = sum(r[7] for r in rows)
    payload = {
        "constants": ts.constants,
        "n_paths": config.n_paths,
        "seed": config.seed,
        "ok_fraction": n_ok / len(rows),
        "summaries": summarize_rows(rows),
    }
    if out_json is not None:
        write_json(out_json, payload)
    return payload


def run_thresholds(config: RunConfig, tight_rate: bool = False) -> dict:
    from .bounds import threshold_constants, lower_thresholds_2d, upper_threshold_2d
    from .bounds import UpperBoundUnavailable
    from .model import check_rho_conditions_2d, classify_case, check_epsilon_conditions

    spectral = solve_eigenpair(config.params.domain)
    if not config.is_2d:
        return threshold_constants(config.params, spectral, tight_rate)
    params = config.params
    case = classify_case(params)
    rho = check_rho_conditions_2d(params)
    from .bounds import _denominators_2d  # reporting only

    t1, t2_sym, t2_printed = _denominators_2d(params, spectral)
    out = {
        "rho11": rho.rho11 if rho.consistent else None,
        "rho12": rho.rho12 if rho.consistent else None,
        "rho21": rho.rho21 if rho.consistent else None,
        "rho22": rho.rho22 if rho.consistent else None,
        "C1": None,
        "C2": None,
        "C3": None,
        "eps0": None,
        "E0": initial_mass(params, spectral).e0,
        "T1": t1,
        "T2": t2_sym,
        "T2_as_printed": t2_printed,
        "theta_lower": min(t1, t2_sym),
        "theta_upper": None,
        "case": case.variant,
    }
    if case.variant in ("two_level", "strict_chain"):
        eps = check_epsilon_conditions(params, spectral)
        out["eps0"] = eps.eps0
        out["C1"] = eps.constants.get("D1")
        out["C2"] = eps.constants.get("D2")
        out["C3"] = eps.constants.get("D3")
    try:
        _, theta = upper_threshold_2d(params, spectral, case)
        out["theta_upper"] = theta
    except UpperBoundUnavailable:
        pass
    return out


def run_probability(config: RunConfig, case_part: int | None = None) -> dict:
    """Closed form next to a Monte Carlo estimate of the never-crossing
    probability in the damped regime."""
    if config.is_2d:
        raise ValueError("probability runs use the one-noise system")
    spectral = solve_eigenpair(config.params.domain)
    regime = drift_regime(config.params, spectral)
    if case_part is not None and case_part != regime.part:
        raise ValueError(
            f"requested case {case_part} but the exponents fall in case {regime.part}"
        )
    closed = blowup_probability_closed_form(config.params, spectral)
    if closed.vacuous:
        return {
            "part": closed.part,
            "vacuous": True,
            "reason": closed.reason,
            "closed_form": None,
            "mc_estimate": None,
            "mc_stderr": None,
        }
    decay = regime.mu * regime.damping
    horizon = max(config.grid.horizon, suggest_horizon(regime.rho, decay, regime.threshold))
    grid = SimGrid(dt=config.grid.dt, horizon=horizon)
    report = blowup_probability_mc(
        config.params, spectral, n_paths=config.n_paths, grid=grid, seed=config.seed
    )
    return {
        "part": closed.part,
        "vacuous": False,
        "closed_form": report.closed_form,
        "blowup_lower_bound": closed.prob_blowup_lower,
        "mc_estimate": report.mc_estimate,
        "mc_stderr": report.mc_stderr,
        "n_paths": report.n_paths,
        "truncation_horizon": report.truncation_horizon,
        "tail_bound": report.tail_bound,
        "threshold": report.threshold,
    }


def run_yor(nu: float, n_paths: int, grid: SimGrid, seed: int = 0,
            zero_noise: bool = False) -> dict:
    report = yor_oracle(nu, n_paths, grid, seed=seed, zero_noise=zero_noise)
    return {
        "nu": report.nu,
        "n_paths": report.n_paths,
        "ks_distance": report.ks_distance,
        "mean_functional": report.mean_functional,
        "mean_theory": report.mean_theory,
        "mean_vs_theory": abs(report.mean_functional - report.mean_theory),
        "mean_stderr": report.mean_stderr,
        "tail_bound": report.tail_bound,
        "dt": report.dt,
        "horizon": report.horizon,
    }


def run_compare(config: RunConfig) -> dict:
    if not config.is_2d:
        raise ValueError("compare-noise needs the two-noise parameter family")
    spectral = solve_eigenpair(config.params.domain)
    inputs = noise_comparison_inputs(config.params, spectral)
    report = compare_noise_predicate(inputs)
    return {
        "gamma_bar": report.gamma_bar,
        "k3": report.k3,
        "alpha1": report.alpha1,
        "alpha2": report.alpha2,
        "Lambda": report.big_lambda,
        "witness_level": report.witness_level,
        "hypotheses": [{"name": h.name, "holds": h.holds} for h in report.hypotheses],
        "ordering_certified": report.ordering_certified,
        "p1_inf": report.p1_inf,
        "p2_inf": report.p2_inf,
        "p1_finite": report.p1_finite,
        "p2_finite": report.p2_finite,
    }
