"""key = value run configuration files.

UTF-8 text, one `key = value` per line, `#` starts a comment.  Recognized
keys (a one- and a two-noise family; mixing them is an error):

    exponents.m  exponents.n  exponents.p  exponents.q
    noise.k1  noise.k2            | noise.k11 noise.k12 noise.k21 noise.k22
    init.C1  init.C2              | init.M1 init.M2
                                  | coeff.C11 coeff.C12 coeff.C21 coeff.C22
    domain.kind                   interval | box
    domain.lengths                comma-separated positive reals
    sim.dt  sim.horizon  sim.n_paths  sim.seed
    model.lambda_override         optional nonnegative real

Unknown keys are a hard error.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import ModelParams, ModelParams2D
from .paths import SimGrid
from .spectral import DomainSpec

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config"]

_EXPONENT_KEYS = {"exponents.m", "exponents.n", "exponents.p", "exponents.q"}
_NOISE_1D = {"noise.k1", "noise.k2"}
_NOISE_2D = {"noise.k11", "noise.k12", "noise.k21", "noise.k22"}
_INIT_1D = {"init.C1", "init.C2"}
_INIT_2D = {"init.M1", "init.M2"}
_COEFF_2D = {"coeff.C11", "coeff.C12", "coeff.C21", "coeff.C22"}
_DOMAIN = {"domain.kind", "domain.lengths"}
_SIM = {"sim.dt", "sim.horizon", "sim.n_paths", "sim.seed"}
_EXTRA = {"model.lambda_override"}

KNOWN_KEYS = (
    _EXPONENT_KEYS | _NOISE_1D | _NOISE_2D | _INIT_1D | _INIT_2D
    | _COEFF_2D | _DOMAIN | _SIM | _EXTRA
)

_SIM_DEFAULTS = {"sim.dt": 1e-3, "sim.horizon": 10.0, "sim.n_paths": 1000, "sim.seed": 0}


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Parsed run configuration: model parameters plus simulation grid."""

    params: ModelParams | ModelParams2D
    grid: SimGrid
    n_paths: int
    seed: int

    def __post_init__(self):
        if self.n_paths < 1:
            raise ConfigError("sim.n_paths must be at least 1")

    @property
    def is_2d(self) -> bool:
        return isinstance(self.params, ModelParams2D)


def _parse_lines(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        values[key] = value
    return values


def _as_float(values, key) -> float:
    try:
        return float(values[key])
    except KeyError:
        raise ConfigError(f"missing required key {key!r}") from None
    except ValueError:
        raise ConfigError(f"key {key!r} is not a number: {values[key]!r}") from None


def _as_int(values, key, default) -> int:
    if key not in values:
        return default
    try:
        return int(values[key])
    except ValueError:
        raise ConfigError(f"key {key!r} is not an integer: {values[key]!r}") from None


def parse_config(text: str) -> RunConfig:
    """Parse configuration text into a RunConfig."""
    values = _parse_lines(text)

    has_1d = bool(_NOISE_1D & values.keys())
    has_2d = bool(_NOISE_2D & values.keys())
    if has_1d and has_2d:
        raise ConfigError("mixing one-noise (noise.k1/k2) and two-noise keys")
    if not has_1d and not has_2d:
        raise ConfigError("no noise intensities given")
    if has_1d and (_INIT_2D & values.keys() or _COEFF_2D & values.keys()):
        raise ConfigError("init.M*/coeff.* keys belong to the two-noise family")
    if has_2d and _INIT_1D & values.keys():
        raise ConfigError("init.C1/C2 belong to the one-noise family")

    kind = values.get("domain.kind")
    if kind is None:
        raise ConfigError("missing required key 'domain.kind'")
    lengths_raw = values.get("domain.lengths")
    if lengths_raw is None:
        raise ConfigError("missing required key 'domain.lengths'")
    try:
        lengths = tuple(float(v) for v in lengths_raw.split(","))
    except ValueError:
        raise ConfigError(f"domain.lengths is not a comma-separated list: {lengths_raw!r}") from None
    try:
        domain = DomainSpec(kind=kind, lengths=lengths)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    common = dict(
        m=_as_float(values, "exponents.m"),
        n=_as_float(values, "exponents.n"),
        p=_as_float(values, "exponents.p"),
        q=_as_float(values, "exponents.q"),
        domain=domain,
    )
    try:
        if has_1d:
            lam_over = values.get("model.lambda_override")
            params = ModelParams(
                k1=_as_float(values, "noise.k1"),
                k2=_as_float(values, "noise.k2"),
                C1=_as_float(values, "init.C1"),
                C2=_as_float(values, "init.C2"),
                lambda_override=float(lam_over) if lam_over is not None else None,
                **common,
            )
        else:
            if "model.lambda_override" in values:
                raise ConfigError("model.lambda_override applies to the one-noise family")
            params = ModelParams2D(
                k11=_as_float(values, "noise.k11"),
                k12=_as_float(values, "noise.k12"),
                k21=_as_float(values, "noise.k21"),
                k22=_as_float(values, "noise.k22"),
                C11=_as_float(values, "coeff.C11"),
                C12=_as_float(values, "coeff.C12"),
                C21=_as_float(values, "coeff.C21"),
                C22=_as_float(values, "coeff.C22"),
                M1=_as_float(values, "init.M1"),
                M2=_as_float(values, "init.M2"),
                **common,
            )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None

    dt = float(values.get("sim.dt", _SIM_DEFAULTS["sim.dt"]))
    horizon = float(values.get("sim.horizon", _SIM_DEFAULTS["sim.horizon"]))
    try:
        grid = SimGrid(dt=dt, horizon=horizon)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(
        params=params,
        grid=grid,
        n_paths=_as_int(values, "sim.n_paths", _SIM_DEFAULTS["sim.n_paths"]),
        seed=_as_int(values, "sim.seed", _SIM_DEFAULTS["sim.seed"]),
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
