"""Run configuration: one YAML file drives every CLI subcommand.

Layout (all sections except lattice/kernel/data optional):

    lattice:
      dims: [2, 2]
    kernel:
      kind: gaussian        # kronecker | gaussian | rectangular | table
      sigma: 1.0
    data:
      d: 2
      n: 1000
      sampler:
        kind: uniform       # or gaussian-mixture with components
    delta: 0.0
    fit:
      restarts: 20
      max_iter: 200
      rel_tol: 1.0e-10
      init: subsample       # or plusplus
      seed: 0
    quasi:
      kind: sqrt            # sqrt | linear | constant
      c: 1.0
    experiment:
      n_schedule: [100, 1000, 10000, 100000]
      seeds: 5
      m_ref: 1000000
      net_size: 50
      alpha: 0.01
      m: 1000000
      configs: 20

Unknown keys are rejected at every level, naming the offending field.
The configuration digest is a SHA-256 over a canonical JSON rendering
of the parsed file, so formatting and key order do not affect it.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import yaml

from .datagen import make_sampler
from .errors import HypothesisError, ValidationError
from .lattice import Lattice, NeighborhoodKernel, kernel_from_spec
from .optimizer import FitParams, QuasiMinimizerSpec


def _as_int(value, field: str) -> int:
    if isinstance(value, bool):
        raise ValidationError(f"config field {field} must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value == int(value):
        return int(value)
    if isinstance(value, str):
        try:
            return int(value, 0)
        except ValueError:
            pass
    raise ValidationError(f"config field {field} must be an integer, got {value!r}")


def _as_float(value, field: str) -> float:
    if isinstance(value, bool):
        raise ValidationError(f"config field {field} must be a real number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise ValidationError(f"config field {field} must be a real number, got {value!r}")


def _section(raw: Mapping, name: str, allowed: set[str], required: set[str] = frozenset()) -> Mapping:
    section = raw.get(name)
    if section is None:
        section = {}
    if not isinstance(section, Mapping):
        raise ValidationError(f"config section {name} must be a mapping")
    unknown = set(section) - allowed
    if unknown:
        raise ValidationError(f"unknown key {sorted(unknown)[0]!r} in config section {name}")
    missing = required - set(section)
    if missing:
        raise ValidationError(f"config section {name} is missing key {sorted(missing)[0]!r}")
    return section


@dataclass(frozen=True)
class ExperimentParams:
    n_schedule: tuple[int, ...] = (100, 1000, 10000, 100000)
    seeds: int = 5
    m_ref: int = 1_000_000
    net_size: int = 50
    alpha: float = 0.01
    m: int = 1_000_000
    configs: int = 20

    def __post_init__(self) -> None:
        if len(self.n_schedule) == 0 or any(n < 1 for n in self.n_schedule):
            raise ValidationError(f"experiment.n_schedule must list positive sizes, got {self.n_schedule}")
        if any(b <= a for a, b in zip(self.n_schedule, self.n_schedule[1:])):
            raise ValidationError(f"experiment.n_schedule must be strictly increasing, got {self.n_schedule}")
        for name in ("seeds", "m_ref", "net_size", "m", "configs"):
            if getattr(self, name) < 1:
                raise ValidationError(f"experiment.{name} must be positive, got {getattr(self, name)}")
        if not self.alpha > 0 or not math.isfinite(self.alpha):
            raise ValidationError(f"experiment.alpha must be a positive real, got {self.alpha}")


@dataclass(frozen=True)
class RunConfig:
    lattice: Lattice
    kernel: NeighborhoodKernel
    d: int
    n: int
    sampler_spec: dict
    delta: float
    fit: FitParams
    quasi: QuasiMinimizerSpec
    experiment: ExperimentParams
    digest: str

    def make_sampler(self):
        return make_sampler(self.sampler_spec, self.d)

    def require_cell_change_hypothesis(self) -> None:
        """The measure-bound experiment needs 0 < alpha < delta/2."""
        if not self.delta > 0:
            raise HypothesisError(
                "the cell-change bound needs a positive separation delta; "
                f"got delta = {self.delta}"
            )
        if not 0 < self.experiment.alpha < self.delta / 2.0:
            raise HypothesisError(
                "the cell-change bound hypothesis requires 0 < alpha < delta/2; "
                f"got alpha = {self.experiment.alpha} with delta/2 = {self.delta / 2.0:.6g}"
            )


def _stringify_keys(obj):
    if isinstance(obj, Mapping):
        return {str(k): _stringify_keys(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_stringify_keys(v) for v in obj]
    return obj


def config_digest(raw: Mapping) -> str:
    canonical = json.dumps(_stringify_keys(raw), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


_TOP_KEYS = {"lattice", "kernel", "data", "delta", "fit", "quasi", "experiment"}


def parse_run_config(raw: Mapping) -> RunConfig:
    if not isinstance(raw, Mapping):
        raise ValidationError("config root must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ValidationError(f"unknown top-level config key {sorted(str(k) for k in unknown)[0]!r}")
    for name in ("lattice", "kernel", "data"):
        if name not in raw:
            raise ValidationError(f"config is missing the {name} section")

    lattice_sec = _section(raw, "lattice", {"dims"}, {"dims"})
    dims = lattice_sec["dims"]
    if not isinstance(dims, Sequence) or isinstance(dims, (str, bytes)):
        raise ValidationError(f"lattice.dims must be a list of integers, got {dims!r}")
    lattice = Lattice(tuple(_as_int(v, "lattice.dims") for v in dims))

    kernel_sec = raw["kernel"]
    if not isinstance(kernel_sec, Mapping):
        raise ValidationError("config section kernel must be a mapping")
    kernel = kernel_from_spec(lattice, kernel_sec)

    data_sec = _section(raw, "data", {"d", "n", "sampler"}, {"d"})
    d = _as_int(data_sec["d"], "data.d")
    if d < 1:
        raise ValidationError(f"data.d must be positive, got {d}")
    if lattice.ndim > d:
        raise ValidationError(
            f"lattice dimension {lattice.ndim} exceeds data dimension {d}"
        )
    n = _as_int(data_sec.get("n", 1000), "data.n")
    if n < 1:
        raise ValidationError(f"data.n must be positive, got {n}")
    sampler_spec = data_sec.get("sampler", {"kind": "uniform"})
    if not isinstance(sampler_spec, Mapping):
        raise ValidationError("data.sampler must be a mapping")
    sampler_spec = dict(sampler_spec)
    make_sampler(sampler_spec, d)  # fail fast on a bad sampler block

    delta = _as_float(raw.get("delta", 0.0), "delta")
    if delta < 0 or not math.isfinite(delta):
        raise ValidationError(f"delta must be a nonnegative real, got {delta}")

    fit_sec = _section(raw, "fit", {"restarts", "max_iter", "rel_tol", "init", "seed"})
    init = fit_sec.get("init", "subsample")
    if not isinstance(init, str):
        raise ValidationError(f"fit.init must be a string, got {init!r}")
    fit_params = FitParams(
        restarts=_as_int(fit_sec.get("restarts", 20), "fit.restarts"),
        max_iter=_as_int(fit_sec.get("max_iter", 200), "fit.max_iter"),
        rel_tol=_as_float(fit_sec.get("rel_tol", 1e-10), "fit.rel_tol"),
        delta=delta,
        init=init,
        seed=_as_int(fit_sec.get("seed", 0), "fit.seed"),
    )

    quasi_sec = _section(raw, "quasi", {"kind", "c"})
    kind = quasi_sec.get("kind", "sqrt")
    if not isinstance(kind, str):
        raise ValidationError(f"quasi.kind must be a string, got {kind!r}")
    quasi = QuasiMinimizerSpec(kind=kind, c=_as_float(quasi_sec.get("c", 1.0), "quasi.c"))

    exp_sec = _section(
        raw, "experiment", {"n_schedule", "seeds", "m_ref", "net_size", "alpha", "m", "configs"}
    )
    defaults = ExperimentParams()
    schedule = exp_sec.get("n_schedule", defaults.n_schedule)
    if not isinstance(schedule, Sequence) or isinstance(schedule, (str, bytes)):
        raise ValidationError(f"experiment.n_schedule must be a list, got {schedule!r}")
    experiment = ExperimentParams(
        n_schedule=tuple(_as_int(v, "experiment.n_schedule") for v in schedule),
        seeds=_as_int(exp_sec.get("seeds", defaults.seeds), "experiment.seeds"),
        m_ref=_as_int(exp_sec.get("m_ref", defaults.m_ref), "experiment.m_ref"),
        net_size=_as_int(exp_sec.get("net_size", defaults.net_size), "experiment.net_size"),
        alpha=_as_float(exp_sec.get("alpha", defaults.alpha), "experiment.alpha"),
        m=_as_int(exp_sec.get("m", defaults.m), "experiment.m"),
        configs=_as_int(exp_sec.get("configs", defaults.configs), "experiment.configs"),
    )

    return RunConfig(
        lattice=lattice,
        kernel=kernel,
        d=d,
        n=n,
        sampler_spec=sampler_spec,
        delta=delta,
        fit=fit_params,
        quasi=quasi,
        experiment=experiment,
        digest=config_digest(raw),
    )


def load_run_config(path: str) -> RunConfig:
    with open(path) as handle:
        try:
            raw = yaml.safe_load(handle)
        except yaml.YAMLError as exc:
            raise ValidationError(f"{path}: not parseable ({exc})") from None
    if raw is None:
        raise ValidationError(f"{path}: empty configuration")
    if not isinstance(raw, Mapping):
        raise ValidationError(f"{path}: config root must be a mapping")
    return parse_run_config(raw)
