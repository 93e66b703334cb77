"""Pipeline configuration: one JSON or TOML file with a section per stage.

Example (TOML)::

    [run]
    seed = 3
    threads = 2

    [models]
    kinds = ["modified_naka_rushton", "mlp"]
    mlp_epochs = 3

Unknown sections or keys are rejected before any stage runs.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError
from .evaluation import CROSSING_RTOL, R2_THRESHOLD
from .models import Kind
from .optim import FitSettings
from .preprocess import PreprocessConfig

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

ALL_KINDS = tuple(k.value for k in Kind)
SEED_ENV = "CRF_SEED"
THREADS_ENV = "CRF_THREADS"


@dataclass(frozen=True)
class EvalConfig:
    r2_threshold: float = R2_THRESHOLD
    pooled: bool = True
    pooled_seed: int | None = None

    def __post_init__(self):
        if not 0.0 < self.r2_threshold <= 1.0:
            raise ConfigError("eval.r2_threshold must lie in (0, 1]")


@dataclass(frozen=True)
class HyperConfig:
    candidate_neurons: tuple[int, ...] = tuple(range(1, 9))
    candidate_epochs: tuple[int, ...] = tuple(range(1, 11))
    n_runs: int = 50
    sweep_epochs: int | None = 50
    rtol: float = CROSSING_RTOL

    def __post_init__(self):
        object.__setattr__(self, "candidate_neurons", tuple(int(v) for v in self.candidate_neurons))
        object.__setattr__(self, "candidate_epochs", tuple(int(v) for v in self.candidate_epochs))
        if not self.candidate_neurons or not self.candidate_epochs:
            raise ConfigError("hypersearch candidate ranges must be non-empty")
        if min(self.candidate_neurons) < 1 or min(self.candidate_epochs) < 1:
            raise ConfigError("hypersearch candidates must be >= 1")
        if self.n_runs < 1:
            raise ConfigError("hypersearch.n_runs must be >= 1")
        if self.sweep_epochs is not None and self.sweep_epochs < 1:
            raise ConfigError("hypersearch.sweep_epochs must be >= 1")
        if self.rtol < 0:
            raise ConfigError("hypersearch.rtol must be >= 0")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.threads < 1:
            raise ConfigError("run.threads must be >= 1")


@dataclass(frozen=True)
class OutputConfig:
    svg: bool = False


@dataclass(frozen=True)
class ModelsConfig:
    kinds: tuple[str, ...] = ALL_KINDS
    settings: FitSettings = field(default_factory=FitSettings)

    def __post_init__(self):
        try:
            parsed = tuple(Kind.parse(k).value for k in self.kinds)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not parsed:
            raise ConfigError("models.kinds must not be empty")
        if len(set(parsed)) != len(parsed):
            raise ConfigError("models.kinds contains duplicates")
        object.__setattr__(self, "kinds", parsed)
        s = self.settings
        for name in ("mlp_neurons", "mlp_epochs", "rbf_centers", "fuzzy_rules", "anfis_rules",
                     "anfis_epochs", "lolimot_locals", "classic_max_iter"):
            if getattr(s, name) < 1:
                raise ConfigError(f"models.{name} must be >= 1")
        if s.rbf_sigma <= 0 or s.anfis_step <= 0 or s.mlp_init_step <= 0:
            raise ConfigError("models: widths and step sizes must be positive")


@dataclass(frozen=True)
class PipelineConfig:
    """Validated settings for every CLI stage."""

    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    models: ModelsConfig = field(default_factory=ModelsConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    hypersearch: HyperConfig = field(default_factory=HyperConfig)
    run: RunConfig = field(default_factory=RunConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PipelineConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("config root must be a table/object")
        _reject_unknown("config", data, [f.name for f in fields(cls)])
        try:
            models = dict(data.get("models", {}))
            kinds = models.pop("kinds", ALL_KINDS)
            _reject_unknown("models", models, [f.name for f in fields(FitSettings)])
            if "mlp_init_range" in models:
                models["mlp_init_range"] = tuple(models["mlp_init_range"])
            pre = dict(data.get("preprocess", {}))
            _reject_unknown("preprocess", pre, [f.name for f in fields(PreprocessConfig)])
            for key in ("contrasts", "band", "stimulus_window_ms", "baseline_window_ms"):
                if key in pre:
                    pre[key] = tuple(pre[key])
            return cls(
                preprocess=PreprocessConfig(**pre),
                models=ModelsConfig(tuple(kinds), FitSettings(**models)),
                eval=_section(EvalConfig, "eval", data),
                hypersearch=_section(HyperConfig, "hypersearch", data),
                run=_section(RunConfig, "run", data),
                output=_section(OutputConfig, "output", data),
            )
        except TypeError as exc:
            raise ConfigError(f"invalid config value: {exc}") from None

    def to_dict(self) -> dict[str, Any]:
        p = self.preprocess
        s = self.models.settings
        return {
            "preprocess": {f.name: _plain(getattr(p, f.name)) for f in fields(p)},
            "models": {"kinds": list(self.models.kinds),
                       **{f.name: _plain(getattr(s, f.name)) for f in fields(s)}},
            "eval": _as_plain(self.eval),
            "hypersearch": _as_plain(self.hypersearch),
            "run": _as_plain(self.run),
            "output": _as_plain(self.output),
        }

    def with_env(self, environ: Mapping[str, str] | None = None) -> "PipelineConfig":
        """Apply the ``CRF_SEED`` and ``CRF_THREADS`` overrides."""
        environ = os.environ if environ is None else environ
        run = self.run
        seed, threads = run.seed, run.threads
        if environ.get(SEED_ENV):
            seed = _env_int(SEED_ENV, environ[SEED_ENV])
        if environ.get(THREADS_ENV):
            threads = _env_int(THREADS_ENV, environ[THREADS_ENV])
        return replace(self, run=RunConfig(seed, threads))


def _env_int(name, value):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {value!r}") from None


def _plain(v):
    return list(v) if isinstance(v, tuple) else v


def _as_plain(obj):
    return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}


def _reject_unknown(section, data, allowed):
    extra = sorted(set(data) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(extra)}")


def _section(cls, name, data):
    raw = data.get(name, {})
    if not isinstance(raw, Mapping):
        raise ConfigError(f"[{name}] must be a table/object")
    _reject_unknown(name, raw, [f.name for f in fields(cls)])
    return cls(**raw)


def load_config(path: str | os.PathLike | None) -> PipelineConfig:
    """Read a ``.toml`` or ``.json`` config; ``None`` gives the defaults."""
    if path is None:
        return PipelineConfig()
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    try:
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(raw.decode("utf-8"))
        else:
            data = json.loads(raw.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return PipelineConfig.from_dict(data)
