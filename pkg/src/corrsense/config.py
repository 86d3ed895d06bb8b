"""Run configuration: one strict JSON document holding every numeric knob.

The physical scales below are free choices: pulses are slow enough for the
noise-free protocol to be adiabatic (transfer >= 0.99) and the noise is strong
enough to degrade it measurably.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .control import ProtocolTiming
from .dynamics import IntegratorConfig
from .errors import BadRange, ConfigError
from .model import SystemParams
from .noise import NoiseRanges


@dataclass(frozen=True)
class DatasetConfig:
    per_class: int = 500
    n_realizations: int = 500
    master_seed: int = 2024
    workers: int = 1

    def validate(self):
        if self.per_class < 0:
            raise ConfigError("per_class must be >= 0")
        if self.n_realizations < 1:
            raise ConfigError("n_realizations must be >= 1")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    hidden: tuple[int, ...] = (32, 32)
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 300
    patience: int = 50
    fractions: tuple[float, float, float] = (0.7, 0.15, 0.15)
    split_seed: int = 7
    init_seed: int = 11

    def validate(self):
        if not self.hidden or min(self.hidden) < 1:
            raise ConfigError("hidden layer sizes must be positive")
        if not (self.learning_rate > 0 and self.batch_size >= 1 and self.epochs >= 1 and self.patience >= 1):
            raise ConfigError("learning_rate, batch_size, epochs and patience must be positive")
        if len(self.fractions) != 3:
            raise ConfigError("fractions needs (train, validation, test)")


@dataclass(frozen=True)
class RunConfig:
    physical: SystemParams = field(default_factory=SystemParams)
    pulses: ProtocolTiming = field(default_factory=ProtocolTiming)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    noise: NoiseRanges = field(default_factory=NoiseRanges)
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    classifier: TrainConfig = field(default_factory=TrainConfig)
    output_dir: str = "out"

    @classmethod
    def desk_scale(cls) -> "RunConfig":
        """Full-size reproduction run: 500 points per class, 200 realizations per point."""
        return cls(dataset=DatasetConfig(per_class=500, n_realizations=200))

    def validate(self) -> "RunConfig":
        try:
            self.pulses.validate()
            self.noise.validate()
        except (ValueError, BadRange) as exc:
            raise ConfigError(str(exc)) from exc
        if self.pulses.omega0 * self.pulses.width < 10:
            raise ConfigError("pulses are not adiabatic: omega0 * width must be >= 10")
        self.dataset.validate()
        self.classifier.validate()
        return self

    def to_dict(self) -> dict:
        return _to_plain(dataclasses.asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        """Digest of every setting that affects results (not the output directory or worker count)."""
        d = self.to_dict()
        d.pop("output_dir", None)
        d["dataset"] = {k: v for k, v in d["dataset"].items() if k != "workers"}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def data_digest(self) -> str:
        """Digest of the sections that determine the generated dataset."""
        d = self.to_dict()
        keep = {k: d[k] for k in ("physical", "pulses", "integrator", "noise")}
        keep["dataset"] = {k: v for k, v in d["dataset"].items() if k != "workers"}
        return hashlib.sha256(json.dumps(keep, sort_keys=True).encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return _build(cls, data, "config").validate()

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("%s: invalid JSON (%s)" % (path, exc)) from exc
        return cls.from_dict(data)

    def replace(self, **sections) -> "RunConfig":
        return dataclasses.replace(self, **sections)


def _to_plain(obj):
    if isinstance(obj, dict):
        return {k: _to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_plain(v) for v in obj]
    return obj


_SECTIONS = {"physical": SystemParams, "pulses": ProtocolTiming, "integrator": IntegratorConfig,
             "noise": NoiseRanges, "dataset": DatasetConfig, "classifier": TrainConfig}


def _coerce(value, default, where):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError("%s: expected a boolean" % where)
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError("%s: expected an integer" % where)
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("%s: expected a number" % where)
        return float(value)
    if isinstance(default, tuple):
        if not isinstance(value, list):
            raise ConfigError("%s: expected a list" % where)
        return tuple(_coerce(v, default[0], where) for v in value) if default else tuple(value)
    if isinstance(default, str) or default is None:
        if value is not None and not isinstance(value, (str, int, float)):
            raise ConfigError("%s: unexpected type" % where)
        return value
    return value


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ConfigError("%s: expected an object" % where)
    names = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(names)
    if unknown:
        raise ConfigError("%s: unknown keys %s" % (where, sorted(unknown)))
    defaults = cls()
    kwargs = {}
    for key, value in data.items():
        sub = _SECTIONS.get(key) if cls is RunConfig else None
        if sub is not None:
            kwargs[key] = _build(sub, value, "%s.%s" % (where, key))
        else:
            kwargs[key] = _coerce(value, getattr(defaults, key), "%s.%s" % (where, key))
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError("%s: %s" % (where, exc)) from exc
