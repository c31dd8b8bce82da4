"""Pipeline configuration: defaults, TOML loading, flag overrides.

The defaults reproduce the reference schedule: two context stages (32 then
128), phase fractions 1/3, 2/3, 1, a 40k vocabulary target, and the training
hyperparameter block (learning rate 1e-4, decay 0.01, warmup 10000, AdamW,
batch size 256, 50 epochs, masking rate 0.15).  Phase fractions are exact
rationals; config files may write them as strings like "1/3" or as floats.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Mapping, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_CONTEXT_STAGES = (32, 128)
DEFAULT_STAGE_EPOCHS = (3, 10)
DEFAULT_PHASE_FRACTIONS = (Fraction(1, 3), Fraction(2, 3), Fraction(1))
DEFAULT_VOCAB_TARGET = 40000
DEFAULT_SEED = 0

ORDERING_MODES = ("curriculum", "none", "reversed")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Hyperparameters:
    learning_rate: float = 1e-4
    decay: float = 0.01
    warmup_steps: int = 10000
    optimizer: str = "AdamW"
    batch_size: int = 256
    epochs: int = 50
    masking_rate: float = 0.15

    def __post_init__(self) -> None:
        if not 0.0 < self.masking_rate < 1.0:
            raise ConfigError(f"masking rate must be in (0, 1), got {self.masking_rate}")

    def as_dict(self) -> dict[str, Any]:
        return {
            "learning_rate": self.learning_rate,
            "decay": self.decay,
            "warmup_steps": self.warmup_steps,
            "optimizer": self.optimizer,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "masking_rate": self.masking_rate,
        }


@dataclass(frozen=True)
class PipelineConfig:
    corpus_paths: tuple[str, ...] = ()
    corpus_format: str = "plain-lines"
    context_stages: tuple[int, ...] = DEFAULT_CONTEXT_STAGES
    stage_epochs: tuple[int, ...] = DEFAULT_STAGE_EPOCHS
    ordering_mode: str = "curriculum"
    phase_fractions: tuple[Fraction, ...] = DEFAULT_PHASE_FRACTIONS
    vocab_target: int = DEFAULT_VOCAB_TARGET
    seed: int = DEFAULT_SEED
    tail_policy: str = "drop"
    output_dir: str = "out"
    threads: int = 1
    hyperparameters: Hyperparameters = field(default_factory=Hyperparameters)

    def validate(self) -> None:
        if self.ordering_mode not in ORDERING_MODES:
            raise ConfigError(
                f"unknown ordering mode {self.ordering_mode!r}; expected one of {ORDERING_MODES}"
            )
        if not self.context_stages:
            raise ConfigError("at least one context stage is required")
        if any(n < 1 for n in self.context_stages):
            raise ConfigError("context stages must be positive")
        if len(set(self.context_stages)) != len(self.context_stages):
            raise ConfigError("context stages must be distinct (shard names embed the stage)")
        if len(self.stage_epochs) != len(self.context_stages):
            raise ConfigError(
                "stage_epochs must list one epochs-per-phase value per context stage"
            )
        validate_fractions(self.phase_fractions)
        if self.vocab_target < 1:
            raise ConfigError("vocab target must be positive")
        if self.tail_policy not in ("drop", "keep-short"):
            raise ConfigError(f"unknown tail policy {self.tail_policy!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    def echo(self) -> dict[str, Any]:
        """Fully-resolved config for embedding in the manifest."""
        return {
            "corpus_paths": list(self.corpus_paths),
            "corpus_format": self.corpus_format,
            "context_stages": list(self.context_stages),
            "stage_epochs": list(self.stage_epochs),
            "ordering_mode": self.ordering_mode,
            "phase_fractions": [format_fraction(f) for f in self.phase_fractions],
            "vocab_target": self.vocab_target,
            "seed": self.seed,
            "tail_policy": self.tail_policy,
            "output_dir": self.output_dir,
            "threads": self.threads,
            "hyperparameters": self.hyperparameters.as_dict(),
        }


def validate_fractions(fractions: Sequence[Fraction]) -> None:
    if not fractions:
        raise ConfigError("phase fractions must not be empty")
    if any(f <= 0 or f > 1 for f in fractions):
        raise ConfigError("phase fractions must lie in (0, 1]")
    if any(b <= a for a, b in zip(fractions, fractions[1:])):
        raise ConfigError("phase fractions must be strictly increasing")
    if fractions[-1] != 1:
        raise ConfigError("the last phase fraction must be 1")


def parse_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"cannot parse fraction {value!r}") from None
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    raise ConfigError(f"cannot parse fraction {value!r}")


def format_fraction(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def load_config(path: str) -> PipelineConfig:
    """Read a TOML config file; missing keys keep their defaults."""
    with open(path, "rb") as f:
        try:
            data = tomllib.load(f)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return config_from_mapping(data, source=path)


def config_from_mapping(data: Mapping[str, Any], source: str = "<config>") -> PipelineConfig:
    corpus = data.get("corpus", {})
    pipeline = data.get("pipeline", {})
    hyper = data.get("hyperparameters", {})
    for section, known in (
        ("corpus", {"paths", "format"}),
        (
            "pipeline",
            {
                "context_stages",
                "stage_epochs",
                "ordering_mode",
                "phase_fractions",
                "vocab_target",
                "seed",
                "tail_policy",
                "output_dir",
                "threads",
            },
        ),
    ):
        unknown = set(data.get(section, {})) - known
        if unknown:
            raise ConfigError(f"{source}: unknown {section} keys {sorted(unknown)}")

    defaults = PipelineConfig()
    try:
        hyperparameters = Hyperparameters(**hyper)
    except TypeError as exc:
        raise ConfigError(f"{source}: bad hyperparameters section: {exc}") from None

    config = PipelineConfig(
        corpus_paths=tuple(corpus.get("paths", ())),
        corpus_format=corpus.get("format", defaults.corpus_format),
        context_stages=tuple(pipeline.get("context_stages", defaults.context_stages)),
        stage_epochs=tuple(pipeline.get("stage_epochs", defaults.stage_epochs)),
        ordering_mode=pipeline.get("ordering_mode", defaults.ordering_mode),
        phase_fractions=tuple(
            parse_fraction(f)
            for f in pipeline.get("phase_fractions", defaults.phase_fractions)
        ),
        vocab_target=int(pipeline.get("vocab_target", defaults.vocab_target)),
        seed=int(pipeline.get("seed", defaults.seed)),
        tail_policy=pipeline.get("tail_policy", defaults.tail_policy),
        output_dir=pipeline.get("output_dir", defaults.output_dir),
        threads=int(pipeline.get("threads", defaults.threads)),
        hyperparameters=hyperparameters,
    )
    config.validate()
    return config


def override(config: PipelineConfig, **changes: Any) -> PipelineConfig:
    """Apply non-None flag overrides on top of a config."""
    effective = {k: v for k, v in changes.items() if v is not None}
    if "phase_fractions" in effective:
        effective["phase_fractions"] = tuple(
            parse_fraction(f) for f in effective["phase_fractions"]
        )
    updated = replace(config, **effective)
    updated.validate()
    return updated
