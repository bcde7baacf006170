"""Single-file training configuration (TOML or JSON)."""

from __future__ import annotations

import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from ..observations import EncoderConfig
from .envs import WorkerEnvConfig
from .ppo import PpoConfig
from .variants import VARIANTS


class BadTrainingConfig(Exception):
    pass


@dataclass
class TrainingConfig:
    variant: str = "bcp"  # bcp | fcp | ha2_bcp | ha2_fcp | selfplay_population | bc
    layouts: list[str] = field(default_factory=lambda: ["cramped_room"])
    out_dir: str = "runs/latest"
    hidden_dim: int = 64
    seed: int = 0
    ppo: PpoConfig = field(default_factory=PpoConfig)
    worker: WorkerEnvConfig = field(default_factory=WorkerEnvConfig)
    worker_share: float = 0.5  # timestep fraction for the executor (ha2 only)
    encoder: Optional[dict] = None  # EncoderConfig overrides for flat variants
    # teammates for bcp/ha2_bcp: directory with a bc checkpoint, or "scripted"
    bc_partner: str = "scripted"
    population_manifest: Optional[str] = None  # required for fcp/ha2_fcp
    bc_dataset: Optional[str] = None  # required for variant == "bc"
    bc_epochs: int = 30

    def __post_init__(self):
        known = VARIANTS + ("selfplay_population", "bc")
        if self.variant not in known:
            raise BadTrainingConfig(
                f"variant {self.variant!r} not one of {known}"
            )
        if not self.layouts:
            raise BadTrainingConfig("at least one layout required")
        if self.variant in ("fcp", "ha2_fcp") and not self.population_manifest:
            raise BadTrainingConfig(f"{self.variant} needs population_manifest")
        if self.variant == "bc" and not self.bc_dataset:
            raise BadTrainingConfig("bc needs bc_dataset")

    def encoder_config(self) -> Optional[EncoderConfig]:
        return EncoderConfig.from_dict(self.encoder) if self.encoder else None

    def to_dict(self) -> dict:
        return asdict(self)


def _build(payload: dict) -> TrainingConfig:
    payload = dict(payload)
    known = {f.name for f in fields(TrainingConfig)}
    unknown = set(payload) - known
    if unknown:
        raise BadTrainingConfig(f"unknown keys: {sorted(unknown)}")
    if "ppo" in payload:
        try:
            payload["ppo"] = PpoConfig(**payload["ppo"])
        except (TypeError, AssertionError) as exc:
            raise BadTrainingConfig(f"bad ppo section: {exc}") from exc
    if "worker" in payload:
        try:
            payload["worker"] = WorkerEnvConfig(**payload["worker"])
        except TypeError as exc:
            raise BadTrainingConfig(f"bad worker section: {exc}") from exc
    try:
        config = TrainingConfig(**payload)
    except TypeError as exc:
        raise BadTrainingConfig(str(exc)) from exc
    if "seed" in payload:
        config.ppo.seed = config.seed
    return config


def load_training_config(path: str | Path) -> TrainingConfig:
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        payload = json.loads(text)
    else:
        payload = tomllib.loads(text)
    return _build(payload)


def save_training_config(config: TrainingConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2))
