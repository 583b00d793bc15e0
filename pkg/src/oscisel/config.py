"""Run configuration files (JSON, schema "v1").

Keys match RunConfig field names exactly, plus out_dir, an optional group
name for report aggregation, and the schema version. Unknown keys are
rejected so typos fail loudly. See docs/config.md.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .trainer import RunConfig

SCHEMA_VERSION = "v1"

_REQUIRED = {
    "schema_version", "dataset", "model", "epochs", "batch_size",
    "learning_rate", "target_ratio", "out_dir",
}
_OPTIONAL = {
    "margin", "momentum", "policy", "schedule_mode", "lr_schedule",
    "seed", "eval_every", "probe_every", "name",
}


@dataclass(frozen=True)
class LoadedConfig:
    run: RunConfig
    out_dir: Path
    name: str
    raw: dict


def output_root() -> Path:
    return Path(os.environ.get("OSCISEL_OUT", "out"))


def parse_config(doc: dict, base_dir: Path | None = None) -> LoadedConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    keys = set(doc)
    missing = _REQUIRED - keys
    if missing:
        raise ConfigError(f"missing required keys: {sorted(missing)}")
    unknown = keys - _REQUIRED - _OPTIONAL
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {doc['schema_version']!r}, "
            f"want {SCHEMA_VERSION!r}"
        )
    run = RunConfig(
        dataset=doc["dataset"],
        model=doc["model"],
        epochs=doc["epochs"],
        batch_size=doc["batch_size"],
        learning_rate=doc["learning_rate"],
        target_ratio=doc["target_ratio"],
        margin=doc.get("margin", 0.05),
        momentum=doc.get("momentum", 0.0),
        policy=doc.get("policy", "hard_mining"),
        schedule_mode=doc.get("schedule_mode", "oscillatory"),
        lr_schedule=doc.get("lr_schedule", "constant"),
        seed=doc.get("seed", 0),
        eval_every=doc.get("eval_every", 1),
        probe_every=doc.get("probe_every", 0),
    )
    out_dir = Path(doc["out_dir"])
    if not out_dir.is_absolute():
        root = base_dir if base_dir is not None else output_root()
        out_dir = root / out_dir
    name = doc.get("name", "run")
    return LoadedConfig(run=run, out_dir=out_dir, name=name, raw=doc)


def load_config(path) -> LoadedConfig:
    path = Path(path)
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config(doc)
