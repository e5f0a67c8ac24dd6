"""Versioned JSON model container."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from venmo_latent.classifiers import MODEL_CLASSES, FeatureMetadata, Model
from venmo_latent.errors import CorruptError, VersionError
from venmo_latent.utils import atomic_write_text

MAGIC = "VENMO-LATENT-MODEL"
FORMAT_VERSION = 1


@dataclass
class SavedModel:
    model: Model
    pipeline: dict[str, Any] = field(default_factory=dict)


def model_to_dict(model: Model, pipeline: dict[str, Any] | None = None) -> dict[str, Any]:
    return {
        "magic": MAGIC,
        "version": FORMAT_VERSION,
        "kind": model.kind,
        "hyperparameters": model.hyperparameters(),
        "metadata": model.metadata.to_dict(),
        "params": model.to_params(),
        "pipeline": pipeline or {},
    }


def save_model(model: Model, path: Path, *, pipeline: dict[str, Any] | None = None) -> None:
    # repr-exact floats keep predictions bit-identical after a reload
    atomic_write_text(path, json.dumps(model_to_dict(model, pipeline), ensure_ascii=False) + "\n")


def model_from_dict(data: Any) -> SavedModel:
    if not isinstance(data, dict) or data.get("magic") != MAGIC:
        raise VersionError("not a venmo-latent model file (bad magic)")
    if data.get("version") != FORMAT_VERSION:
        raise VersionError(f"unsupported model format version {data.get('version')!r}, expected {FORMAT_VERSION}")
    kind = data.get("kind")
    if kind not in MODEL_CLASSES:
        raise CorruptError(f"unknown model kind {kind!r}")
    try:
        metadata = FeatureMetadata.from_dict(data["metadata"])
        model = MODEL_CLASSES[kind].from_params(data["params"], data["hyperparameters"], metadata)
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptError(f"model file is incomplete: {exc}") from exc
    return SavedModel(model=model, pipeline=data.get("pipeline") or {})


def load_model(path: Path) -> SavedModel:
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorruptError(f"cannot read model {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise CorruptError(f"model {path} is not UTF-8 JSON") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CorruptError(f"model {path} is truncated or corrupt: {exc.msg}") from exc
    return model_from_dict(data)
