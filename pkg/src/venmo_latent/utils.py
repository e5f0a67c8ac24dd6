from __future__ import annotations

import json
import re
from datetime import datetime, timezone
from pathlib import Path

import numpy as np


def slugify(value: str, default: str = "user", max_len: int = 40) -> str:
    lowered = re.sub(r"\s+", "-", value.strip().lower())
    cleaned = re.sub(r"[^a-z0-9._-]+", "-", lowered).strip("-._")
    if not cleaned:
        cleaned = default
    return cleaned[:max_len].rstrip("-._") or default


def as_utc(value: datetime) -> datetime:
    if value.tzinfo is None:
        return value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


def parse_iso_datetime(value: str) -> datetime:
    return as_utc(datetime.fromisoformat(value.replace("Z", "+00:00")))


def format_iso_datetime(value: datetime) -> str:
    return value.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def now_iso() -> str:
    return format_iso_datetime(datetime.now(tz=timezone.utc))


def atomic_write_text(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_suffix(path.suffix + ".tmp")
    tmp_path.write_text(content, encoding="utf-8")
    tmp_path.replace(path)


def atomic_write_json(path: Path, content: dict) -> None:
    serialized = json.dumps(content, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    atomic_write_text(path, serialized)


STAGES = ("synth", "balance", "folds", "models")


def stage_seeds(root: int) -> dict[str, int]:
    """Independent seeds per pipeline stage, spawned from one root seed in stage order."""
    children = np.random.SeedSequence(root).spawn(len(STAGES))
    return {stage: int(child.generate_state(1)[0]) for stage, child in zip(STAGES, children)}
