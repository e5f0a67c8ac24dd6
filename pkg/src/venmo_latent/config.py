from __future__ import annotations

import json
import tomllib
from pathlib import Path
from typing import Any

from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from venmo_latent.errors import ConfigError

ENV_PREFIX = "VENMO_LATENT_"


class CorpusDefaults(BaseModel):
    strict: bool = False
    min_posts: int = Field(default=5, ge=1)


class TokenizeDefaults(BaseModel):
    keep_numbers: bool = True
    keep_punct: bool = True
    emoticons_path: Path | None = None
    lemma_exceptions_path: Path | None = None


class FeaturesDefaults(BaseModel):
    include_pct_as_actor: bool = False
    curse_words_path: Path | None = None
    laughing_path: Path | None = None


class VectorizeDefaults(BaseModel):
    vectorizer: str = "tfidf"
    n_range: tuple[int, int] = (1, 2)
    min_df: int = Field(default=2, ge=1)
    normalize_counts: bool = False

    @field_validator("vectorizer")
    @classmethod
    def _known_vectorizer(cls, value: str) -> str:
        if value not in {"count", "tfidf"}:
            raise ValueError(f"unknown vectorizer: {value}")
        return value

    @field_validator("n_range")
    @classmethod
    def _valid_range(cls, value: tuple[int, int]) -> tuple[int, int]:
        low, high = value
        if not 1 <= low <= high <= 3:
            raise ValueError(f"n_range must satisfy 1 <= low <= high <= 3, got {value}")
        return value


class LabelDefaults(BaseModel):
    region: str = "US"
    names_path: Path | None = None
    politics_labels_path: Path | None = None


class SvmDefaults(BaseModel):
    C: float = Field(default=1.0, gt=0)
    tol: float = Field(default=1e-3, gt=0)
    max_iter: int = Field(default=200_000, ge=1)


class MlpDefaults(BaseModel):
    hidden: int = Field(default=64, ge=1)
    learning_rate: float = Field(default=0.01, gt=0)
    epochs: int = Field(default=200, ge=1)
    batch_size: int = Field(default=32, ge=1)


class GbdtDefaults(BaseModel):
    rounds: int = Field(default=200, ge=0)
    max_depth: int = Field(default=3, ge=1)
    learning_rate: float = Field(default=0.1, ge=0)


class GridDefaults(BaseModel):
    vectorizer: list[str] = Field(default_factory=lambda: ["count", "tfidf"])
    n_range: list[tuple[int, int]] = Field(default_factory=lambda: [(1, 1), (1, 2)])
    C: list[float] = Field(default_factory=lambda: [0.01, 0.1, 1.0, 10.0, 100.0])
    classifier: list[str] = Field(default_factory=lambda: ["svm", "mlp", "gbdt"])
    overrides: dict[str, dict[str, Any]] = Field(default_factory=dict)

    @field_validator("vectorizer")
    @classmethod
    def _known_vectorizers(cls, value: list[str]) -> list[str]:
        unknown = [v for v in value if v not in {"count", "tfidf"}]
        if unknown:
            raise ValueError(f"unknown vectorizer(s): {unknown}")
        return value

    @field_validator("n_range")
    @classmethod
    def _valid_ranges(cls, value: list[tuple[int, int]]) -> list[tuple[int, int]]:
        for low, high in value:
            if not 1 <= low <= high <= 3:
                raise ValueError(f"n_range must satisfy 1 <= low <= high <= 3, got {(low, high)}")
        return value

    @field_validator("classifier")
    @classmethod
    def _known_classifiers(cls, value: list[str]) -> list[str]:
        unknown = [v for v in value if v not in {"svm", "mlp", "gbdt"}]
        if unknown:
            raise ValueError(f"unknown classifier(s): {unknown}")
        return value

    @field_validator("C")
    @classmethod
    def _positive_c(cls, value: list[float]) -> list[float]:
        if any(c <= 0 for c in value):
            raise ValueError("C values must be positive")
        return value


class EvaluateDefaults(BaseModel):
    folds: int = Field(default=5, ge=2)
    seed: int = 0
    balance: bool = True
    workers: int = Field(default=4, ge=1)
    grid: GridDefaults = Field(default_factory=GridDefaults)


class HarvestDefaults(BaseModel):
    endpoint: str = "http://127.0.0.1:8765"
    pages: int = Field(default=1, ge=1)
    poll_interval: float = Field(default=900.0, ge=0)
    workers: int = Field(default=8, ge=1)
    max_retries: int = Field(default=5, ge=0)
    backoff_base: float = Field(default=0.5, ge=0)
    rate_limit: float = Field(default=10.0, ge=0)
    burst: int = Field(default=10, ge=1)
    timeout: float = Field(default=10.0, gt=0)


class MockDefaults(BaseModel):
    host: str = "127.0.0.1"
    port: int = Field(default=8765, ge=0)
    page_size: int = Field(default=20, ge=1)
    refresh_interval: float = Field(default=900.0, ge=0)
    rate_limit: float = Field(default=0.0, ge=0)
    burst: int = Field(default=10, ge=1)


class SynthDefaults(BaseModel):
    n_users_per_class: int = Field(default=1000, ge=1)
    posts_min: int = Field(default=8, ge=1)
    posts_max: int = Field(default=8, ge=1)
    p_signal: float = 0.6
    p_noise: float = 0.1
    emoji_fraction: float = Field(default=0.5, ge=0, le=1)
    seed: int = 0


class LatentConfig(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix=ENV_PREFIX,
        env_nested_delimiter="__",
        extra="ignore",
    )

    data_dir: Path | None = None
    corpus: CorpusDefaults = Field(default_factory=CorpusDefaults)
    tokenize: TokenizeDefaults = Field(default_factory=TokenizeDefaults)
    features: FeaturesDefaults = Field(default_factory=FeaturesDefaults)
    vectorize: VectorizeDefaults = Field(default_factory=VectorizeDefaults)
    label: LabelDefaults = Field(default_factory=LabelDefaults)
    svm: SvmDefaults = Field(default_factory=SvmDefaults)
    mlp: MlpDefaults = Field(default_factory=MlpDefaults)
    gbdt: GbdtDefaults = Field(default_factory=GbdtDefaults)
    evaluate: EvaluateDefaults = Field(default_factory=EvaluateDefaults)
    harvest: HarvestDefaults = Field(default_factory=HarvestDefaults)
    mock: MockDefaults = Field(default_factory=MockDefaults)
    synth: SynthDefaults = Field(default_factory=SynthDefaults)

    @classmethod
    def load(cls, config_path: Path | None = None) -> "LatentConfig":
        """Build the effective config: defaults, then environment, then ``config_path``.

        Without an explicit path, ``<data_dir>/config.toml`` is used when present; a broken
        implicit file falls back to defaults. An explicit path that cannot be read or validated
        raises ``ConfigError``.
        """
        if config_path is None:
            settings = cls()
            implicit = settings.data_dir / "config.toml" if settings.data_dir else None
            if implicit is None or not implicit.exists():
                return settings
            try:
                return cls(**_read_config_file(implicit))
            except (ConfigError, ValidationError):
                return settings
        data = _read_config_file(config_path)
        try:
            return cls(**data)
        except ValidationError as exc:
            raise ConfigError(f"invalid config {config_path}: {exc}") from exc

    def resolve_path(self, path: Path) -> Path:
        path = path.expanduser()
        if path.is_absolute() or self.data_dir is None:
            return path
        return self.data_dir.expanduser() / path


def _read_config_file(config_path: Path) -> dict:
    try:
        raw = config_path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
    try:
        if config_path.suffix == ".toml":
            data = tomllib.loads(raw.decode("utf-8"))
        else:
            data = json.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config {config_path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {config_path} must contain an object at the top level")
    return data
