"""Per-user documents and the fit/transform feature pipeline shared by train, predict and evaluate."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import asdict, dataclass, field, replace
from typing import Any

import numpy as np
from scipy import sparse

from venmo_latent.classifiers import FeatureMetadata
from venmo_latent.config import LatentConfig
from venmo_latent.features import ContentDetector, EngineeredFeatures, aggregate_user_features, feature_columns
from venmo_latent.models import Corpus, TokenizedPost
from venmo_latent.tokens import tokenize_post
from venmo_latent.vectorize import (
    ScalerStats,
    Vocabulary,
    assemble_feature_matrix,
    fit_vocabulary,
    text_matrix,
)


@dataclass(frozen=True, slots=True)
class UserDocument:
    user_id: str
    posts: tuple[TokenizedPost, ...]
    engineered: EngineeredFeatures


@dataclass(frozen=True)
class PipelineSettings:
    vectorizer: str = "tfidf"
    n_range: tuple[int, int] = (1, 2)
    min_df: int = 2
    normalize_counts: bool = False
    keep_numbers: bool = True
    keep_punct: bool = True
    use_engineered: bool = True
    include_pct_as_actor: bool = False

    @classmethod
    def from_config(cls, config: LatentConfig, **overrides: Any) -> "PipelineSettings":
        settings = cls(
            vectorizer=config.vectorize.vectorizer,
            n_range=tuple(config.vectorize.n_range),  # type: ignore[arg-type]
            min_df=config.vectorize.min_df,
            normalize_counts=config.vectorize.normalize_counts,
            keep_numbers=config.tokenize.keep_numbers,
            keep_punct=config.tokenize.keep_punct,
            include_pct_as_actor=config.features.include_pct_as_actor,
        )
        return replace(settings, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["n_range"] = list(self.n_range)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PipelineSettings":
        values = dict(data)
        values["n_range"] = tuple(values.get("n_range", (1, 2)))
        return cls(**values)


def build_documents(
    corpus: Corpus,
    user_ids: Sequence[str] | None = None,
    *,
    include_pct_as_actor: bool = False,
    detector: ContentDetector | None = None,
    tokenize_kwargs: dict[str, Any] | None = None,
) -> list[UserDocument]:
    """Tokenize and featurize users once; nothing here is fitted, so documents are fold-safe."""
    tokenize_kwargs = tokenize_kwargs or {}
    ids = list(user_ids) if user_ids is not None else list(corpus.users)
    documents = []
    for user_id in ids:
        profile = corpus.users[user_id]
        posts = tuple(tokenize_post(post.transaction.note, **tokenize_kwargs) for post in profile.posts)
        engineered = aggregate_user_features(
            profile, posts, include_pct_as_actor=include_pct_as_actor, detector=detector
        )
        documents.append(UserDocument(user_id, posts, engineered))
    return documents


@dataclass
class FeaturePipeline:
    settings: PipelineSettings = field(default_factory=PipelineSettings)
    vocab: Vocabulary | None = None
    scaler: ScalerStats | None = None

    @property
    def engineered_columns(self) -> list[str]:
        if not self.settings.use_engineered:
            return []
        return feature_columns(self.settings.include_pct_as_actor)

    def _engineered_rows(self, documents: Sequence[UserDocument]) -> np.ndarray | None:
        if not self.settings.use_engineered:
            return None
        width = len(self.engineered_columns)
        rows = [doc.engineered.as_row(self.settings.include_pct_as_actor) for doc in documents]
        return np.asarray(rows, dtype=np.float64).reshape(len(documents), width)

    def _text(self, documents: Sequence[UserDocument]) -> sparse.csr_matrix:
        assert self.vocab is not None
        return text_matrix(
            [doc.posts for doc in documents],
            self.vocab,
            self.settings.vectorizer,
            normalize_counts=self.settings.normalize_counts,
        )

    def fit_transform(self, documents: Sequence[UserDocument]) -> sparse.csr_matrix:
        """Fit vocabulary and scaler on these documents only, then transform them."""
        self.vocab = fit_vocabulary(
            [doc.posts for doc in documents],
            self.settings.n_range,
            self.settings.min_df,
            keep_numbers=self.settings.keep_numbers,
            keep_punct=self.settings.keep_punct,
        )
        assembled = assemble_feature_matrix(
            self._text(documents), self._engineered_rows(documents), None, self.engineered_columns
        )
        self.scaler = assembled.scaler
        return assembled.matrix

    def transform(self, documents: Sequence[UserDocument]) -> sparse.csr_matrix:
        if self.vocab is None:
            raise ValueError("pipeline is not fitted")
        scaler = self.scaler if self.scaler is not None and len(self.scaler) else None
        rows = self._engineered_rows(documents)
        if scaler is None and rows is not None and rows.shape[1]:
            raise ValueError("pipeline has engineered columns but no fitted scaler")
        return assemble_feature_matrix(self._text(documents), rows, scaler, self.engineered_columns).matrix

    @property
    def feature_metadata(self) -> FeatureMetadata:
        terms = tuple(self.vocab.term_list) if self.vocab is not None else ()
        return FeatureMetadata(text_terms=terms, engineered=tuple(self.engineered_columns))

    def to_dict(self) -> dict[str, Any]:
        return {
            "settings": self.settings.to_dict(),
            "vocabulary": self.vocab.to_dict() if self.vocab is not None else None,
            "scaler": self.scaler.to_dict() if self.scaler is not None else None,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FeaturePipeline":
        return cls(
            settings=PipelineSettings.from_dict(data["settings"]),
            vocab=Vocabulary.from_dict(data["vocabulary"]) if data.get("vocabulary") else None,
            scaler=ScalerStats.from_dict(data["scaler"]) if data.get("scaler") else None,
        )
