"""Post-wise n-gram vocabulary, count and TF-IDF user matrices, engineered-feature assembly."""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import IO, Any

import numpy as np
from scipy import sparse
from scipy.io import mmwrite
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.preprocessing import normalize

from venmo_latent.errors import DimensionMismatch, EmptyCorpus, RowMismatch
from venmo_latent.models import TokenizedPost
from venmo_latent.tokens import generate_ngrams
from venmo_latent.utils import atomic_write_json

UserPosts = Sequence[TokenizedPost]


@dataclass(frozen=True)
class Vocabulary:
    terms: dict[str, int]
    document_frequency: tuple[int, ...]
    n_documents: int
    n_range: tuple[int, int]
    min_df: int
    keep_numbers: bool = True
    keep_punct: bool = True

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def term_list(self) -> list[str]:
        ordered = [""] * len(self.terms)
        for term, index in self.terms.items():
            ordered[index] = term
        return ordered

    def df(self, term: str) -> int:
        return self.document_frequency[self.terms[term]]

    def idf(self) -> np.ndarray:
        df = np.asarray(self.document_frequency, dtype=np.float64)
        return np.log((1.0 + self.n_documents) / (1.0 + df)) + 1.0

    def metadata(self) -> dict[str, Any]:
        return {
            "n_documents": self.n_documents,
            "n_range": list(self.n_range),
            "min_df": self.min_df,
            "keep_numbers": self.keep_numbers,
            "keep_punct": self.keep_punct,
        }

    def to_dict(self) -> dict[str, Any]:
        return {**self.metadata(), "terms": self.term_list, "df": list(self.document_frequency)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Vocabulary":
        terms = list(data["terms"])
        return cls(
            terms={term: index for index, term in enumerate(terms)},
            document_frequency=tuple(int(v) for v in data["df"]),
            n_documents=int(data["n_documents"]),
            n_range=tuple(data["n_range"]),  # type: ignore[arg-type]
            min_df=int(data["min_df"]),
            keep_numbers=bool(data.get("keep_numbers", True)),
            keep_punct=bool(data.get("keep_punct", True)),
        )

    def to_tsv(self, stream: IO[str]) -> None:
        stream.write("term\tindex\tdf\n")
        for index, term in enumerate(self.term_list):
            stream.write(f"{term}\t{index}\t{self.document_frequency[index]}\n")

    @classmethod
    def from_tsv(cls, stream: IO[str], metadata: dict[str, Any]) -> "Vocabulary":
        rows: list[tuple[int, str, int]] = []
        for line_number, line in enumerate(stream, 1):
            line = line.rstrip("\n")
            if line_number == 1 and line == "term\tindex\tdf":
                continue
            if not line:
                continue
            term, index, df = line.split("\t")
            rows.append((int(index), term, int(df)))
        rows.sort()
        if [index for index, _, _ in rows] != list(range(len(rows))):
            raise ValueError("vocabulary indices must be contiguous from 0")
        return cls.from_dict({**metadata, "terms": [t for _, t, _ in rows], "df": [d for _, _, d in rows]})


def _user_ngrams(posts: UserPosts, *, n_range: tuple[int, int], keep_numbers: bool, keep_punct: bool) -> list[str]:
    grams: list[str] = []
    for post in posts:
        grams.extend(generate_ngrams(post, n_range, keep_numbers=keep_numbers, keep_punct=keep_punct))
    return grams


def _analyzer(n_range: tuple[int, int], keep_numbers: bool, keep_punct: bool):
    return partial(_user_ngrams, n_range=n_range, keep_numbers=keep_numbers, keep_punct=keep_punct)


def fit_vocabulary(
    user_posts: Sequence[UserPosts],
    n_range: tuple[int, int] = (1, 2),
    min_df: int = 2,
    *,
    keep_numbers: bool = True,
    keep_punct: bool = True,
) -> Vocabulary:
    """Fit the n-gram vocabulary over users-as-documents.

    N-grams are generated per post and then pooled per user, so no n-gram spans two posts.
    Columns are ordered lexicographically by term.
    """
    if not user_posts:
        raise EmptyCorpus("cannot fit a vocabulary on zero users")
    if min_df < 1:
        raise ValueError(f"min_df must be >= 1, got {min_df}")
    low, high = n_range
    if not 1 <= low <= high <= 3:
        raise ValueError(f"n_range must satisfy 1 <= low <= high <= 3, got {n_range}")
    vectorizer = CountVectorizer(analyzer=_analyzer(n_range, keep_numbers, keep_punct))
    empty = Vocabulary({}, (), len(user_posts), n_range, min_df, keep_numbers, keep_punct)
    try:
        counts = vectorizer.fit_transform(user_posts)
    except ValueError:
        # sklearn refuses an empty vocabulary
        return empty
    df = np.diff(sparse.csc_matrix(counts).indptr)
    names = vectorizer.get_feature_names_out()
    kept = [(str(term), int(d)) for term, d in zip(names, df) if d >= min_df]
    kept.sort()
    return Vocabulary(
        terms={term: index for index, (term, _) in enumerate(kept)},
        document_frequency=tuple(d for _, d in kept),
        n_documents=len(user_posts),
        n_range=tuple(n_range),  # type: ignore[arg-type]
        min_df=min_df,
        keep_numbers=keep_numbers,
        keep_punct=keep_punct,
    )


def count_transform(user_posts: Sequence[UserPosts], vocab: Vocabulary) -> sparse.csr_matrix:
    """Total occurrences of each vocabulary term across a user's posts; unseen terms are ignored."""
    if not vocab.terms or not user_posts:
        return sparse.csr_matrix((len(user_posts), len(vocab)), dtype=np.float64)
    vectorizer = CountVectorizer(
        analyzer=_analyzer(vocab.n_range, vocab.keep_numbers, vocab.keep_punct),
        vocabulary=vocab.terms,
        dtype=np.float64,
    )
    matrix = sparse.csr_matrix(vectorizer.transform(user_posts))
    matrix.eliminate_zeros()
    return matrix


def tfidf_transform(counts: sparse.spmatrix, vocab: Vocabulary) -> sparse.csr_matrix:
    """Smooth idf weighting, ``ln((1+N)/(1+df)) + 1``, followed by L2 row normalisation."""
    if counts.shape[1] != len(vocab):
        raise DimensionMismatch(f"count matrix has {counts.shape[1]} columns, vocabulary has {len(vocab)}")
    if not len(vocab):
        return sparse.csr_matrix(counts.shape, dtype=np.float64)
    weighted = sparse.csr_matrix(counts, dtype=np.float64) @ sparse.diags(vocab.idf(), format="csr")
    matrix = sparse.csr_matrix(normalize(weighted, norm="l2", axis=1))
    matrix.eliminate_zeros()
    return matrix


def l2_rows(matrix: sparse.spmatrix) -> sparse.csr_matrix:
    out = sparse.csr_matrix(normalize(sparse.csr_matrix(matrix, dtype=np.float64), norm="l2", axis=1))
    out.eliminate_zeros()
    return out


def text_matrix(
    user_posts: Sequence[UserPosts], vocab: Vocabulary, vectorizer: str, *, normalize_counts: bool = False
) -> sparse.csr_matrix:
    counts = count_transform(user_posts, vocab)
    if vectorizer == "tfidf":
        return tfidf_transform(counts, vocab)
    if vectorizer == "count":
        return l2_rows(counts) if normalize_counts else counts
    raise ValueError(f"unknown vectorizer: {vectorizer}")


@dataclass(frozen=True)
class ScalerStats:
    columns: tuple[str, ...] = ()
    mean: tuple[float, ...] = ()
    std: tuple[float, ...] = ()

    def __len__(self) -> int:
        return len(self.columns)

    @classmethod
    def fit(cls, rows: np.ndarray, columns: Sequence[str]) -> "ScalerStats":
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != len(columns):
            raise DimensionMismatch(f"{rows.shape} engineered rows for {len(columns)} columns")
        if rows.shape[0] == 0:
            zeros = tuple(0.0 for _ in columns)
            return cls(tuple(columns), zeros, zeros)
        return cls(
            tuple(columns),
            tuple(float(v) for v in rows.mean(axis=0)),
            tuple(float(v) for v in rows.std(axis=0)),
        )

    def apply(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != len(self.columns):
            raise DimensionMismatch(f"expected {len(self.columns)} engineered columns, got {rows.shape[-1]}")
        mean = np.asarray(self.mean)
        std = np.asarray(self.std)
        scaled = rows.copy()
        active = std > 0
        scaled[:, active] = (rows[:, active] - mean[active]) / std[active]
        return scaled

    def to_dict(self) -> dict[str, Any]:
        return {"columns": list(self.columns), "mean": list(self.mean), "std": list(self.std)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScalerStats":
        return cls(tuple(data["columns"]), tuple(data["mean"]), tuple(data["std"]))


@dataclass
class AssembledMatrix:
    matrix: sparse.csr_matrix
    scaler: ScalerStats = field(default_factory=ScalerStats)


def assemble_feature_matrix(
    text: sparse.spmatrix,
    engineered: np.ndarray | Sequence[Sequence[float]] | None,
    scaler: ScalerStats | None = None,
    columns: Sequence[str] = (),
) -> AssembledMatrix:
    """Append z-scored engineered columns after the text columns.

    Without ``scaler`` the statistics are fitted on these rows; pass training statistics when
    transforming held-out rows.
    """
    text = sparse.csr_matrix(text, dtype=np.float64)
    if engineered is None:
        return AssembledMatrix(text, ScalerStats())
    rows = np.asarray(engineered, dtype=np.float64)
    if rows.size == 0 and rows.ndim < 2:
        return AssembledMatrix(text, ScalerStats())
    if rows.ndim != 2:
        raise DimensionMismatch(f"engineered rows must be two-dimensional, got shape {rows.shape}")
    if rows.shape[0] != text.shape[0]:
        raise RowMismatch(f"{text.shape[0]} text rows but {rows.shape[0]} engineered rows")
    if rows.shape[1] == 0:
        return AssembledMatrix(text, ScalerStats())
    if scaler is None:
        names = list(columns) or [f"engineered_{i}" for i in range(rows.shape[1])]
        scaler = ScalerStats.fit(rows, names)
    scaled = scaler.apply(rows)
    matrix = sparse.hstack([text, sparse.csr_matrix(scaled)], format="csr")
    matrix.eliminate_zeros()
    return AssembledMatrix(matrix, scaler)


def export_matrix(matrix: sparse.spmatrix, vocab: Vocabulary, path: Path, *, columns: Sequence[str] = ()) -> Path:
    """Write Matrix Market coordinate text plus a ``<path>.vocab.json`` sidecar."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as handle:
        mmwrite(handle, sparse.coo_matrix(matrix))
    sidecar = path.with_name(path.name + ".vocab.json")
    atomic_write_json(sidecar, {**vocab.to_dict(), "engineered_columns": list(columns)})
    return sidecar


def write_vocabulary(path: Path, vocab: Vocabulary) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        vocab.to_tsv(handle)
    atomic_write_json(path.with_name(path.name + ".json"), vocab.metadata())


def read_vocabulary(path: Path) -> Vocabulary:
    metadata = json.loads(path.with_name(path.name + ".json").read_text(encoding="utf-8"))
    with path.open(encoding="utf-8") as handle:
        return Vocabulary.from_tsv(handle, metadata)
