"""Socio-linguistic content features and structural features per user."""

from __future__ import annotations

import bisect
import csv
import re
import threading
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, fields
from pathlib import Path
from typing import IO

import hyperscan

from venmo_latent.errors import EmptyProfile
from venmo_latent.feature_patterns import (
    ELLIPSIS,
    EXCITEMENT,
    RAW_PATTERNS,
    TOKEN_FEATURES,
    token_patterns,
)
from venmo_latent.lexicons import load_curse_words, load_laughing
from venmo_latent.models import Corpus, Role, TokenizedPost, TokenKind, TransactionKind, UserProfile
from venmo_latent.tokens import tokenize_post

_REPEATED = re.compile(r"(.)\1{2,}")


@dataclass(frozen=True, slots=True)
class ContentCounts:
    emoji: int = 0
    emoticon: int = 0
    venmo_emoji: int = 0
    repeated_chars: int = 0
    excitement: int = 0
    single_exclaim: int = 0
    ellipses: int = 0
    shouting: int = 0
    laughing: int = 0
    omg: int = 0
    curse: int = 0

    def as_dict(self) -> dict[str, int]:
        return {name: getattr(self, name) for name in CONTENT_FEATURES}


CONTENT_FEATURES: tuple[str, ...] = tuple(f.name for f in fields(ContentCounts))
STRUCTURAL_FEATURES: tuple[str, ...] = ("pct_charge", "avg_likes", "avg_len_chars", "avg_len_tokens")
ACTOR_FEATURE = "pct_as_actor"


def feature_columns(include_pct_as_actor: bool = False) -> list[str]:
    """Stable engineered column order: content averages and presence, then structural columns."""
    columns: list[str] = []
    for name in CONTENT_FEATURES:
        columns.extend((f"{name}_avg", f"{name}_pct"))
    columns.extend(STRUCTURAL_FEATURES)
    if include_pct_as_actor:
        columns.append(ACTOR_FEATURE)
    return columns


FEATURE_COLUMNS: tuple[str, ...] = tuple(feature_columns())


@dataclass(frozen=True, slots=True)
class EngineeredFeatures:
    avg_per_post: dict[str, float]
    pct_posts_containing: dict[str, float]
    pct_charge: float
    avg_likes: float
    avg_len_chars: float
    avg_len_tokens: float
    pct_as_actor: float | None = None

    def as_row(self, include_pct_as_actor: bool = False) -> list[float]:
        row: list[float] = []
        for name in CONTENT_FEATURES:
            row.extend((self.avg_per_post[name], self.pct_posts_containing[name]))
        row.extend((self.pct_charge, self.avg_likes, self.avg_len_chars, self.avg_len_tokens))
        if include_pct_as_actor:
            row.append(self.pct_as_actor if self.pct_as_actor is not None else 0.0)
        return row


def _merge_overlaps(spans: list[tuple[int, int]]) -> list[tuple[int, int]]:
    if not spans:
        return []
    sorted_spans = sorted(spans)
    merged = [sorted_spans[0]]
    for start, end in sorted_spans[1:]:
        if start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def _compile(patterns: list[tuple[bytes, int]], flags: int) -> hyperscan.Database:
    exprs, ids = zip(*patterns)
    db = hyperscan.Database()
    db.compile(
        expressions=list(exprs),
        ids=list(ids),
        elements=len(patterns),
        flags=[flags] * len(patterns),
    )
    return db


class ContentDetector:
    """Compiled detector databases for one pair of lexicons.

    Hyperscan scratch space is per database, so scans are serialised with a lock.
    """

    def __init__(self, *, curse_words_path: Path | None = None, laughing_path: Path | None = None) -> None:
        self.curse_words = load_curse_words(curse_words_path)
        self.laughing = load_laughing(laughing_path)
        self._raw_db = _compile(RAW_PATTERNS, hyperscan.HS_FLAG_SOM_LEFTMOST)
        self._token_db = _compile(
            token_patterns(self.laughing, self.curse_words),
            hyperscan.HS_FLAG_CASELESS | hyperscan.HS_FLAG_MULTILINE,
        )
        self._lock = threading.Lock()

    def _raw_runs(self, note: str) -> dict[int, int]:
        data = note.encode("utf-8", errors="surrogatepass")
        matches: list[tuple[int, int, int]] = []

        def on_match(id: int, from_: int, to: int, flags: int, context: list) -> None:
            context.append((id, from_, to))

        with self._lock:
            self._raw_db.scan(data, match_event_handler=on_match, context=matches)
        runs: dict[int, int] = {}
        for pattern_id in (EXCITEMENT, ELLIPSIS):
            spans = [(start, end) for pid, start, end in matches if pid == pattern_id]
            runs[pattern_id] = len(_merge_overlaps(spans))
        return runs

    def _token_hits(self, words: list[str]) -> dict[str, int]:
        hits = {name: 0 for name in set(TOKEN_FEATURES.values())}
        if not words:
            return hits
        encoded = [word.encode("utf-8", errors="surrogatepass") for word in words]
        ends: list[int] = []
        offset = 0
        for chunk in encoded:
            offset += len(chunk)
            ends.append(offset)
            offset += 1
        matched: set[tuple[str, int]] = set()

        def on_match(id: int, from_: int, to: int, flags: int, context: set) -> None:
            context.add((TOKEN_FEATURES[id], bisect.bisect_left(ends, to)))

        with self._lock:
            self._token_db.scan(b"\n".join(encoded), match_event_handler=on_match, context=matched)
        for name, _ in matched:
            hits[name] += 1
        return hits

    def detect(self, post: TokenizedPost) -> ContentCounts:
        note = post.raw
        kinds = [token.kind for token in post.tokens]
        words = [token.surface for token in post.tokens if token.kind is TokenKind.WORD]
        runs = self._raw_runs(note)
        hits = self._token_hits(words)
        letters = [ch for ch in note if ch.isalpha()]
        stripped = note.rstrip()
        return ContentCounts(
            emoji=kinds.count(TokenKind.EMOJI),
            emoticon=kinds.count(TokenKind.EMOTICON),
            venmo_emoji=kinds.count(TokenKind.SHORTCODE),
            repeated_chars=sum(1 for word in words if _REPEATED.search(word.lower())),
            excitement=runs[EXCITEMENT],
            single_exclaim=int(stripped.endswith("!") and note.count("!") == 1),
            ellipses=note.count("\u2026") + runs[ELLIPSIS],
            shouting=int(len(letters) >= 2 and all(ch.isupper() for ch in letters)),
            laughing=hits["laughing"],
            omg=hits["omg"],
            curse=hits["curse"],
        )


_default_detector: ContentDetector | None = None
_default_lock = threading.Lock()


def default_detector() -> ContentDetector:
    global _default_detector
    with _default_lock:
        if _default_detector is None:
            _default_detector = ContentDetector()
    return _default_detector


def detect_content_features(post: TokenizedPost, *, detector: ContentDetector | None = None) -> ContentCounts:
    """Count the eleven content features of one post.

    Punctuation features (excitement, single exclaim, ellipses, shouting) read the raw note;
    lexical features read word tokens.
    """
    return (detector or default_detector()).detect(post)


def aggregate_user_features(
    profile: UserProfile,
    posts: Sequence[TokenizedPost],
    *,
    include_pct_as_actor: bool = False,
    detector: ContentDetector | None = None,
) -> EngineeredFeatures:
    if not profile.posts:
        raise EmptyProfile(f"user {profile.user_id} has no posts")
    if len(posts) != len(profile.posts):
        raise ValueError(
            f"user {profile.user_id}: {len(posts)} tokenized posts for {len(profile.posts)} transactions"
        )
    n = len(posts)
    counts = [detect_content_features(post, detector=detector) for post in posts]
    avg_per_post: dict[str, float] = {}
    pct: dict[str, float] = {}
    for name in CONTENT_FEATURES:
        values = [getattr(c, name) for c in counts]
        avg_per_post[name] = sum(values) / n
        pct[name] = sum(1 for v in values if v > 0) / n
    transactions = [p.transaction for p in profile.posts]
    return EngineeredFeatures(
        avg_per_post=avg_per_post,
        pct_posts_containing=pct,
        pct_charge=sum(1 for t in transactions if t.kind is TransactionKind.CHARGE) / n,
        avg_likes=sum(t.likes_count for t in transactions) / n,
        avg_len_chars=sum(len(t.note) for t in transactions) / n,
        avg_len_tokens=sum(len(post.tokens) for post in posts) / n,
        pct_as_actor=(
            sum(1 for p in profile.posts if p.role is Role.ACTOR) / n if include_pct_as_actor else None
        ),
    )


def tokenize_profile(profile: UserProfile, **kwargs) -> list[TokenizedPost]:
    return [tokenize_post(post.transaction.note, **kwargs) for post in profile.posts]


def featurize_corpus(
    corpus: Corpus,
    *,
    include_pct_as_actor: bool = False,
    detector: ContentDetector | None = None,
    tokenize_kwargs: dict | None = None,
) -> dict[str, EngineeredFeatures]:
    tokenize_kwargs = tokenize_kwargs or {}
    return {
        user_id: aggregate_user_features(
            profile,
            tokenize_profile(profile, **tokenize_kwargs),
            include_pct_as_actor=include_pct_as_actor,
            detector=detector,
        )
        for user_id, profile in corpus.users.items()
    }


def write_features_csv(
    rows: Iterable[tuple[str, EngineeredFeatures]],
    stream: IO[str],
    *,
    include_pct_as_actor: bool = False,
) -> int:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["user_id", *feature_columns(include_pct_as_actor)])
    count = 0
    for user_id, features in rows:
        writer.writerow([user_id, *(repr(float(v)) for v in features.as_row(include_pct_as_actor))])
        count += 1
    return count
