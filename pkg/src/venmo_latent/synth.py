"""Planted-signal corpus generator.

Every labeled user is the actor of all of their posts; targets come from a pool of counterparties
whose names are absent from the name corpus, so gender labeling drops them. Each post carries the
user's own class signal with probability ``p_signal`` and the other class's with ``p_noise``.
A share of ``emoji_fraction`` posts are emoji-only, which makes one character the modal note length.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from typing import Any

import numpy as np

from venmo_latent.config import SynthDefaults
from venmo_latent.errors import InvalidSynthSpec
from venmo_latent.label import (
    GENDER_CLASSES,
    ClassLabel,
    GenderGuess,
    LabeledUser,
    LabelTask,
    NameCorpus,
    categorize,
    load_name_corpus,
)
from venmo_latent.models import Transaction, TransactionKind

logger = logging.getLogger(__name__)

CLASS_A_WORDS = ("beer", "golf", "poker", "bro", "grill", "dude")
CLASS_B_WORDS = ("brunch", "wine", "yoga", "latte", "salon", "bestie")
# football, soccer ball, beer mug, video game
CLASS_A_EMOJI = ("\U0001f3c8", "\u26bd", "\U0001f37a", "\U0001f3ae")
# nail polish, cherry blossom, wine glass, bouquet
CLASS_B_EMOJI = ("\U0001f485", "\U0001f338", "\U0001f377", "\U0001f490")

BACKGROUND_WORDS = (
    "for", "the", "rent", "dinner", "lunch", "coffee", "pizza", "ticket", "taco", "movie",
    "trip", "cab", "money", "split", "food", "night", "party", "sushi", "game", "gift",
)
# pizza, party popper, money with wings, car, house, hamburger, hot beverage, birthday cake
BACKGROUND_EMOJI = (
    "\U0001f355", "\U0001f389", "\U0001f4b8", "\U0001f697",
    "\U0001f3e0", "\U0001f354", "\u2615", "\U0001f382",
)
SURNAMES = (
    "Smith", "Johnson", "Williams", "Brown", "Jones", "Garcia", "Miller", "Davis",
    "Rodriguez", "Martinez", "Lopez", "Wilson", "Anderson", "Taylor", "Moore", "Lee",
)

BASE_TIME = datetime(2018, 1, 1, tzinfo=timezone.utc)
SPAN_SECONDS = 365 * 24 * 3600
P_CHARGE = 0.3
P_COMMENT = 0.027
MEAN_LIKES = 0.3


@dataclass(frozen=True)
class SynthSpec:
    n_users_per_class: int = 1000
    posts_min: int = 8
    posts_max: int = 8
    p_signal: float = 0.6
    p_noise: float = 0.1
    emoji_fraction: float = 0.5
    seed: int = 0
    signal_words: tuple[tuple[str, ...], tuple[str, ...]] = (CLASS_A_WORDS, CLASS_B_WORDS)
    signal_emoji: tuple[tuple[str, ...], tuple[str, ...]] = (CLASS_A_EMOJI, CLASS_B_EMOJI)
    background_words: tuple[str, ...] = BACKGROUND_WORDS
    background_emoji: tuple[str, ...] = BACKGROUND_EMOJI

    @classmethod
    def from_config(cls, defaults: SynthDefaults, **overrides: Any) -> "SynthSpec":
        spec = cls(**defaults.model_dump())
        return replace(spec, **{k: v for k, v in overrides.items() if v is not None})

    def validate(self) -> None:
        if self.n_users_per_class < 1:
            raise InvalidSynthSpec("n_users_per_class must be at least 1")
        if not 1 <= self.posts_min <= self.posts_max:
            raise InvalidSynthSpec(
                f"posts range must satisfy 1 <= min <= max, got {self.posts_min}..{self.posts_max}"
            )
        if not 0 <= self.p_noise < self.p_signal <= 1:
            raise InvalidSynthSpec(
                f"probabilities must satisfy 0 <= p_noise < p_signal <= 1, "
                f"got p_noise={self.p_noise}, p_signal={self.p_signal}"
            )
        if not 0 <= self.emoji_fraction <= 1:
            raise InvalidSynthSpec(f"emoji_fraction must be in [0, 1], got {self.emoji_fraction}")
        pools = [*self.signal_words, *self.signal_emoji, self.background_words, self.background_emoji]
        if any(not pool for pool in pools):
            raise InvalidSynthSpec("token pools must be non-empty")
        seen: set[str] = set()
        for pool in pools:
            overlap = seen & set(pool)
            if overlap:
                raise InvalidSynthSpec(f"token pools overlap on {sorted(overlap)}")
            seen |= set(pool)

    def planted(self, label: ClassLabel) -> tuple[str, ...]:
        index = 0 if label is ClassLabel.CLASS_A else 1
        return self.signal_words[index] + self.signal_emoji[index]


@dataclass
class SynthCorpus:
    transactions: list[Transaction]
    labels: list[LabeledUser]
    planted: dict[ClassLabel, tuple[str, ...]] = field(default_factory=dict)


def _class_first_names(names: NameCorpus, region: str = "US") -> dict[ClassLabel, list[str]]:
    by_class: dict[ClassLabel, list[str]] = {label: [] for label in ClassLabel}
    for name in sorted(names.counts):
        fraction = names.male_fraction(name, region)
        if fraction is None:
            continue
        guess = categorize(fraction)
        if guess in (GenderGuess.MALE, GenderGuess.FEMALE):
            by_class[GENDER_CLASSES[guess]].append(name.capitalize())
    return by_class


def _zipf_weights(n: int) -> np.ndarray:
    weights = 1.0 / np.arange(1, n + 1)
    return weights / weights.sum()


class _NoteWriter:
    def __init__(self, spec: SynthSpec, rng: np.random.Generator) -> None:
        self.spec = spec
        self.rng = rng
        self.word_weights = _zipf_weights(len(spec.background_words))
        self.emoji_weights = _zipf_weights(len(spec.background_emoji))

    def _pick(self, pool: tuple[str, ...], weights: np.ndarray | None = None) -> str:
        return pool[int(self.rng.choice(len(pool), p=weights))]

    def note(self, own: int) -> str:
        spec, rng = self.spec, self.rng
        other = 1 - own
        with_own = rng.random() < spec.p_signal
        with_other = rng.random() < spec.p_noise
        if rng.random() < spec.emoji_fraction:
            pieces = []
            if with_own:
                pieces.append(self._pick(spec.signal_emoji[own]))
            if with_other:
                pieces.append(self._pick(spec.signal_emoji[other]))
            if not pieces:
                pieces.append(self._pick(spec.background_emoji, self.emoji_weights))
            rng.shuffle(pieces)
            return "".join(pieces)
        # geometric word count keeps text notes short; capped at 5
        n_words = min(5, int(rng.geometric(0.5)))
        words = [self._pick(spec.background_words, self.word_weights) for _ in range(n_words)]
        for chosen, index in ((with_own, own), (with_other, other)):
            if chosen:
                words.insert(int(rng.integers(0, len(words) + 1)), self._pick(spec.signal_words[index]))
        return " ".join(words)


def generate_synthetic_corpus(spec: SynthSpec, *, names: NameCorpus | None = None) -> SynthCorpus:
    """Generate a labeled corpus whose class signal is known by construction. Deterministic per seed."""
    spec.validate()
    first_names = _class_first_names(names if names is not None else load_name_corpus())
    for label, pool in first_names.items():
        if not pool:
            raise InvalidSynthSpec(f"name corpus has no unambiguous first names for {label.value}")
    rng = np.random.default_rng(spec.seed)
    writer = _NoteWriter(spec, rng)

    n_users = 2 * spec.n_users_per_class
    n_pals = max(50, n_users // 4)
    pals = [(f"p{i:05d}", f"Pal {i}") for i in range(1, n_pals + 1)]

    transactions: list[Transaction] = []
    labels: list[LabeledUser] = []
    for i in range(n_users):
        label = ClassLabel.CLASS_A if i % 2 == 0 else ClassLabel.CLASS_B
        own = 0 if label is ClassLabel.CLASS_A else 1
        user_id = f"u{i + 1:05d}"
        first = first_names[label][int(rng.integers(len(first_names[label])))]
        display = f"{first} {SURNAMES[int(rng.integers(len(SURNAMES)))]}"
        labels.append(LabeledUser(user_id, label, LabelTask.GENDER))
        for _ in range(int(rng.integers(spec.posts_min, spec.posts_max + 1))):
            pal_id, pal_name = pals[int(rng.integers(n_pals))]
            transactions.append(
                Transaction(
                    id=f"t{len(transactions) + 1:07d}",
                    created_at=BASE_TIME + timedelta(seconds=int(rng.integers(SPAN_SECONDS))),
                    note=writer.note(own),
                    kind=TransactionKind.CHARGE if rng.random() < P_CHARGE else TransactionKind.PAYMENT,
                    actor_id=user_id,
                    actor_name=display,
                    target_id=pal_id,
                    target_name=pal_name,
                    likes_count=int(rng.poisson(MEAN_LIKES)),
                    comments_count=int(rng.random() < P_COMMENT),
                )
            )
    logger.info("synthesized %d transactions for %d labeled users", len(transactions), len(labels))
    return SynthCorpus(
        transactions=transactions,
        labels=labels,
        planted={label: spec.planted(label) for label in ClassLabel},
    )
