from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import StrEnum


class TransactionKind(StrEnum):
    PAYMENT = "payment"
    CHARGE = "charge"


class Audience(StrEnum):
    PUBLIC = "public"
    FRIENDS = "friends"
    PRIVATE = "private"


class Role(StrEnum):
    ACTOR = "actor"
    TARGET = "target"


class TokenKind(StrEnum):
    WORD = "word"
    EMOJI = "emoji"
    SHORTCODE = "shortcode"
    EMOTICON = "emoticon"
    NUMBER = "number"
    PUNCT = "punct"


@dataclass(frozen=True, slots=True)
class Transaction:
    id: str
    created_at: datetime
    note: str
    kind: TransactionKind
    actor_id: str
    actor_name: str
    target_id: str
    target_name: str
    likes_count: int = 0
    comments_count: int = 0
    audience: Audience = Audience.PUBLIC

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("transaction id must be non-empty")
        if self.actor_id == self.target_id:
            raise ValueError(f"transaction {self.id}: actor and target are the same user")
        if self.likes_count < 0 or self.comments_count < 0:
            raise ValueError(f"transaction {self.id}: negative like/comment count")

    @property
    def sort_key(self) -> tuple[datetime, str]:
        return (self.created_at, self.id)


@dataclass(frozen=True, slots=True)
class Post:
    transaction: Transaction
    role: Role


@dataclass(frozen=True, slots=True)
class UserProfile:
    user_id: str
    display_name: str
    posts: tuple[Post, ...] = ()

    @property
    def notes(self) -> list[str]:
        return [post.transaction.note for post in self.posts]


@dataclass(frozen=True)
class Corpus:
    transactions: dict[str, Transaction] = field(default_factory=dict)
    users: dict[str, UserProfile] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.users)


@dataclass(frozen=True, slots=True)
class Token:
    surface: str
    lemma: str
    kind: TokenKind


@dataclass(frozen=True, slots=True)
class TokenizedPost:
    tokens: tuple[Token, ...]
    raw: str

    @property
    def lemmas(self) -> list[str]:
        return [token.lemma for token in self.tokens]
