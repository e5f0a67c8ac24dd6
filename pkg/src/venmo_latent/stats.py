"""Corpus statistics: transaction mix, posts per user and the note length histogram."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from venmo_latent.corpus import note_length_histogram
from venmo_latent.models import Corpus, TransactionKind


@dataclass(frozen=True)
class CorpusSummary:
    n_transactions: int
    n_users: int
    pct_charge: float
    pct_with_comments: float
    posts_per_user: dict[str, float] = field(default_factory=dict)
    modal_note_length: int | None = None
    histogram: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_transactions": self.n_transactions,
            "n_users": self.n_users,
            "pct_charge": self.pct_charge,
            "pct_with_comments": self.pct_with_comments,
            "posts_per_user": self.posts_per_user,
            "modal_note_length": self.modal_note_length,
            "histogram": {str(length): count for length, count in self.histogram.items()},
        }


def _modal_length(histogram: dict[int, int]) -> int | None:
    if not histogram:
        return None
    # shortest length wins ties
    return min(histogram, key=lambda length: (-histogram[length], length))


def summarize_corpus(corpus: Corpus) -> CorpusSummary:
    transactions = list(corpus.transactions.values())
    n = len(transactions)
    histogram = note_length_histogram(corpus)
    posts = np.asarray([len(profile.posts) for profile in corpus.users.values()], dtype=np.float64)
    quantiles: dict[str, float] = {}
    if posts.size:
        for name, q in (("min", 0.0), ("p25", 0.25), ("median", 0.5), ("p75", 0.75), ("max", 1.0)):
            quantiles[name] = float(np.quantile(posts, q))
        quantiles["mean"] = float(posts.mean())
    return CorpusSummary(
        n_transactions=n,
        n_users=len(corpus.users),
        pct_charge=sum(t.kind is TransactionKind.CHARGE for t in transactions) / n if n else 0.0,
        pct_with_comments=sum(t.comments_count > 0 for t in transactions) / n if n else 0.0,
        posts_per_user=quantiles,
        modal_note_length=_modal_length(histogram),
        histogram=histogram,
    )


def write_histogram_csv(histogram: dict[int, int], stream: IO[str]) -> int:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["length", "count"])
    for length in sorted(histogram):
        writer.writerow([length, histogram[length]])
    return len(histogram)
