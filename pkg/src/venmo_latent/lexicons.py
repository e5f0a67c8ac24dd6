"""Bundled word lists. Each loader accepts an override path; bundled files are the default."""

from __future__ import annotations

from functools import lru_cache
from importlib.resources import files
from pathlib import Path


def _read_data(name: str, path: Path | None) -> str:
    if path is not None:
        return path.read_text(encoding="utf-8")
    return files("venmo_latent").joinpath("data", name).read_text(encoding="utf-8")


def _entries(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            out.append(stripped)
    return out


@lru_cache(maxsize=8)
def load_emoticons(path: Path | None = None) -> tuple[str, ...]:
    # Longest first so ":-)" wins over ":)" in an alternation.
    entries = dict.fromkeys(_entries(_read_data("emoticons.txt", path)))
    return tuple(sorted(entries, key=lambda e: (-len(e), e)))


@lru_cache(maxsize=8)
def load_lemma_exceptions(path: Path | None = None) -> dict[str, str]:
    table: dict[str, str] = {}
    for entry in _entries(_read_data("lemma_exceptions.tsv", path)):
        surface, _, lemma = entry.partition("\t")
        if lemma:
            table[surface.strip().lower()] = lemma.strip().lower()
    return table


@lru_cache(maxsize=8)
def load_curse_words(path: Path | None = None) -> frozenset[str]:
    return frozenset(word.lower() for word in _entries(_read_data("curse_words.txt", path)))


@lru_cache(maxsize=8)
def load_laughing(path: Path | None = None) -> frozenset[str]:
    return frozenset(word.lower() for word in _entries(_read_data("laughing.txt", path)))


def bundled_names_text() -> str:
    return _read_data("names_sample.tsv", None)
