"""Emoji-aware tokenizer, rule-based lemmatizer and post-wise n-grams."""

from __future__ import annotations

import re
from collections.abc import Iterable
from dataclasses import replace
from functools import lru_cache
from pathlib import Path

from venmo_latent.lexicons import load_emoticons, load_lemma_exceptions
from venmo_latent.models import Token, TokenizedPost, TokenKind

# Extended_Pictographic, approximated by block; regional indicators and skin tones excluded.
_PICT = (
    "\u00a9\u00ae\u203c\u2049\u2122\u2139\u2194-\u2199\u21a9\u21aa\u231a\u231b\u2328\u2388"
    "\u23cf\u23e9-\u23f3\u23f8-\u23fa\u24c2\u25aa\u25ab\u25b6\u25c0\u25fb-\u25fe\u2600-\u27bf"
    "\u2934\u2935\u2b05-\u2b07\u2b1b\u2b1c\u2b50\u2b55\u3030\u303d\u3297\u3299"
    "\U0001f000-\U0001f1e5\U0001f200-\U0001f3fa\U0001f400-\U0001faff"
)
_SKIN = "\U0001f3fb-\U0001f3ff"
_REGIONAL = "\U0001f1e6-\U0001f1ff"
_VARIATION = "\ufe0e\ufe0f"
_ZWJ = "\u200d"
_TAGS = "\U000e0020-\U000e007f"
_ELEMENT = f"[{_PICT}{_SKIN}][{_VARIATION}{_SKIN}]*"
EMOJI_PATTERN = (
    f"[{_REGIONAL}]{{1,2}}"
    "|[#*0-9]\ufe0f?\u20e3"
    f"|{_ELEMENT}[{_TAGS}]*(?:{_ZWJ}{_ELEMENT})*"
)
SHORTCODE_PATTERN = r":[a-z0-9_]+:"
_MARKS = "[\u0300-\u036f]*"
_LETTERS = rf"(?:[^\W\d_]{_MARKS})+"
_APOSTROPHES = "'\u2019"
WORD_PATTERN = rf"{_LETTERS}(?:[{_APOSTROPHES}]{_LETTERS})*"
NUMBER_PATTERN = r"\d+(?:[.,]\d+)*"

_KIND_BY_GROUP = {
    "shortcode": TokenKind.SHORTCODE,
    "emoji": TokenKind.EMOJI,
    "emoticon": TokenKind.EMOTICON,
    "number": TokenKind.NUMBER,
    "word": TokenKind.WORD,
    "punct": TokenKind.PUNCT,
    "other": TokenKind.PUNCT,
}


def _emoticon_alternative(emoticon: str) -> str:
    pattern = re.escape(emoticon)
    if emoticon[0].isalnum():
        pattern = r"(?<![A-Za-z0-9])" + pattern
    if emoticon[-1].isalnum():
        pattern += r"(?![A-Za-z0-9])"
    return pattern


@lru_cache(maxsize=4)
def _token_regex(emoticons: tuple[str, ...]) -> re.Pattern[str]:
    emoticon_alts = "|".join(_emoticon_alternative(e) for e in emoticons) or r"(?!)"
    return re.compile(
        f"(?P<shortcode>{SHORTCODE_PATTERN})"
        f"|(?P<emoji>{EMOJI_PATTERN})"
        f"|(?P<emoticon>{emoticon_alts})"
        f"|(?P<number>{NUMBER_PATTERN})"
        f"|(?P<word>{WORD_PATTERN})"
        r"|(?P<punct>(?P<pc>[^\w\s])(?P=pc)*)"
        r"|(?P<other>\S)"
    )


def tokenize_post(
    note: str,
    *,
    emoticons_path: Path | None = None,
    exceptions_path: Path | None = None,
    lemmatized: bool = True,
) -> TokenizedPost:
    """Split a note into typed tokens. Total and deterministic; whitespace is the only discard."""
    regex = _token_regex(load_emoticons(emoticons_path))
    tokens: list[Token] = []
    for match in regex.finditer(note):
        group = match.lastgroup
        surface = match.group(0)
        token = Token(surface=surface, lemma=surface, kind=_KIND_BY_GROUP[group or "other"])
        tokens.append(lemmatize(token, exceptions_path=exceptions_path) if lemmatized else token)
    return TokenizedPost(tokens=tuple(tokens), raw=note)


def tokenize_posts(notes: Iterable[str], **kwargs) -> list[TokenizedPost]:
    return [tokenize_post(note, **kwargs) for note in notes]


_VOWELS = set("aeiou")
_E_RESTORE_ENDINGS = ("v", "nc", "rc", "rg", "dg", "uc", "ls", "rs", "ps", "iz", "yz")


def _has_vowel(stem: str) -> bool:
    return any(ch in "aeiouy" for ch in stem)


def _is_cvc(stem: str) -> bool:
    if len(stem) < 3:
        return False
    c1, v, c2 = stem[-3], stem[-2], stem[-1]
    return c1 not in _VOWELS and v in _VOWELS and c2 not in _VOWELS and c2 not in "wxy"


def _vowel_groups(stem: str) -> int:
    return len(re.findall(r"[aeiou]+", stem))


def _restore_verb_stem(stem: str) -> str:
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS and stem[-1] not in "lsz":
        return stem[:-1]
    if stem.endswith(_E_RESTORE_ENDINGS):
        return stem + "e"
    if len(stem) in (3, 4) and _vowel_groups(stem) == 1 and _is_cvc(stem):
        return stem + "e"
    return stem


def _lemma_for_word(word: str, exceptions: dict[str, str]) -> str:
    if word in exceptions:
        return exceptions[word]
    if len(word) <= 3 or not word.isalpha():
        return word
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith(("ches", "shes", "xes", "zes", "oes")):
        return word[:-2]
    if word.endswith("s") and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    if word.endswith("ing"):
        stem = word[:-3]
        if len(stem) >= 3 and _has_vowel(stem):
            return _restore_verb_stem(stem)
        return word
    if word.endswith("ed") and not word.endswith("eed"):
        stem = word[:-2]
        if word.endswith("ied") and len(stem) > 2:
            return word[:-3] + "y"
        if len(stem) >= 3 and _has_vowel(stem):
            return _restore_verb_stem(stem)
    return word


def lemmatize(token: Token, *, exceptions_path: Path | None = None) -> Token:
    """Lowercase and reduce word tokens to a lemma; other kinds pass through unchanged."""
    if token.kind is not TokenKind.WORD:
        return replace(token, lemma=token.surface)
    word = token.surface.lower()
    return replace(token, lemma=_lemma_for_word(word, load_lemma_exceptions(exceptions_path)))


def ngram_lemmas(
    post: TokenizedPost, *, keep_numbers: bool = True, keep_punct: bool = True
) -> list[str]:
    lemmas = []
    for token in post.tokens:
        if token.kind is TokenKind.NUMBER and not keep_numbers:
            continue
        if token.kind is TokenKind.PUNCT and not keep_punct:
            continue
        lemmas.append(token.lemma)
    return lemmas


def generate_ngrams(
    post: TokenizedPost,
    n_range: tuple[int, int] = (1, 2),
    *,
    keep_numbers: bool = True,
    keep_punct: bool = True,
) -> list[str]:
    """N-grams of one post's lemmas, emitted by n then position. Never spans two posts."""
    low, high = n_range
    if not 1 <= low <= high <= 3:
        raise ValueError(f"n_range must satisfy 1 <= low <= high <= 3, got {n_range}")
    lemmas = ngram_lemmas(post, keep_numbers=keep_numbers, keep_punct=keep_punct)
    grams: list[str] = []
    for n in range(low, high + 1):
        grams.extend(" ".join(lemmas[i : i + n]) for i in range(len(lemmas) - n + 1))
    return grams
