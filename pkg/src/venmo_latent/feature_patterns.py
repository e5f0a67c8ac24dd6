"""
Detector patterns for the socio-linguistic content features.

Hyperscan-compatible: no backrefs, no lookahead/lookbehind. Repeated-character
detection needs a backreference and stays in ``re`` (see features.py).

Raw-text patterns run over the whole note; token patterns run over word tokens
joined by newlines, so ``^``/``$`` anchor to a single token in multiline mode.
"""

from __future__ import annotations

import re

# ids must be unique within a database
EXCITEMENT = 0
ELLIPSIS = 1

RAW_PATTERNS: list[tuple[bytes, int]] = [
    (rb"!{2,}", EXCITEMENT),
    (rb"\.{3,}", ELLIPSIS),
]

LAUGHING = 0
LAUGHING_RUN = 1
OMG = 2
CURSE = 3

# Token ids that count toward the same feature.
TOKEN_FEATURES = {
    LAUGHING: "laughing",
    LAUGHING_RUN: "laughing",
    OMG: "omg",
    CURSE: "curse",
}


def _alternation(words: frozenset[str]) -> bytes:
    escaped = "|".join(re.escape(word) for word in sorted(words))
    return f"^(?:{escaped})$".encode()


def token_patterns(laughing: frozenset[str], curse: frozenset[str]) -> list[tuple[bytes, int]]:
    patterns = [
        (rb"^(?:ha|he){2,}$", LAUGHING_RUN),
        (rb"^o+m+g+$", OMG),
    ]
    # Empty lexicons are left out; hyperscan has no never-matching pattern.
    if laughing:
        patterns.append((_alternation(laughing), LAUGHING))
    if curse:
        patterns.append((_alternation(curse), CURSE))
    return patterns
