"""Word tokenizer for classroom utterances.

A small, frozen rule set in the Penn Treebank style: whitespace splitting
plus punctuation detachment and English contraction splitting. Case is
preserved. The exact behaviour is pinned by golden tests; changing any rule
invalidates every stored vocabulary, so treat the rules as append-only.

Rules, applied in order as regex substitutions:

1.  an ellipsis ``...`` becomes its own token
2.  ``, ; : @ # $ % & ? !`` are detached on both sides
3.  a string-final period is detached (interior periods, e.g. decimals
    and abbreviations, are kept)
4.  brackets and double quotes ``( ) [ ] { } < > "`` are detached
5.  contraction suffixes ``n't 's 'm 're 've 'll 'd`` are split off
    (``don't`` -> ``do n't``)
6.  a word-final apostrophe is detached (``students'`` -> ``students '``)
"""

from __future__ import annotations

import re

_RULES = [
    (re.compile(r"\.\.\."), r" ... "),
    (re.compile(r"([,;:@#$%&?!])"), r" \1 "),
    (re.compile(r"([^\.\s])(\.)\s*$"), r"\1 \2"),
    (re.compile(r"([\]\[\(\)\{\}<>\"])"), r" \1 "),
    (re.compile(r"([^'\s])(n't|'s|'m|'re|'ve|'ll|'d)\b", re.IGNORECASE), r"\1 \2"),
    (re.compile(r"(\w)'(?=\s|$)"), r"\1 '"),
]


def tokenize(text: str) -> list[str]:
    """Split raw utterance text into word tokens. Empty text gives []."""
    for pattern, repl in _RULES:
        text = pattern.sub(repl, text)
    return text.split()
