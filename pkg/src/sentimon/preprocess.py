"""Text cleaning and tokenization.

Cleaning removes URLs and @mentions and lowercases; tokenization keeps
maximal runs of letters, digits and the ASCII apostrophe.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable

URL_PATTERN = re.compile(r"(?:https?://|www\.)\S*", re.IGNORECASE)
MENTION_PATTERN = re.compile(r"@\w+")

STOPWORDS_RESOURCE = "stopwords_en.txt"


def parse_stopwords(lines: Iterable[str]) -> frozenset[str]:
    words = set()
    for line in lines:
        word = line.strip()
        if word and not word.startswith("#"):
            words.add(word)
    return frozenset(words)


def load_stopwords(path=None) -> frozenset[str]:
    """Read a stopword file (one token per line, ``#`` comments).

    Without a path, the bundled English list is returned.
    """
    if path is None:
        text = resources.files("sentimon.data").joinpath(STOPWORDS_RESOURCE).read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_stopwords(text.splitlines())


DEFAULT_STOPWORDS = load_stopwords()


@dataclass(frozen=True)
class PreprocessConfig:
    strip_urls: bool = True
    strip_mentions: bool = True
    lowercase: bool = True
    strip_stopwords: bool = True
    stopword_list: frozenset[str] = field(default=DEFAULT_STOPWORDS)
    min_token_len: int = 1

    def __post_init__(self):
        object.__setattr__(self, "stopword_list", frozenset(self.stopword_list))
        bad = [w for w in self.stopword_list if w != w.lower()]
        if bad:
            raise ValueError(f"stopwords must be lowercase: {sorted(bad)[:5]}")
        if self.min_token_len < 1:
            raise ValueError("min_token_len must be >= 1")


DEFAULT_CONFIG = PreprocessConfig()


def _clean_once(text: str, config: PreprocessConfig) -> str:
    if config.strip_urls:
        text = URL_PATTERN.sub("", text)
    if config.strip_mentions:
        text = MENTION_PATTERN.sub("", text)
    if config.lowercase:
        text = text.lower()
    return text


def clean(text: str, config: PreprocessConfig = DEFAULT_CONFIG) -> str:
    # A removal can splice together a new match ("http@x://y"), so repeat
    # until nothing changes; this keeps clean idempotent.
    while True:
        cleaned = _clean_once(text, config)
        if cleaned == text:
            return cleaned
        text = cleaned


def _is_token_char(ch: str) -> bool:
    return ch.isalnum() or ch == "'"


def tokenize(text: str, min_token_len: int = 1) -> list[str]:
    tokens = []
    start = None
    for i, ch in enumerate(text):
        if _is_token_char(ch):
            if start is None:
                start = i
        elif start is not None:
            tokens.append(text[start:i])
            start = None
    if start is not None:
        tokens.append(text[start:])
    if min_token_len > 1:
        tokens = [t for t in tokens if len(t) >= min_token_len]
    return tokens


def remove_stopwords(tokens: Iterable[str], stopword_list=DEFAULT_STOPWORDS) -> list[str]:
    return [t for t in tokens if t not in stopword_list]


def preprocess_text(text: str, config: PreprocessConfig = DEFAULT_CONFIG) -> list[str]:
    tokens = tokenize(clean(text, config), config.min_token_len)
    if config.strip_stopwords:
        tokens = remove_stopwords(tokens, config.stopword_list)
    return tokens


def run_pipeline(doc, config: PreprocessConfig = DEFAULT_CONFIG) -> list[str]:
    """Tokens for a document (anything with a ``text`` attribute) or a raw string."""
    text = doc if isinstance(doc, str) else doc.text
    return preprocess_text(text, config)
