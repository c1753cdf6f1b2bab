"""Text analysis shared by indexing and query parsing.

The pipeline is: tokenize (maximal runs of Unicode letters/digits), case
fold, drop stopwords, stem.  Everything is a pure function of the input text
and an :class:`AnalyzerConfig`.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable

import snowballstemmer

DEFAULT_TOKEN_PATTERN = r"[^\W_]+"

#: Stemmer names accepted by :class:`AnalyzerConfig`. ``"none"`` disables stemming.
STEMMERS = ("none", "english", "spanish", "porter")


@dataclass(frozen=True)
class AnalyzerConfig:
    """Analyzer settings. Hashable and comparable so it can be fingerprinted."""

    lowercase: bool = True
    stopwords: frozenset[str] = field(default_factory=frozenset)
    stemmer: str = "none"
    token_pattern: str = DEFAULT_TOKEN_PATTERN

    def __post_init__(self):
        if self.stemmer not in STEMMERS:
            raise ValueError(f"unknown stemmer {self.stemmer!r}; expected one of {STEMMERS}")
        # stopwords are compared after case folding
        folded = frozenset(w.lower() if self.lowercase else w for w in self.stopwords)
        object.__setattr__(self, "stopwords", folded)

    def to_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "stopwords": sorted(self.stopwords),
            "stemmer": self.stemmer,
            "token_pattern": self.token_pattern,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnalyzerConfig":
        return cls(
            lowercase=bool(d["lowercase"]),
            stopwords=frozenset(d["stopwords"]),
            stemmer=d["stemmer"],
            token_pattern=d["token_pattern"],
        )

    def fingerprint(self) -> str:
        """Hex SHA-256 of the canonical JSON form."""
        blob = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def load_stopwords(path) -> frozenset[str]:
    """Read a stopword file: UTF-8, one token per line, ``#`` lines ignored."""
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            words.add(line.lower())
    return frozenset(words)


@lru_cache(maxsize=None)
def _token_regex(pattern: str) -> re.Pattern:
    return re.compile(pattern)


_local = threading.local()


@lru_cache(maxsize=65536)
def _stem_word(name: str, word: str) -> str:
    # snowballstemmer instances carry mutable state, so one per thread
    stemmers = getattr(_local, "stemmers", None)
    if stemmers is None:
        stemmers = _local.stemmers = {}
    stemmer = stemmers.get(name)
    if stemmer is None:
        stemmer = stemmers[name] = snowballstemmer.stemmer(name)
    return stemmer.stemWord(word)


def tokenize(text: str, config: AnalyzerConfig) -> list[str]:
    """Split ``text`` into raw tokens (no folding, no filtering)."""
    return _token_regex(config.token_pattern).findall(text)


def analyze(text: str, config: AnalyzerConfig) -> list[str]:
    """Return the analyzed term sequence of ``text`` in original order."""
    tokens = tokenize(text, config)
    if config.lowercase:
        tokens = [t.lower() for t in tokens]
    if config.stopwords:
        tokens = [t for t in tokens if t not in config.stopwords]
    if config.stemmer != "none":
        tokens = [_stem_word(config.stemmer, t) for t in tokens]
    return [t for t in tokens if t and not any(c.isspace() for c in t)]


def analyze_many(texts: Iterable[str], config: AnalyzerConfig) -> list[list[str]]:
    return [analyze(t, config) for t in texts]


def make_analyzer(language: str = "none", stopwords_path=None, lowercase: bool = True) -> AnalyzerConfig:
    """Convenience constructor from a language code and an optional stopword file."""
    stop = load_stopwords(stopwords_path) if stopwords_path else frozenset()
    return AnalyzerConfig(lowercase=lowercase, stopwords=stop, stemmer=language)


def stopword_file_text(words: Iterable[str]) -> str:
    return "".join(f"{w}\n" for w in sorted(set(words)))


def write_stopwords(words: Iterable[str], path) -> None:
    Path(path).write_text(stopword_file_text(words), encoding="utf-8")
