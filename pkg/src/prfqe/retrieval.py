"""Vector-space ranked retrieval over an :class:`~prfqe.index.InvertedIndex`.

Document term weights are ``(1 + log2 tf) * log2(1 + N/df)``, cosine
normalized per document.  Queries carry arbitrary nonnegative weights and are
not normalized, since that cannot change the ranking.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .index import InvertedIndex, idf, tf_weight
from .textkit import AnalyzerConfig, analyze


class EmptyQueryError(ValueError):
    pass


@dataclass(frozen=True)
class QueryTerm:
    term: str
    weight: float
    qtf: int


@dataclass(frozen=True)
class WeightedQuery:
    topic_id: str
    terms: tuple[QueryTerm, ...]
    origin: str = "original"  # "original" or "expanded:<method>"

    def __post_init__(self):
        names = [t.term for t in self.terms]
        if len(set(names)) != len(names):
            raise ValueError(f"topic {self.topic_id}: duplicate query terms")
        for t in self.terms:
            if t.weight < 0:
                raise ValueError(f"topic {self.topic_id}: negative weight for {t.term!r}")

    @property
    def original_terms(self) -> tuple[QueryTerm, ...]:
        return tuple(t for t in self.terms if t.qtf > 0)

    def weights(self) -> dict[str, float]:
        return {t.term: t.weight for t in self.terms}

    def __len__(self):
        return len(self.terms)


@dataclass(frozen=True)
class Ranking:
    topic_id: str
    hits: tuple[tuple[str, float], ...] = field(default_factory=tuple)

    @property
    def doc_ids(self) -> list[str]:
        return [d for d, _ in self.hits]

    def __len__(self):
        return len(self.hits)


def parse_query(topic_id: str, title: str, config: AnalyzerConfig) -> WeightedQuery:
    """Analyze a topic title into a query weighted by raw term frequency."""
    counts = Counter(analyze(title, config))
    if not counts:
        raise EmptyQueryError(f"topic {topic_id}: query is empty after analysis")
    # first-occurrence order
    terms = tuple(QueryTerm(t, float(n), n) for t, n in counts.items())
    return WeightedQuery(topic_id, terms, "original")


def search(index: InvertedIndex, query: WeightedQuery, k: int = 1000) -> Ranking:
    """Top-``k`` documents by cosine-normalized log-tf·idf score.

    Only documents with a positive score are returned; ties are broken by
    ascending doc_id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not query.terms:
        raise EmptyQueryError(f"topic {query.topic_id}: no query terms")
    n = index.n_docs
    acc: dict[str, float] = {}
    for qt in query.terms:
        if qt.weight <= 0:
            continue
        plist = index.postings.get(qt.term)
        if not plist:
            continue
        term_idf = idf(len(plist), n)
        for doc_id, tf in plist:
            acc[doc_id] = acc.get(doc_id, 0.0) + qt.weight * tf_weight(tf) * term_idf
    norms = index.doc_norms
    scored = ((doc_id, s / norms[doc_id]) for doc_id, s in acc.items() if s > 0)
    top = heapq.nsmallest(k, scored, key=lambda h: (-h[1], h[0]))
    return Ranking(query.topic_id, tuple(top))


def read_topics(path) -> list[tuple[str, str]]:
    """Read ``topic_id<TAB>title`` lines. Blank and ``#`` lines are skipped."""
    topics = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2 or not parts[0].strip():
                raise ValueError(f"{path}:{lineno}: expected 'topic_id<TAB>title'")
            tid = parts[0].strip()
            if tid in seen:
                raise ValueError(f"{path}:{lineno}: duplicate topic {tid}")
            seen.add(tid)
            topics.append((tid, parts[1].strip()))
    return topics


def format_query(query: WeightedQuery) -> str:
    """``topic<TAB>term:weight<TAB>...`` with weights at 6 decimals."""
    return "\t".join([query.topic_id] + [f"{t.term}:{t.weight:.6f}" for t in query.terms])


def parse_query_line(line: str) -> WeightedQuery:
    """Inverse of :func:`format_query`. qtf is not serialized and comes back as 0."""
    parts = line.rstrip("\n").split("\t")
    terms = []
    for p in parts[1:]:
        term, _, w = p.rpartition(":")
        if not term:
            raise ValueError(f"bad query field {p!r}")
        terms.append(QueryTerm(term, float(w), 0))
    return WeightedQuery(parts[0], tuple(terms), "expanded:file")


def write_queries(queries, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in queries:
            fh.write(format_query(q) + "\n")


def iter_query_file(path) -> Iterator[WeightedQuery]:
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip() and not line.startswith("#"):
            yield parse_query_line(line)
