"""Inverted index with the collection statistics used by query expansion.

An :class:`InvertedIndex` is built once from a corpus and never mutated.
Postings are kept per term as doc_id-sorted ``(doc_id, tf)`` tuples; the
forward view (doc_id -> term frequencies) and per-document cosine norms are
derived from the same counts.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
import zlib
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .textkit import AnalyzerConfig, analyze

MAGIC = b"PRFQEIDX"
FORMAT_VERSION = 1
_HEADER = struct.Struct(">8sI")
_DIGEST_SIZE = 32


class IndexStoreError(Exception):
    """Base class for index build and persistence errors."""


class DuplicateDocError(IndexStoreError, ValueError):
    def __init__(self, doc_id):
        super().__init__(f"duplicate doc_id {doc_id!r}")
        self.doc_id = doc_id


class EmptyCorpusError(IndexStoreError, ValueError):
    pass


class IndexFormatError(IndexStoreError):
    """The file is not a readable index (bad magic or truncated)."""


class VersionMismatchError(IndexFormatError):
    pass


class ChecksumError(IndexFormatError):
    pass


class AnalyzerMismatchError(IndexStoreError):
    pass


@dataclass(frozen=True)
class DocRecord:
    doc_id: str
    term_freqs: Mapping[str, int]
    length: int


@dataclass(frozen=True)
class CollectionStats:
    n_docs: int
    term_df: Mapping[str, int]
    term_cf: Mapping[str, int]
    total_tokens: int

    @property
    def vocabulary_size(self) -> int:
        return len(self.term_df)


def idf(df: int, n_docs: int) -> float:
    return math.log2(1.0 + n_docs / df)


def tf_weight(tf: int) -> float:
    return 1.0 + math.log2(tf)


class InvertedIndex:
    """Committed, read-only inverted index.

    Build with :func:`build_index` or :func:`load_index` rather than calling
    the constructor directly.
    """

    def __init__(self, postings: dict[str, tuple[tuple[str, int], ...]], analyzer: AnalyzerConfig):
        self.postings = postings
        self.analyzer = analyzer
        forward: dict[str, dict[str, int]] = {}
        df: dict[str, int] = {}
        cf: dict[str, int] = {}
        for term in sorted(postings):
            plist = postings[term]
            df[term] = len(plist)
            cf[term] = sum(tf for _, tf in plist)
            for doc_id, tf in plist:
                forward.setdefault(doc_id, {})[term] = tf
        self.forward = {
            doc_id: DocRecord(doc_id, tfs, sum(tfs.values()))
            for doc_id, tfs in sorted(forward.items())
        }
        self.stats = CollectionStats(
            n_docs=len(self.forward),
            term_df=df,
            term_cf=cf,
            total_tokens=sum(r.length for r in self.forward.values()),
        )
        n = self.stats.n_docs
        self.doc_norms = {}
        for doc_id, rec in self.forward.items():
            # summed in sorted term order so the norm is bit-stable
            sq = 0.0
            for term in sorted(rec.term_freqs):
                w = tf_weight(rec.term_freqs[term]) * idf(df[term], n)
                sq += w * w
            self.doc_norms[doc_id] = math.sqrt(sq)

    @property
    def fingerprint(self) -> str:
        return self.analyzer.fingerprint()

    @property
    def n_docs(self) -> int:
        return self.stats.n_docs

    def term_stats(self, term: str) -> tuple[int, int]:
        """``(df, cf)`` for ``term``; ``(0, 0)`` if it is not indexed."""
        return self.stats.term_df.get(term, 0), self.stats.term_cf.get(term, 0)

    def iter_postings(self) -> Iterator[tuple[str, str, int]]:
        """Every ``(term, doc_id, tf)`` triple in canonical order."""
        for term in sorted(self.postings):
            for doc_id, tf in self.postings[term]:
                yield term, doc_id, tf

    def content_digest(self) -> str:
        """SHA-256 over the canonical postings and analyzer; equal iff contents equal."""
        h = hashlib.sha256(self.fingerprint.encode())
        for term, doc_id, tf in self.iter_postings():
            h.update(f"{term}\t{doc_id}\t{tf}\n".encode("utf-8"))
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, InvertedIndex):
            return NotImplemented
        return self.analyzer == other.analyzer and self.postings == other.postings

    def __repr__(self):
        s = self.stats
        return f"InvertedIndex(N={s.n_docs}, vocab={s.vocabulary_size}, tokens={s.total_tokens})"


def term_stats(index: InvertedIndex, term: str) -> tuple[int, int]:
    return index.term_stats(term)


def _count_chunk(chunk, config):
    return [(doc_id, Counter(analyze(text, config))) for doc_id, text in chunk]


def build_index(corpus: Iterable[tuple[str, str]], config: AnalyzerConfig, workers: int = 1) -> InvertedIndex:
    """Analyze and index ``(doc_id, text)`` pairs.

    Documents that analyze to no terms leave no trace (they do not count in
    ``n_docs``).  The result does not depend on input order or ``workers``.
    """
    docs = list(corpus)
    if not docs:
        raise EmptyCorpusError("corpus is empty")
    seen = set()
    for doc_id, _ in docs:
        if doc_id in seen:
            raise DuplicateDocError(doc_id)
        seen.add(doc_id)

    if workers > 1 and len(docs) > workers:
        size = -(-len(docs) // workers)
        chunks = [docs[i:i + size] for i in range(0, len(docs), size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counted = [row for part in pool.map(_count_chunk, chunks, [config] * len(chunks)) for row in part]
    else:
        counted = _count_chunk(docs, config)

    acc: dict[str, list[tuple[str, int]]] = {}
    for doc_id, counts in counted:
        for term, tf in counts.items():
            acc.setdefault(term, []).append((doc_id, tf))
    if not acc:
        raise EmptyCorpusError("corpus contains no indexable terms")
    postings = {term: tuple(sorted(plist)) for term, plist in sorted(acc.items())}
    return InvertedIndex(postings, config)


def save_index(index: InvertedIndex, path) -> None:
    """Write ``index`` as a single checksummed file."""
    analyzer_blob = json.dumps(index.analyzer.to_dict(), sort_keys=True, ensure_ascii=False).encode("utf-8")
    payload = json.dumps(
        {
            "stats": {"n_docs": index.stats.n_docs, "total_tokens": index.stats.total_tokens},
            "postings": [[term, [list(p) for p in plist]] for term, plist in sorted(index.postings.items())],
        },
        ensure_ascii=False,
        separators=(",", ":"),
    ).encode("utf-8")
    payload = zlib.compress(payload, 6)
    body = b"".join([
        _HEADER.pack(MAGIC, FORMAT_VERSION),
        struct.pack(">I", len(analyzer_blob)), analyzer_blob,
        struct.pack(">Q", len(payload)), payload,
    ])
    Path(path).write_bytes(body + hashlib.sha256(body).digest())


def load_index(path, expected_analyzer: AnalyzerConfig | None = None) -> InvertedIndex:
    """Read an index written by :func:`save_index`.

    Raises ``FileNotFoundError``, :class:`IndexFormatError`,
    :class:`VersionMismatchError`, :class:`ChecksumError`, or, when
    ``expected_analyzer`` is given and differs, :class:`AnalyzerMismatchError`.
    """
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size + _DIGEST_SIZE or data[:8] != MAGIC:
        raise IndexFormatError(f"{path}: not an index file")
    _, version = _HEADER.unpack_from(data, 0)
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    body, digest = data[:-_DIGEST_SIZE], data[-_DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise ChecksumError(f"{path}: checksum mismatch")

    pos = _HEADER.size
    (alen,) = struct.unpack_from(">I", body, pos)
    pos += 4
    analyzer = AnalyzerConfig.from_dict(json.loads(body[pos:pos + alen].decode("utf-8")))
    pos += alen
    (plen,) = struct.unpack_from(">Q", body, pos)
    pos += 8
    payload = json.loads(zlib.decompress(body[pos:pos + plen]).decode("utf-8"))

    if expected_analyzer is not None and expected_analyzer.fingerprint() != analyzer.fingerprint():
        raise AnalyzerMismatchError(
            f"{path}: index built with analyzer {analyzer.fingerprint()[:12]}, "
            f"requested {expected_analyzer.fingerprint()[:12]}"
        )
    postings = {term: tuple((d, int(tf)) for d, tf in plist) for term, plist in payload["postings"]}
    index = InvertedIndex(postings, analyzer)
    stored = payload["stats"]
    if stored["n_docs"] != index.stats.n_docs or stored["total_tokens"] != index.stats.total_tokens:
        raise IndexFormatError(f"{path}: stored statistics disagree with postings")
    return index


def read_jsonl_corpus(path) -> Iterator[tuple[str, str]]:
    """Yield ``(id, text)`` from a JSON-lines file."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                yield str(obj["id"]), obj["text"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad corpus record ({exc})") from None


def read_dir_corpus(path) -> Iterator[tuple[str, str]]:
    """Yield ``(stem, text)`` for every ``*.txt`` file in ``path``, sorted by name."""
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"{path}: not a directory")
    for f in sorted(root.glob("*.txt")):
        yield f.stem, f.read_text(encoding="utf-8")


def read_corpus(path, fmt: str = "auto") -> Iterator[tuple[str, str]]:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{path}: no such corpus")
    if fmt == "auto":
        fmt = "dir" if p.is_dir() else "jsonl"
    if fmt == "jsonl":
        return read_jsonl_corpus(p)
    if fmt == "dir":
        return read_dir_corpus(p)
    raise ValueError(f"unknown corpus format {fmt!r}")
