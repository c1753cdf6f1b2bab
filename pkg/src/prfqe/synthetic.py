"""Seeded synthetic test collection with planted topical vocabulary.

Each topic owns a small vocabulary.  Its title uses two of those words; only
some relevant documents contain a title word, the rest are reachable only
through the other topical words, which is what feedback expansion has to
discover.  Background text is Zipf-distributed filler plus stopwords.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

STOPWORDS = (
    "the", "of", "and", "a", "in", "to", "is", "was", "for", "on",
    "with", "as", "by", "at", "from", "that", "this", "it", "an", "be",
)

_ONSETS = ("b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "t", "v", "z", "br", "kr", "tr", "pl", "st")
_VOWELS = ("a", "o", "u", "i", "e")
_CODAS = ("k", "t", "m", "n", "p", "d", "x")


@dataclass
class Fixture:
    docs: list[tuple[str, str]]
    topics: list[tuple[str, str]]
    qrels: dict[str, list[str]]
    stopwords: tuple[str, ...] = STOPWORDS


def _vocabulary(rng: np.random.Generator, size: int) -> list[str]:
    words: list[str] = []
    seen = set(STOPWORDS)
    while len(words) < size:
        n_syl = int(rng.integers(2, 4))
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(n_syl))
        w += _CODAS[rng.integers(len(_CODAS))]
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def make_fixture(seed: int = 20240601, n_docs: int = 200, n_topics: int = 10,
                 rel_per_topic: int = 12, topic_vocab: int = 10, background_vocab: int = 600,
                 doc_len: tuple[int, int] = (40, 80)) -> Fixture:
    rng = np.random.default_rng(seed)
    words = _vocabulary(rng, background_vocab + n_topics * topic_vocab)
    background = words[:background_vocab]
    ranks = np.arange(1, background_vocab + 1)
    bg_p = 1.0 / ranks
    bg_p /= bg_p.sum()

    topic_words = [words[background_vocab + i * topic_vocab: background_vocab + (i + 1) * topic_vocab]
                   for i in range(n_topics)]
    topic_ids = [str(41 + i) for i in range(n_topics)]

    doc_ids = [f"d{i:03d}" for i in range(n_docs)]
    order = rng.permutation(n_docs)
    owner: dict[int, int] = {}
    pos = 0
    for t in range(n_topics):
        for _ in range(rel_per_topic):
            owner[int(order[pos])] = t
            pos += 1
    # a few non-relevant documents mention some topic's title word in passing
    distractors = {int(order[pos + i]): int(rng.integers(n_topics)) for i in range(n_topics * 2)}

    docs = []
    qrels: dict[str, list[str]] = {tid: [] for tid in topic_ids}
    for i, doc_id in enumerate(doc_ids):
        length = int(rng.integers(doc_len[0], doc_len[1] + 1))
        toks = list(rng.choice(background, size=length, p=bg_p))
        if i in owner:
            t = owner[i]
            vocab = topic_words[t]
            title_words, other = vocab[:2], vocab[2:]
            n_topical = int(rng.integers(6, 14))
            # under half of the relevant docs carry a title word
            picked = list(rng.choice(other, size=n_topical, replace=True))
            if rng.random() < 0.45:
                picked += list(rng.choice(title_words, size=int(rng.integers(1, 3))))
            for w in picked:
                toks.insert(int(rng.integers(len(toks) + 1)), w)
            qrels[topic_ids[t]].append(doc_id)
        elif i in distractors:
            t = distractors[i]
            w = topic_words[t][int(rng.integers(2))]
            for _ in range(int(rng.integers(1, 3))):
                toks.insert(int(rng.integers(len(toks) + 1)), w)
        for _ in range(length // 5):
            toks.insert(int(rng.integers(len(toks) + 1)), STOPWORDS[rng.integers(len(STOPWORDS))])
        docs.append((doc_id, " ".join(toks)))

    topics = []
    for tid, vocab in zip(topic_ids, topic_words):
        topics.append((tid, f"the {vocab[0]} of {vocab[1]}"))
    for tid in topic_ids:
        qrels[tid].sort()
    return Fixture(docs, topics, qrels)


def write_fixture(fixture: Fixture, directory) -> dict[str, Path]:
    """Write corpus.jsonl, topics.tsv, qrels.txt and stopwords.txt into ``directory``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = {
        "corpus": d / "corpus.jsonl",
        "topics": d / "topics.tsv",
        "qrels": d / "qrels.txt",
        "stopwords": d / "stopwords.txt",
    }
    with open(paths["corpus"], "w", encoding="utf-8") as fh:
        for doc_id, text in fixture.docs:
            fh.write(json.dumps({"id": doc_id, "text": text}) + "\n")
    with open(paths["topics"], "w", encoding="utf-8") as fh:
        for tid, title in fixture.topics:
            fh.write(f"{tid}\t{title}\n")
    rel = {tid: set(docs) for tid, docs in fixture.qrels.items()}
    with open(paths["qrels"], "w", encoding="utf-8") as fh:
        for tid, _ in fixture.topics:
            for doc_id, _ in fixture.docs:
                if doc_id in rel[tid]:
                    fh.write(f"{tid} 0 {doc_id} 1\n")
    with open(paths["stopwords"], "w", encoding="utf-8") as fh:
        fh.write("# synthetic fixture stopwords\n")
        for w in fixture.stopwords:
            fh.write(w + "\n")
    return paths
