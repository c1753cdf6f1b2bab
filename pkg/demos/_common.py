"""Shared loader for the demo scripts: the committed synthetic collection."""

from pathlib import Path

from prfqe import AnalyzerConfig, build_index, parse_qrels, parse_query
from prfqe.index import read_corpus
from prfqe.retrieval import read_topics
from prfqe.textkit import load_stopwords

DATA = Path(__file__).resolve().parent.parent / "tests" / "data" / "fixture"


def load_collection():
    analyzer = AnalyzerConfig(stopwords=load_stopwords(DATA / "stopwords.txt"), stemmer="english")
    index = build_index(read_corpus(DATA / "corpus.jsonl"), analyzer)
    queries = [parse_query(t, title, analyzer) for t, title in read_topics(DATA / "topics.tsv")]
    return index, queries, parse_qrels(DATA / "qrels.txt")
