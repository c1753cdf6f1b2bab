from pathlib import Path

import pytest

from prfqe.index import build_index
from prfqe.retrieval import parse_query
from prfqe.textkit import AnalyzerConfig, load_stopwords

FIXTURE_DIR = Path(__file__).parent / "data" / "fixture"

PLAIN = AnalyzerConfig()


@pytest.fixture
def plain():
    return PLAIN


@pytest.fixture
def two_doc_index():
    return build_index([("d1", "a b"), ("d2", "b c")], PLAIN)


@pytest.fixture(scope="session")
def fixture_paths():
    return {
        "corpus": FIXTURE_DIR / "corpus.jsonl",
        "topics": FIXTURE_DIR / "topics.tsv",
        "qrels": FIXTURE_DIR / "qrels.txt",
        "stopwords": FIXTURE_DIR / "stopwords.txt",
    }


@pytest.fixture(scope="session")
def fixture_analyzer(fixture_paths):
    return AnalyzerConfig(stopwords=load_stopwords(fixture_paths["stopwords"]), stemmer="english")


@pytest.fixture(scope="session")
def fixture_index(fixture_paths, fixture_analyzer):
    from prfqe.index import read_corpus
    return build_index(read_corpus(fixture_paths["corpus"]), fixture_analyzer)


@pytest.fixture(scope="session")
def fixture_queries(fixture_paths, fixture_index):
    from prfqe.retrieval import read_topics
    return [parse_query(t, title, fixture_index.analyzer) for t, title in read_topics(fixture_paths["topics"])]


@pytest.fixture(scope="session")
def fixture_qrels(fixture_paths):
    from prfqe.evalkit import parse_qrels
    return parse_qrels(fixture_paths["qrels"])


# --- acceptance reporting: one PASS/FAIL line per criterion ---------------------

_ACCEPTANCE: list[tuple[str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and report.when == "call":
        _ACCEPTANCE.append((marker.args[0], "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _ACCEPTANCE:
        terminalreporter.write_line(f"[{status}] {name}")
