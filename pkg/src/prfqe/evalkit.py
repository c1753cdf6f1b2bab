"""TREC-style evaluation: qrels/run I/O, AP, P@X, R-Precision, MAP and GMAP."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

GMAP_EPSILON = 1e-5
DEFAULT_P_POINTS = (5, 10)


class FormatError(ValueError):
    """Malformed qrels or run line; message carries ``path:line``."""

    def __init__(self, path, lineno, msg):
        super().__init__(f"{path}:{lineno}: {msg}")
        self.path = path
        self.lineno = lineno


@dataclass
class Qrels:
    judgments: dict[str, set[str]] = field(default_factory=dict)

    def relevant(self, topic_id: str) -> set[str]:
        return self.judgments.get(topic_id, set())


@dataclass
class Run:
    results: dict[str, list[tuple[str, float]]] = field(default_factory=dict)
    tag: str = "prfqe"

    def doc_ids(self, topic_id: str) -> list[str]:
        return [d for d, _ in self.results.get(topic_id, ())]


@dataclass
class TopicEval:
    ap: float
    r_prec: float
    p_at: dict[int, float]


@dataclass
class EvalReport:
    per_topic: dict[str, TopicEval]
    aggregates: dict
    skipped_topics: list[str]
    p_points: tuple[int, ...] = DEFAULT_P_POINTS

    @property
    def map(self) -> float:
        return self.aggregates["map"]

    @property
    def gmap(self) -> float:
        return self.aggregates["gmap"]


def _content_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if s and not s.startswith("#"):
                yield lineno, s


def parse_qrels(path) -> Qrels:
    """Parse ``topic 0 docid rel`` lines. Topics with only non-positive judgments stay, with no relevant docs."""
    judgments: dict[str, set[str]] = {}
    for lineno, line in _content_lines(path):
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(path, lineno, f"expected 'topic 0 docid rel', got {line!r}")
        topic, _, doc, rel = parts
        try:
            rel_v = int(rel)
        except ValueError:
            raise FormatError(path, lineno, f"relevance {rel!r} is not an integer") from None
        rels = judgments.setdefault(topic, set())
        if rel_v > 0:
            rels.add(doc)
    return Qrels(judgments)


def format_run(run: Run) -> str:
    buf = io.StringIO()
    for topic in sorted(run.results, key=_topic_key):
        for rank, (doc, score) in enumerate(run.results[topic], 1):
            buf.write(f"{topic} Q0 {doc} {rank} {score:.6f} {run.tag}\n")
    return buf.getvalue()


def write_run(run: Run, path, header: Iterable[str] = ()) -> None:
    """Write a run file; ``header`` lines are emitted as ``#`` comments."""
    with open(path, "w", encoding="utf-8") as fh:
        for h in header:
            fh.write(f"# {h}\n")
        fh.write(format_run(run))


def parse_run(path) -> Run:
    """Parse ``topic Q0 docid rank score tag`` lines; hits are ordered by rank."""
    rows: dict[str, list[tuple[int, str, float]]] = {}
    seen = set()
    tag = None
    for lineno, line in _content_lines(path):
        parts = line.split()
        if len(parts) != 6:
            raise FormatError(path, lineno, f"expected 6 fields, got {len(parts)}")
        topic, _, doc, rank, score, tag = parts
        try:
            rank_v, score_v = int(rank), float(score)
        except ValueError:
            raise FormatError(path, lineno, "rank/score not numeric") from None
        if (topic, doc) in seen:
            raise FormatError(path, lineno, f"duplicate document {doc} for topic {topic}")
        seen.add((topic, doc))
        rows.setdefault(topic, []).append((rank_v, doc, score_v))
    results = {}
    for topic, hits in rows.items():
        hits.sort(key=lambda h: (h[0], -h[2], h[1]))
        results[topic] = [(doc, score) for _, doc, score in hits]
    return Run(results, tag or "prfqe")


def _topic_key(topic: str):
    # numeric topics in numeric order, everything else lexicographic after
    return (0, int(topic), "") if topic.isdigit() else (1, 0, topic)


# ---------------------------------------------------------------------------
# metrics


def average_precision(hits: Sequence[str], relevant: set[str]) -> float:
    if not relevant:
        raise ValueError("average precision undefined without relevant documents")
    found = 0
    total = 0.0
    for k, doc in enumerate(hits, 1):
        if doc in relevant:
            found += 1
            total += found / k
    return total / len(relevant)


def precision_at(hits: Sequence[str], relevant: set[str], x: int) -> float:
    """Precision at cutoff ``x``; missing ranks count as non-relevant."""
    if x < 1:
        raise ValueError("cutoff must be >= 1")
    return sum(1 for d in hits[:x] if d in relevant) / x


def r_precision(hits: Sequence[str], relevant: set[str]) -> float:
    if not relevant:
        raise ValueError("R-precision undefined without relevant documents")
    return precision_at(hits, relevant, len(relevant))


def geometric_mean(values: Sequence[float], epsilon: float = GMAP_EPSILON) -> float:
    if not values:
        return 0.0
    return math.exp(math.fsum(math.log(max(v, epsilon)) for v in values) / len(values))


def evaluate(run: Run, qrels: Qrels, p_points: Sequence[int] = DEFAULT_P_POINTS) -> EvalReport:
    """Score every judged topic.

    Judged topics missing from the run score 0; run topics without relevant
    judgments are listed in ``skipped_topics``.
    """
    p_points = tuple(p_points)
    judged = sorted((t for t, rel in qrels.judgments.items() if rel), key=_topic_key)
    if not judged:
        raise ValueError("qrels contain no topic with relevant documents")
    per_topic = {}
    for topic in judged:
        rel = qrels.judgments[topic]
        hits = run.doc_ids(topic)
        per_topic[topic] = TopicEval(
            ap=average_precision(hits, rel),
            r_prec=r_precision(hits, rel),
            p_at={x: precision_at(hits, rel, x) for x in p_points},
        )
    skipped = sorted((t for t in set(run.results) | set(qrels.judgments) if t not in per_topic), key=_topic_key)
    n = len(per_topic)
    aps = [per_topic[t].ap for t in judged]
    aggregates = {
        "map": math.fsum(aps) / n,
        "gmap": geometric_mean(aps),
        "r_prec": math.fsum(per_topic[t].r_prec for t in judged) / n,
        "p_at": {x: math.fsum(per_topic[t].p_at[x] for t in judged) / n for x in p_points},
        "n_topics": n,
    }
    return EvalReport(per_topic, aggregates, skipped, p_points)


# ---------------------------------------------------------------------------
# reporting


def measure_names(p_points: Sequence[int]) -> list[str]:
    return ["map", "gmap", "r_prec"] + [f"p@{x}" for x in p_points]


def aggregate_values(report: EvalReport) -> dict[str, float]:
    agg = report.aggregates
    out = {"map": agg["map"], "gmap": agg["gmap"], "r_prec": agg["r_prec"]}
    for x in report.p_points:
        out[f"p@{x}"] = agg["p_at"][x]
    return out


def improvement(value: float, base: float) -> str:
    """Relative change as ``+19.29%``; ``base == 0`` gives ``n/a`` unless both are 0."""
    if base == 0:
        return "+0.00%" if value == 0 else "n/a"
    return f"{100.0 * (value - base) / base:+.2f}%"


def format_table(report: EvalReport, baseline: EvalReport | None = None, label: str = "run") -> str:
    """Human-readable aggregate table, 4 decimals."""
    names = measure_names(report.p_points)
    vals = aggregate_values(report)
    lines = []
    if baseline is None:
        lines.append(f"{'measure':<8} {label:>10}")
        for m in names:
            lines.append(f"{m:<8} {vals[m]:>10.4f}")
    else:
        bvals = aggregate_values(baseline)
        lines.append(f"{'measure':<8} {'baseline':>10} {label:>10} {'change':>9}")
        for m in names:
            lines.append(f"{m:<8} {bvals[m]:>10.4f} {vals[m]:>10.4f} {improvement(vals[m], bvals[m]):>9}")
    lines.append(f"topics evaluated: {report.aggregates['n_topics']}")
    if report.skipped_topics:
        lines.append("skipped: " + " ".join(report.skipped_topics))
    return "\n".join(lines) + "\n"


def format_csv(report: EvalReport) -> str:
    """Per-topic CSV ``topic,ap,r_prec,p@5,p@10`` at full precision, then an ``all`` row."""
    cols = ["topic", "ap", "r_prec"] + [f"p@{x}" for x in report.p_points]
    lines = [",".join(cols)]
    for topic, te in report.per_topic.items():
        row = [topic, repr(te.ap), repr(te.r_prec)] + [repr(te.p_at[x]) for x in report.p_points]
        lines.append(",".join(row))
    agg = report.aggregates
    lines.append(",".join(["all", repr(agg["map"]), repr(agg["r_prec"])]
                          + [repr(agg["p_at"][x]) for x in report.p_points]))
    return "\n".join(lines) + "\n"


def run_from_rankings(rankings: Mapping[str, object], tag: str) -> Run:
    """Build a :class:`Run` from ``topic -> Ranking``; empty rankings are dropped."""
    return Run({t: list(r.hits) for t, r in rankings.items() if r.hits}, tag)


def write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")
