"""Pseudo-relevance-feedback query expansion.

Candidate terms are mined from the top-ranked documents of a first-pass
search and scored either by cooccurrence with the query terms (Tanimoto,
Dice, Cosine on document counts) or by how differently they are distributed
in the top set versus the whole collection (KLD, Bo1).  A combined method
intersects a cooccurrence list with a distributional one.  The expanded query
is then reweighted with Rocchio-β, SumCC, kld or BoNorm.

Method names follow the experiment vocabulary: ``coo``, ``kld``, ``bo1``,
``boco`` (Bo1 ∩ cooccurrence) and ``kldco`` (KLD ∩ cooccurrence).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .index import InvertedIndex
from .retrieval import QueryTerm, Ranking, WeightedQuery, search

log = logging.getLogger(__name__)

COEFFICIENTS = ("tanimoto", "dice", "cosine")
BASE_METHODS = ("coo", "kld", "bo1")
COMBINED_METHODS = {"boco": "bo1", "kldco": "kld"}
METHODS = BASE_METHODS + tuple(COMBINED_METHODS)
REWEIGHTINGS = ("rocchio", "sumcc", "kld", "bonorm")

DEFAULT_N_TERMS = {"coo": 25, "kld": 40, "bo1": 40, "boco": 75, "kldco": 75}
DEFAULT_REWEIGHTING = {"coo": "rocchio", "kld": "kld", "bo1": "bonorm", "boco": "rocchio", "kldco": "rocchio"}


class ExpansionError(ValueError):
    pass


class EmptyRankingError(ExpansionError):
    pass


class ReweightingError(ExpansionError):
    pass


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class TopSet:
    """Term statistics over the feedback documents."""

    topic_id: str
    doc_ids: tuple[str, ...]
    term_doccount: Mapping[str, int]
    term_tf_sum: Mapping[str, int]
    total_tokens_R: int
    doc_terms: tuple[frozenset[str], ...] = field(repr=False)

    @property
    def r_docs(self) -> int:
        return len(self.doc_ids)

    def pair_doccount(self, a: str, b: str) -> int:
        """Number of feedback documents containing both ``a`` and ``b``."""
        return sum(1 for terms in self.doc_terms if a in terms and b in terms)


@dataclass(frozen=True)
class CandidateList:
    topic_id: str
    method: str
    entries: tuple[tuple[str, float], ...]
    r_docs: int
    n_terms: int
    coefficient: str | None = None
    # for combined lists: the two parent methods, cooccurrence first
    parents: tuple[str, str] | None = None

    @property
    def terms(self) -> list[str]:
        return [t for t, _ in self.entries]

    def scores(self) -> dict[str, float]:
        return dict(self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class ExpansionConfig:
    method: str = "coo"
    coefficient: str = "tanimoto"
    reweighting: str | None = None
    beta: float = 0.1
    r_docs: int = 10
    n_terms: int | None = None
    base_list_size: int | None = None
    cooccurrence_scope: str = "topset"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.coefficient not in COEFFICIENTS:
            raise ValueError(f"unknown coefficient {self.coefficient!r}")
        if self.reweighting is None:
            object.__setattr__(self, "reweighting", DEFAULT_REWEIGHTING[self.method])
        if self.reweighting not in REWEIGHTINGS:
            raise ValueError(f"unknown reweighting {self.reweighting!r}")
        if self.n_terms is None:
            object.__setattr__(self, "n_terms", DEFAULT_N_TERMS[self.method])
        if self.base_list_size is None and self.is_combined:
            object.__setattr__(self, "base_list_size", 3 * self.n_terms)
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.r_docs < 1 or self.n_terms < 1:
            raise ValueError("r_docs and n_terms must be >= 1")
        if self.is_combined and self.base_list_size < self.n_terms:
            raise ValueError("base_list_size must be >= n_terms for combined methods")
        if self.cooccurrence_scope not in ("topset", "collection"):
            raise ValueError(f"unknown cooccurrence scope {self.cooccurrence_scope!r}")

    @property
    def is_combined(self) -> bool:
        return self.method in COMBINED_METHODS


# ---------------------------------------------------------------------------
# top set


def build_topset(index: InvertedIndex, ranking: Ranking, r_docs: int) -> TopSet:
    """Collect counts over the first ``min(r_docs, len(ranking))`` documents."""
    if not ranking.hits:
        raise EmptyRankingError(f"topic {ranking.topic_id}: empty ranking, no feedback possible")
    if r_docs < 1:
        raise ValueError("r_docs must be >= 1")
    doc_ids = tuple(d for d, _ in ranking.hits[:r_docs])
    doccount: dict[str, int] = {}
    tf_sum: dict[str, int] = {}
    total = 0
    doc_terms = []
    for doc_id in doc_ids:
        rec = index.forward[doc_id]
        for term, tf in rec.term_freqs.items():
            doccount[term] = doccount.get(term, 0) + 1
            tf_sum[term] = tf_sum.get(term, 0) + tf
        total += rec.length
        doc_terms.append(frozenset(rec.term_freqs))
    return TopSet(ranking.topic_id, doc_ids, doccount, tf_sum, total, tuple(doc_terms))


# ---------------------------------------------------------------------------
# scoring functions


def cc_coefficient(kind: str, c_i, c_j, c_ij):
    """Cooccurrence coefficient from document counts.

    Works elementwise on arrays; returns a Python float for scalar input.

    >>> cc_coefficient("tanimoto", 30, 20, 10)
    0.25
    """
    ci = np.asarray(c_i, dtype=float)
    cj = np.asarray(c_j, dtype=float)
    cij = np.asarray(c_ij, dtype=float)
    if np.any(ci < 1) or np.any(cj < 1) or np.any(cij < 0) or np.any(cij > np.minimum(ci, cj)):
        raise ValueError(f"invalid counts c_i={c_i}, c_j={c_j}, c_ij={c_ij}")
    if kind == "tanimoto":
        out = cij / (ci + cj - cij)
    elif kind == "dice":
        out = 2.0 * cij / (ci + cj)
    elif kind == "cosine":
        out = cij / np.sqrt(ci * cj)
    else:
        raise ValueError(f"unknown coefficient {kind!r}")
    return float(out) if out.ndim == 0 else out


def _scalar_cc(kind: str, ci: int, cj: int, cij: int) -> float:
    # hot path for extraction; same arithmetic as cc_coefficient
    if kind == "tanimoto":
        return cij / (ci + cj - cij)
    if kind == "dice":
        return 2.0 * cij / (ci + cj)
    return cij / math.sqrt(ci * cj)


def rel_score(query: WeightedQuery, candidate: str, topset: TopSet, kind: str) -> float:
    """Sum of ``qtf_i * CC(t_i, candidate)`` over original query terms in the top set."""
    c_e = topset.term_doccount.get(candidate, 0)
    if c_e < 1:
        raise ValueError(f"candidate {candidate!r} does not occur in the top set")
    total = 0.0
    for qt in query.original_terms:
        c_i = topset.term_doccount.get(qt.term, 0)
        if c_i == 0:
            continue
        c_ie = topset.pair_doccount(qt.term, candidate)
        total += qt.qtf * _scalar_cc(kind, c_i, c_e, c_ie)
    return total


def kld_score(p_r: float, p_c: float) -> float:
    """``p_r * log2(p_r / p_c)``."""
    if not (0 < p_r <= 1 and 0 < p_c <= 1):
        raise ValueError(f"probabilities out of range: p_r={p_r}, p_c={p_c}")
    return p_r * math.log2(p_r / p_c)


def bo1_score(tf_x: float, f: float, n_docs: float) -> float:
    """Bose-Einstein (Bo1) informativeness with both logs in base 2."""
    if f < 1 or n_docs < 1 or tf_x < 0:
        raise ValueError(f"invalid Bo1 inputs tf_x={tf_x}, f={f}, n_docs={n_docs}")
    p_n = f / n_docs
    return tf_x * math.log2((1.0 + p_n) / p_n) + math.log2(1.0 + p_n)


# ---------------------------------------------------------------------------
# candidate extraction


def _rank_entries(scores: Mapping[str, float], limit: int) -> tuple[tuple[str, float], ...]:
    ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
    return tuple(ordered[:limit])


def _collection_rel_scores(index, query, candidates, kind):
    # c_i, c_e, c_ie counted over the whole collection
    postings = index.postings
    qdocs = {
        qt.term: frozenset(d for d, _ in postings[qt.term])
        for qt in query.original_terms if qt.term in postings
    }
    out = {}
    for cand in candidates:
        cdocs = frozenset(d for d, _ in postings[cand])
        total = 0.0
        for qt in query.original_terms:
            docs = qdocs.get(qt.term)
            if not docs:
                continue
            total += qt.qtf * _scalar_cc(kind, len(docs), len(cdocs), len(docs & cdocs))
        out[cand] = total
    return out


def score_candidates(query: WeightedQuery, topset: TopSet, index: InvertedIndex,
                     method: str, coefficient: str = "tanimoto",
                     cooccurrence_scope: str = "topset") -> dict[str, float]:
    """Score every top-set term that is not an original query term."""
    qterms = {qt.term for qt in query.terms if qt.qtf > 0}
    candidates = sorted(t for t in topset.term_doccount if t not in qterms)
    if method == "coo":
        if cooccurrence_scope == "collection":
            return _collection_rel_scores(index, query, candidates, coefficient)
        return {c: rel_score(query, c, topset, coefficient) for c in candidates}
    stats = index.stats
    if method == "kld":
        return {
            t: kld_score(topset.term_tf_sum[t] / topset.total_tokens_R,
                         stats.term_cf[t] / stats.total_tokens)
            for t in candidates
        }
    if method == "bo1":
        return {t: bo1_score(topset.term_tf_sum[t], stats.term_cf[t], stats.n_docs) for t in candidates}
    raise ValueError(f"not a base selection method: {method!r}")


def extract_candidates(query: WeightedQuery, topset: TopSet, index: InvertedIndex,
                       config: ExpansionConfig, method: str | None = None,
                       limit: int | None = None) -> CandidateList:
    """Rank candidate terms with one base method and keep the top ``limit``.

    ``method`` and ``limit`` default to ``config.method`` and ``config.n_terms``;
    the combined pipeline overrides them to build its base lists.
    """
    method = method or config.method
    limit = limit or config.n_terms
    scores = score_candidates(query, topset, index, method, config.coefficient,
                              config.cooccurrence_scope)
    return CandidateList(
        topic_id=query.topic_id,
        method=method,
        entries=_rank_entries(scores, limit),
        r_docs=topset.r_docs,
        n_terms=limit,
        coefficient=config.coefficient if method == "coo" else None,
    )


def combine_candidates(list_a: CandidateList, list_b: CandidateList, n_terms: int) -> CandidateList:
    """Intersect two candidate lists, keeping ``list_a``'s scores and order."""
    if list_a.topic_id != list_b.topic_id:
        raise ValueError("candidate lists belong to different topics")
    in_b = set(list_b.terms)
    kept = {t: s for t, s in list_a.entries if t in in_b}
    tag = {"bo1": "boco", "kld": "kldco"}.get(list_b.method, f"{list_b.method}co")
    return CandidateList(
        topic_id=list_a.topic_id,
        method=tag,
        entries=_rank_entries(kept, n_terms),
        r_docs=list_a.r_docs,
        n_terms=n_terms,
        coefficient=list_a.coefficient,
        parents=(list_a.method, list_b.method),
    )


# ---------------------------------------------------------------------------
# reweighting


def _expanded(query: WeightedQuery, method: str, weights: dict[str, float], order: list[str]) -> WeightedQuery:
    qtf = {qt.term: qt.qtf for qt in query.terms}
    terms = tuple(QueryTerm(t, weights[t], qtf.get(t, 0)) for t in order)
    return WeightedQuery(query.topic_id, terms, f"expanded:{method}")


def _merge_order(query: WeightedQuery, candidates: CandidateList) -> list[str]:
    own = [qt.term for qt in query.terms]
    seen = set(own)
    return own + [t for t in candidates.terms if t not in seen]


def reweight_rocchio(query: WeightedQuery, candidates: CandidateList, beta: float = 0.1) -> WeightedQuery:
    """``qtf/qtf_max + beta * w/w_max`` for every query and candidate term.

    Negative candidate scores (possible with KLD) count as 0.
    """
    if not candidates.entries:
        return replace(query, origin=f"expanded:{candidates.method}")
    if beta < 0:
        raise ReweightingError("beta must be >= 0")
    cand = {t: max(s, 0.0) for t, s in candidates.entries}
    w_max = max(cand.values())
    if w_max <= 0:
        raise ReweightingError(f"topic {query.topic_id}: no positive candidate score, Rocchio undefined")
    qtf_max = max((qt.qtf for qt in query.terms), default=0)
    if qtf_max <= 0:
        raise ReweightingError(f"topic {query.topic_id}: query has no original terms")
    qtf = {qt.term: qt.qtf for qt in query.terms}
    order = _merge_order(query, candidates)
    weights = {t: qtf.get(t, 0) / qtf_max + beta * cand.get(t, 0.0) / w_max for t in order}
    return _expanded(query, candidates.method, weights, order)


def _require(candidates: CandidateList, allowed: tuple[str, ...], scheme: str):
    if candidates.method not in allowed:
        raise ReweightingError(
            f"{scheme} reweighting needs candidates from {'/'.join(allowed)}, got {candidates.method!r}"
        )


def reweight_sumcc(query: WeightedQuery, candidates: CandidateList) -> WeightedQuery:
    """Expansion terms get ``rel / sum(q_i)``; original terms keep their weights."""
    combined_coo = candidates.parents is not None and candidates.parents[0] == "coo"
    if not combined_coo:
        _require(candidates, ("coo",), "SumCC")
    if not candidates.entries:
        return replace(query, origin=f"expanded:{candidates.method}")
    q_sum = sum(qt.weight for qt in query.original_terms)
    weights = {qt.term: qt.weight for qt in query.terms}
    for t, rel in candidates.entries:
        weights.setdefault(t, max(rel, 0.0) / q_sum)
    return _expanded(query, candidates.method, weights, _merge_order(query, candidates))


def reweight_kld(query: WeightedQuery, candidates: CandidateList) -> WeightedQuery:
    """Expansion terms take their KLD score, floored at 0."""
    _require(candidates, ("kld",), "kld")
    if not candidates.entries:
        return replace(query, origin=f"expanded:{candidates.method}")
    weights = {qt.term: qt.weight for qt in query.terms}
    for t, s in candidates.entries:
        weights.setdefault(t, max(s, 0.0))
    return _expanded(query, candidates.method, weights, _merge_order(query, candidates))


def reweight_bonorm(query: WeightedQuery, candidates: CandidateList) -> WeightedQuery:
    """Expansion terms take ``Bo(t) / sum of Bo over the candidate list``."""
    _require(candidates, ("bo1",), "BoNorm")
    if not candidates.entries:
        return replace(query, origin=f"expanded:{candidates.method}")
    total = math.fsum(s for _, s in candidates.entries)
    if total <= 0 or any(s <= 0 for _, s in candidates.entries):
        raise ReweightingError("BoNorm needs strictly positive Bo1 scores")
    weights = {qt.term: qt.weight for qt in query.terms}
    for t, s in candidates.entries:
        weights.setdefault(t, s / total)
    return _expanded(query, candidates.method, weights, _merge_order(query, candidates))


def reweight(query: WeightedQuery, candidates: CandidateList, scheme: str, beta: float = 0.1) -> WeightedQuery:
    if scheme == "rocchio":
        return reweight_rocchio(query, candidates, beta)
    if scheme == "sumcc":
        return reweight_sumcc(query, candidates)
    if scheme == "kld":
        return reweight_kld(query, candidates)
    if scheme == "bonorm":
        return reweight_bonorm(query, candidates)
    raise ValueError(f"unknown reweighting {scheme!r}")


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class ExpansionResult:
    query: WeightedQuery
    candidates: CandidateList | None = None
    # combined methods only: the two base lists before intersection
    base_lists: tuple[CandidateList, CandidateList] | None = None
    warnings: list[str] = field(default_factory=list)


def candidates_for(index: InvertedIndex, query: WeightedQuery, topset: TopSet,
                   config: ExpansionConfig) -> tuple[CandidateList, tuple | None]:
    if not config.is_combined:
        return extract_candidates(query, topset, index, config), None
    list_a = extract_candidates(query, topset, index, config, "coo", config.base_list_size)
    list_b = extract_candidates(query, topset, index, config, COMBINED_METHODS[config.method],
                                config.base_list_size)
    return combine_candidates(list_a, list_b, config.n_terms), (list_a, list_b)


def expand(index: InvertedIndex, query: WeightedQuery, config: ExpansionConfig) -> ExpansionResult:
    """Run first pass, feedback statistics, selection and reweighting for one query."""
    origin = f"expanded:{config.method}"
    first = search(index, query, k=config.r_docs)
    if not first.hits:
        msg = f"topic {query.topic_id}: first pass retrieved nothing, query left unexpanded"
        log.warning(msg)
        return ExpansionResult(replace(query, origin=origin), warnings=[msg])
    topset = build_topset(index, first, config.r_docs)
    cands, bases = candidates_for(index, query, topset, config)
    if not cands.entries:
        return ExpansionResult(replace(query, origin=origin), cands, bases)
    expanded = reweight(query, cands, config.reweighting, config.beta)
    return ExpansionResult(replace(expanded, origin=origin), cands, bases)


def expand_query(index: InvertedIndex, query: WeightedQuery, config: ExpansionConfig) -> WeightedQuery:
    return expand(index, query, config).query
