import math
import random

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from oracles import random_corpus, ref_candidate_scores
from prfqe.expansion import (
    CandidateList, EmptyRankingError, ExpansionConfig, ReweightingError, TopSet, bo1_score,
    build_topset, cc_coefficient, combine_candidates, expand, extract_candidates, kld_score,
    rel_score, reweight_bonorm, reweight_kld, reweight_rocchio, reweight_sumcc,
)
from prfqe.index import build_index
from prfqe.retrieval import QueryTerm, Ranking, WeightedQuery, parse_query, search
from prfqe.textkit import AnalyzerConfig

PLAIN = AnalyzerConfig()


def query(*pairs, topic="t"):
    return WeightedQuery(topic, tuple(QueryTerm(t, float(n), n) for t, n in pairs))


def clist(entries, method="coo", topic="t", n=None, **kw):
    return CandidateList(topic, method, tuple(entries), r_docs=10, n_terms=n or max(len(entries), 1), **kw)


def topset_from(docs: dict[str, list[str]], ids, topic="t"):
    idx = build_index([(d, " ".join(t)) for d, t in docs.items()], PLAIN)
    return idx, build_topset(idx, Ranking(topic, tuple((d, 1.0) for d in ids)), len(ids))


# --- top set ---------------------------------------------------------------

def test_topset_counts(two_doc_index):
    ts = build_topset(two_doc_index, Ranking("t", (("d1", 0.9), ("d2", 0.5))), 2)
    assert ts.term_doccount["b"] == 2 and ts.term_doccount["a"] == 1
    assert ts.pair_doccount("a", "b") == 1
    assert ts.term_tf_sum["b"] == 2
    assert ts.total_tokens_R == 4


def test_topset_single_doc(two_doc_index):
    ts = build_topset(two_doc_index, Ranking("t", (("d1", 0.9), ("d2", 0.5))), 1)
    assert set(ts.term_doccount.values()) <= {0, 1}
    assert ts.pair_doccount("a", "b") == 1 and ts.pair_doccount("a", "c") == 0


def test_topset_truncation(two_doc_index):
    ts = build_topset(two_doc_index, Ranking("t", (("d2", 0.3),)), 10)
    assert ts.r_docs == 1 and ts.doc_ids == ("d2",)


def test_topset_empty_ranking(two_doc_index):
    with pytest.raises(EmptyRankingError):
        build_topset(two_doc_index, Ranking("t", ()), 10)


# --- coefficients ----------------------------------------------------------

def test_tanimoto_value():
    assert cc_coefficient("tanimoto", 30, 20, 10) == 0.25


@pytest.mark.parametrize("kind", ["tanimoto", "dice", "cosine"])
def test_coefficient_identity_and_zero(kind):
    assert cc_coefficient(kind, 7, 7, 7) == 1.0
    assert cc_coefficient(kind, 7, 3, 0) == 0.0


@pytest.mark.parametrize("bad", [(0, 1, 0), (3, 2, 3), (2, 2, -1)])
def test_coefficient_preconditions(bad):
    with pytest.raises(ValueError):
        cc_coefficient("dice", *bad)
    with pytest.raises(ValueError):
        cc_coefficient("jaccardish", 2, 2, 1)


counts = st.tuples(st.integers(1, 10_000), st.integers(1, 10_000), st.floats(0, 1))


@given(counts)
def test_coefficient_laws(c):
    ci, cj, frac = c
    cij = int(frac * min(ci, cj))
    t, d, cos = (cc_coefficient(k, ci, cj, cij) for k in ("tanimoto", "dice", "cosine"))
    assert 0 <= t <= d <= cos <= 1
    assert t == pytest.approx(d / (2 - d), abs=1e-12)
    for k in ("tanimoto", "dice", "cosine"):
        assert cc_coefficient(k, ci, cj, cij) == cc_coefficient(k, cj, ci, cij)


def test_coefficient_vectorized():
    out = cc_coefficient("dice", np.array([2, 4]), np.array([2, 4]), np.array([1, 4]))
    np.testing.assert_array_equal(out, [0.5, 1.0])


# --- rel ---------------------------------------------------------------------

def test_rel_weighted_sum():
    # t1 in docs {0,1}, t2 in {0,1,2,3}, e in {0,2}: CC(t1,e)=1/3, CC(t2,e)=2/4 by tanimoto
    docs = {"d0": ["t1", "t2", "e"], "d1": ["t1", "t2"], "d2": ["t2", "e"], "d3": ["t2"]}
    idx, ts = topset_from(docs, list(docs))
    q = query(("t1", 1), ("t2", 2))
    expected = 1 * (1 / 3) + 2 * (2 / 4)
    assert rel_score(q, "e", ts, "tanimoto") == pytest.approx(expected)


def test_rel_spec_substitution():
    # CC(t1,e)=0.5 and CC(t2,e)=0.25 with Dice: c_i=c_e=2,c_ie=1 and c_i=6,c_e=2,c_ie=1
    docs = {"d0": ["t1", "t2", "e"], "d1": ["t1", "t2"], "d2": ["e"]}
    for i in range(3, 7):
        docs[f"d{i}"] = ["t2"]
    idx, ts = topset_from(docs, list(docs))
    assert cc_coefficient("dice", ts.term_doccount["t1"], 2, 1) == 0.5
    assert cc_coefficient("dice", ts.term_doccount["t2"], 2, 1) == 0.25
    assert rel_score(query(("t1", 1), ("t2", 2)), "e", ts, "dice") == 1.0


def test_rel_zero_and_identity():
    docs = {"d0": ["q", "x"], "d1": ["y"]}
    idx, ts = topset_from(docs, ["d0", "d1"])
    assert rel_score(query(("q", 1)), "y", ts, "cosine") == 0.0
    assert rel_score(query(("q", 1)), "x", ts, "cosine") == cc_coefficient("cosine", 1, 1, 1)
    assert rel_score(query(("q", 1), ("absent", 3)), "x", ts, "cosine") == 1.0


# --- KLD / Bo1 -----------------------------------------------------------------

def test_kld_values():
    assert kld_score(0.04, 0.01) == pytest.approx(0.08, abs=1e-15)
    assert kld_score(0.3, 0.3) == 0.0
    assert kld_score(0.01, 0.04) == pytest.approx(-0.02, abs=1e-15)
    with pytest.raises(ValueError):
        kld_score(0.0, 0.1)


@given(st.floats(1e-9, 1.0), st.floats(1e-9, 1.0))
def test_kld_sign(p, c):
    s = kld_score(p, c)
    assert kld_score(p, p) == 0.0
    assert (s > 0) == (p > c)


def test_bo1_values():
    assert bo1_score(0, 30, 120) == pytest.approx(math.log2(1.25))
    assert bo1_score(7, 50, 50) == 8.0
    # mpmath, 30 digits: 26.6472012239842489901176567085
    assert bo1_score(4, 100, 10_000) == pytest.approx(26.64720122398425, abs=1e-12)


@given(st.integers(0, 500), st.integers(1, 10**6), st.integers(1, 10**6))
def test_bo1_monotone(tf, f, n):
    assert bo1_score(tf + 1, f, n) > bo1_score(tf, f, n)
    # d/dP_n of Bo1 has the sign of (P_n - tf_x): decreasing in f only while f/n < tf_x
    if tf >= 1 and (f + 1) / n < tf:
        assert bo1_score(tf, f + 1, n) < bo1_score(tf, f, n)
    if tf >= 1 and f / n > tf:
        assert bo1_score(tf, f + 1, n) > bo1_score(tf, f, n)


def test_kld_base_only_rescales_order():
    rng = random.Random(3)
    pairs = [(rng.uniform(1e-4, 1), rng.uniform(1e-4, 1)) for _ in range(200)]
    base2 = sorted(range(200), key=lambda i: -kld_score(*pairs[i]))
    natural = sorted(range(200), key=lambda i: -(pairs[i][0] * math.log(pairs[i][0] / pairs[i][1])))
    assert base2 == natural


# --- extraction ------------------------------------------------------------------

def test_only_query_terms_gives_empty_list():
    docs = {"d0": ["a", "b"], "d1": ["a"]}
    idx, ts = topset_from(docs, ["d0", "d1"])
    for m in ("coo", "kld", "bo1"):
        cl = extract_candidates(query(("a", 1), ("b", 1)), ts, idx, ExpansionConfig(method=m))
        assert cl.entries == ()


def test_top_l_truncation_and_tiebreak():
    docs = {"d0": ["q", "x", "y"], "d1": ["q", "x"], "d2": ["q", "z"], "d3": ["w"]}
    idx, ts = topset_from(docs, ["d0", "d1", "d2"])
    cfg = ExpansionConfig(method="coo", n_terms=1)
    assert extract_candidates(query(("q", 1)), ts, idx, cfg).terms == ["x"]
    # y and z share the same Tanimoto score with q (1/3): lexicographic order decides
    full = extract_candidates(query(("q", 1)), ts, idx, ExpansionConfig(method="coo", n_terms=10))
    assert full.terms == ["x", "y", "z"]
    assert full.entries[1][1] == full.entries[2][1]


@pytest.mark.parametrize("method", ["coo", "kld", "bo1"])
@pytest.mark.parametrize("coefficient", ["tanimoto", "dice", "cosine"])
def test_extraction_matches_exhaustive_rescoring(method, coefficient):
    rng = random.Random(hash((method, coefficient)) & 0xFFFF)
    for _ in range(40):
        docs = random_corpus(rng, vocab=12)
        idx = build_index([(d, " ".join(t)) for d, t in docs.items()], PLAIN)
        qterms = rng.sample(sorted(idx.postings), rng.randint(1, 2))
        q = query(*[(t, rng.randint(1, 2)) for t in qterms])
        first = search(idx, q, 1000)
        r = rng.randint(1, 6)
        ts = build_topset(idx, first, r)
        cfg = ExpansionConfig(method=method, coefficient=coefficient, n_terms=1000, r_docs=r)
        got = extract_candidates(q, ts, idx, cfg)
        ref = ref_candidate_scores(docs, list(ts.doc_ids), {t.term: t.qtf for t in q.terms}, method, coefficient)
        assert dict(got.entries) == ref
        assert got.terms == sorted(ref, key=lambda t: (-ref[t], t))
        assert not set(got.terms) & set(qterms)


def test_collection_scope_variant():
    docs = {"d0": ["q", "x"], "d1": ["x"], "d2": ["x"], "d3": ["y"]}
    idx, ts = topset_from(docs, ["d0"])
    q = query(("q", 1))
    local = extract_candidates(q, ts, idx, ExpansionConfig(method="coo"))
    glob = extract_candidates(q, ts, idx, ExpansionConfig(method="coo", cooccurrence_scope="collection"))
    assert local.scores()["x"] == 1.0
    assert glob.scores()["x"] == pytest.approx(1 / 3)


# --- combination ---------------------------------------------------------------

def test_combine_intersection_ranked_by_first():
    a = clist([("x", 0.9), ("y", 0.5), ("z", 0.4)])
    b = clist([("y", 9.0), ("w", 8.0), ("z", 7.0)], method="bo1")
    out = combine_candidates(a, b, 10)
    assert out.entries == (("y", 0.5), ("z", 0.4))
    assert out.method == "boco" and out.parents == ("coo", "bo1")


def test_combine_disjoint_and_identity():
    a = clist([("x", 0.9), ("y", 0.5), ("z", 0.4)])
    assert combine_candidates(a, clist([("p", 1.0)], method="kld"), 5).entries == ()
    assert combine_candidates(a, a, 2).entries == a.entries[:2]


@given(st.lists(st.sampled_from("abcdefghij"), unique=True), st.lists(st.sampled_from("abcdefghij"), unique=True),
       st.integers(1, 10))
def test_combine_subset_property(ta, tb, n):
    a = clist([(t, 1.0 / (i + 1)) for i, t in enumerate(ta)])
    b = clist([(t, 1.0) for t in tb], method="kld")
    out = combine_candidates(a, b, n)
    assert set(out.terms) <= set(ta) & set(tb) and len(out) <= n


# --- reweighting ---------------------------------------------------------------

def test_rocchio_values():
    q = query(("orig", 2), ("other", 1))
    c = clist([("exp", 10.0), ("mid", 5.0)])
    out = reweight_rocchio(q, c, beta=0.1).weights()
    assert out["orig"] == 1.0
    assert out["exp"] == pytest.approx(0.1)
    assert out["mid"] == pytest.approx(0.05)
    # an original term that is also scored: qtf=2,qtf_max=2,w=5,w_max=10
    mixed = reweight_rocchio(query(("orig", 2)), clist([("top", 10.0), ("orig", 5.0)]), 0.1)
    assert mixed.weights()["orig"] == pytest.approx(1.05, abs=1e-15)
    assert [t.qtf for t in mixed.terms] == [2, 0]


def test_rocchio_beta_zero_and_errors():
    q = query(("a", 1))
    out = reweight_rocchio(q, clist([("x", 3.0)]), beta=0.0)
    assert out.weights() == {"a": 1.0, "x": 0.0}
    with pytest.raises(ReweightingError):
        reweight_rocchio(q, clist([("x", -1.0)], method="kld"), 0.1)
    assert reweight_rocchio(q, clist([]), 0.1).terms == q.terms


def test_sumcc_values():
    q = query(("a", 1), ("b", 3))
    out = reweight_sumcc(q, clist([("x", 1.0), ("y", 0.0)])).weights()
    assert out == {"a": 1.0, "b": 3.0, "x": 0.25, "y": 0.0}
    assert reweight_sumcc(query(("a", 2)), clist([("x", 1.0)])).weights()["x"] == 0.5
    with pytest.raises(ReweightingError):
        reweight_sumcc(q, clist([("x", 1.0)], method="bo1"))


def test_kld_reweighting():
    q = query(("a", 2))
    out = reweight_kld(q, clist([("x", 0.08), ("neg", -0.3)], method="kld")).weights()
    assert out == {"a": 2.0, "x": 0.08, "neg": 0.0}
    with pytest.raises(ReweightingError):
        reweight_kld(q, clist([("x", 1.0)], method="coo"))


def test_bonorm_values():
    q = query(("a", 1))
    out = reweight_bonorm(q, clist([("x", 2.0), ("y", 3.0), ("z", 5.0)], method="bo1")).weights()
    assert out["a"] == 1.0
    assert (out["x"], out["y"], out["z"]) == pytest.approx((0.2, 0.3, 0.5))
    assert reweight_bonorm(q, clist([("x", 7.5)], method="bo1")).weights()["x"] == 1.0
    two = reweight_bonorm(q, clist([("x", 4.0), ("y", 4.0)], method="bo1")).weights()
    assert two["x"] == two["y"] == 0.5
    with pytest.raises(ReweightingError):
        reweight_bonorm(q, clist([("x", 1.0)], method="kld"))
    with pytest.raises(ReweightingError):
        reweight_bonorm(q, clist([("x", 0.0)], method="bo1"))


@given(st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=100))
def test_bonorm_sums_to_one(scores):
    c = clist([(f"t{i}", s) for i, s in enumerate(scores)], method="bo1")
    out = reweight_bonorm(query(("a", 1)), c)
    assert math.fsum(t.weight for t in out.terms if t.qtf == 0) == pytest.approx(1.0, abs=1e-12)


def test_reweighted_queries_never_lose_original_terms():
    q = query(("a", 2), ("b", 1))
    for out in (reweight_rocchio(q, clist([("x", 1.0)])), reweight_sumcc(q, clist([("x", 1.0)])),
                reweight_kld(q, clist([("x", 1.0)], method="kld")),
                reweight_bonorm(q, clist([("x", 1.0)], method="bo1"))):
        assert [t.term for t in out.terms[:2]] == ["a", "b"]
        assert all(t.qtf == 0 for t in out.terms[2:])


# --- pipeline -----------------------------------------------------------------

def test_no_cooccurring_terms_returns_query():
    idx = build_index([("d0", "q q"), ("d1", "other words")], PLAIN)
    q = query(("q", 1))
    res = expand(idx, q, ExpansionConfig(method="coo"))
    assert res.candidates.entries == ()
    assert res.query.terms == q.terms and res.query.origin == "expanded:coo"


def test_combined_disjoint_is_noop(monkeypatch):
    import prfqe.expansion as ex

    idx = build_index([("d0", "q x y"), ("d1", "x z")], PLAIN)
    q = query(("q", 1))
    real = ex.extract_candidates

    def fake(query_, topset, index, config, method=None, limit=None):
        out = real(query_, topset, index, config, method, limit)
        if method == "bo1":
            return CandidateList(out.topic_id, "bo1", (("nothere", 1.0),), out.r_docs, out.n_terms)
        return out

    monkeypatch.setattr(ex, "extract_candidates", fake)
    res = ex.expand(idx, q, ExpansionConfig(method="boco", n_terms=2))
    assert res.candidates.entries == () and res.query.terms == q.terms


def test_first_pass_empty_warns():
    idx = build_index([("d0", "a b")], PLAIN)
    res = expand(idx, query(("zzz", 1)), ExpansionConfig())
    assert res.warnings and res.query.origin == "expanded:coo"


def test_planted_term_is_added():
    # "plant" cooccurs with "seed" in every top document and nowhere else
    docs = [(f"r{i}", f"seed plant filler{i}") for i in range(5)]
    docs += [(f"n{i}", f"noise{i} filler{i} other") for i in range(20)]
    idx = build_index(docs, PLAIN)
    q = query(("seed", 1))
    for method in ("coo", "kld", "bo1", "boco", "kldco"):
        cfg = ExpansionConfig(method=method, n_terms=1, r_docs=5)
        res = expand(idx, q, cfg)
        ts = build_topset(idx, search(idx, q, 5), 5)
        if not cfg.is_combined:
            # brute force: the top-scoring top-set term is the planted one
            docs_tokens = {d: t.split() for d, t in docs}
            ref = ref_candidate_scores(docs_tokens, list(ts.doc_ids), {"seed": 1}, method)
            assert max(ref, key=lambda t: (ref[t], t)) == "plant"
        assert "plant" in res.query.weights(), method


def test_config_defaults_and_validation():
    assert ExpansionConfig(method="coo").n_terms == 25
    assert ExpansionConfig(method="kld").reweighting == "kld"
    boco = ExpansionConfig(method="boco")
    assert (boco.n_terms, boco.base_list_size, boco.reweighting) == (75, 225, "rocchio")
    with pytest.raises(ValueError):
        ExpansionConfig(method="boco", n_terms=10, base_list_size=5)
    with pytest.raises(ValueError):
        ExpansionConfig(beta=-0.1)
    with pytest.raises(ValueError):
        ExpansionConfig(method="rm3")
