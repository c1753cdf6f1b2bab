"""
Where do expansion terms come from?
===================================

Run one topic through the first pass, collect its feedback documents and
look at the candidate terms each selection method proposes.
"""

from _common import load_collection

from prfqe import ExpansionConfig, build_topset, extract_candidates, search
from prfqe.expansion import candidates_for

index, queries, qrels = load_collection()
query = queries[0]
print("topic", query.topic_id, "query terms:", [t.term for t in query.terms])

# The first pass: ten feedback documents.
first = search(index, query, k=10)
topset = build_topset(index, first, r_docs=10)
relevant = qrels.relevant(query.topic_id)
print("feedback docs:", " ".join(d + ("*" if d in relevant else "") for d in topset.doc_ids))

###############################################################################
# Cooccurrence (Tanimoto) rewards terms that share documents with the query;
# KLD and Bo1 reward terms that are overrepresented in the feedback set.
for method in ("coo", "kld", "bo1"):
    cands = extract_candidates(query, topset, index, ExpansionConfig(method=method, n_terms=8))
    print(f"\n{method}:")
    for term, score in cands.entries:
        df, cf = index.term_stats(term)
        print(f"  {term:14s} {score:9.4f}   df={df:3d} cf={cf:3d}")

###############################################################################
# The combined method keeps only terms both lists agree on, in the
# cooccurrence order.
cands, (coo_list, bo1_list) = candidates_for(index, query, topset, ExpansionConfig(method="boco", n_terms=8))
print("\nboco keeps", len(cands), "of", len(coo_list), "cooccurrence candidates:", cands.terms)
