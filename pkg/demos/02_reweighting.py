"""
Comparing reweighting schemes
=============================

Each selection method can be paired with Rocchio or with the scheme derived
from its own scores.  MAP over the synthetic topics for every valid pair.
"""

from _common import load_collection

from prfqe import ExpansionConfig, Run, evaluate, expand_query, search

index, queries, qrels = load_collection()


def mean_ap(qs):
    return evaluate(Run({q.topic_id: list(search(index, q, 1000).hits) for q in qs}), qrels).map


print(f"{'baseline':16s} {mean_ap(queries):.4f}")

pairs = [("coo", "rocchio"), ("coo", "sumcc"), ("kld", "rocchio"), ("kld", "kld"),
         ("bo1", "rocchio"), ("bo1", "bonorm"), ("boco", "rocchio"), ("kldco", "rocchio")]
for method, scheme in pairs:
    cfg = ExpansionConfig(method=method, reweighting=scheme)
    value = mean_ap([expand_query(index, q, cfg) for q in queries])
    print(f"{method + '/' + scheme:16s} {value:.4f}")

###############################################################################
# Rocchio's beta controls how much the expansion terms count.  With beta = 0
# the expanded query ranks exactly like the original one.
for beta in (0.0, 0.05, 0.1, 0.3, 1.0):
    cfg = ExpansionConfig(method="coo", reweighting="rocchio", beta=beta)
    print(f"coo/rocchio beta={beta:<5} {mean_ap([expand_query(index, q, cfg) for q in queries]):.4f}")
