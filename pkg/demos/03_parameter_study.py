"""
Number of expansion terms and feedback documents
================================================

The two sweeps the command line exposes as ``sweep-terms`` and
``sweep-docs``, done with the library and plotted with matplotlib.
"""

import numpy as np
from _common import load_collection

from prfqe import ExpansionConfig, Run, evaluate, expand_query, search
from prfqe.expansion import METHODS

index, queries, qrels = load_collection()


def score(cfg):
    run = Run({q.topic_id: list(search(index, expand_query(index, q, cfg), 1000).hits) for q in queries})
    rep = evaluate(run, qrels)
    return rep.map, rep.aggregates["r_prec"]


terms_grid = np.array([5, 10, 25, 40, 75, 100])
docs_grid = np.array([1, 2, 5, 10, 15, 20])

by_terms = {m: np.array([score(ExpansionConfig(method=m, n_terms=int(n))) for n in terms_grid]) for m in METHODS}
by_docs = {m: np.array([score(ExpansionConfig(method=m, r_docs=int(r))) for r in docs_grid]) for m in METHODS}

for m in METHODS:
    best_n = terms_grid[by_terms[m][:, 0].argmax()]
    best_r = docs_grid[by_docs[m][:, 0].argmax()]
    print(f"{m:6s} best n_terms={best_n:3d}  best r_docs={best_r:2d}")

###############################################################################
# Plot MAP against both parameters, one line per method.
try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for m in METHODS:
        axes[0].plot(terms_grid, by_terms[m][:, 0], marker="o", label=m)
        axes[1].plot(docs_grid, by_docs[m][:, 0], marker="o", label=m)
    axes[0].set_xlabel("expansion terms")
    axes[1].set_xlabel("feedback documents")
    axes[0].set_ylabel("MAP")
    axes[0].legend()
    fig.tight_layout()
    fig.savefig("parameter_study.png", dpi=100)
    print("saved parameter_study.png")
