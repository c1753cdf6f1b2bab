"""Pseudo-relevance-feedback query expansion with cooccurrence and distributional term selection."""

__version__ = "0.1.0"

from .textkit import AnalyzerConfig, analyze, load_stopwords
from .index import InvertedIndex, build_index, load_index, save_index, term_stats
from .retrieval import QueryTerm, Ranking, WeightedQuery, parse_query, search
from .expansion import (
    CandidateList, ExpansionConfig, TopSet, bo1_score, build_topset, cc_coefficient,
    combine_candidates, expand, expand_query, extract_candidates, kld_score, rel_score,
    reweight_bonorm, reweight_kld, reweight_rocchio, reweight_sumcc,
)
from .evalkit import (
    EvalReport, Qrels, Run, average_precision, evaluate, parse_qrels, parse_run,
    precision_at, r_precision, write_run,
)
