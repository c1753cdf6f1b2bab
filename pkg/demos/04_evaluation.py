"""
TREC-style evaluation
=====================

Write runs in the TREC exchange format, read them back and compare an
expanded run with the baseline measure by measure.
"""

import tempfile
from pathlib import Path

from _common import load_collection

from prfqe import ExpansionConfig, Run, evaluate, expand_query, parse_run, search, write_run
from prfqe.evalkit import format_csv, format_table

index, queries, qrels = load_collection()
tmp = Path(tempfile.mkdtemp())

baseline = Run({q.topic_id: list(search(index, q, 1000).hits) for q in queries}, "baseline")
cfg = ExpansionConfig(method="boco")
boco = Run({q.topic_id: list(search(index, expand_query(index, q, cfg), 1000).hits) for q in queries}, "boco")
write_run(baseline, tmp / "baseline.run")
write_run(boco, tmp / "boco.run")

# Scores are written with six decimals; ranks keep the original order.
base_report = evaluate(parse_run(tmp / "baseline.run"), qrels)
boco_report = evaluate(parse_run(tmp / "boco.run"), qrels)
print(format_table(boco_report, base_report, label="boco"))
print(format_csv(boco_report))
