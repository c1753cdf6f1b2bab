"""Experiment driver: ``prfqe {index,run,eval,sweep-terms,sweep-docs}``.

Settings come from an optional flat ``key = value`` config file and are
overridden by command-line flags.  Outputs carry a ``#`` provenance header
(tool version, config hash, index digest) and are byte-identical for any
worker count (``PRF_THREADS``).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .evalkit import (
    DEFAULT_P_POINTS, FormatError, Run, evaluate, format_csv, format_table,
    parse_qrels, parse_run, write_run,
)
from .expansion import DEFAULT_N_TERMS, METHODS, ExpansionConfig, expand
from .index import IndexStoreError, build_index, load_index, read_corpus, save_index
from .retrieval import EmptyQueryError, WeightedQuery, format_query, parse_query, read_topics, search
from .textkit import AnalyzerConfig, load_stopwords

log = logging.getLogger("prfqe")

# config keys and how to coerce them; flags use the same names with dashes
_INT_LIST = "int_list"
_STR_LIST = "str_list"
CONFIG_KEYS = {
    "corpus": str, "corpus_format": str, "index": str, "topics": str, "qrels": str, "out": str,
    "language": str, "stopwords": str, "lowercase": "bool",
    "k": int, "mode": str, "method": str, "coefficient": str, "reweight": str, "beta": float,
    "r_docs": int, "n_terms": int, "base_list_size": int, "scope": str,
    "terms_grid": _INT_LIST, "docs_grid": _INT_LIST, "methods": _STR_LIST, "p_points": _INT_LIST,
    "tag": str, "run": str, "baseline": str,
}
DEFAULTS = {
    "corpus_format": "auto", "language": "none", "lowercase": True, "k": 1000, "mode": "baseline",
    "method": "coo", "coefficient": "tanimoto", "beta": 0.1, "r_docs": 10, "scope": "topset",
    "methods": list(METHODS), "p_points": list(DEFAULT_P_POINTS),
}
# parameters that define an experiment; paths and worker counts are excluded
_HASHED = ("k", "mode", "method", "coefficient", "reweight",
           "beta", "r_docs", "n_terms", "base_list_size", "scope", "terms_grid", "docs_grid",
           "methods", "p_points")


class CliError(Exception):
    pass


def _coerce(key: str, raw):
    kind = CONFIG_KEYS[key]
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    if kind == _INT_LIST:
        return [int(x) for x in raw.replace(",", " ").split()]
    if kind == _STR_LIST:
        return [x for x in raw.replace(",", " ").split()]
    if kind == "bool":
        return raw.lower() in ("1", "true", "yes", "on")
    return kind(raw)


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file. ``#`` starts a comment line."""
    cfg = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        key, sep, value = s.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in CONFIG_KEYS:
            raise CliError(f"{path}:{lineno}: unknown or malformed setting {s!r}")
        cfg[key] = _coerce(key, value)
    return cfg


def resolve(args: argparse.Namespace) -> dict:
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        settings.update(read_config(args.config))
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            settings[key] = _coerce(key, v)
    return settings


def config_hash(settings: dict) -> str:
    blob = json.dumps({k: settings.get(k) for k in _HASHED}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def worker_count() -> int:
    env = os.environ.get("PRF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliError(f"PRF_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _pmap(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _require(settings, *keys):
    for k in keys:
        if not settings.get(k):
            raise CliError(f"missing required setting --{k.replace('_', '-')}")


def provenance(settings: dict, index=None, extra=()) -> list[str]:
    lines = [f"prfqe {__version__}", f"config {config_hash(settings)}"]
    if index is not None:
        lines.append(f"index {index.content_digest()[:16]}")
    lines.extend(extra)
    return lines


def analyzer_from(settings) -> AnalyzerConfig:
    stop = load_stopwords(settings["stopwords"]) if settings.get("stopwords") else frozenset()
    return AnalyzerConfig(lowercase=settings["lowercase"], stopwords=stop, stemmer=settings["language"])


def expansion_config(settings, method=None, **overrides) -> ExpansionConfig:
    method = method or settings["method"]
    kw = dict(
        method=method,
        coefficient=settings["coefficient"],
        reweighting=settings.get("reweight"),
        beta=settings["beta"],
        r_docs=settings["r_docs"],
        n_terms=settings.get("n_terms"),
        base_list_size=settings.get("base_list_size"),
        cooccurrence_scope=settings["scope"],
    )
    kw.update(overrides)
    return ExpansionConfig(**kw)


# ---------------------------------------------------------------------------
# experiment core (shared by run and the sweeps)


def load_queries(index, topics_path) -> list[WeightedQuery]:
    queries = []
    for tid, title in read_topics(topics_path):
        try:
            queries.append(parse_query(tid, title, index.analyzer))
        except EmptyQueryError as exc:
            log.warning("%s; topic skipped", exc)
    return queries


def run_queries(index, queries, k, exp_config=None, workers=1):
    """Return ``(Run-ready rankings, expanded queries)``; expansion failures fall back to the original query."""

    def one(q):
        final = q
        if exp_config is not None:
            try:
                final = expand(index, q, exp_config).query
            except Exception as exc:  # per-topic isolation
                log.warning("topic %s: expansion failed (%s); using original query", q.topic_id, exc)
                final = q
        return search(index, final, k), final

    out = _pmap(one, queries, workers)
    return [r for r, _ in out], [q for _, q in out]


def _to_run(rankings, tag) -> Run:
    return Run({r.topic_id: list(r.hits) for r in rankings if r.hits}, tag)


# ---------------------------------------------------------------------------
# commands


def cmd_index(settings) -> int:
    _require(settings, "corpus", "index")
    analyzer = analyzer_from(settings)
    index = build_index(read_corpus(settings["corpus"], settings["corpus_format"]), analyzer,
                        workers=worker_count())
    save_index(index, settings["index"])
    s = index.stats
    print(f"N={s.n_docs} vocabulary={s.vocabulary_size} total_tokens={s.total_tokens}")
    return 0


def cmd_run(settings) -> int:
    _require(settings, "index", "topics", "out")
    index = load_index(settings["index"])
    queries = load_queries(index, settings["topics"])
    if not queries:
        raise CliError("no usable topics")
    out = Path(settings["out"])
    out.mkdir(parents=True, exist_ok=True)
    mode = settings["mode"]
    if mode == "baseline":
        exp = None
        tag = settings.get("tag") or "baseline"
    elif mode == "expanded":
        exp = expansion_config(settings)
        tag = settings.get("tag") or exp.method
    else:
        raise CliError(f"unknown mode {mode!r}")
    rankings, final = run_queries(index, queries, settings["k"], exp, worker_count())
    header = provenance(settings, index)
    write_run(_to_run(rankings, tag), out / f"{tag}.run", header)
    if exp is not None:
        with open(out / f"{tag}.queries.tsv", "w", encoding="utf-8") as fh:
            fh.writelines(f"# {h}\n" for h in header)
            fh.writelines(format_query(q) + "\n" for q in final)
    print(f"wrote {out / f'{tag}.run'} ({len(rankings)} topics)")
    return 0


def cmd_eval(settings) -> int:
    _require(settings, "run", "qrels")
    qrels = parse_qrels(settings["qrels"])
    run = parse_run(settings["run"])
    p_points = settings["p_points"]
    report = evaluate(run, qrels, p_points)
    baseline = None
    if settings.get("baseline"):
        baseline = evaluate(parse_run(settings["baseline"]), qrels, p_points)
    sys.stdout.write(format_table(report, baseline, label=run.tag))
    csv_text = format_csv(report)
    if settings.get("out"):
        out = Path(settings["out"])
        out.mkdir(parents=True, exist_ok=True)
        header = provenance(settings, extra=[f"run {_file_digest(settings['run'])}",
                                             f"qrels {_file_digest(settings['qrels'])}"])
        text = "".join(f"# {h}\n" for h in header) + csv_text
        (out / f"{run.tag}.eval.csv").write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    return 0


def _file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def sweep(settings, param: str) -> tuple[list[str], bool]:
    """Evaluate every (method, grid value); returns CSV rows and whether any point failed."""
    grid_key = "terms_grid" if param == "n_terms" else "docs_grid"
    _require(settings, "index", "topics", "qrels")
    grid = settings.get(grid_key)
    if not grid:
        raise CliError(f"--{grid_key.replace('_', '-')} is empty")
    for m in settings["methods"]:
        if m not in METHODS:
            raise CliError(f"unknown method {m!r}")
    index = load_index(settings["index"])
    qrels = parse_qrels(settings["qrels"])
    queries = load_queries(index, settings["topics"])
    points = [(m, v) for m in settings["methods"] for v in grid]

    def one(point):
        method, value = point
        try:
            overrides = {param: value}
            if param == "n_terms" and settings.get("base_list_size") is None:
                overrides["base_list_size"] = None
            cfg = expansion_config(settings, method, **overrides)
            rankings, _ = run_queries(index, queries, settings["k"], cfg, workers=1)
            report = evaluate(_to_run(rankings, method), qrels, settings["p_points"])
            return f"{method},{value},{report.map!r},{report.aggregates['r_prec']!r}", False
        except Exception as exc:
            log.error("sweep point %s=%s for %s failed: %s", param, value, method, exc)
            return f"{method},{value},error,error", True

    results = _pmap(one, points, worker_count())
    return [row for row, _ in results], any(failed for _, failed in results)


def _cmd_sweep(settings, param, filename) -> int:
    _require(settings, "out")
    rows, failed = sweep(settings, param)
    out = Path(settings["out"])
    out.mkdir(parents=True, exist_ok=True)
    index = load_index(settings["index"])
    header = provenance(settings, index, extra=[f"param {param}"])
    text = "".join(f"# {h}\n" for h in header) + "method,param,map,r_prec\n" + "".join(r + "\n" for r in rows)
    (out / filename).write_text(text, encoding="utf-8")
    print(f"wrote {out / filename} ({len(rows)} rows)")
    return 1 if failed else 0


def cmd_sweep_terms(settings) -> int:
    return _cmd_sweep(settings, "n_terms", "sweep_terms.csv")


def cmd_sweep_docs(settings) -> int:
    return _cmd_sweep(settings, "r_docs", "sweep_docs.csv")


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value settings file")
    common.add_argument("--corpus")
    common.add_argument("--corpus-format", dest="corpus_format", choices=["auto", "jsonl", "dir"])
    common.add_argument("--index")
    common.add_argument("--topics")
    common.add_argument("--qrels")
    common.add_argument("--out")
    common.add_argument("--language", help="stemmer: none, english, spanish, porter")
    common.add_argument("--stopwords")
    common.add_argument("--method", choices=list(METHODS))
    common.add_argument("--methods", help="comma list of methods for sweeps")
    common.add_argument("--coefficient", choices=["tanimoto", "dice", "cosine"])
    common.add_argument("--reweight", choices=["rocchio", "sumcc", "kld", "bonorm"])
    common.add_argument("--beta", type=float, help="Rocchio beta (default 0.1)")
    common.add_argument("--r-docs", dest="r_docs", type=int, help="feedback documents (default 10)")
    common.add_argument("--n-terms", dest="n_terms", type=int,
                        help="expansion terms (default %s)" % "/".join(map(str, sorted(set(DEFAULT_N_TERMS.values())))))
    common.add_argument("--base-list-size", dest="base_list_size", type=int)
    common.add_argument("--scope", choices=["topset", "collection"], help="cooccurrence counting scope")
    common.add_argument("--k", type=int, help="retrieval depth (default 1000)")
    common.add_argument("--terms-grid", dest="terms_grid")
    common.add_argument("--docs-grid", dest="docs_grid")
    common.add_argument("--p-points", dest="p_points")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="prfqe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("index", parents=[common], help="build and save an index")
    p = sub.add_parser("run", parents=[common], help="write a TREC run file")
    p.add_argument("--mode", choices=["baseline", "expanded"])
    p.add_argument("--tag")
    p = sub.add_parser("eval", parents=[common], help="evaluate a run against qrels")
    p.add_argument("--run")
    p.add_argument("--baseline", help="baseline run for percentage change")
    sub.add_parser("sweep-terms", parents=[common], help="MAP/R-Prec over expansion term counts")
    sub.add_parser("sweep-docs", parents=[common], help="MAP/R-Prec over feedback document counts")
    return parser


COMMANDS = {
    "index": cmd_index,
    "run": cmd_run,
    "eval": cmd_eval,
    "sweep-terms": cmd_sweep_terms,
    "sweep-docs": cmd_sweep_docs,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        settings = resolve(args)
        return COMMANDS[args.command](settings)
    except (CliError, FormatError, IndexStoreError, EmptyQueryError, FileNotFoundError, ValueError) as exc:
        print(f"prfqe {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
