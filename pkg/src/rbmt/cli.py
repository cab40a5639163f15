"""Command-line entry point: ``rbmt <subcommand> ...``.

Exit codes: 0 success, 1 data error, 2 grammar error, 3 I/O error.
Summaries and diagnostics go to stderr; data goes to files (or stdout when
no ``--out`` is given).
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from rbmt.audit import (AuditError, accuracy_by_complexity, compute_stats, dump_json, hallucination_count,
                        load_manifests, overlap_over_splits, read_watchlist)
from rbmt.dataset.labels import EndpointConfig, LabelCache, fetch_labels
from rbmt.dataset.records import (QuestionRecord, RecordError, index_records, iter_records, read_records,
                                  reinsert_entities, write_records)
from rbmt.dataset.sparql import SparqlSyntaxError, from_rir, ground_sparql, parse_sparql, to_rir, to_sparql
from rbmt.grammar import GrammarError, GrammarSpec, read_grammar
from rbmt.metrics import BleuConfig, corpus_bleu, exact_match
from rbmt.parser import ParseError, TokenizeError
from rbmt.transducer import LexiconGapError, detokenize, translate_pattern

log = logging.getLogger("rbmt")

EXIT_OK, EXIT_DATA, EXIT_GRAMMAR, EXIT_IO = 0, 1, 2, 3
CJK_LANGS = {"zh", "ja", "ko"}


@dataclass
class RunConfig:
    grammar_path: Path | None = None
    input_path: Path | None = None
    output_path: Path | None = None
    lang: str | None = None
    seed: int = 0
    workers: int = 1
    split_dir: Path | None = None
    label_cache_path: Path | None = None
    skip_unparsed: bool = False
    entity_lang: str = "en"

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValueError("--workers must be >= 1")


# ---------------------------------------------------------------------------
# translate


@dataclass
class RecordResult:
    record: QuestionRecord
    candidates: int = 0
    error: str | None = None
    lexicon_gap: bool = False


def translate_record(spec: GrammarSpec, rec: QuestionRecord, index: int, seed: int, lang: str,
                     entity_lang: str = "en") -> RecordResult:
    """Translate one record's question pattern and add the ``_<lang>`` fields."""
    try:
        seq, count = translate_pattern(spec, rec.question_pattern, seed, index)
    except (ParseError, TokenizeError) as e:
        return RecordResult(rec, 0, str(e))
    except LexiconGapError as e:
        return RecordResult(rec, 0, str(e), lexicon_gap=True)
    pattern = detokenize(seq, spec.detokenize_policy)
    brackets = reinsert_entities(pattern, rec.bindings, entity_lang) if rec.bindings else pattern
    out = replace(rec, translations={**rec.translations, lang: (pattern, brackets)})
    return RecordResult(out, count)


_worker_spec: GrammarSpec | None = None


def _init_worker(spec: GrammarSpec) -> None:
    global _worker_spec
    _worker_spec = spec


def _translate_chunk(args) -> list[RecordResult]:
    items, seed, lang, entity_lang = args
    return [translate_record(_worker_spec, rec, i, seed, lang, entity_lang) for i, rec in items]


def translate_records(spec: GrammarSpec, records: Sequence[QuestionRecord], seed: int = 0,
                      lang: str | None = None, workers: int = 1, entity_lang: str = "en",
                      chunk_size: int = 64) -> list[RecordResult]:
    """Translate records in input order, optionally over a process pool."""
    lang = lang or spec.target_language or "xx"
    indexed = list(enumerate(records))
    if workers == 1 or len(indexed) <= chunk_size:
        return [translate_record(spec, rec, i, seed, lang, entity_lang) for i, rec in indexed]
    chunks = [(indexed[k:k + chunk_size], seed, lang, entity_lang) for k in range(0, len(indexed), chunk_size)]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(spec,)) as pool:
        return [r for chunk in pool.map(_translate_chunk, chunks) for r in chunk]


def cmd_translate(cfg: RunConfig) -> int:
    spec = read_grammar(cfg.grammar_path)
    lang = cfg.lang or spec.target_language
    if not lang:
        raise RecordError("no target language: pass --lang or declare 'lang' in the grammar")
    records = read_records(cfg.input_path)
    results = translate_records(spec, records, cfg.seed, lang, cfg.workers, cfg.entity_lang)
    failed = [(i, r) for i, r in enumerate(results) if r.error]
    for i, r in failed:
        log.error("record %d: %s", i, r.error)
    if failed and not cfg.skip_unparsed:
        log.error("%d record(s) failed; rerun with --skip-unparsed to keep going", len(failed))
        return EXIT_DATA
    write_records([r.record for r in results], cfg.output_path, [lang])
    log.info("records: %d  ambiguous: %d  lexicon gaps: %d  unparsed: %d",
             len(results), sum(r.candidates > 1 for r in results),
             sum(r.lexicon_gap for r in results), len(failed))
    return EXIT_OK


# ---------------------------------------------------------------------------
# audits


def _emit(doc, out: Path | None) -> None:
    text = dump_json(doc)
    if out is None:
        sys.stdout.write(text + "\n")
    else:
        Path(out).write_text(text + "\n", encoding="utf-8")


def _langs(value: str | None) -> list[str]:
    return [l for l in (value or "").split(",") if l]


def cmd_stats(args) -> int:
    report = compute_stats(iter_records(args.input), _langs(args.lang))
    print(report.render(), file=sys.stderr)
    _emit(report.to_json(), args.out)
    return EXIT_OK


def cmd_overlap(args) -> int:
    records = index_records(read_records(args.input))
    manifests = load_manifests(args.splits)
    docs = []
    for lang in _langs(args.lang) or ["en"]:
        summary = overlap_over_splits(records, manifests, lang)
        print(f"[{lang}]\n{summary.render()}", file=sys.stderr)
        docs.append(summary.to_json())
    _emit(docs if len(docs) > 1 else docs[0], args.out)
    return EXIT_OK


def _read_lines(path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def cmd_bleu(args) -> int:
    tok = args.tokenize
    if tok == "auto":
        tok = "cjkChar" if (args.lang or "") in CJK_LANGS else "whitespace"
    cfg = BleuConfig(max_order=args.max_order, smoothing=args.smoothing, tokenization=tok)
    score = corpus_bleu(_read_lines(args.input), _read_lines(args.ref), cfg)
    print(f"BLEU = {score:.2f} ({tok}, smoothing={cfg.smoothing})", file=sys.stderr)
    _emit({"bleu": score, "tokenization": tok, "smoothing": cfg.smoothing, "max_order": cfg.max_order},
          args.out)
    return EXIT_OK


def cmd_em(args) -> int:
    acc = exact_match(_read_lines(args.input), _read_lines(args.ref))
    print(f"exact match = {100 * acc:.2f}%", file=sys.stderr)
    _emit({"exact_match": acc}, args.out)
    return EXIT_OK


def _write_lines(lines: list[str], out: Path | None) -> None:
    text = "".join(l + "\n" for l in lines)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def cmd_rir(args) -> int:
    conv = (lambda s: to_rir(parse_sparql(s))) if args.direction == "to" else (lambda s: to_sparql(from_rir(s)))
    _write_lines([conv(line) if line.strip() else "" for line in _read_lines(args.input)], args.out)
    return EXIT_OK


def cmd_ground(args) -> int:
    """Input lines: ``<pattern query><TAB>M0=Q1,M1=Q2``."""
    out = []
    for lineno, line in enumerate(_read_lines(args.input), 1):
        if not line.strip():
            out.append("")
            continue
        query, _, binds = line.partition("\t")
        try:
            mapping = dict(kv.split("=", 1) for kv in binds.split(",") if kv)
        except ValueError:
            raise RecordError(f"line {lineno}: bindings must look like M0=Q1,M1=Q2") from None
        try:
            out.append(to_sparql(ground_sparql(parse_sparql(query), mapping)))
        except KeyError as e:
            raise RecordError(f"line {lineno}: {e.args[0]}") from None
    _write_lines(out, args.out)
    return EXIT_OK


def cmd_halluc(args) -> int:
    """Predictions TSV ``id<TAB>lang<TAB>prediction`` scored against ``--gold`` records."""
    gold = index_records(read_records(args.gold))
    rows = []
    for lineno, line in enumerate(_read_lines(args.input), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise RecordError(f"{args.input}:{lineno}: expected id<TAB>lang<TAB>prediction")
        rid, lang, pred = parts
        if rid not in gold:
            raise RecordError(f"{args.input}:{lineno}: unknown record id {rid}")
        rows.append((lang, pred, gold[rid].sparql_pattern))
    if args.watchlist:
        watch, others = read_watchlist(args.watchlist)
    else:
        watch, others = [("Q148", "CN"), ("Q17", "JP")], []
    table = hallucination_count(rows, watch, others)
    print(table.render(), file=sys.stderr)
    _emit(table.to_json(), args.out)
    return EXIT_OK


def _truthy(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "t", "yes", "y"):
        return True
    if v in ("0", "false", "f", "no", "n"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def cmd_complexity(args) -> int:
    """Input TSV ``complexity<TAB>correct``."""
    rows = []
    for lineno, line in enumerate(_read_lines(args.input), 1):
        if not line.strip():
            continue
        try:
            c, ok = line.split("\t")[:2]
            rows.append((int(c), _truthy(ok)))
        except ValueError:
            raise RecordError(f"{args.input}:{lineno}: expected complexity<TAB>correct") from None
    curve = accuracy_by_complexity(rows, args.bucket_size)
    print(curve.render(), file=sys.stderr)
    _emit(curve.to_json(), args.out)
    return EXIT_OK


def cmd_fetch_labels(args) -> int:
    src = Path(args.input)
    if src.suffix == ".jsonl":
        qids = [b.qid for r in iter_records(src) for b in r.bindings]
    else:
        qids = [l.strip() for l in _read_lines(src) if l.strip()]
    cache = LabelCache(args.labels)
    config = EndpointConfig(offline=args.offline)
    result = fetch_labels(qids, args.lang, cache, config)
    counts: dict[str, int] = {}
    for s in result.status.values():
        counts[s] = counts.get(s, 0) + 1
    print(" ".join(f"{k}: {v}" for k, v in sorted(counts.items())) or "nothing to do", file=sys.stderr)
    return EXIT_OK if "error" not in counts else EXIT_IO


def cmd_validate_grammar(args) -> int:
    spec = read_grammar(args.grammar)
    print(f"ok: {len(spec.rules)} rules ({sum(r.derived for r in spec.rules)} derived), "
          f"{len(spec.lexicon)} lexicon entries, start {spec.start.label}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rbmt", description="Rule-based SCFG translation of question patterns.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("translate", help="translate question patterns of a record file")
    t.add_argument("--grammar", required=True, type=Path)
    t.add_argument("--in", dest="input", required=True, type=Path)
    t.add_argument("--out", required=True, type=Path)
    t.add_argument("--lang")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--skip-unparsed", action="store_true")
    t.add_argument("--entity-lang", default="en", help="label language for re-inserted entities")

    s = sub.add_parser("stats", help="pattern statistics and delta consistency")
    s.add_argument("--in", dest="input", required=True, type=Path)
    s.add_argument("--lang", help="comma-separated translation languages")
    s.add_argument("--out", type=Path)

    o = sub.add_parser("overlap", help="train/test pattern overlap over a split directory")
    o.add_argument("--in", dest="input", required=True, type=Path)
    o.add_argument("--splits", required=True, type=Path)
    o.add_argument("--lang")
    o.add_argument("--out", type=Path)

    b = sub.add_parser("bleu", help="corpus BLEU of a hypothesis file against a reference file")
    b.add_argument("--in", dest="input", required=True, type=Path)
    b.add_argument("--ref", required=True, type=Path)
    b.add_argument("--lang")
    b.add_argument("--tokenize", choices=["auto", "whitespace", "cjkChar"], default="auto")
    b.add_argument("--smoothing", choices=["none", "epsilon"], default="epsilon")
    b.add_argument("--max-order", type=int, default=4)
    b.add_argument("--out", type=Path)

    e = sub.add_parser("em", help="exact-match accuracy")
    e.add_argument("--in", dest="input", required=True, type=Path)
    e.add_argument("--ref", required=True, type=Path)
    e.add_argument("--out", type=Path)

    r = sub.add_parser("rir", help="convert queries to or from RIR, one per line")
    r.add_argument("direction", choices=["to", "from"])
    r.add_argument("--in", dest="input", required=True, type=Path)
    r.add_argument("--out", type=Path)

    g = sub.add_parser("ground", help="replace placeholders by Wikidata entities")
    g.add_argument("--in", dest="input", required=True, type=Path)
    g.add_argument("--out", type=Path)

    h = sub.add_parser("halluc", help="hallucinated watched entities among wrong predictions")
    h.add_argument("--in", dest="input", required=True, type=Path)
    h.add_argument("--gold", required=True, type=Path)
    h.add_argument("--watchlist", type=Path)
    h.add_argument("--out", type=Path)

    c = sub.add_parser("complexity", help="accuracy bucketed by complexity")
    c.add_argument("--in", dest="input", required=True, type=Path)
    c.add_argument("--bucket-size", type=int, default=3)
    c.add_argument("--out", type=Path)

    f = sub.add_parser("fetch-labels", help="fill the label cache from Wikidata")
    f.add_argument("--in", dest="input", required=True, type=Path, help="QID list or records .jsonl")
    f.add_argument("--labels", required=True, type=Path)
    f.add_argument("--lang", required=True)
    f.add_argument("--offline", action="store_true")

    v = sub.add_parser("validate-grammar", help="load and validate a grammar file")
    v.add_argument("--grammar", required=True, type=Path)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr, force=True)
    handlers = {
        "stats": cmd_stats, "overlap": cmd_overlap, "bleu": cmd_bleu, "em": cmd_em, "rir": cmd_rir,
        "ground": cmd_ground, "halluc": cmd_halluc, "complexity": cmd_complexity,
        "fetch-labels": cmd_fetch_labels, "validate-grammar": cmd_validate_grammar,
    }
    try:
        if args.command == "translate":
            cfg = RunConfig(args.grammar, args.input, args.out, args.lang, args.seed, args.workers,
                            skip_unparsed=args.skip_unparsed, entity_lang=args.entity_lang)
            return cmd_translate(cfg)
        return handlers[args.command](args)
    except GrammarError as e:
        log.error("grammar error: %s", e)
        return EXIT_GRAMMAR
    except OSError as e:
        log.error("I/O error: %s", e)
        return EXIT_IO
    except (RecordError, AuditError, SparqlSyntaxError, ParseError, TokenizeError, ValueError, KeyError) as e:
        log.error("data error: %s", e)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
