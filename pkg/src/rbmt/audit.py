"""Dataset statistics and diagnostics: pattern counts, delta consistency,
train/test overlap, hallucinated entities and accuracy by complexity."""
from __future__ import annotations

import json
import unicodedata
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from rbmt.dataset.records import QuestionRecord, RecordError, index_records
from rbmt.dataset.sparql import SparqlSyntaxError, parse_any
from rbmt.metrics import normalize_whitespace


class AuditError(ValueError):
    pass


def normalize_pattern(text: str) -> str:
    """NFC, trimmed, internal whitespace collapsed; no case folding."""
    return " ".join(unicodedata.normalize("NFC", text).split())


# ---------------------------------------------------------------------------
# statistics


@dataclass
class StatsReport:
    unique_questions: int
    unique_queries: int
    query_patterns: int
    question_patterns: dict[str, int]
    paired_patterns: dict[str, int]

    @property
    def delta(self) -> dict[str, int]:
        return {lang: self.paired_patterns[lang] - self.question_patterns[lang]
                for lang in self.question_patterns}

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["delta"] = self.delta
        return doc

    def render(self) -> str:
        lines = [
            f"unique questions  {self.unique_questions}",
            f"unique queries    {self.unique_queries}",
            f"query patterns    {self.query_patterns}",
            "",
            f"{'lang':<6}{'question patterns':>19}{'paired patterns':>17}{'delta':>7}",
        ]
        for lang in self.question_patterns:
            lines.append(f"{lang:<6}{self.question_patterns[lang]:>19}"
                         f"{self.paired_patterns[lang]:>17}{self.delta[lang]:>7}")
        return "\n".join(lines)


def compute_stats(records: Iterable[QuestionRecord], langs: Sequence[str] = ()) -> StatsReport:
    """Distinct counts over ``records``; English patterns are always included."""
    langs = ["en"] + [l for l in langs if l != "en"]
    questions, queries, qpatterns = set(), set(), set()
    patterns = {lang: set() for lang in langs}
    pairs = {lang: set() for lang in langs}
    for rec in records:
        questions.add(normalize_pattern(rec.question_with_brackets))
        queries.add(normalize_pattern(rec.sparql))
        sp = normalize_pattern(rec.sparql_pattern)
        qpatterns.add(sp)
        for lang in langs:
            try:
                pat = normalize_pattern(rec.pattern(lang))
            except RecordError as e:
                raise AuditError(str(e)) from None
            patterns[lang].add(pat)
            pairs[lang].add((pat, sp))
    return StatsReport(
        len(questions), len(queries), len(qpatterns),
        {l: len(patterns[l]) for l in langs}, {l: len(pairs[l]) for l in langs},
    )


# ---------------------------------------------------------------------------
# splits and overlap


@dataclass(frozen=True)
class SplitManifest:
    name: str
    train: frozenset[str]
    dev: frozenset[str] = frozenset()
    test: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        for a, b in (("train", "dev"), ("train", "test"), ("dev", "test")):
            both = getattr(self, a) & getattr(self, b)
            if both:
                raise AuditError(f"split {self.name}: {a} and {b} share id {sorted(both)[0]}")

    def ids(self) -> frozenset[str]:
        return self.train | self.dev | self.test


def _read_ids(path: Path) -> frozenset[str]:
    if not path.exists():
        return frozenset()
    return frozenset(line.strip() for line in path.read_text(encoding="utf-8").splitlines() if line.strip())


def load_manifests(split_dir: str | Path) -> list[SplitManifest]:
    """Read ``<split>.train/.dev/.test`` id files (one id per line)."""
    split_dir = Path(split_dir)
    names = sorted({p.stem for p in split_dir.glob("*.train")})
    if not names:
        raise AuditError(f"no <split>.train files in {split_dir}")
    return [SplitManifest(n, *(_read_ids(split_dir / f"{n}.{part}") for part in ("train", "dev", "test")))
            for n in names]


def write_manifest(manifest: SplitManifest, split_dir: str | Path) -> None:
    split_dir = Path(split_dir)
    split_dir.mkdir(parents=True, exist_ok=True)
    for part in ("train", "dev", "test"):
        ids = sorted(getattr(manifest, part), key=lambda s: (len(s), s))
        (split_dir / f"{manifest.name}.{part}").write_text("".join(f"{i}\n" for i in ids), encoding="utf-8")


COLLAPSE_CONSISTENT = "collapseConsistent"
CONFLICTING_SPARQL = "conflictingSparql"


@dataclass
class OverlapReport:
    split: str
    lang: str
    classes: dict[str, str] = field(default_factory=dict)  # pattern -> class

    @property
    def overlapping(self) -> set[str]:
        return set(self.classes)

    @property
    def counts(self) -> dict[str, int]:
        out = {COLLAPSE_CONSISTENT: 0, CONFLICTING_SPARQL: 0}
        for c in self.classes.values():
            out[c] += 1
        return out

    def to_json(self) -> dict:
        return {"split": self.split, "lang": self.lang, "overlap": len(self.classes),
                "counts": self.counts, "patterns": dict(sorted(self.classes.items()))}


def train_test_overlap(records: Sequence[QuestionRecord] | Mapping[str, QuestionRecord],
                       manifest: SplitManifest, lang: str) -> OverlapReport:
    """Patterns (in ``lang``) that occur in both train and test.  A pattern is
    collapse-consistent when its set of SPARQL patterns is the same on both
    sides, otherwise it carries conflicting SPARQL."""
    by_id = records if isinstance(records, Mapping) else index_records(records)

    def side(ids: Iterable[str]) -> dict[str, set[str]]:
        out: dict[str, set[str]] = defaultdict(set)
        for rid in ids:
            if rid not in by_id:
                raise AuditError(f"split {manifest.name}: id {rid} not found in corpus")
            rec = by_id[rid]
            try:
                pat = normalize_pattern(rec.pattern(lang))
            except RecordError as e:
                raise AuditError(f"record {rid}: {e}") from None
            out[pat].add(normalize_pattern(rec.sparql_pattern))
        return out

    train, test = side(manifest.train), side(manifest.test)
    report = OverlapReport(manifest.name, lang)
    for pat in sorted(train.keys() & test.keys()):
        same = train[pat] == test[pat]
        report.classes[pat] = COLLAPSE_CONSISTENT if same else CONFLICTING_SPARQL
    return report


@dataclass
class OverlapSummary:
    lang: str
    per_split: list[OverlapReport]

    @property
    def summed(self) -> int:
        return sum(len(r.classes) for r in self.per_split)

    @property
    def union(self) -> dict[str, str]:
        """Union of overlapping patterns; a pattern conflicting in any split is conflicting."""
        out: dict[str, str] = {}
        for r in self.per_split:
            for pat, cls in r.classes.items():
                if out.get(pat) != CONFLICTING_SPARQL:
                    out[pat] = cls
        return out

    def to_json(self) -> dict:
        union = self.union
        return {
            "lang": self.lang,
            "summed": self.summed,
            "summed_counts": {c: sum(r.counts[c] for r in self.per_split)
                              for c in (COLLAPSE_CONSISTENT, CONFLICTING_SPARQL)},
            "union": len(union),
            "union_counts": {c: sum(1 for v in union.values() if v == c)
                             for c in (COLLAPSE_CONSISTENT, CONFLICTING_SPARQL)},
            "splits": [r.to_json() for r in self.per_split],
        }

    def render(self) -> str:
        lines = [f"{'split':<10}{'overlap':>8}{'consistent':>12}{'conflicting':>13}"]
        for r in self.per_split:
            c = r.counts
            lines.append(f"{r.split:<10}{len(r.classes):>8}{c[COLLAPSE_CONSISTENT]:>12}{c[CONFLICTING_SPARQL]:>13}")
        j = self.to_json()
        lines.append(f"{'summed':<10}{j['summed']:>8}{j['summed_counts'][COLLAPSE_CONSISTENT]:>12}"
                     f"{j['summed_counts'][CONFLICTING_SPARQL]:>13}")
        lines.append(f"{'union':<10}{j['union']:>8}{j['union_counts'][COLLAPSE_CONSISTENT]:>12}"
                     f"{j['union_counts'][CONFLICTING_SPARQL]:>13}")
        return "\n".join(lines)


def overlap_over_splits(records, manifests: Sequence[SplitManifest], lang: str) -> OverlapSummary:
    by_id = records if isinstance(records, Mapping) else index_records(records)
    return OverlapSummary(lang, [train_test_overlap(by_id, m, lang) for m in manifests])


# ---------------------------------------------------------------------------
# hallucinated entities


OTHERS = "others"
MALFORMED = "malformed"


@dataclass
class HallucinationTable:
    watchlist: list[tuple[str, str]]
    wrong: dict[str, int] = field(default_factory=dict)
    total: dict[str, int] = field(default_factory=dict)
    malformed: dict[str, int] = field(default_factory=dict)
    hits: dict[str, dict[str, int]] = field(default_factory=dict)  # lang -> row -> count
    any_hit: dict[str, int] = field(default_factory=dict)

    def langs(self) -> list[str]:
        return sorted(self.total)

    def rows(self) -> list[str]:
        return [q for q, _ in self.watchlist] + [OTHERS]

    def percent(self, lang: str, row: str) -> float:
        wrong = self.wrong.get(lang, 0)
        if not wrong:
            return 0.0
        n = self.any_hit.get(lang, 0) if row == "total" else self.hits.get(lang, {}).get(row, 0)
        return 100.0 * n / wrong

    def to_json(self) -> dict:
        return {
            lang: {
                "predictions": self.total[lang],
                "wrong": self.wrong.get(lang, 0),
                MALFORMED: self.malformed.get(lang, 0),
                "percent": {row: self.percent(lang, row) for row in self.rows() + ["total"]},
                "counts": {row: self.hits.get(lang, {}).get(row, 0) for row in self.rows()},
            }
            for lang in self.langs()
        }

    def render(self) -> str:
        langs = self.langs()
        iso = dict(self.watchlist)
        head = f"{'':<16}" + "".join(f"{l:>8}" for l in langs)
        lines = [head]
        for row in self.rows() + ["total"]:
            name = f"{row} {iso[row]}" if row in iso else row
            lines.append(f"{name:<16}" + "".join(f"{self.percent(l, row):>8.1f}" for l in langs))
        lines.append(f"{'wrong':<16}" + "".join(f"{self.wrong.get(l, 0):>8}" for l in langs))
        lines.append(f"{MALFORMED:<16}" + "".join(f"{self.malformed.get(l, 0):>8}" for l in langs))
        return "\n".join(lines)


def _objects(q) -> set[str]:
    return {t.object for t in q.triples}


def hallucination_count(rows: Iterable[tuple[str, str, str]], watchlist: Sequence[tuple[str, str]],
                        others: Iterable[str] = ()) -> HallucinationTable:
    """Share of wrong predictions with a triple whose object is a watched entity.

    ``rows`` holds (lang, predicted query, gold query) in SPARQL or RIR form.
    A triple counts as hallucinated only if it is absent from the gold query.
    Predictions that cannot be parsed are wrong and counted as malformed.
    """
    watch = {q: f"wd:{q}" for q, _ in watchlist}
    other_terms = {f"wd:{q}" for q in others if q not in watch}
    table = HallucinationTable(list(watchlist))
    for lang, pred, gold in rows:
        table.total[lang] = table.total.get(lang, 0) + 1
        try:
            pq = parse_any(pred)
        except SparqlSyntaxError:
            pq = None
        try:
            gq = parse_any(gold)
        except SparqlSyntaxError:
            gq = None
        if pq is not None and gq is not None:
            correct = pq.canonical() == gq.canonical()
        else:
            correct = normalize_whitespace(pred) == normalize_whitespace(gold)
        if correct:
            continue
        table.wrong[lang] = table.wrong.get(lang, 0) + 1
        if pq is None:
            table.malformed[lang] = table.malformed.get(lang, 0) + 1
            continue
        gold_triples = set(gq.triples) if gq is not None else set()
        objects = {t.object for t in pq.triples if t not in gold_triples}
        hit_rows = [q for q, term in watch.items() if term in objects]
        if objects & other_terms:
            hit_rows.append(OTHERS)
        lang_hits = table.hits.setdefault(lang, {})
        for row in hit_rows:
            lang_hits[row] = lang_hits.get(row, 0) + 1
        if hit_rows:
            table.any_hit[lang] = table.any_hit.get(lang, 0) + 1
    return table


def read_watchlist(path: str | Path) -> tuple[list[tuple[str, str]], list[str]]:
    """``qid<TAB>iso`` lines; a third column ``other`` puts the QID into the others bucket."""
    watch, others = [], []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) >= 3 and parts[2].strip() == "other":
            others.append(parts[0].strip())
        else:
            watch.append((parts[0].strip(), parts[1].strip() if len(parts) > 1 else ""))
    return watch, others


# ---------------------------------------------------------------------------
# accuracy by complexity


@dataclass(frozen=True)
class Bucket:
    low: int
    high: int
    n_total: int
    n_correct: int

    @property
    def accuracy(self) -> float:
        return self.n_correct / self.n_total


@dataclass
class ComplexityCurve:
    bucket_size: int
    buckets: list[Bucket]

    def to_json(self) -> dict:
        return {"bucket_size": self.bucket_size,
                "buckets": [{"low": b.low, "high": b.high, "total": b.n_total,
                             "correct": b.n_correct, "accuracy": b.accuracy} for b in self.buckets]}

    def render(self) -> str:
        lines = [f"{'complexity':<12}{'total':>7}{'correct':>9}{'accuracy':>10}"]
        for b in self.buckets:
            lines.append(f"{f'{b.low}-{b.high}':<12}{b.n_total:>7}{b.n_correct:>9}{b.accuracy:>10.3f}")
        return "\n".join(lines)


def accuracy_by_complexity(rows: Iterable[tuple[int, bool]], bucket_size: int = 3) -> ComplexityCurve:
    if bucket_size < 1:
        raise ValueError("bucket_size must be >= 1")
    totals: dict[int, list[int]] = defaultdict(lambda: [0, 0])
    for complexity, correct in rows:
        if complexity < 0:
            raise ValueError(f"negative complexity {complexity}")
        slot = totals[complexity // bucket_size]
        slot[0] += 1
        slot[1] += bool(correct)
    buckets = [Bucket(b * bucket_size, (b + 1) * bucket_size - 1, n, c)
               for b, (n, c) in sorted(totals.items())]
    return ComplexityCurve(bucket_size, buckets)


def dump_json(obj, path: str | Path | None = None) -> str:
    text = json.dumps(obj, ensure_ascii=False, indent=2, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text
