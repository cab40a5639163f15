"""MCWQ-style question records (JSON lines) and entity placeholder handling."""
from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from rbmt.dataset.sparql import ENTITY_RE, PLACEHOLDER_RE
from rbmt.parser import TokenizeError, tokenize

log = logging.getLogger(__name__)

QUESTION_PATTERN = "questionPatternModEntities"
QUESTION_BRACKETS = "questionWithBrackets"
SPARQL_PATTERN = "sparqlPatternModEntities"
SPARQL = "sparql"
MANDATORY = (QUESTION_PATTERN, QUESTION_BRACKETS, SPARQL_PATTERN, SPARQL)
_TRANSLATED_RE = re.compile(rf"^({QUESTION_PATTERN}|{QUESTION_BRACKETS})_([A-Za-z][A-Za-z0-9\-]*)$")
_BRACKET_RE = re.compile(r"\[([^\[\]]*)\]")
_QID_RE = re.compile(r"Q[0-9]+")


class RecordError(ValueError):
    pass


@dataclass
class EntityBinding:
    placeholder: str
    qid: str
    labels: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not PLACEHOLDER_RE.fullmatch(self.placeholder):
            raise ValueError(f"bad placeholder {self.placeholder!r}")
        if not _QID_RE.fullmatch(self.qid):
            raise ValueError(f"bad QID {self.qid!r}")


@dataclass
class QuestionRecord:
    question_pattern: str
    question_with_brackets: str
    sparql_pattern: str
    sparql: str
    translations: dict[str, tuple[str | None, str | None]] = field(default_factory=dict)
    complexity: int | None = None
    bindings: list[EntityBinding] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def pattern(self, lang: str = "en") -> str:
        if lang == "en":
            return self.question_pattern
        pat = self.translations.get(lang, (None, None))[0]
        if pat is None:
            raise RecordError(f"record has no {QUESTION_PATTERN}_{lang} field")
        return pat

    def with_brackets(self, lang: str = "en") -> str:
        if lang == "en":
            return self.question_with_brackets
        text = self.translations.get(lang, (None, None))[1]
        if text is None:
            raise RecordError(f"record has no {QUESTION_BRACKETS}_{lang} field")
        return text


def nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


def _bracket_spans(text: str) -> list[re.Match]:
    spans = list(_BRACKET_RE.finditer(text))
    stripped = _BRACKET_RE.sub("", text)
    if "[" in stripped or "]" in stripped:
        raise RecordError(f"overlapping or unbalanced bracket spans in {text!r}")
    return spans


def extract_pattern(with_brackets: str, bindings: Sequence[EntityBinding]) -> str:
    """Replace each bracketed entity label with its placeholder."""
    spans = _bracket_spans(with_brackets)
    repl: dict[int, str] = {}
    for b in bindings:
        labels = set(b.labels.values()) | {b.qid}
        hits = [i for i, m in enumerate(spans) if m.group(1) in labels]
        if not hits:
            raise RecordError(f"label of {b.placeholder} ({b.qid}) not found bracketed in {with_brackets!r}")
        if len(hits) > 1:
            raise RecordError(f"label of {b.placeholder} occurs {len(hits)} times in {with_brackets!r}")
        if hits[0] in repl:
            raise RecordError(f"{b.placeholder} and {repl[hits[0]]} bind the same span")
        repl[hits[0]] = b.placeholder
    out, last = [], 0
    for i, m in enumerate(spans):
        if i in repl:
            out.append(with_brackets[last:m.start()])
            out.append(repl[i])
            last = m.end()
    out.append(with_brackets[last:])
    return "".join(out)


def reinsert_entities(pattern: str, bindings: Sequence[EntityBinding], lang: str) -> str:
    """Replace placeholders with ``[label]``; falls back to ``[QID]`` when the
    binding has no label in ``lang``."""
    by_ph = {b.placeholder: b for b in bindings}

    def sub(m: re.Match) -> str:
        b = by_ph.get(m.group(0))
        if b is None:
            raise RecordError(f"unbound placeholder {m.group(0)} in {pattern!r}")
        label = b.labels.get(lang)
        if label is None:
            log.warning("no %s label for %s, using the QID", lang, b.qid)
            label = b.qid
        return f"[{label}]"

    return re.sub(r"(?<!\S)M[0-9](?!\S)", sub, pattern)


def derive_bindings(question_pattern: str, with_brackets: str, sparql_pattern: str, sparql: str,
                    lang: str = "en") -> list[EntityBinding]:
    """Recover placeholder -> (QID, surface) by aligning the pattern fields
    with their concrete counterparts."""
    try:
        pat, conc = tokenize(question_pattern), tokenize(with_brackets)
    except TokenizeError:
        pat = conc = None
    surfaces: dict[str, str] = {}
    if pat is not None and len(pat.tokens) == len(conc.tokens):
        for p, c in zip(pat.tokens, conc.tokens):
            if PLACEHOLDER_RE.fullmatch(p) and c.startswith("["):
                surfaces.setdefault(p, c[1:-1])
    qids: dict[str, str] = {}
    sp, sc = sparql_pattern.split(), sparql.split()
    if len(sp) == len(sc):
        for p, c in zip(sp, sc):
            if PLACEHOLDER_RE.fullmatch(p) and ENTITY_RE.fullmatch(c):
                qids.setdefault(p, c[3:])
    out = []
    for ph in sorted(qids):
        labels = {lang: surfaces[ph]} if ph in surfaces else {}
        out.append(EntityBinding(ph, qids[ph], labels))
    return out


def record_from_dict(doc: Mapping) -> QuestionRecord:
    missing = [k for k in MANDATORY if k not in doc]
    if missing:
        raise RecordError(f"missing mandatory field(s): {', '.join(missing)}")
    translations: dict[str, list] = {}
    extra = {}
    complexity = None
    for key, value in doc.items():
        if key in MANDATORY:
            continue
        m = _TRANSLATED_RE.match(key)
        if m and isinstance(value, str):
            slot = translations.setdefault(m.group(2), [None, None])
            slot[0 if m.group(1) == QUESTION_PATTERN else 1] = nfc(value)
        elif key == "complexity" and (value is None or isinstance(value, int)):
            if value is not None and value < 0:
                raise RecordError("complexity must be non-negative")
            complexity = value
        else:
            extra[key] = value
    if not all(isinstance(doc[k], str) for k in MANDATORY):
        raise RecordError("mandatory fields must be strings")
    fields = {k: nfc(doc[k]) for k in MANDATORY}
    rec = QuestionRecord(
        fields[QUESTION_PATTERN], fields[QUESTION_BRACKETS], fields[SPARQL_PATTERN], fields[SPARQL],
        {k: tuple(v) for k, v in translations.items()}, complexity, extra=extra,
    )
    rec.bindings = derive_bindings(rec.question_pattern, rec.question_with_brackets,
                                   rec.sparql_pattern, rec.sparql)
    return rec


def record_to_dict(rec: QuestionRecord, langs: Iterable[str] | None = None) -> dict:
    doc = {
        QUESTION_PATTERN: rec.question_pattern,
        QUESTION_BRACKETS: rec.question_with_brackets,
        SPARQL_PATTERN: rec.sparql_pattern,
        SPARQL: rec.sparql,
    }
    if rec.complexity is not None:
        doc["complexity"] = rec.complexity
    order = list(langs or [])
    order += [lang for lang in rec.translations if lang not in order]
    for lang in order:
        if lang not in rec.translations:
            continue
        pat, brackets = rec.translations[lang]
        if pat is not None:
            doc[f"{QUESTION_PATTERN}_{lang}"] = pat
        if brackets is not None:
            doc[f"{QUESTION_BRACKETS}_{lang}"] = brackets
    for key, value in rec.extra.items():
        doc.setdefault(key, value)
    return {k: nfc(v) if isinstance(v, str) else v for k, v in doc.items()}


def iter_records(path: str | Path) -> Iterator[QuestionRecord]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as e:
                raise RecordError(f"{path}:{lineno}: malformed JSON ({e.msg})") from None
            if not isinstance(doc, dict):
                raise RecordError(f"{path}:{lineno}: expected a JSON object")
            try:
                yield record_from_dict(doc)
            except RecordError as e:
                raise RecordError(f"{path}:{lineno}: {e}") from None


def read_records(path: str | Path) -> list[QuestionRecord]:
    return list(iter_records(path))


def dumps_record(rec: QuestionRecord, langs: Iterable[str] | None = None) -> str:
    return json.dumps(record_to_dict(rec, langs), ensure_ascii=False)


def write_records(records: Iterable[QuestionRecord], path: str | Path,
                  langs: Iterable[str] | None = None) -> None:
    """One JSON document per line.  Translated fields for ``langs`` come first,
    any other translations the records carry follow."""
    langs = list(langs) if langs is not None else None
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(dumps_record(rec, langs))
            fh.write("\n")


def record_id(rec: QuestionRecord, index: int) -> str:
    rid = rec.extra.get("id")
    return str(rid) if rid is not None else str(index)


def index_records(records: Sequence[QuestionRecord]) -> dict[str, QuestionRecord]:
    return {record_id(r, i): r for i, r in enumerate(records)}
