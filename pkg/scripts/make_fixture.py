"""Generate the bundled 200-record demo corpus and its side files.

Writes into tests/data/ by default:
  fixture_en.jsonl          English records (MCWQ field layout)
  fixture_zh.jsonl          the same records translated with demo_zh.scfg, seed 0
  splits/<name>.{train,dev,test}
  labels.tsv, watchlist.tsv
  preds_zh.tsv              synthetic predictions for the mcd1 test set
  complexity_zh.tsv         complexity<TAB>correct rows for those predictions

The output is a pure function of --seed.
"""
from __future__ import annotations

import argparse
import random
from dataclasses import dataclass, field
from pathlib import Path

from rbmt import data_path, read_grammar
from rbmt.audit import SplitManifest, normalize_pattern, write_manifest
from rbmt.cli import translate_records
from rbmt.dataset.records import QuestionRecord, derive_bindings, write_records
from rbmt.dataset.sparql import Filter, SparqlQuery, Triple, ground_sparql, to_sparql

FIRST = ["Ada", "Bruno", "Clara", "Dario", "Elena", "Farid", "Greta", "Hugo", "Ines", "Jonas"]
LAST = ["Lind", "Moreau", "Novak", "Okafor", "Petrov", "Quist", "Rossi", "Sato"]
ADJ = ["Quiet", "Silver", "Broken", "Distant", "Hidden", "Northern", "Last", "Paper"]
NOUN = ["Harbor", "Garden", "Letter", "Winter", "Mirror", "Station", "Orchard", "Bridge"]

# relation noun -> (predicate, entity-is-subject, symmetric)
RELATIONS = {
    "spouse": ("wdt:P26", False, True),
    "sibling": ("wdt:P3373", False, True),
    "child": ("wdt:P40", True, False),
    "parent": ("wdt:P40", False, False),
}
OCCUPATIONS = {
    "director": "Q2526255", "producer": "Q3282637", "writer": "Q36180", "screenwriter": "Q28389",
    "editor": "Q7042855", "actor": "Q33999", "art director": "Q706364",
}
VERBS = {  # base, past, predicate (film -> person)
    "direct": ("directed", "wdt:P57"), "produce": ("produced", "wdt:P162"),
    "executive produce": ("executive produced", "wdt:P1431"), "edit": ("edited", "wdt:P1040"),
    "write": ("wrote", "wdt:P58"),
}
FILM_CLASS = "wd:Q11424"


def people() -> list[tuple[str, str]]:
    return [(f"Q{9100000 + i}", f"{f} {l}") for i, (f, l) in enumerate((f, l) for f in FIRST for l in LAST)]


def films() -> list[tuple[str, str]]:
    return [(f"Q{9200000 + i}", f"The {a} {n}") for i, (a, n) in enumerate((a, n) for a in ADJ for n in NOUN)]


@dataclass
class Builder:
    """Accumulates a question pattern, its bracketed form and its query."""

    words: list[str] = field(default_factory=list)
    brackets: list[str] = field(default_factory=list)
    entities: list[tuple[str, str]] = field(default_factory=list)  # (qid, label) by placeholder number
    triples: list[Triple] = field(default_factory=list)
    filters: list[Filter] = field(default_factory=list)
    nvars: int = 0

    def word(self, *ws: str) -> None:
        self.words += ws
        self.brackets += ws

    def entity(self, qid: str, label: str) -> str:
        ph = f"M{len(self.entities)}"
        self.entities.append((qid, label))
        self.words.append(ph)
        self.brackets.append(f"[{label}]")
        return ph

    def var(self) -> str:
        v = f"?x{self.nvars}"
        self.nvars += 1
        return v


def relate(b: Builder, rel: str, base: str) -> str:
    pred, base_is_subject, symmetric = RELATIONS[rel]
    v = b.var()
    b.triples.append(Triple(base, pred, v) if base_is_subject else Triple(v, pred, base))
    if symmetric:
        b.filters.append(Filter(v, base))
    return v


def person_np(b: Builder, rng: random.Random, person, rels: list[str], style: str) -> str:
    """Emit an NP for ``person`` followed by ``rels`` (innermost first)."""
    if style == "of" and len(rels) == 1:
        b.word("the", rels[0], "of")
        return relate(b, rels[0], b.entity(*person))
    if style == "of-poss" and len(rels) == 2:
        # "the R2 of M0 's R1", read as the R2 of (M0 's R1)
        b.word("the", rels[1], "of")
        term = b.entity(*person)
        b.word("'s", rels[0])
        return relate(b, rels[1], relate(b, rels[0], term))
    term = b.entity(*person)
    for r in rels:
        b.word("'s", r)
        term = relate(b, r, term)
    return term


def make_question(rng: random.Random, kind: str, ps, fs, **opts) -> tuple[Builder, SparqlQuery]:
    b = Builder()
    rels = opts.get("rels", [])
    style = opts.get("style", "poss")
    if kind == "did":
        b.word("Did")
        subj = person_np(b, rng, rng.choice(ps), rels, style)
        verbs = opts.get("verbs") or [rng.choice(list(VERBS))]
        b.word(*(" and ".join(verbs)).split())
        film = b.entity(*rng.choice(fs))
        for v in verbs:
            b.triples.insert(0, Triple(film, VERBS[v][1], subj))
        return b, SparqlQuery("ASK", None, tuple(b.triples), tuple(b.filters))
    if kind == "was":
        occ = opts.get("occ") or rng.choice(list(OCCUPATIONS))
        b.word("Was")
        subj = person_np(b, rng, rng.choice(ps), rels, style)
        b.word("an" if occ[0] in "aeiou" else "a", *occ.split())
        b.triples.insert(0, Triple(subj, "wdt:P106", f"wd:{OCCUPATIONS[occ]}"))
        return b, SparqlQuery("ASK", None, tuple(b.triples), tuple(b.filters))
    if kind == "who":
        verb = opts.get("verb") or rng.choice(list(VERBS))
        b.word("Who", *VERBS[verb][0].split())
        film = b.entity(*rng.choice(fs))
        v = b.var()
        return b, SparqlQuery("SELECT DISTINCT", v, (Triple(film, VERBS[verb][1], v),))
    if kind == "what":
        verb = opts.get("verb") or rng.choice(list(VERBS))
        b.word("What", "film", "did")
        answer = b.var()
        subj = person_np(b, rng, rng.choice(ps), rels, style)
        b.word(*verb.split())
        head = [Triple(answer, "wdt:P31", FILM_CLASS), Triple(answer, VERBS[verb][1], subj)]
        return b, SparqlQuery("SELECT DISTINCT", answer, tuple(head + b.triples), tuple(b.filters))
    raise ValueError(kind)


def to_record(b: Builder, q: SparqlQuery) -> QuestionRecord:
    mapping = {f"M{i}": qid for i, (qid, _) in enumerate(b.entities)}
    pattern, brackets = " ".join(b.words), " ".join(b.brackets)
    sparql_pattern, sparql = to_sparql(q), to_sparql(ground_sparql(q, mapping))
    rec = QuestionRecord(pattern, brackets, sparql_pattern, sparql, complexity=len(b.words))
    rec.bindings = derive_bindings(pattern, brackets, sparql_pattern, sparql)
    return rec


def spouse_record() -> QuestionRecord:
    pattern = "Did M1 's spouse executive produce M0"
    brackets = "Did [Erika Mann] 's spouse executive produce [Friedemann Bach]"
    sp = "ASK WHERE { M0 wdt:P1431 ?x0 . ?x0 wdt:P26 M1 . FILTER ( ?x0 != M1 )}"
    s = "ASK WHERE { wd:Q829979 wdt:P1431 ?x0 . ?x0 wdt:P26 wd:Q61597 . FILTER ( ?x0 != wd:Q61597 )}"
    rec = QuestionRecord(pattern, brackets, sp, s, complexity=7)
    rec.bindings = derive_bindings(pattern, brackets, sp, s)
    return rec


def generate(seed: int = 7, n: int = 200) -> list[QuestionRecord]:
    rng = random.Random(seed)
    ps, fs = people(), films()
    # fixed cases first: the worked example, the collapse pairs and the ambiguous patterns
    fixed = [
        ("did", {"rels": ["spouse"], "style": "poss", "verbs": ["direct"]}),
        ("did", {"rels": ["spouse"], "style": "of", "verbs": ["direct"]}),
        ("was", {"occ": "writer"}),
        ("was", {"occ": "screenwriter"}),
        ("was", {"occ": "art director"}),
        ("was", {"occ": "art director", "rels": ["spouse"]}),
        ("was", {"occ": "art director", "rels": ["sibling"], "style": "of"}),
        ("was", {"occ": "writer", "rels": ["sibling", "spouse"], "style": "of-poss"}),
        ("did", {"rels": ["child", "spouse"], "style": "of-poss"}),
        ("what", {"rels": ["parent", "sibling"], "style": "of-poss", "verb": "produce"}),
    ]
    out = [spouse_record()]
    for kind, opts in fixed:
        out.append(to_record(*make_question(rng, kind, ps, fs, **opts)))
    kinds = ["did", "did", "was", "who", "what"]
    while len(out) < n:
        kind = rng.choice(kinds)
        depth = rng.choice([0, 0, 1, 1, 2])
        rels = [rng.choice(list(RELATIONS)) for _ in range(depth)]
        style = "of" if depth == 1 and rng.random() < 0.3 else "poss"
        opts = {"rels": rels, "style": style}
        if kind == "did" and rng.random() < 0.2:
            opts["verbs"] = rng.sample(list(VERBS), 2)
        out.append(to_record(*make_question(rng, kind, ps, fs, **opts)))
    return out


FORCED_TRAIN = ("Did M0 's spouse direct M1", "Was M0 a writer")
FORCED_TEST = ("Did the spouse of M0 direct M1", "Was M0 a screenwriter")


def make_splits(records: list[QuestionRecord], seed: int) -> list[SplitManifest]:
    """Pattern-disjoint train/dev/test partitions (by English pattern)."""
    groups: dict[str, list[str]] = {}
    for i, r in enumerate(records):
        groups.setdefault(normalize_pattern(r.question_pattern), []).append(str(i))
    keys = sorted(groups)
    manifests = []
    for k, name in enumerate(["mcd1", "mcd2", "mcd3", "random"]):
        rng = random.Random(seed * 100 + k)
        order = keys[:]
        rng.shuffle(order)
        parts = {"train": set(), "dev": set(), "test": set()}
        for j, key in enumerate(order):
            if key in FORCED_TRAIN:
                part = "train"
            elif key in FORCED_TEST:
                part = "test"
            else:
                part = "train" if j % 10 < 7 else ("dev" if j % 10 == 7 else "test")
            parts[part].update(groups[key])
        manifests.append(SplitManifest(name, frozenset(parts["train"]), frozenset(parts["dev"]),
                                       frozenset(parts["test"])))
    return manifests


def corrupt(query: str, rng: random.Random) -> str:
    """A wrong prediction: swap an object for a watched or unrelated entity."""
    toks = query.split()
    targets = [i for i, t in enumerate(toks) if t.startswith("M") or t.startswith("wd:")]
    if not targets:
        return query.replace("ASK", "SELECT DISTINCT ?x0", 1)
    toks[rng.choice(targets)] = rng.choice(["wd:Q148", "wd:Q17", "wd:Q30", "wd:Q145"])
    return " ".join(toks)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out-dir", type=Path, default=Path(__file__).resolve().parent.parent / "tests" / "data")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)

    records = generate(args.seed)
    write_records(records, out / "fixture_en.jsonl")
    spec = read_grammar(data_path("demo_zh.scfg"))
    results = translate_records(spec, records, seed=0, lang="zh")
    failed = [i for i, r in enumerate(results) if r.error]
    if failed:
        raise SystemExit(f"demo grammar failed on records {failed}")
    write_records([r.record for r in results], out / "fixture_zh.jsonl", ["zh"])

    manifests = make_splits(records, args.seed)
    for m in manifests:
        write_manifest(m, out / "splits")

    (out / "labels.tsv").write_text("Q61597\ten\tErika Mann\nQ829979\ten\tFriedemann Bach\n", encoding="utf-8")
    (out / "watchlist.tsv").write_text("Q148\tCN\nQ17\tJP\nQ30\tUS\tother\nQ145\tGB\tother\n",
                                       encoding="utf-8")

    rng = random.Random(args.seed + 1)
    preds, comp = [], []
    test_ids = sorted(manifests[0].test, key=int)
    for rid in test_ids:
        rec = records[int(rid)]
        ok = rng.random() < 0.6
        pred = rec.sparql_pattern if ok else corrupt(rec.sparql_pattern, rng)
        preds.append(f"{rid}\tzh\t{pred}\n")
        comp.append(f"{rec.complexity}\t{int(pred == rec.sparql_pattern)}\n")
    (out / "preds_zh.tsv").write_text("".join(preds), encoding="utf-8")
    (out / "complexity_zh.tsv").write_text("".join(comp), encoding="utf-8")
    print(f"wrote {len(records)} records, {len(manifests)} splits, {len(preds)} predictions to {out}")


if __name__ == "__main__":
    main()
