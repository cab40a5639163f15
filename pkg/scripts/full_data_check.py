"""Check the released-corpus numbers when the full data is available.

Expected layout of the data directory (``--data`` or $RBMT_FULL_DATA):
  records.jsonl                 records with _ja and _zh translation fields
  grammar_ja.scfg              the full English->Japanese grammar
  splits/mcd{1,2,3}.{train,dev,test}
  bleu/{hyp,ref}_{ja,zh}.txt   system output and gold translations, one per line
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from rbmt.audit import compute_stats, load_manifests, overlap_over_splits
from rbmt.dataset.records import read_records
from rbmt.grammar import read_grammar
from rbmt.metrics import BleuConfig, corpus_bleu
from rbmt.parser import ambiguity_report

ENV = "RBMT_FULL_DATA"
REQUIRED = ("records.jsonl", "grammar_ja.scfg", "splits", "bleu")


@dataclass
class Check:
    name: str
    expected: float
    got: float
    tolerance: float = 0.0

    @property
    def ok(self) -> bool:
        return abs(self.got - self.expected) <= self.tolerance

    def __str__(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.name}: got {self.got}, expected {self.expected}"


def data_dir(explicit: str | None = None) -> Path | None:
    d = explicit or os.environ.get(ENV)
    if not d:
        return None
    d = Path(d)
    return d if all((d / r).exists() for r in REQUIRED) else None


def run_checks(root: Path) -> list[Check]:
    records = read_records(root / "records.jsonl")
    stats = compute_stats(records, ["ja", "zh"])
    checks = [
        Check("EN question patterns", 105461, stats.question_patterns["en"]),
        Check("JA question patterns", 98431, stats.question_patterns["ja"]),
        Check("JA paired patterns", 98431, stats.paired_patterns["ja"]),
        Check("ZH question patterns", 101333, stats.question_patterns["zh"]),
        Check("ZH paired patterns", 101342, stats.paired_patterns["zh"]),
        Check("delta JA", 0, stats.delta["ja"]),
        Check("delta ZH", 9, stats.delta["zh"]),
    ]
    spec = read_grammar(root / "grammar_ja.scfg")
    patterns = sorted({r.question_pattern for r in records})
    checks.append(Check("ambiguous EN patterns", 322, ambiguity_report(spec, patterns).ambiguous))
    manifests = [m for m in load_manifests(root / "splits") if m.name.startswith("mcd")]
    checks.append(Check("JA overlap summed over MCD", 58, overlap_over_splits(records, manifests, "ja").summed))
    checks.append(Check("ZH overlap summed over MCD", 37, overlap_over_splits(records, manifests, "zh").summed))
    cfg = BleuConfig(tokenization="cjkChar")
    for lang, expected in (("ja", 97.1), ("zh", 94.4)):
        hyp = (root / "bleu" / f"hyp_{lang}.txt").read_text(encoding="utf-8").splitlines()
        ref = (root / "bleu" / f"ref_{lang}.txt").read_text(encoding="utf-8").splitlines()
        checks.append(Check(f"BLEU {lang.upper()}", expected, round(corpus_bleu(hyp, ref, cfg), 2), 0.1))
    return checks


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--data")
    args = ap.parse_args(argv)
    root = data_dir(args.data)
    if root is None:
        print(f"full data not found (pass --data or set {ENV})", file=sys.stderr)
        return 3
    checks = run_checks(root)
    for c in checks:
        print(c)
    return 0 if all(c.ok for c in checks) else 1


if __name__ == "__main__":
    sys.exit(main())
