"""End-to-end translation throughput on the bundled fixture, single worker."""
from __future__ import annotations

import argparse
import time
from pathlib import Path

from rbmt import data_path, read_grammar
from rbmt.cli import translate_records
from rbmt.dataset.records import read_records

FIXTURE = Path(__file__).resolve().parent.parent / "tests" / "data" / "fixture_en.jsonl"


def measure(grammar: Path, records_path: Path, repeat: int = 10) -> float:
    """Patterns per second, grammar load excluded."""
    spec = read_grammar(grammar)
    records = read_records(records_path) * repeat
    start = time.perf_counter()
    results = translate_records(spec, records, workers=1)
    elapsed = time.perf_counter() - start
    assert not any(r.error for r in results)
    return len(records) / elapsed


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grammar", type=Path, default=data_path("demo_zh.scfg"))
    ap.add_argument("--in", dest="input", type=Path, default=FIXTURE)
    ap.add_argument("--repeat", type=int, default=10)
    args = ap.parse_args(argv)
    print(f"{measure(args.grammar, args.input, args.repeat):.0f} patterns/s")


if __name__ == "__main__":
    main()
