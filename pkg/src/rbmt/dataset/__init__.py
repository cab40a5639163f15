"""Benchmark records, SPARQL/RIR conversion, grounding and entity labels."""
from rbmt.dataset.records import (
    EntityBinding, QuestionRecord, RecordError, extract_pattern, read_records,
    reinsert_entities, write_records,
)
from rbmt.dataset.sparql import (
    SparqlQuery, SparqlSyntaxError, from_rir, ground_sparql, parse_sparql, to_rir, to_sparql,
)

__all__ = [
    "EntityBinding", "QuestionRecord", "RecordError", "SparqlQuery", "SparqlSyntaxError",
    "extract_pattern", "from_rir", "ground_sparql", "parse_sparql", "read_records",
    "reinsert_entities", "to_rir", "to_sparql", "write_records",
]
