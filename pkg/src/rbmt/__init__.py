"""Rule-based SCFG translation of compositional question patterns, with the
dataset, audit and scoring tools around it."""
from importlib import resources
from pathlib import Path

from rbmt.grammar import GrammarError, GrammarSpec, load_grammar, read_grammar
from rbmt.parser import ParseError, parse, tokenize
from rbmt.transducer import detokenize, transduce, translate_pattern, translate_text

__version__ = "0.1.0"


def data_path(name: str) -> Path:
    """Path of a bundled grammar or data file, e.g. ``data_path("mini_zh.scfg")``."""
    return Path(str(resources.files("rbmt") / "data" / name))


__all__ = [
    "GrammarError", "GrammarSpec", "ParseError", "data_path", "detokenize", "load_grammar", "parse",
    "read_grammar", "tokenize", "transduce", "translate_pattern", "translate_text",
]
