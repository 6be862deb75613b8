"""Model checking of counting monadic second-order sentences on matroids."""

from ._mmso import (
    Matroid,
    MmsoResourceError,
    MmsoValueError,
    branch_width,
    build_parse_tree,
    class_count,
    corpus_names,
    decide_theorem,
    decomposition_width,
    evaluate,
    model_check,
    parse_sentence,
)

__all__ = [
    "Matroid",
    "MmsoResourceError",
    "MmsoValueError",
    "branch_width",
    "build_parse_tree",
    "class_count",
    "corpus_names",
    "decide_theorem",
    "decomposition_width",
    "evaluate",
    "model_check",
    "parse_sentence",
]
