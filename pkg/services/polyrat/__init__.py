from .polyrat_utils import (
    Polynomial,
    RationalFn,
    Root,
    RootSet,
    classify_halfplane,
    find_roots,
    merge_roots,
    poly_arith,
)

__all__ = [
    "Polynomial",
    "RationalFn",
    "Root",
    "RootSet",
    "classify_halfplane",
    "find_roots",
    "merge_roots",
    "poly_arith",
]
