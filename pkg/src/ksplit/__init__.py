"""Finite verification of k-splitting, end-homogeneity and indiscernibility."""

from .report import (
    BudgetExceeded,
    ExtensionClash,
    InvalidParams,
    KsplitError,
    NotDownrightClosed,
    NotSubstructure,
    ParameterTooSmall,
    Report,
    SortMismatch,
)
from .structures import (
    FunctionSymbol,
    KSetColoring,
    PartialMap,
    PredicateRelation,
    RelationSymbol,
    Signature,
    Structure,
    TupleRelation,
    closure,
    extend_map,
    generated_substructure,
    is_partial_isomorphism,
    qf_type_equal,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "ExtensionClash",
    "InvalidParams",
    "KsplitError",
    "NotDownrightClosed",
    "NotSubstructure",
    "ParameterTooSmall",
    "Report",
    "SortMismatch",
    "FunctionSymbol",
    "KSetColoring",
    "PartialMap",
    "PredicateRelation",
    "RelationSymbol",
    "Signature",
    "Structure",
    "TupleRelation",
    "closure",
    "extend_map",
    "generated_substructure",
    "is_partial_isomorphism",
    "qf_type_equal",
]
