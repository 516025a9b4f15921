"""Recover the implicit structure of spreadsheets.

Load a workbook (fact file or CSV), analyse cell dependencies, match
user-defined two-dimensional grammars against the grid, regroup the
matched cells into named array attributes, and print the result as a
compact algebraic listing whose equations generalize over row indices.
"""

from .arrows import (
    Attribute,
    EnumDomain,
    Group,
    Model,
    ModelError,
    NameFromLabel,
    RangeDomain,
    Rename,
    Transform,
    TransformError,
    Ungroup,
    compile_model,
    decompile,
    emit_mm,
    generalize,
    infer_name,
    match_to_transforms,
    validate_model,
)
from .cells import (
    Address,
    FactFileError,
    Formula,
    Number,
    Text,
    Workbook,
    dump_facts,
    load_csv_grid,
    load_facts,
)
from .factbase import FactBase, PredicateError, PredicateRegistry, build
from .formula import FormulaError, parse_formula, print_formula
from .grammar import (
    Grammar,
    GrammarError,
    Match,
    match_all,
    match_at,
    parse_grammar,
    select_cover,
    validate_grammar,
)
from .session import Session, SessionError, create_session, discover, execute

__version__ = "0.1.0"

__all__ = [
    "Address",
    "Attribute",
    "EnumDomain",
    "FactBase",
    "FactFileError",
    "Formula",
    "FormulaError",
    "Grammar",
    "GrammarError",
    "Group",
    "Match",
    "Model",
    "ModelError",
    "NameFromLabel",
    "Number",
    "PredicateError",
    "PredicateRegistry",
    "RangeDomain",
    "Rename",
    "Session",
    "SessionError",
    "Text",
    "Transform",
    "TransformError",
    "Ungroup",
    "Workbook",
    "build",
    "compile_model",
    "create_session",
    "decompile",
    "discover",
    "dump_facts",
    "emit_mm",
    "execute",
    "generalize",
    "infer_name",
    "load_csv_grid",
    "load_facts",
    "match_all",
    "match_at",
    "match_to_transforms",
    "parse_formula",
    "parse_grammar",
    "print_formula",
    "select_cover",
    "validate_grammar",
    "validate_model",
    "__version__",
]
