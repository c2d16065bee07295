"""Semantics-aware source-to-source transformations for an annotated C subset."""

from .cast import AnnotatedAst, Node
from .errors import StmlError
from .parser import parse_c, parse_expression
from .printer import diff, print_c, print_expr
from .properties import Property, parse_pragma

__all__ = [
    "AnnotatedAst",
    "Node",
    "Property",
    "StmlError",
    "diff",
    "parse_c",
    "parse_expression",
    "parse_pragma",
    "print_c",
    "print_expr",
]

__version__ = "0.1.0"
