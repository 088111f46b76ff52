"""Smooth-function expression trees."""

from .analysis import (
    NumericVerdict,
    central_difference,
    equal_numeric,
    hadamard_decompose,
    hadamard_residual,
)
from .parser import parse
from .poly import Poly, divide, grlex_key, monomials, monomials_of_degree, poly_normal_form
from .tree import (
    PRIMITIVES,
    QUADRATURE_ORDER,
    Const,
    Neg,
    Node,
    Power,
    Primitive,
    Product,
    SegmentIntegral,
    SmoothExpr,
    Sum,
    Var,
    compose,
    compose_to,
    evaluate,
    evaluate_float,
    partial,
    render,
    variables,
)

__all__ = [
    "PRIMITIVES",
    "QUADRATURE_ORDER",
    "Const",
    "Neg",
    "Node",
    "NumericVerdict",
    "Poly",
    "Power",
    "Primitive",
    "Product",
    "SegmentIntegral",
    "SmoothExpr",
    "Sum",
    "Var",
    "central_difference",
    "compose",
    "compose_to",
    "divide",
    "equal_numeric",
    "evaluate",
    "evaluate_float",
    "grlex_key",
    "hadamard_decompose",
    "hadamard_residual",
    "monomials",
    "monomials_of_degree",
    "parse",
    "partial",
    "poly_normal_form",
    "render",
    "variables",
]
