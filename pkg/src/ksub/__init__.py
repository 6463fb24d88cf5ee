"""Numerical engine for 3-dimensional canonical Killing submersions.

Subpackages by layer: :mod:`ksub.expr` (parsing and second-order jets),
:mod:`ksub.geometry` (canonical metrics, connection, curvature, Ricci),
:mod:`ksub.surface` (immersed surfaces, shape operator, structure
equations), :mod:`ksub.biharmonic` (CMC biharmonicity residuals and branch
classification), :mod:`ksub.hopf` (base curves and vertical cylinders), and
:mod:`ksub.cli` / :mod:`ksub.verify` (front end and verification suite).
"""

from .expr import Expr, Jet, compose_jet, eval_jet, eval_value, parse
from .geometry import KillingData, Rect, bcv

__all__ = [
    "Expr",
    "Jet",
    "parse",
    "eval_jet",
    "eval_value",
    "compose_jet",
    "KillingData",
    "Rect",
    "bcv",
]

__version__ = "0.1.0"
