"""Finite matrix model of the Hodge Laplacian on the Heisenberg group at a
fixed Fourier parameter, with machine-verified diagonalization."""

from .bargmann import (
    BudgetExceeded,
    GradedOperator,
    ModelPoint,
    Space,
    TruncatedFock,
    buffered_residual,
    monomial_norm,
    rep_L,
    rep_T,
    rep_Z,
    rep_Zbar,
    truncated_fock,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "GradedOperator",
    "ModelPoint",
    "Space",
    "TruncatedFock",
    "buffered_residual",
    "monomial_norm",
    "rep_L",
    "rep_T",
    "rep_Z",
    "rep_Zbar",
    "truncated_fock",
    "__version__",
]
