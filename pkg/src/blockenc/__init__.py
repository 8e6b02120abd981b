"""Block encodings of a 64x64 lattice-stencil matrix: construction,
verification and T-count comparison."""

from .f1 import F1Bundle, build_f1_algebraic, build_f1_elementwise, build_lattice, default_bundle
from .bencs import BlockEncoding, LcuSpec, be_lcu, be_sequence, be_tensor
from .costs import CostExpr, ErrorBudget, optimize_budget

__all__ = [
    "F1Bundle", "build_f1_algebraic", "build_f1_elementwise", "build_lattice",
    "default_bundle", "BlockEncoding", "LcuSpec", "be_lcu", "be_sequence",
    "be_tensor", "CostExpr", "ErrorBudget", "optimize_budget",
]

__version__ = "0.1.0"
