"""Exact and numerical checks for the analytic machinery behind subconvex
bounds of L(1/2 + it, f x chi): exponential sums, Dirichlet characters,
cusp-form coefficients, Voronoi and Poisson summation, the circle method
and approximate functional equations.
"""

from .arith import kloosterman_sum, ramanujan_sum
from .characters import DirichletCharacter, enumerate_characters, gauss_sum, primitive_characters
from .circle import ModuliSet, build_product_moduli
from .errors import SubconvexError
from .forms import CoefficientSource, builtin_delta, load_maass
from .lfunc import ScanConfig, afe_value, exponent_scan, functional_equation_residual
from .report import IdentityCheck, emit_report
from .windows import SmoothWindow

__version__ = "0.1.0"

__all__ = [
    "CoefficientSource", "DirichletCharacter", "IdentityCheck", "ModuliSet", "ScanConfig",
    "SmoothWindow", "SubconvexError", "afe_value", "build_product_moduli", "builtin_delta",
    "emit_report", "enumerate_characters", "exponent_scan", "functional_equation_residual",
    "gauss_sum", "kloosterman_sum", "load_maass", "primitive_characters", "ramanujan_sum",
]
