"""Generalized simplicial attention networks on numpy."""

from .complex import SimplicialComplex, build_complex
from .errors import GsanError
from .filters import CochainBundle
from .models import SimplicialModel
from .operators import ComplexOperators, complex_operators

__version__ = "0.1.0"

__all__ = [
    "CochainBundle",
    "ComplexOperators",
    "GsanError",
    "SimplicialComplex",
    "SimplicialModel",
    "build_complex",
    "complex_operators",
]
