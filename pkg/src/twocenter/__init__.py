"""Elementary eigenfunctions of the planar two-Coulomb-center problem."""

from .eigenfunction import ElementaryEigenfunction
from .errors import (
    BranchCrossingError,
    BranchOutOfRange,
    ConvergenceError,
    DomainError,
    FocalSegmentWarning,
    NormalizationDivergence,
    RootRealityError,
    SymmetricCaseError,
    TwoCenterError,
)
from .evaluate import density_grid, evaluate_psi, normalize, pde_residual
from .matching import find_elementary_solutions
from .mathieu import char_value
from .separation import CenterPair
from .symmetric import find_symmetric_solutions

__all__ = [
    "BranchCrossingError",
    "BranchOutOfRange",
    "CenterPair",
    "ConvergenceError",
    "DomainError",
    "ElementaryEigenfunction",
    "FocalSegmentWarning",
    "NormalizationDivergence",
    "RootRealityError",
    "SymmetricCaseError",
    "TwoCenterError",
    "char_value",
    "density_grid",
    "evaluate_psi",
    "find_elementary_solutions",
    "find_symmetric_solutions",
    "normalize",
    "pde_residual",
]
__version__ = "0.1.0"
