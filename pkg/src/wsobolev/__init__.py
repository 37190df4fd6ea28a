"""Numerical compactness checks for weighted H^1 spaces in L^2(R^n, e^(-phi)).

For a weight phi on R^n, the embeddings of H^1(R^n, phi) and
H^1(R^n, phi, grad phi) into L^2(R^n, phi) are compact exactly when the
Schrodinger operators -Laplace + V1 and -Laplace + V2 have compact resolvent.
This package builds V1, V2 from phi and probes the capacity, measure and
integral criteria for that, cross-checked by finite-difference spectra.

Submodules ``capacity`` and ``molcanov`` hold the solvers of the same name.
"""
__version__ = "0.1.0"

from .weight import parse_weight, evaluate, gradient, laplacian  # noqa: E402
from .potential import PotentialKind, build_potential, probe_semibounded  # noqa: E402
from .grid import GridDomain, GridField, CellSet  # noqa: E402
from .capacity import Convention, CapacityProblem  # noqa: E402
from .molcanov import MolcanovQuery, molcanov_exhaustive, molcanov_greedy  # noqa: E402
from .criteria import aggregate  # noqa: E402
from .spectral import (DiscreteSchrodinger, DiscreteWeightedOp, lowest_eigenvalues,  # noqa: E402
                       conjugation_residual, dirichlet_sweep)
from .kernels import BACKEND  # noqa: E402

__all__ = [
    "parse_weight", "evaluate", "gradient", "laplacian",
    "PotentialKind", "build_potential", "probe_semibounded",
    "GridDomain", "GridField", "CellSet",
    "Convention", "CapacityProblem",
    "MolcanovQuery", "molcanov_exhaustive", "molcanov_greedy",
    "aggregate",
    "DiscreteSchrodinger", "DiscreteWeightedOp", "lowest_eigenvalues",
    "conjugation_residual", "dirichlet_sweep",
    "BACKEND",
]
