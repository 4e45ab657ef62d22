"""Boundary measures of graph covering trees, the zeta functions of the
induced spectral triple, and the zeta-row test for graph isomorphism."""

__version__ = "0.1.0"

from .errors import (AmbiguousGenus, ConvergenceError, ExtendPrefix, GraphFormatError,
                     HypothesisError, PoleError, ReconstructionError, SGTError)
from .graph import (MultiGraph, Presentation, ValidationReport, betti, free_reduce, parse_graph,
                    spanning_presentation, spanning_trees, validate)
from .covering import (CylinderMeasure, critical_exponent, displacement, hashimoto_matrix,
                       poincare_partial, ps_measure_tree, sphere_sizes, busemann)
from .boundary import (BoundaryPoint, boundary_distance, cross_ratio, pullback_measure,
                       reconstruct_ball, tripod_center)
from .spectral import (Symbol, detail_coefficients, dirac_eigenvalue, filtration_dims,
                       genus_from_zeta, zeta_eval, zeta_one_closed)
from .compare import compare, enumerate_choices, fingerprint, iso_oracle
