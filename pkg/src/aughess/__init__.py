"""Numerical toolkit for augmented Hessian equations F[D^2 u - A(x,u,Du)] = B
with oblique boundary conditions on planar domains.

Three layers:

* an operator catalog (k-Hessians, Hessian quotients, eigenvalue-sum families,
  degenerate minimum operators and their elliptic regularizations) with their
  admissibility cones and sampled structure-condition certifiers;
* regularity / domain-convexity certifiers for the augmenting matrix A, the
  right side B and oblique boundary operators G;
* a finite-difference damped-Newton continuation solver on disks and squares,
  with an epsilon-regularization ladder for degenerate operators.
"""

__version__ = "0.1.0"

from .symmat import SymMat, as_symmat
from .cones import (ConeId, ConjugatedGammaK, GammaK, PkCone, PositiveCone,
                    Regularized, ConeSampler, cone_margin)
from .operators import (OperatorSpec, elementary_symmetric, evaluate, fk, fkl,
                        fk_neg_alpha, fkv, gradient, log_det, log_pk, mk,
                        regularized, tilde_fk, trace_of_gradient)
from .errors import (AdmissibilityError, ArgumentError, AugHessError,
                     ConfigError, ConstraintError, NonsmoothPointError,
                     SeedError)

__all__ = [
    "SymMat", "as_symmat",
    "ConeId", "GammaK", "PkCone", "PositiveCone", "Regularized",
    "ConjugatedGammaK", "ConeSampler", "cone_margin",
    "OperatorSpec", "fk", "fkl", "log_det", "log_pk", "tilde_fk",
    "fk_neg_alpha", "mk", "fkv", "regularized",
    "elementary_symmetric", "evaluate", "gradient", "trace_of_gradient",
    "AugHessError", "ArgumentError", "AdmissibilityError",
    "NonsmoothPointError", "ConstraintError", "ConfigError", "SeedError",
]
