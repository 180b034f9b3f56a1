"""Dual and projective flatness checks for general (α, β)-metrics.

The metric is ``F = α φ(b², β/α)`` on an open set of R^n. Derivatives are
carried by forward-mode jets, so every residual here is exact up to rounding.
"""

from .errors import AbflatError, ContractError, DomainError, InputError, QuadratureError, SingularityError
from .fields import (
    DuallyFlatData,
    ModelParams,
    OneForm,
    RiemannianMetric,
    closed_conformal,
    constant_curvature,
    contractions,
    euclidean,
)
from .phifunc import (
    CheckPhiFunction,
    PhiFunction,
    SolutionSpec,
    pde1_residual,
    phi_from_fg,
    projective_from_dual,
    dual_from_projective,
)
from .finsler import GeneralABMetric, dual_flat_residual, projective_flat_residual
from .deform import DeformationFactors, build_model, deform
from .catalog import catalog
from .report import VerificationReport

__version__ = "0.1.0"
