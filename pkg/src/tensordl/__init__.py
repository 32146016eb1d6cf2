"""Critical rank-one approximations, deflation chains and data loci of tensors
under the Bombieri-Weyl bilinear form."""

__version__ = "0.1.0"

from .core import (
    DenseTensor,
    RankOneTerm,
    SymmetricTensor,
    bilinear_form,
    bw_inner_dense,
    bw_inner_symmetric,
    is_isotropic,
    power,
    rank_one,
    segre_tangent_residuals,
    veronese_tangent_residuals,
)
from .critical import (
    CriticalPoint,
    SolverConfig,
    Source,
    matrix_critical_points,
    segre_critical_search,
    symmetric_critical_search,
    verify_critical_dense,
    verify_critical_symmetric,
)
from .deflation import Policy, deflate, hyperdeterminant_222, real_rank_222, sc10_experiment
from .stabilization import generic_rank, max_isotropic_span, stabilization_step
