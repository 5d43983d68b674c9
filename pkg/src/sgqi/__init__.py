"""Sparse-grid quasi-interpolation with multiquadric trigonometric kernels.

Periodic targets on the unit torus are handled by :mod:`sgqi.periodic`;
functions on a cube go through the torus-to-cube maps of
:mod:`sgqi.periodization`.
"""

from .errors import (
    CapabilityError,
    ConfigError,
    DataError,
    DomainError,
    ResourceError,
    SGQIError,
    SingularityError,
)
from .kernel import KernelSpec, eval_phi, eval_psi_c, eval_psi_ch, eval_tensor_kernel, quadrature_weight
from .periodic import (
    QuasiInterpolant,
    SampledField,
    ScatteredQuasiInterpolant,
    ShapePolicy,
    build,
    evaluate,
    evaluate_batch,
    sample_periodic,
    shape_parameters,
)
from .periodization import (
    NonPeriodicQuasiInterpolant,
    TransformSpec,
    build_nonperiodic,
    evaluate_nonperiodic,
    periodize_samples,
    weighted_sup_error,
)
from .sparse_grid import CombinationPlan, combination_plan, count_full_nodes, count_sparse_nodes, full_plan

__version__ = "0.1.0"
