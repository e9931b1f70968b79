"""Extrinsic geometric flows of codimension-one foliations.

The leaf metric evolves by ``dg/dt = sum_j f_j(tau) b_j`` where ``b_j`` is
the j-th power of the second fundamental form.  Along the normal curves
this reduces to a quasilinear system for the power sums ``tau_i`` of the
principal curvatures, studied here with companion matrices.
"""

from .companion import (
    CompanionSpec,
    Eigensystem,
    b_n1,
    b_nm,
    b_nm_entrywise,
    build_companion,
    companion_eigensystem,
)
from .errors import (
    BlowupError,
    DegenerateRatioError,
    InvalidInputError,
    InvalidMetricError,
    NotHyperbolicError,
    NumericalError,
)
from .fields import ScalarField
from .flows import (
    GeneratingFamily,
    ScalarFlux,
    TruncatedSystem,
    assemble_type_a,
    assemble_type_b,
    classify_hyperbolicity,
    ent,
    preset,
    ricci_discriminant_n3,
    ricci_ex,
)
from .geometry import (
    BiregularMetric,
    RotationalMetric,
    SurfaceMetric,
    gauss_curvature_EFG,
    gauss_curvature_flow,
    umbilical_flow,
    weingarten_from_metric,
)
from .scenarios import RunReport, ScenarioConfig, hyperbolicity_map, run_reeb, run_scenario, run_solve
from .solvers import (
    blowup_time_conservation,
    blowup_time_monomial,
    ricci_umbilical_blowup_time,
    solve_characteristics_b1,
    solve_conservation_law,
    solve_fd,
    solve_transport,
)
from .symmetric import (
    SymmetricProfile,
    beta,
    dtau_decomposition,
    elementary_symmetric,
    power_sums,
    sigma_from_tau,
    tau_from_sigma,
)

__version__ = "0.1.0"
