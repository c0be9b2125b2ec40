from .adjoint import (
    AdjointProblem,
    adjoint_final_conditions,
    adjoint_norm_checks,
    adjoint_regular_part,
    backward_pde_residual,
    restrict_to_omega,
    sample_adjoint,
    solve_adjoint,
)
from .controllability import (
    ControlMap,
    ControlTemplate,
    ObservationMap,
    SynthesisResult,
    assemble_control_map,
    assemble_observation_map,
    controllability_report,
    duality_adjointness_residual,
    duality_residual,
    gramian,
    residue_diagnostic,
    synthesize_control,
    ucp_diagnose,
    ucp_smallest_singular_value,
)
from .forward import (
    ControlField,
    ForwardProblem,
    MemoryState,
    ModalField,
    estimate_cds_check,
    family_properties,
    memory_state,
    memory_trace,
    operator_families,
    pde_residual,
    solve_forward,
    solve_forward_alt,
)
from .fracops import (
    Anchor,
    FractionalOrder,
    GammaChoice,
    GridFunction,
    TimeGrid,
    cell_quadrature,
    convolution_commute_residual,
    frac_integral_left,
    frac_integral_right,
    grid_integral,
    hilfer_derivative_left,
    hilfer_derivative_right,
    ibp_residual,
    ipf_residual,
    refinement_order,
    rl_derivative_left,
    rl_derivative_right,
)
from .mlf import (
    MlfParams,
    fit_bound_constant,
    mittag_leffler,
    mlf_bound_check,
    mlf_derivative_identities,
    mlf_eval,
    mlf_laplace_check,
    mlf_recurrence_residual,
)
from .spectral import (
    Field,
    SpaceGrid,
    SpectralBasis,
    Subdomain,
    bilinear_form,
    builtin_dirichlet_laplacian,
    builtin_spectral_fractional,
    gram_matrix,
    l2_pairing,
    project,
    synthesize,
    v_gamma_norm,
)

__all__ = [
    "AdjointProblem",
    "adjoint_final_conditions",
    "adjoint_norm_checks",
    "adjoint_regular_part",
    "backward_pde_residual",
    "restrict_to_omega",
    "sample_adjoint",
    "solve_adjoint",
    "ControlMap",
    "ControlTemplate",
    "ObservationMap",
    "SynthesisResult",
    "assemble_control_map",
    "assemble_observation_map",
    "controllability_report",
    "duality_adjointness_residual",
    "duality_residual",
    "gramian",
    "residue_diagnostic",
    "synthesize_control",
    "ucp_diagnose",
    "ucp_smallest_singular_value",
    "ControlField",
    "ForwardProblem",
    "MemoryState",
    "ModalField",
    "estimate_cds_check",
    "family_properties",
    "memory_state",
    "memory_trace",
    "operator_families",
    "pde_residual",
    "solve_forward",
    "solve_forward_alt",
    "Anchor",
    "FractionalOrder",
    "GammaChoice",
    "GridFunction",
    "TimeGrid",
    "cell_quadrature",
    "convolution_commute_residual",
    "frac_integral_left",
    "frac_integral_right",
    "grid_integral",
    "hilfer_derivative_left",
    "hilfer_derivative_right",
    "ibp_residual",
    "ipf_residual",
    "refinement_order",
    "rl_derivative_left",
    "rl_derivative_right",
    "MlfParams",
    "fit_bound_constant",
    "mittag_leffler",
    "mlf_bound_check",
    "mlf_derivative_identities",
    "mlf_eval",
    "mlf_laplace_check",
    "mlf_recurrence_residual",
    "Field",
    "SpaceGrid",
    "SpectralBasis",
    "Subdomain",
    "bilinear_form",
    "builtin_dirichlet_laplacian",
    "builtin_spectral_fractional",
    "gram_matrix",
    "l2_pairing",
    "project",
    "synthesize",
    "v_gamma_norm",
]
