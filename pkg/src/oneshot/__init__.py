"""Numerical toolkit for one-shot entropy bounds on sequential processes.

Dense, desk-scale (total dimension <= 64) linear algebra over labelled
registers, a family of quantum divergences and conditional entropies,
classical smoothing oracles, scalar bound evaluators for approximate
entropy accumulation, and the sequential-process generators used to
exercise them.  All entropic quantities are in bits (base-2 logarithms).
"""

from oneshot.linalg import (
    RegisterSpace,
    DensityOperator,
    HermitianObservable,
    ClassicalJoint,
    tensor_product,
    partial_trace,
    herm_power,
    trace_distance,
    purified_distance,
    asymmetric_pinching_witness,
)
from oneshot.channels import (
    ClassicalChannel,
    KrausChannel,
    classical_diamond_distance,
    quantum_diamond_lower_bound,
    mix_classical_channels,
    mix_kraus_channels,
)
from oneshot.divergences import (
    DivergenceResult,
    relative_entropy,
    max_relative_entropy,
    petz_renyi,
    sandwiched_renyi,
    geometric_renyi,
    sharp_upper_bound,
    smooth_dmax_classical,
    substate_bound,
    classical_renyi_close_bound,
)
from oneshot.entropies import (
    ConditionalEntropyResult,
    SmoothingCertificate,
    vn_conditional,
    h_down_alpha,
    h_up_alpha,
    h_min,
    smooth_hmin_classical,
    classical_approx_indep_smoothing,
    multipartite_mi,
    chain_rule_nu_state,
)
from oneshot.bounds import (
    BoundParams,
    ScenarioSpec,
    BoundReport,
    scalar_g0,
    scalar_g1,
    scalar_g2,
    scalar_z_beta,
    scalar_k_alpha,
    triangle_hmin_bound,
    vn_triangle_bound,
    approx_indep_bound,
    approx_indep_from_trace,
    weak_aep_bound,
    approx_eat_bound,
    approx_eat_optimize,
    approx_eat_testing_bound,
    classical_eat_bound,
    param_scan,
)
from oneshot.simulate import (
    MinTradeoffFunction,
    TestEvent,
    run_sequential_classical,
    build_r_distribution,
    counterexample_side_info,
    counterexample_triangle,
    quantum_eat_smoke,
)
from oneshot.diqkd import DiqkdSpec, chsh_rate_function, diqkd_keyrate_bound

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
