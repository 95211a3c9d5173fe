"""Simulation and audit of a four-setting clock-indexed hidden-variable model.

The model reproduces the singlet correlations at two settings per station
by letting the distribution of each station's instrument variable depend,
for a fixed clock index, on the distant setting. The package builds the
model, checks the locality conditions of two-station kernels, and runs the
resulting two-station experiment, including the signalling channel that
opens when the clock index is observable.
"""
from .kernels import (
    CHSH_ANGLES,
    SettingMap,
    local_foil_correlation,
    local_foil_kernel,
    planar,
    singlet_correlation,
    singlet_joint,
    singlet_kernel,
)
from .locality import (
    HOLDS,
    VIOLATED,
    ConditionReport,
    JointKernel,
    averaged_correlation,
    check_distribution_independence,
    check_factorizability,
    check_outcome_independence,
    check_parameter_independence,
    check_weight_independence,
    chsh,
    chsh_from_table,
    jarrett_equivalence,
    kernel_correlations,
    marginal_station1,
    marginal_station2,
    random_kernel,
)
from .outcomes import (
    OutcomeFns,
    build_outcome_functions,
    clock_kernel,
    eval_A,
    eval_B,
    full_kernel,
    load_model,
    model_correlation,
    model_correlations,
    model_marginal,
    save_model,
)
from .regions import (
    CELLS,
    J_ONLY,
    PER_M,
    DEFAULT_PATTERNS,
    SETTING_PAIRS,
    Cell,
    Infeasible,
    PatternTable,
    RegionConfig,
    density,
    infer_settings_from_u,
    infer_settings_from_v,
    mixture_density,
    normalization_check,
    sigma,
    supported_cell,
    synthesize_regions,
    tau,
)
from .stations import (
    Schedule,
    bit_error_rate,
    blind_decode,
    estimate_correlation,
    instrument_distribution,
    message_schedule,
    random_schedule,
    run_experiment,
    signal_decode,
)

__version__ = "0.1.0"
