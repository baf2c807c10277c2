"""Classical and quantum sawtooth maps under kick noise.

Simulation of noisy fidelity decay, closed-form bounds on where the
classical Lyapunov rate is observable, and hardware error budgets.
"""

from .bounds import K_loc, gamma0_max, lambda_loc, lyapunov_region, min_qubits
from .classical import (
    ClassicalState,
    csm_step,
    diffusion_coefficient,
    lyapunov_exponent,
    measure_diffusion,
)
from .decay import (
    fit_intermediate_rate,
    fit_localization_length,
    initial_decay_rate,
    localization_length_theory,
    stepwise_rates,
    unfold,
)
from .hardware import (
    a_decay,
    b_depth,
    c_crosstalk,
    current_gamma0_estimate,
    epsilon_from_gamma0,
    infer_effective_error,
    load_profile,
    reduction_factor,
    shipped_profiles,
)
from .params import MapParams, build_params
from .quantum import (
    FidelityTrace,
    NoisePlan,
    QuantumState,
    echo_fidelity_trace,
    momentum_distribution,
    qsm_step,
    to_momentum,
    to_position,
)

__version__ = "0.1.0"
