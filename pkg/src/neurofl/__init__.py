"""Feedback-linearization control with an online-adapting Gaussian RBF
disturbance compensator: benchmark plants, a fixed-step closed-loop simulator,
and a configuration-driven experiment CLI."""

__version__ = "0.1.0"

from .controller import BASELINE, COMPENSATED, ControllerState, StepLog, control_step, fl_control, nn_fl_control
from .dynamics import (
    CharPolynomial,
    GainVector,
    StateVector,
    binomial_coefficient,
    binomial_gains,
    filtered_error,
    hurwitz_check,
    tracking_error,
)
from .errors import ConfigError, ControllabilityFault, DivergenceFault
from .plants import (
    DisturbanceSpec,
    PlantModel,
    constant_disturbance,
    disturbance_sample,
    duffing_plant,
    eval_dynamics,
    no_disturbance,
    noise_disturbance,
    pendulum_plant,
    sinusoid_disturbance,
    vanderpol_plant,
)
from .rbf import RbfNetwork, activations, adapt_weights, default_network, gaussian_basis, network_output
from .simulation import (
    Metrics,
    ReferenceSpec,
    Trajectory,
    compute_metrics,
    constant_reference,
    ideal_disturbance_plant,
    reference_at,
    rk4_step,
    run_closed_loop,
    sinusoid_reference,
    sum_of_sinusoids_reference,
)
