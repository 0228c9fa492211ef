"""Rolling spherical robot: reduced dynamics, geometric feedback laws,
controllability certificates and a deterministic scenario simulator."""

from .controllability import (
    fiber_fields,
    fiber_rank,
    fiber_rank_report,
    input_fields,
    lie_bracket_numeric,
    local_rank,
    local_rank_report,
    mechanical_connection,
)
from .control import (
    orientation_tracking_law,
    position_tracking_law,
    reduced_attitude_law,
    torque_transform,
    torque_transform_inverse,
)
from .geometry import (
    DesiredFrame,
    Gains,
    connection_product,
    error_norm,
    feedforward,
    grad_trace_potential,
    hessian_trace_potential,
    position_gradient_term,
    position_potential,
    trace_potential,
    tracking_energy,
    velocity_error,
)
from .liegroup import elem_rot, exp_so3, hat, log_so3, project_so3, vee
from .model import (
    MomentumState,
    RobotParams,
    RobotState,
    advection_rate,
    body_momentum,
    dynamics_momentum_form,
    dynamics_velocity_form,
    inertial_momentum,
    lock_inertia,
    rolling_velocity,
)
from .sim import (
    CircleReference,
    LineReference,
    OrientationConstant,
    OrientationSinusoid,
    RestReference,
    ScenarioConfig,
    TrajectoryRecord,
    diagnostics,
    orientation_sinusoid,
    planar_curve,
    rk4_step,
    run_batch,
    run_scenario,
)

__version__ = "0.1.0"
