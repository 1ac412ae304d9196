"""Quadcopter normal-form feedback linearization and extended-observer output feedback."""
__version__ = "0.1.0"

from ._jit import JIT_ENABLED
from .control import FeedbackGains, closed_loop_matrix, gains_from_poles, output_feedback, smooth_sat, state_feedback
from .errors import (DegenerateB4Error, EigenvalueConditionError, InvalidPoles, NonFiniteStateError,
                     ParseError, SingularityError, UnknownKeyError, ValidationError)
from .mixer import allocate, channels_from_forces
from .model import PlantState, QuadParams, hover_forces, plant_deriv, thrust_direction
from .observer import ObserverGains, ObserverState, a_matrix, observer_deriv
from .scenario_file import parse_scenario, scenario_hash, serialize_scenario
from .sim import (ControllerMode, Metrics, Scenario, Trajectory, compute_metrics, measurement_noise, rk4_step,
                  run_closed_loop)
from .transform import (ExtendedState, ExtensionState, NormalCoords, Q4B4, Setpoint, b4_at_origin, deviation,
                        deviation_terms, extension_deriv, q4_b4, zeta, zeta4_dot)

