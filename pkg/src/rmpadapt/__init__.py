"""Motion generation from weighted Riemannian motion policies, with online
re-weighting of mission policies from operator corrections."""

__version__ = "0.1.0"

from .adaptation import AdaptationConfig, adaptation_step, policy_likelihoods, policy_scaling
from .geometry import Chart, CylinderChart, Pose, Twist
from .rmp import MotionPolicy, PolicySpec, evaluate, pullback, rmp_sum
from .scenario import Scenario, build_scenario, load_scenario, reference_scenario, validate_config
from .simulation import RobotState, Stepper, compose_motion, integrate_step, run_episode

__all__ = [
    "AdaptationConfig",
    "Chart",
    "CylinderChart",
    "MotionPolicy",
    "PolicySpec",
    "Pose",
    "RobotState",
    "Scenario",
    "Stepper",
    "Twist",
    "adaptation_step",
    "build_scenario",
    "compose_motion",
    "evaluate",
    "integrate_step",
    "load_scenario",
    "policy_likelihoods",
    "policy_scaling",
    "pullback",
    "reference_scenario",
    "rmp_sum",
    "run_episode",
    "validate_config",
    "__version__",
]
