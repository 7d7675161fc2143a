"""Sliding-mode shape servoing of deformable objects under asymmetric input saturation.

The package simulates a kinematic 6-joint robot deforming an elastic object
seen by a camera. A sliding-mode velocity controller drives shape features to
a target while the deformation Jacobian is estimated online, commands pass
through a smooth asymmetric saturation, and a Lyapunov monitor audits the
closed loop.
"""
from .config import ConfigError, ScenarioConfig, load_preset, parse_config
from .controller import (ControllerGains, ControllerState, adapt_eta1, control_law,
                         deformation_error, update_surface1)
from .estimator import (EstimatorGains, EstimatorState, adapt_eta2, damped_pinv, djm_update,
                        feature_rates, update_surface2)
from .features import Centerline, FeatureMap, extract_features
from .monitor import check_decrease, lyapunov, uub_bounds
from .plant import ChainPlant, EquilibriumError, LinearPlant, PlantState
from .saturation import DELTA, SaturationLimits, SatOutput, erf, gauss_sat, hard_sat, tanh_gap
from .simulation import SimulationResult, run_scenario, saturation_demo

__version__ = "0.1.0"
