"""Online single-target re-identification with adaptive appearance and threshold models."""

from .core import (
    ContractViolation,
    Decision,
    DecisionKind,
    Detection,
    TargetModel,
    ThresholdModel,
    elementwise_squared_deviation,
    scalar_squared_deviation,
    statistical_distance,
)
from .dema import DemaState, alpha_damp, dema_update, delta_f, delta_lambda
from .engine import EngineConfig, ReidEngine, new_engine
from .simulator import Scenario, ScenarioConfig, ScenarioError, generate, inject_distractor_swap, lab_default

__version__ = "0.1.0"
