from .config import Scenario, ScenarioError, load_scenario, scenario_from_dict
from .human import DriftScript, HumanModel, human_step, subject_profile
from .loop import SimContext, SimState, initialize, run, sim_step
from .metrics import Metrics, SignTest, metrics, sign_test
from .robot import ee_step
from .trace import COLUMNS, EmptyTrace, Trace
from .world import BeamConfig, MovingDisc, World, raycast

__all__ = [
    "Scenario", "ScenarioError", "load_scenario", "scenario_from_dict", "DriftScript",
    "HumanModel", "human_step", "subject_profile", "SimContext", "SimState", "initialize",
    "run", "sim_step", "Metrics", "SignTest", "metrics", "sign_test", "ee_step", "COLUMNS",
    "EmptyTrace", "Trace", "BeamConfig", "MovingDisc", "World", "raycast",
]
