from .human_guidance import (GuidanceDistances, GuidanceOutput, guidance_step,
                             select_target, virtual_torques)
from .planner import (EmptyPlan, NoPath, OccupancyGrid, WaypointPlan, astar,
                      plan_from_points, plan_waypoints)
from .pulling import (PullingParams, PullingState, base_gain, lateral_stiffness,
                      pulling_vector, saturate)

__all__ = [
    "GuidanceDistances", "GuidanceOutput", "guidance_step", "select_target",
    "virtual_torques", "EmptyPlan", "NoPath", "OccupancyGrid", "WaypointPlan",
    "astar", "plan_from_points", "plan_waypoints", "PullingParams",
    "PullingState", "base_gain", "lateral_stiffness", "pulling_vector", "saturate",
]
