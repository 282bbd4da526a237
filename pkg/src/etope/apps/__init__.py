"""End-to-end demonstrations: set-based fault detection, robot path
verification, and the emptiness / reduction-heuristic benchmarks."""

from .fault import FaultReport, FaultScenario, LinearSystemModel, fault_detection_sim
from .path import RobotScenario, TubeReport, path_verification_sim, swept_body
from .bench import emptiness_bench, reduction_heuristic_bench

__all__ = [
    "FaultReport",
    "FaultScenario",
    "LinearSystemModel",
    "fault_detection_sim",
    "RobotScenario",
    "TubeReport",
    "path_verification_sim",
    "swept_body",
    "emptiness_bench",
    "reduction_heuristic_bench",
]
