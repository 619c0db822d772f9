from .scenario import Docker, Obstacle, Scenario, ScenarioSampler, Tunnel, TASK_KINDS
from .demos import synth_demo
from .scoring import check_collision, check_success, FAILURE_KINDS
from .runner import (
    BenchConfig,
    DEMO_COUNTS,
    METHOD_NAMES,
    SuccessReport,
    build_training_set,
    make_method,
    run_benchmark,
)
from .svg import emit_svg, render_svg

__all__ = [
    "Docker",
    "Obstacle",
    "Scenario",
    "ScenarioSampler",
    "Tunnel",
    "TASK_KINDS",
    "synth_demo",
    "check_collision",
    "check_success",
    "FAILURE_KINDS",
    "BenchConfig",
    "DEMO_COUNTS",
    "METHOD_NAMES",
    "SuccessReport",
    "build_training_set",
    "make_method",
    "run_benchmark",
    "emit_svg",
    "render_svg",
]
