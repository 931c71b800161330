"""Multi-user scheduling simulator.

Hot per-slot loops live in a compiled extension (``maoii.sim._kernel``)
with a pure-Python twin (``_kernel_py``) selected at import/run time; see
:func:`maoii.sim.engine.load_kernel`.
"""

from maoii.sim.config import ClassSpec, SimAudit, SimConfig, SimResult
from maoii.sim.engine import (
    UserRuntime,
    empirical_step,
    ground_truth_step,
    load_kernel,
    policy_index,
    run,
    select_top_m,
)

__all__ = [
    "ClassSpec",
    "SimAudit",
    "SimConfig",
    "SimResult",
    "UserRuntime",
    "empirical_step",
    "ground_truth_step",
    "load_kernel",
    "policy_index",
    "run",
    "select_top_m",
]
