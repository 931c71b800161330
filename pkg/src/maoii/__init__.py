"""Whittle-index scheduling for remote tracking of Markov sources.

Layers, bottom up:

* :mod:`maoii.sources` - validated source/channel parameters, belief updates;
* :mod:`maoii.metrics` - age ladders, the incorrectness-age pmf, transitions;
* :mod:`maoii.policy_eval` - exact threshold-policy averages plus the
  truncated-series oracle that arbitrates every closed form;
* :mod:`maoii.whittle` - index closed forms, the intersection oracle,
  validated index tables;
* :mod:`maoii.mdp` - an independent average-cost solver that re-derives
  threshold structure, indexability and index values numerically;
* :mod:`maoii.sim` - the multi-user Monte Carlo engine (compiled kernel
  with pure-Python fallback);
* :mod:`maoii.cli` - scenario runner, verification reports, table export.
"""

__version__ = "0.1.0"

from maoii.metrics import Metric
from maoii.sources import Belief, SourceParams, belief_update, make_params, pi_k

__all__ = [
    "Belief",
    "Metric",
    "SourceParams",
    "belief_update",
    "make_params",
    "pi_k",
    "__version__",
]
