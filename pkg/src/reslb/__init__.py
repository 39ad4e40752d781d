"""Energy-aware load balancing for renewable-powered small cells.

Quick use::

    from reslb import load_scenario, run, policy_comparison
    sc = load_scenario("scenario.json")
    res = run(sc, seed=0, policy="EPRLB")
"""

from .engine import RunResult, run, run_batch
from .errors import (DomainError, IoError, PairingError, ParseError, RangeError, SchemaError,
                     SimError, TargetUnavailable)
from .metrics import aggregated_prb_index, emit, mean_soc_trace, policy_comparison
from .scenario import POLICIES, Scenario, default_scenario, load_scenario, validate_scenario

__version__ = "0.1.0"
