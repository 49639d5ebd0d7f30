"""Simulator and strategy library for threshold-signature oracle networks
that fetch fast-changing data."""

from .aggregation import AggregationOutcome, STRATEGIES
from .consensus import ConsensusOutcome, task_benefit, threshold_consensus
from .engine import CampaignResult, SimConfig, TaskRecord, run_campaign, run_task
from .latency import LatencyModel
from .signal import DataValue, SignalModel

__version__ = "0.1.0"

__all__ = [
    "AggregationOutcome",
    "CampaignResult",
    "ConsensusOutcome",
    "DataValue",
    "LatencyModel",
    "STRATEGIES",
    "SignalModel",
    "SimConfig",
    "TaskRecord",
    "run_campaign",
    "run_task",
    "task_benefit",
    "threshold_consensus",
]
