"""Power allocation and transmitter switching for broadcasting from several
energy-harvesting transmitters."""

from .allocation import AllocationPolicy, AllocationSchedule, allocate, allocate_cutoff, proportional_split
from .model import (
    ChannelSpec,
    EnergyArrival,
    ReceiverDemand,
    Scenario,
    Timeline,
    TransmitterProfile,
    ValidationError,
    merge_arrivals,
    validate,
)
from .optimal import OptimalPlan, PowerStaircase, extend_schedule, min_completion_time, staircase
from .rates import NoiseLadder, cutoff_split, order_receivers, rates_of_split, split_from_leading_rate
from .scenarios import GenParams, generate, baseline_params
from .switching import simulate_switching

__version__ = "0.1.0"
