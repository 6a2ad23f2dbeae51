"""Satellite QKD simulation with pilot-based phase-error correction."""
from .channel import ChannelInstance, LinkParams, Orbit, damage, sample_channel, transmit_count
from .pilot import (
    CorrectionResult,
    PilotBudget,
    PilotString,
    budget_table,
    correct_register,
    correction_attempt,
    correction_chain,
    pilot_requirement,
    success_probability,
)
from .quantum import StateVector, fidelity

__version__ = "0.1.0"
