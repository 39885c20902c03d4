"""Wake-up receiver address decoders: cycle-accurate simulation, reliability,
delay, area and power models, and device-level energy budgets."""

__version__ = "0.1.0"

from ._accel import HAS_NUMBA, backend
from .activity import ActivityDelta, ActivityReport
from .decoder import (
    Address,
    Architecture,
    DecoderConfig,
    g_block_eval,
    legacy_step,
    lpsd_step,
    reset,
    run_stream,
    set_effective_length,
    step,
    wake_oracle,
    wake_positions,
)

__all__ = [
    "HAS_NUMBA",
    "backend",
    "ActivityDelta",
    "ActivityReport",
    "Address",
    "Architecture",
    "DecoderConfig",
    "g_block_eval",
    "legacy_step",
    "lpsd_step",
    "reset",
    "run_stream",
    "set_effective_length",
    "step",
    "wake_oracle",
    "wake_positions",
]
