"""Switching-activity records shared by the decoder and the power model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ActivityDelta:
    """Events registered during one clock cycle."""

    ff_toggles: int = 0
    ff_enable_events: int = 0
    gate_transitions: int = 0
    input_fanout_events: int = 0


@dataclass
class ActivityReport:
    """Event totals over a run of ``cycles`` clock cycles.

    ``gate_transitions`` counts gate output changes only. Switching of the serial
    input net is kept apart in ``input_fanout_events``, one per driven gate input.

    ``occupancy[j, i]`` counts the cycles in which flip-flop ``i`` of layer ``j``
    held a 1 (bypassed stages count every cycle). Legacy decoders report a single
    row, the shift register.
    """

    cycles: int
    ff_toggles: int
    ff_enable_events: int
    gate_transitions: int
    input_fanout_events: int
    occupancy: np.ndarray = field(repr=False)

    @classmethod
    def from_counts(cls, cycles, counts, occupancy) -> "ActivityReport":
        return cls(
            cycles=int(cycles),
            ff_toggles=int(counts[0]),
            ff_enable_events=int(counts[1]),
            gate_transitions=int(counts[2]),
            input_fanout_events=int(counts[3]) if len(counts) > 3 else 0,
            occupancy=np.asarray(occupancy, dtype=np.int64),
        )

    def occupancy_fraction(self, layer: int = 0) -> np.ndarray:
        return self.occupancy[layer] / self.cycles

    def per_cycle(self) -> dict:
        c = self.cycles
        return {
            "ff_toggles": self.ff_toggles / c,
            "ff_enable_events": self.ff_enable_events / c,
            "gate_transitions": self.gate_transitions / c,
            "input_fanout_events": self.input_fanout_events / c,
        }
