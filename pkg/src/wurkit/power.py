"""Delay, area and power models for the two decoder architectures.

Dynamic power charges a fixed energy to every flip-flop toggle, enable
assertion and gate output transition, plus a clock energy per cycle for each
clock domain (one per LPSD layer, one for the shift register). Static power is a
per-cell leakage times the cell inventory. The absolute scale of both is fitted
to two published anchor points by :func:`calibrate`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import nnls

from .activity import ActivityReport
from .channel import StreamRecipe, gen_test_stream
from .decoder import Address, Architecture, DecoderConfig, run_stream


class CalibrationError(ValueError):
    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals


# ---------------------------------------------------------------------------
# delay


@dataclass(frozen=True)
class TechTiming:
    """Propagation delays in seconds."""

    t_ff_toggle: float = 105e-12
    t_ff_enable: float = 10e-12
    t_gate: float = 4e-12

    def __post_init__(self):
        if min(self.t_ff_toggle, self.t_ff_enable, self.t_gate) <= 0:
            raise ValueError("delays must be positive")
        if not self.t_gate < self.t_ff_enable < self.t_ff_toggle:
            raise ValueError("expected t_gate < t_ff_enable < t_ff_toggle")

    @property
    def t_gblock(self) -> float:
        return 4 * self.t_gate

    def t1(self, n: int) -> float:
        """Comparison-tree settling time of the correlator decoder."""
        return (math.log2(n) + 1) * self.t_gate

    def t2(self, n: int) -> float:
        """Enable and G-block overhead of the sequential decoder."""
        return n * (self.t_ff_enable + 2 * self.t_gate) + self.t_gblock


def max_delay(architecture, n: int, m: int = 0, timing: TechTiming = TechTiming()) -> float:
    """Worst-case time from first address bit to wake output, seconds."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if m < 0:
        raise ValueError("m must be non-negative")
    arch = Architecture(architecture)
    if arch is Architecture.LEGACY:
        if m:
            raise ValueError("the correlator decoder has no mismatch tolerance")
        return n * timing.t_ff_toggle + timing.t1(n)
    return n * timing.t_ff_toggle + timing.t2(n) + m * timing.t_gate


# ---------------------------------------------------------------------------
# area

AREA_TABLE = {
    # (architecture, m) -> {n: um^2}
    (Architecture.LEGACY, 0): {8: 137.88, 16: 279.0, 32: 561.6, 64: 1126.6},
    (Architecture.LPSD, 0): {8: 191.88, 16: 430.92, 32: 909.36, 64: 1866.24},
    (Architecture.LPSD, 1): {8: 528.48, 16: 1156.32, 32: 2366.64, 64: 4925.52},
    (Architecture.LPSD, 2): {8: 794.52, 16: 1736.28, 32: 3551.76, 64: 7390.08},
}


@dataclass(frozen=True)
class AreaEstimate:
    um2: float
    extrapolated: bool


def area_estimate(architecture, n: int, m: int = 0) -> AreaEstimate:
    """Area from the synthesis table.

    Table points are returned as published, lengths between them are linearly
    interpolated and lengths outside 8..64 use the least-squares line through
    the row, flagged as extrapolated.
    """
    key = (Architecture(architecture), m)
    if key not in AREA_TABLE:
        raise ValueError(f"no area data for {key[0].value} with m={m}")
    if n < 1:
        raise ValueError("n must be at least 1")
    row = AREA_TABLE[key]
    ns = np.array(sorted(row), dtype=float)
    vals = np.array([row[k] for k in sorted(row)])
    if n in row:
        return AreaEstimate(row[n], False)
    if ns[0] < n < ns[-1]:
        return AreaEstimate(float(np.interp(n, ns, vals)), False)
    slope, icpt = np.polyfit(ns, vals, 1)
    return AreaEstimate(float(max(slope * n + icpt, 0.0)), True)


def area(architecture, n: int, m: int = 0) -> float:
    return area_estimate(architecture, n, m).um2


# ---------------------------------------------------------------------------
# power


def cell_count(config: DecoderConfig) -> int:
    """Standard cells in the decoder; bypassed stages still count."""
    n, m = config.n, config.m
    if not config.is_lpsd:
        return 3 * n - 1  # flip-flops, XNORs, AND tree
    # layer 0: flip-flop and 4 G-block gates per stage, enable XOR past the first
    cells = 6 * n - 1
    # further layers add a mismatch G-block and a merge OR per stage
    cells += m * (11 * n - 1)
    return cells + (1 if m else 0)  # wake OR across layers


def clock_domains(config: DecoderConfig) -> int:
    return config.layers if config.is_lpsd else 1


@dataclass(frozen=True)
class PowerParams:
    """Event energies in joules and per-cell leakage in watts."""

    e_ff_toggle: float
    e_ff_enable: float
    e_gate_transition: float
    e_clock_cycle: float
    p_static_per_cell: float
    residuals: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if min(self.e_ff_toggle, self.e_ff_enable, self.e_gate_transition, self.e_clock_cycle, self.p_static_per_cell) < 0:
            raise ValueError("power coefficients must be non-negative")

    def to_json(self) -> str:
        doc = asdict(self)
        doc["residuals"] = list(self.residuals)
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PowerParams":
        doc = json.loads(text)
        doc["residuals"] = tuple(doc.get("residuals", ()))
        return cls(**doc)


# relative event weights (toggle, enable, gate, clock); calibrate fits one scale
EVENT_WEIGHTS = (24.0, 2.0, 1.0, 80.0)


@dataclass(frozen=True)
class PowerReport:
    dynamic: float
    static: float

    @property
    def total(self) -> float:
        return self.dynamic + self.static

    @property
    def total_dbm(self) -> float:
        return 10 * math.log10(self.total / 1e-3) if self.total > 0 else -math.inf


def _dynamic_events(activity: ActivityReport, config: DecoderConfig) -> np.ndarray:
    """Per-cycle event counts (toggle, enable, gate, clock).

    Input fan-out events are charged as gate events: each is a gate input
    capacitance switched by the serial input net.
    """
    c = activity.cycles
    return np.array([
        activity.ff_toggles / c,
        activity.ff_enable_events / c,
        (activity.gate_transitions + activity.input_fanout_events) / c,
        float(clock_domains(config)),
    ])


def estimate_power(activity: ActivityReport, bit_rate: float, params: PowerParams, config: DecoderConfig) -> PowerReport:
    if activity.cycles <= 0:
        raise ValueError("activity covers no cycles")
    if bit_rate < 0:
        raise ValueError("bit rate must be non-negative")
    e = np.array([params.e_ff_toggle, params.e_ff_enable, params.e_gate_transition, params.e_clock_cycle])
    dynamic = float(_dynamic_events(activity, config) @ e) * bit_rate
    return PowerReport(dynamic, cell_count(config) * params.p_static_per_cell)


def eta(decoder_power: float, wur_total_power: float) -> float:
    """Decoder share of the whole wake-up receiver's power, percent."""
    if wur_total_power <= 0:
        raise ValueError("receiver power must be positive")
    return 100.0 * decoder_power / wur_total_power


# ---------------------------------------------------------------------------
# reference stream and calibration


def default_address(n: int, seed: int = 0) -> Address:
    rng = np.random.default_rng(np.random.SeedSequence((int(seed), n)))
    return Address(rng.integers(0, 2, n), capacity=max(n, 64))


def mix_activity(config: DecoderConfig, recipe: StreamRecipe = StreamRecipe(), address: Address | None = None,
                 rounds: int = 8) -> ActivityReport:
    """Pooled activity of ``config`` over ``rounds`` planted-copy test streams.

    Round ``k`` uses seed ``recipe.seed + k`` for both the stream and, unless
    ``address`` is given, a random address of its own.
    """
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    cycles, counts = 0, np.zeros(4, dtype=np.int64)
    occ = None
    for k in range(rounds):
        rc = replace(recipe, seed=recipe.seed + k)
        addr = address if address is not None else default_address(config.n, rc.seed)
        act = run_stream(config, addr, gen_test_stream(addr, rc).bits)[1]
        cycles += act.cycles
        counts += [act.ff_toggles, act.ff_enable_events, act.gate_transitions, act.input_fanout_events]
        occ = act.occupancy if occ is None else occ + act.occupancy
    return ActivityReport.from_counts(cycles, counts, occ)


@dataclass(frozen=True)
class CalibrationTarget:
    config: DecoderConfig
    bit_rate: float
    power: float
    recipe: StreamRecipe = StreamRecipe()


DEFAULT_TARGETS = (
    CalibrationTarget(DecoderConfig(64), 1e6, 68e-9),
    CalibrationTarget(DecoderConfig(32), 1e3, 2e-9),
)


def calibrate(targets=DEFAULT_TARGETS, weights=EVENT_WEIGHTS, rtol: float = 0.05) -> PowerParams:
    """Fit a dynamic energy scale and a per-cell leakage to anchor powers.

    The event energies keep the ratios in ``weights``; the fit minimises relative
    error with both unknowns constrained non-negative. Raises
    :class:`CalibrationError` when fewer than two independent anchors are given
    or when any anchor misses by more than ``rtol``.
    """
    targets = list(targets)
    if len(targets) < 2:
        raise CalibrationError("need at least two anchors to fit dynamic and static terms")
    w = np.asarray(weights, dtype=float)
    rows, rhs = [], []
    for tg in targets:
        act = mix_activity(tg.config, tg.recipe)
        dyn = float(_dynamic_events(act, tg.config) @ w) * tg.bit_rate
        rows.append([dyn / tg.power, cell_count(tg.config) / tg.power])
        rhs.append(1.0)
    a = np.array(rows)
    if np.linalg.matrix_rank(a) < 2:
        raise CalibrationError("anchors do not separate dynamic from static power")
    (scale, leak), _ = nnls(a, np.array(rhs))
    resid = tuple(float(r) for r in a @ np.array([scale, leak]) - 1.0)
    unconstrained = np.linalg.lstsq(a, np.array(rhs), rcond=None)[0]
    if (unconstrained < 0).any() or max(abs(r) for r in resid) > rtol:
        raise CalibrationError(f"anchors cannot be met with non-negative coefficients; relative residuals {resid}", resid)
    e = w * scale
    return PowerParams(*(float(v) for v in e), float(leak), residuals=resid)


# calibrate() on DEFAULT_TARGETS, frozen so library users need not rerun the fit
DEFAULT_PARAMS = PowerParams(
    e_ff_toggle=9.538642470789474e-15,
    e_ff_enable=7.948868725657895e-16,
    e_gate_transition=3.9744343628289474e-16,
    e_clock_cycle=3.179547490263158e-14,
    p_static_per_cell=1.0170119664812154e-11,
)


def sweep_rows(archs, ns, ms, bit_rates, params: PowerParams, timing: TechTiming = TechTiming(), recipe: StreamRecipe = StreamRecipe()):
    """Cross product of configurations and bit rates as CSV-ready dicts."""
    rows = []
    for arch in archs:
        arch = Architecture(arch)
        for n in ns:
            for m in ms:
                if arch is Architecture.LEGACY and m:
                    continue
                cfg = DecoderConfig(n, m, arch, capacity=max(n, 64))
                act = mix_activity(cfg, recipe)
                ar = area_estimate(arch, n, m).um2 if (arch, m) in AREA_TABLE else math.nan
                for rate in bit_rates:
                    rep = estimate_power(act, rate, params, cfg)
                    rows.append({
                        "arch": arch.value, "n": n, "m": m, "bit_rate_hz": rate,
                        "dynamic_w": rep.dynamic, "static_w": rep.static, "total_w": rep.total,
                        "total_dbm": rep.total_dbm, "delay_s": max_delay(arch, n, m, timing), "area_um2": ar,
                    })
    return rows


POWER_COLUMNS = ("arch", "n", "m", "bit_rate_hz", "dynamic_w", "static_w", "total_w", "total_dbm", "delay_s", "area_um2")
