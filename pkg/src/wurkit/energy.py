"""Average power of an IoT device for uplink and downlink procedures, with and
without a wake-up receiver.

Every procedure is a list of phases, each a power level held for a duration and
repeated at some rate. Average power is a baseline plus the sum of
``rate * power * duration`` over phases. Uplink phases repeat ``1 / p_s`` times
per report on average, since a failed attempt is redone from synchronisation
through acknowledgement.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field, fields


class InfeasibleError(ValueError):
    """Phases would occupy more than the whole timeline."""


class Scenario(str, enum.Enum):
    DL = "DL"
    DL_WUR = "DL_WUR"
    UL = "UL"
    UL_WUR = "UL_WUR"
    UL_GFA_WUR = "UL_GFA_WUR"

    @property
    def uses_wur(self) -> bool:
        return self.value.endswith("WUR")


# sweep pairs: (without WuR, with WuR)
PAIRS = {
    "DL": (Scenario.DL, Scenario.DL_WUR),
    "UL": (Scenario.UL, Scenario.UL_WUR),
    "GFA": (Scenario.UL, Scenario.UL_GFA_WUR),
}


@dataclass(frozen=True)
class PowerProfile:
    """Radio power levels, watts."""

    p_tx: float = 80e-3
    p_listen: float = 60e-3
    p_active: float = 40e-3
    p_sleep: float = 20e-6
    p_wur: float = 1e-6

    def __post_init__(self):
        if min(self.p_sleep, self.p_wur) < 0:
            raise ValueError("powers must be non-negative")
        if not self.p_tx >= self.p_listen >= self.p_active > self.p_sleep:
            raise ValueError("expected p_tx >= p_listen >= p_active > p_sleep")


@dataclass(frozen=True)
class TimingProfile:
    """Phase durations in seconds and link rates in bit/s."""

    t_ra: float = 10e-3
    t_ra_resp: float = 20e-3
    t_check: float = 10e-3
    t_sync: float = 5e-3
    t_ack: float = 1e-3
    r_ul: float = 1e3
    r_dl: float = 10e3
    r_wur: float = 100e3
    n_addr: int = 64
    # control-channel search before random access; None means t_check
    t_ra_resp_search: float | None = None

    def __post_init__(self):
        vals = [self.t_ra, self.t_ra_resp, self.t_check, self.t_sync, self.t_ack, self.r_ul, self.r_dl, self.r_wur, self.n_addr]
        if min(vals) <= 0:
            raise ValueError("timing values must be positive")
        if self.t_ra_resp_search is not None and self.t_ra_resp_search < 0:
            raise ValueError("search time must be non-negative")

    @property
    def t_search(self) -> float:
        return self.t_check if self.t_ra_resp_search is None else self.t_ra_resp_search

    @property
    def t_wake_signal(self) -> float:
        return self.n_addr / self.r_wur


@dataclass(frozen=True)
class TrafficProfile:
    paging_rate: float = 0.1
    report_rate: float = 0.01
    p_s: float = 1.0
    payload_ul: int = 1000
    payload_dl: int = 1000
    check_period: float = 1.0

    def __post_init__(self):
        if self.paging_rate < 0 or self.report_rate < 0:
            raise ValueError("rates must be non-negative")
        if not 0 < self.p_s <= 1:
            raise ValueError("p_s must lie in (0, 1]")
        if self.payload_ul < 0 or self.payload_dl < 0:
            raise ValueError("payloads must be non-negative")
        if self.check_period <= 0:
            raise ValueError("check period must be positive")


@dataclass(frozen=True)
class Phase:
    name: str
    power: float
    duration: float
    rate: float

    @property
    def energy(self) -> float:
        """Joules per occurrence."""
        return self.power * self.duration


@dataclass(frozen=True)
class EnergyBreakdown:
    scenario: Scenario
    baseline: float
    phases: tuple = ()

    @property
    def avg_power(self) -> float:
        return self.baseline + math.fsum(p.rate * p.energy for p in self.phases)

    @property
    def duty_cycle(self) -> float:
        return math.fsum(p.rate * p.duration for p in self.phases)

    def energy_per_event(self) -> dict:
        """Energy of each phase, joules per occurrence, summed by name."""
        out: dict = {}
        for p in self.phases:
            out[p.name] = out.get(p.name, 0.0) + p.energy
        return out


def _phases(scenario, pw: PowerProfile, tm: TimingProfile, tr: TrafficProfile):
    page, attempts = tr.paging_rate, tr.report_rate / tr.p_s
    wake = ("wake_signal", pw.p_listen, tm.t_wake_signal)
    dl_body = [
        ("sync", pw.p_active, tm.t_sync),
        ("data_rx", pw.p_listen, tr.payload_dl / tm.r_dl),
        ("ack", pw.p_tx, tm.t_ack),
    ]
    if scenario is Scenario.DL:
        return pw.p_sleep, [("check", pw.p_listen, tm.t_check, 1.0 / tr.check_period)] + [(*b, page) for b in dl_body]
    if scenario is Scenario.DL_WUR:
        return pw.p_sleep + pw.p_wur, [(*b, page) for b in [wake] + dl_body]
    head = [("sync", pw.p_active, tm.t_sync)]
    tail = [("data_tx", pw.p_tx, tr.payload_ul / tm.r_ul), ("ack", pw.p_listen, tm.t_ack)]
    if scenario is Scenario.UL:
        body = head + [
            ("search", pw.p_listen, tm.t_search),
            ("ra", pw.p_tx, tm.t_ra),
            ("ra_resp", pw.p_listen, tm.t_ra_resp),
        ] + tail
        return pw.p_sleep, [(*b, attempts) for b in body]
    if scenario is Scenario.UL_WUR:
        body = head + [
            ("search", pw.p_listen, tm.t_search),
            ("ra", pw.p_tx, tm.t_ra),
            ("ra_wait", pw.p_sleep + pw.p_wur, tm.t_ra_resp),
            wake,
        ] + tail
        return pw.p_sleep + pw.p_wur, [(*b, attempts) for b in body]
    body = head + [tail[0], wake, tail[1]]
    return pw.p_sleep + pw.p_wur, [(*b, attempts) for b in body]


def avg_power(scenario, power: PowerProfile = PowerProfile(), timing: TimingProfile = TimingProfile(),
              traffic: TrafficProfile = TrafficProfile()) -> EnergyBreakdown:
    scenario = Scenario(scenario)
    if scenario is Scenario.DL and traffic.paging_rate > 1.0 / traffic.check_period:
        raise InfeasibleError(f"paging rate {traffic.paging_rate} Hz exceeds the check rate {1.0 / traffic.check_period} Hz")
    baseline, raw = _phases(scenario, power, timing, traffic)
    out = EnergyBreakdown(scenario, baseline, tuple(Phase(*p) for p in raw))
    if out.duty_cycle > 1.0:
        raise InfeasibleError(f"{scenario.value} phases occupy {out.duty_cycle:.3f} of the timeline")
    return out


def total_power(power: PowerProfile = PowerProfile(), timing: TimingProfile = TimingProfile(),
                traffic: TrafficProfile = TrafficProfile(), uplink_with: Scenario = Scenario.UL_WUR):
    """Combined uplink and downlink power as ``(with_wur, without_wur)``.

    Each scenario's baseline is included once.
    """
    dl_w, ul_w = avg_power(Scenario.DL_WUR, power, timing, traffic), avg_power(uplink_with, power, timing, traffic)
    dl, ul = avg_power(Scenario.DL, power, timing, traffic), avg_power(Scenario.UL, power, timing, traffic)
    if dl_w.duty_cycle + ul_w.duty_cycle > 1 or dl.duty_cycle + ul.duty_cycle > 1:
        raise InfeasibleError("uplink and downlink together exceed the timeline")
    with_wur = dl_w.avg_power + ul_w.avg_power - ul_w.baseline
    without = dl.avg_power + ul.avg_power - ul.baseline
    return with_wur, without


@dataclass(frozen=True)
class SweepRow:
    scenario: str
    variable: str
    rate_hz: float
    power_without_w: float
    power_with_w: float
    feasible: bool = True

    @property
    def gap_w(self) -> float:
        return self.power_without_w - self.power_with_w


SWEEP_COLUMNS = ("scenario", "variable", "rate_hz", "power_without_w", "power_with_w", "gap_w")


def sweep(pair: str, variable: str, rates, power: PowerProfile = PowerProfile(), timing: TimingProfile = TimingProfile(),
          traffic: TrafficProfile = TrafficProfile()) -> list:
    """One row per rate for a (without, with) scenario pair.

    Rows whose phases do not fit in time are kept with ``feasible=False`` and
    NaN powers.
    """
    if pair not in PAIRS:
        raise ValueError(f"unknown pair {pair!r}; choose from {sorted(PAIRS)}")
    if variable not in ("paging_rate", "report_rate"):
        raise ValueError("variable must be paging_rate or report_rate")
    rates = [float(r) for r in rates]
    if any(b <= a for a, b in zip(rates, rates[1:])):
        raise ValueError("rates must be strictly increasing")
    without_s, with_s = PAIRS[pair]
    rows = []
    for r in rates:
        tr = TrafficProfile(**{**asdict(traffic), variable: r})
        try:
            p0 = avg_power(without_s, power, timing, tr).avg_power
            p1 = avg_power(with_s, power, timing, tr).avg_power
            rows.append(SweepRow(pair, variable, r, p0, p1))
        except InfeasibleError:
            rows.append(SweepRow(pair, variable, r, math.nan, math.nan, feasible=False))
    return rows


@dataclass(frozen=True)
class Profiles:
    power: PowerProfile = field(default_factory=PowerProfile)
    timing: TimingProfile = field(default_factory=TimingProfile)
    traffic: TrafficProfile = field(default_factory=TrafficProfile)

    def to_dict(self) -> dict:
        return {"power": asdict(self.power), "timing": asdict(self.timing), "traffic": asdict(self.traffic)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "Profiles":
        parts = {}
        for key, typ in (("power", PowerProfile), ("timing", TimingProfile), ("traffic", TrafficProfile)):
            sub = doc.get(key, {})
            known = {f.name for f in fields(typ)}
            unknown = set(sub) - known
            if unknown:
                raise ValueError(f"unknown {key} fields: {sorted(unknown)}")
            parts[key] = typ(**sub)
        extra = set(doc) - set(parts)
        if extra:
            raise ValueError(f"unknown profile sections: {sorted(extra)}")
        return cls(**parts)

    @classmethod
    def from_json(cls, text: str) -> "Profiles":
        return cls.from_dict(json.loads(text))
