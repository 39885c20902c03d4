"""Cycle-accurate models of the two wake-up address decoders.

The *legacy* decoder keeps the last ``n`` received bits in a shift register and
compares all of them against the stored address through an XNOR/AND tree every
cycle. The *LPSD* (low-power sequence decoder) is a chain of G-block/flip-flop
stages: flip-flop ``i`` is set when the most recent ``i + 1`` bits match the
first ``i + 1`` address bits, so only stages carrying a live partial match do
any work. Redundant LPSD layers tolerate ``m`` mismatches: a partial match that
hits a wrong bit in layer ``j`` continues at the same stage of layer ``j + 1``.

Two views of the same machines are provided:

* :func:`reset`, :func:`lpsd_step` and :func:`legacy_step` advance an explicit
  state object one clock at a time, using integer bit masks (bit ``i`` is stage
  ``i``), so any address length works;
* :func:`run_stream` pushes a whole stream through the array kernels in
  :mod:`wurkit.kernels`.

Both produce identical wake traces and activity counts. :func:`wake_oracle` is
an independent brute-force reference used to check them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .activity import ActivityDelta, ActivityReport

DEFAULT_CAPACITY = 64
DEFAULT_LAYER_CAP = 8


class Architecture(str, enum.Enum):
    LEGACY = "legacy"
    LPSD = "lpsd"


@dataclass(frozen=True)
class Address:
    """A stored wake-up address, ``bits[0]`` being the first bit on air."""

    bits: tuple
    capacity: int = DEFAULT_CAPACITY

    def __post_init__(self):
        bits = tuple(int(b) for b in np.asarray(self.bits).ravel())
        if any(b not in (0, 1) for b in bits):
            raise ValueError("address bits must be 0 or 1")
        if not 1 <= len(bits) <= self.capacity:
            raise ValueError(f"address length {len(bits)} outside 1..{self.capacity}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, text: str, capacity: int = DEFAULT_CAPACITY) -> "Address":
        from .bits import parse_bits

        return cls(tuple(parse_bits(text)), capacity)

    @property
    def n(self) -> int:
        return len(self.bits)

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.uint8)

    def suffix(self, length: int) -> tuple:
        return self.bits[self.n - length:]

    def __str__(self):
        return "".join(map(str, self.bits))


@dataclass(frozen=True)
class DecoderConfig:
    """Decoder geometry.

    ``effective_length`` (``l``) keeps only the last ``l`` LPSD stages functional;
    the leading ``n - l`` flip-flops are held at 1 and the decoder then wakes on
    the last ``l`` address bits.
    """

    n: int
    m: int = 0
    architecture: Architecture = Architecture.LPSD
    effective_length: int | None = None
    layer_cap: int = DEFAULT_LAYER_CAP
    capacity: int = DEFAULT_CAPACITY

    def __post_init__(self):
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        if self.effective_length is None:
            object.__setattr__(self, "effective_length", self.n)
        if not 1 <= self.n <= self.capacity:
            raise ValueError(f"n={self.n} outside 1..{self.capacity}")
        if self.m < 0:
            raise ValueError("m must be non-negative")
        if not 1 <= self.effective_length <= self.n:
            raise ValueError(f"effective length {self.effective_length} outside 1..{self.n}")
        if self.architecture is Architecture.LEGACY:
            if self.m != 0:
                raise ValueError("legacy decoder has no mismatch tolerance (m must be 0)")
            if self.effective_length != self.n:
                raise ValueError("legacy decoder cannot shorten its address")
        elif self.m + 1 > self.layer_cap:
            raise ValueError(f"m={self.m} needs {self.m + 1} layers, cap is {self.layer_cap}")

    @property
    def layers(self) -> int:
        return 1 if self.architecture is Architecture.LEGACY else self.m + 1

    @property
    def bypassed(self) -> int:
        return self.n - self.effective_length

    @property
    def is_lpsd(self) -> bool:
        return self.architecture is Architecture.LPSD


@dataclass(frozen=True)
class StepOutcome:
    wake: bool
    delta: ActivityDelta


def set_effective_length(config: DecoderConfig, length: int) -> DecoderConfig:
    if not config.is_lpsd:
        raise ValueError("only the LPSD supports a shortened address")
    if not 1 <= length <= config.n:
        raise ValueError(f"effective length {length} outside 1..{config.n}")
    return replace(config, effective_length=length)


def g_block_eval(a: int, b: int, c: int) -> int:
    """G-block output: 1 when the previous stage is set and the input bit matches."""
    return int(bool(c) and a == b)


# ---------------------------------------------------------------------------
# stepwise state machines


@dataclass
class LpsdState:
    config: DecoderConfig
    layers: list
    cycle: int = 0
    _nets: list = field(default=None, repr=False)
    _x: int = 0
    _wake: int = 0

    @property
    def q(self) -> np.ndarray:
        """Flip-flop outputs ``Q[j][i]``; bypassed stages read as 1."""
        n, b = self.config.n, self.config.bypassed
        out = np.zeros((len(self.layers), n), dtype=np.uint8)
        for j, mask in enumerate(self.layers):
            for i in range(n):
                out[j, i] = 1 if i < b else (mask >> i) & 1
        return out


@dataclass
class LegacyState:
    config: DecoderConfig
    register: int = 0
    cycle: int = 0
    _xnor: int = 0
    _tree: list = field(default=None, repr=False)

    @property
    def shift_reg(self) -> np.ndarray:
        """``Q_0..Q_{n-1}``; ``Q_0`` is the newest bit."""
        return np.array([(self.register >> i) & 1 for i in range(self.config.n)], dtype=np.uint8)

    @property
    def xnor_out(self) -> np.ndarray:
        return np.array([(self._xnor >> i) & 1 for i in range(self.config.n)], dtype=np.uint8)


def _masks(config: DecoderConfig, address: Address):
    n, b = config.n, config.bypassed
    full = (1 << n) - 1
    func = full & ~((1 << b) - 1)
    amask = sum(bit << i for i, bit in enumerate(address.bits))
    return func, 1 << b, amask


def _lpsd_nets(config, address, layers, x):
    func, first, amask = _masks(config, address)
    xm = func if x else 0
    nets, nxt = [], []
    for j, q in enumerate(layers):
        cs = ((q << 1) & func) | (first if j == 0 else 0)
        g1 = xm & cs
        g2 = amask & cs
        g3 = ~(g1 ^ g2) & func
        f = cs & g3
        if j == 0:
            d = f
            layer = [g1, g2, g3, f]
        else:
            cm = ((layers[j - 1] << 1) & func) | (first if j == 1 else 0)
            h1 = xm & cm
            h2 = amask & cm
            h3 = h1 ^ h2
            fm = cm & h3
            d = f | fm
            layer = [g1, g2, g3, f, h1, h2, h3, fm, d]
        layer.append((d ^ q) & func & ~first)
        nets.append(layer)
        nxt.append(d)
    return nets, nxt


def _and_tree(xnor: int, n: int) -> list:
    level = [(xnor >> i) & 1 for i in range(n)]
    nodes = []
    while len(level) > 1:
        gated = [level[2 * k] & level[2 * k + 1] for k in range(len(level) // 2)]
        nodes.extend(gated)
        level = gated + ([level[-1]] if len(level) % 2 else [])
    return nodes, level[0]


def _check(address: Address, config: DecoderConfig):
    if address.n != config.n:
        raise ValueError(f"address length {address.n} does not match n={config.n}")


def reset(config: DecoderConfig):
    """Fresh decoder state: every flip-flop cleared, bypassed stages forced to 1."""
    if config.is_lpsd:
        return LpsdState(config, [0] * config.layers)
    return LegacyState(config)


def lpsd_step(state: LpsdState, input_bit: int, address: Address) -> StepOutcome:
    """Clock the LPSD once with ``input_bit``; mutates ``state``."""
    config = state.config
    x = int(input_bit)
    if x not in (0, 1):
        raise ValueError("input bit must be 0 or 1")
    _check(address, config)
    if state._nets is None:
        # net history before the first edge: reset contents, input low
        state._nets, _ = _lpsd_nets(config, address, state.layers, 0)
    nets, nxt = _lpsd_nets(config, address, state.layers, x)

    gates = 0
    fanout = kernels.lpsd_fanout(config.layers, config.effective_length) if x != state._x else 0
    for j, layer in enumerate(nets):
        for cur, prev in zip(layer, state._nets[j]):
            gates += (cur ^ prev).bit_count()

    _, first, _ = _masks(config, address)
    toggles = enables = 0
    wake = 0
    top = 1 << (config.n - 1)
    for j, (q, d) in enumerate(zip(state.layers, nxt)):
        flips = q ^ d
        toggles += flips.bit_count()
        enables += 1 + (flips & ~first).bit_count()
        if d & top:
            wake = 1
    if config.layers > 1 and wake != state._wake:
        gates += 1

    state.layers = nxt
    state._nets = nets
    state._x = x
    state._wake = wake
    state.cycle += 1
    return StepOutcome(bool(wake), ActivityDelta(toggles, enables, gates, fanout))


def legacy_step(state: LegacyState, input_bit: int, address: Address) -> StepOutcome:
    """Shift ``input_bit`` into the legacy decoder and re-evaluate the comparator."""
    n = state.config.n
    x = int(input_bit)
    if x not in (0, 1):
        raise ValueError("input bit must be 0 or 1")
    _check(address, state.config)
    full = (1 << n) - 1
    arev = sum(address.bits[n - 1 - i] << i for i in range(n))
    if state._tree is None:
        state._xnor = ~(state.register ^ arev) & full
        state._tree, _ = _and_tree(state._xnor, n)
    reg = ((state.register << 1) | x) & full
    toggles = (reg ^ state.register).bit_count()

    xnor = ~(reg ^ arev) & full
    gates = (xnor ^ state._xnor).bit_count()
    tree, wake = _and_tree(xnor, n)
    gates += sum(a != b for a, b in zip(tree, state._tree))

    state.register = reg
    state._xnor = xnor
    state._tree = tree
    state.cycle += 1
    # no wake until the register has been filled with received bits
    return StepOutcome(bool(wake) and state.cycle >= n, ActivityDelta(toggles, n, gates))


def step(state, input_bit: int, address: Address) -> StepOutcome:
    if isinstance(state, LpsdState):
        return lpsd_step(state, input_bit, address)
    return legacy_step(state, input_bit, address)


# ---------------------------------------------------------------------------
# whole-stream drivers


def _as_stream(stream) -> np.ndarray:
    if isinstance(stream, str):
        from .bits import parse_bits

        return parse_bits(stream)
    arr = np.asarray(stream, dtype=np.uint8).ravel()
    if arr.size and arr.max() > 1:
        raise ValueError("stream bits must be 0 or 1")
    return arr


def run_stream(config: DecoderConfig, address: Address, stream, use_numba=None):
    """Run a decoder from reset over ``stream``.

    Returns ``(wake_trace, activity)`` where ``wake_trace[t]`` is the wake output
    after consuming ``stream[t]``.
    """
    _check(address, config)
    bits = _as_stream(stream)
    if bits.size == 0:
        raise ValueError("stream is empty")
    if config.is_lpsd:
        wake, counts, occ = kernels.lpsd_run(bits, address.as_array(), config.m, config.bypassed, use_numba)
    else:
        wake, counts, occ = kernels.legacy_run(bits, address.as_array(), use_numba)
    return wake, ActivityReport.from_counts(bits.size, counts, occ)


def wake_positions(trace) -> np.ndarray:
    return np.flatnonzero(np.asarray(trace))


def wake_oracle(address: Address, stream, m: int = 0, length: int | None = None) -> np.ndarray:
    """Brute-force reference: 1 wherever the trailing ``length`` bits are within
    Hamming distance ``m`` of the last ``length`` address bits."""
    bits = _as_stream(stream)
    length = address.n if length is None else length
    if not 1 <= length <= address.n:
        raise ValueError(f"length {length} outside 1..{address.n}")
    out = np.zeros(bits.size, dtype=np.uint8)
    if bits.size < length:
        return out
    target = np.array(address.suffix(length), dtype=np.uint8)
    windows = np.lib.stride_tricks.sliding_window_view(bits, length)
    dist = (windows != target).sum(axis=1)
    out[length - 1:] = dist <= m
    return out
