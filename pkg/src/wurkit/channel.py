"""Channel reliability: bit-error model, detection probabilities, Monte Carlo
checks, test-stream synthesis and minimum-distance address codebooks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import kernels
from .decoder import Address, DecoderConfig

# trials per RNG block; block k draws from SeedSequence((seed, k))
MC_BLOCK = 4096


class ChannelError(ValueError):
    pass


class CapacityError(ValueError):
    """Requested codebook cannot be built; ``bound`` names the limit that binds."""

    def __init__(self, message: str, bound: str):
        super().__init__(message)
        self.bound = bound


def ber(c: float, snr: float) -> float:
    """Bit-error rate ``c * exp(-snr)`` of an OOK envelope detector in AWGN."""
    if c < 0 or snr < 0:
        raise ChannelError("c and snr must be non-negative")
    p = c * math.exp(-snr)
    if p > 1:
        raise ChannelError(f"c={c}, snr={snr} give a bit-error rate {p:.4g} > 1")
    return p


@dataclass(frozen=True)
class ChannelModel:
    c: float
    snr: float

    @property
    def p_b(self) -> float:
        return ber(self.c, self.snr)


def _check_prob(p_b):
    if not 0.0 <= p_b <= 1.0:
        raise ChannelError(f"p_b={p_b} is not a probability")


def p_conv(n: int, p_b: float) -> float:
    """Probability an exact-match decoder sees all ``n`` address bits intact."""
    _check_prob(p_b)
    return (1.0 - p_b) ** n


def p_lpsd(n: int, m: int, p_b: float) -> float:
    """Probability that at most ``m`` of ``n`` bits are corrupted.

    Terms are formed in log space so large ``n`` neither overflows the binomial
    coefficient nor underflows the powers prematurely.
    """
    _check_prob(p_b)
    if m < 0 or m > n:
        raise ChannelError(f"m={m} outside 0..{n}")
    if m == n or p_b == 0.0:
        return 1.0
    if p_b == 1.0:
        return 0.0
    lq, lp = math.log1p(-p_b), math.log(p_b)
    terms = [
        math.exp(math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) + (n - k) * lq + k * lp)
        for k in range(m + 1)
    ]
    return min(1.0, math.fsum(terms))


# ---------------------------------------------------------------------------
# stream synthesis


@dataclass(frozen=True)
class StreamRecipe:
    """Random stream with planted address copies.

    The three fractions are shares of ``length`` occupied by exact copies, near
    copies (1 or 2 flipped bits) and half copies (``n // 2`` flipped bits).
    """

    length: int = 5000
    fraction_exact: float = 0.07
    fraction_near: float = 0.10
    fraction_half: float = 0.20
    seed: int = 0

    def __post_init__(self):
        fr = (self.fraction_exact, self.fraction_near, self.fraction_half)
        if any(f < 0 for f in fr) or sum(fr) > 1:
            raise ValueError("fractions must be non-negative and sum to at most 1")
        if self.length < 1:
            raise ValueError("length must be positive")


@dataclass(frozen=True)
class Placement:
    kind: str  # "exact" | "near" | "half"
    start: int
    flips: tuple = ()

    def end(self, n: int) -> int:
        """Index of the copy's last bit."""
        return self.start + n - 1


@dataclass
class TestStream:
    bits: np.ndarray
    placements: list = field(default_factory=list)

    def terminals(self, n: int, kind: str | None = None) -> np.ndarray:
        return np.array([p.end(n) for p in self.placements if kind is None or p.kind == kind], dtype=np.int64)


def gen_test_stream(address: Address, recipe: StreamRecipe = StreamRecipe()) -> TestStream:
    """Uniform random bits with non-overlapping planted copies of ``address``.

    Copies are separated by at least one random bit. The number of copies of each
    kind is the nearest whole number to ``fraction * length / n``.
    """
    n = address.n
    rng = np.random.default_rng(recipe.seed)
    counts = [
        int(round(f * recipe.length / n))
        for f in (recipe.fraction_exact, recipe.fraction_near, recipe.fraction_half)
    ]
    kinds = np.repeat(np.array(["exact", "near", "half"]), counts)
    total = len(kinds)
    spare = recipe.length - total * n - max(total - 1, 0)
    if spare < 0:
        raise ValueError(f"{total} copies of {n} bits do not fit in {recipe.length} bits")

    bits = rng.integers(0, 2, recipe.length, dtype=np.uint8)
    rng.shuffle(kinds)
    gaps = rng.multinomial(spare, np.full(total + 1, 1.0 / (total + 1))) if total else np.zeros(1, int)
    addr = address.as_array()
    placements = []
    pos = int(gaps[0])
    for k, kind in enumerate(kinds):
        copy = addr.copy()
        if kind == "near":
            flips = rng.choice(n, size=min(n, int(rng.integers(1, 3))), replace=False)
        elif kind == "half":
            flips = rng.choice(n, size=n // 2, replace=False)
        else:
            flips = np.empty(0, dtype=np.int64)
        copy[flips] ^= 1
        bits[pos:pos + n] = copy
        placements.append(Placement(str(kind), pos, tuple(sorted(int(f) for f in flips))))
        pos += n + 1 + int(gaps[k + 1])
    return TestStream(bits, placements)


# ---------------------------------------------------------------------------
# Monte Carlo


def _trial_blocks(trials: int, seed: int):
    for k, start in enumerate(range(0, trials, MC_BLOCK)):
        rng = np.random.default_rng(np.random.SeedSequence((int(seed), k)))
        yield rng, min(MC_BLOCK, trials - start)


def _decode_batch(config: DecoderConfig, address: Address, rows: np.ndarray) -> np.ndarray:
    if config.is_lpsd:
        return kernels.lpsd_batch(rows, address.as_array(), config.m, config.bypassed)
    return kernels.legacy_batch(rows, address.as_array())


def _estimate(hits: int, trials: int):
    est = hits / trials
    return est, math.sqrt(est * (1.0 - est) / trials)


def monte_carlo_detection(config: DecoderConfig, p_b: float, trials: int, seed: int = 0, address: Address | None = None):
    """Send the address through a bit-flip channel into a fresh decoder per trial.

    Returns ``(estimate, stderr)`` of the probability that the decoder wakes.
    """
    _check_prob(p_b)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if address is None:
        address = Address(np.random.default_rng(np.random.SeedSequence((int(seed), 1 << 30))).integers(0, 2, config.n))
    hits = 0
    tx = address.as_array()
    for rng, size in _trial_blocks(trials, seed):
        err = (rng.random((size, config.n)) < p_b).astype(np.uint8)
        hits += int(_decode_batch(config, address, tx[None, :] ^ err).sum())
    return _estimate(hits, trials)


def false_wake_rate(codebook, config: DecoderConfig, p_b: float, trials: int, seed: int = 0, pair=(0, 1)):
    """Fraction of pagings of codeword ``pair[0]`` that wake the device owning
    codeword ``pair[1]``. Returns ``(estimate, stderr)``."""
    _check_prob(p_b)
    a, b = pair
    if a == b:
        raise ValueError("the paged and the listening device must differ")
    sent = codebook.addresses[a]
    listener = codebook.addresses[b]
    hits = 0
    tx = sent.as_array()
    for rng, size in _trial_blocks(trials, seed):
        err = (rng.random((size, config.n)) < p_b).astype(np.uint8)
        hits += int(_decode_batch(config, listener, tx[None, :] ^ err).sum())
    return _estimate(hits, trials)


def exact_false_wake(sent: Address, listener: Address, m: int, p_b: float) -> float:
    """Exact probability that ``sent`` through the channel lands within ``m`` of ``listener``."""
    d = sum(x != y for x, y in zip(sent.bits, listener.bits))
    n = sent.n
    total = 0.0
    # i of the d differing bits flipped (fixing them), k of the n-d agreeing bits flipped
    for i in range(d + 1):
        for k in range(n - d + 1):
            if (d - i) + k <= m:
                total += math.comb(d, i) * math.comb(n - d, k) * p_b ** (i + k) * (1 - p_b) ** (n - i - k)
    return total


# ---------------------------------------------------------------------------
# codebooks


@dataclass
class Codebook:
    addresses: list
    min_distance: int

    def __post_init__(self):
        lengths = {a.n for a in self.addresses}
        if len(lengths) > 1:
            raise ValueError("codebook addresses differ in length")

    @property
    def n(self) -> int:
        return self.addresses[0].n

    def distances(self) -> np.ndarray:
        arr = np.array([a.bits for a in self.addresses], dtype=np.uint8)
        return (arr[:, None, :] != arr[None, :, :]).sum(axis=2)

    def verify(self) -> bool:
        d = self.distances()
        off = d[~np.eye(len(self.addresses), dtype=bool)]
        return bool(off.size == 0 or off.min() >= self.min_distance)

    def dumps(self) -> str:
        lines = [f"n={self.n} d={self.min_distance}"]
        lines += [str(a) for a in self.addresses]
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Codebook":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        head = dict(tok.split("=", 1) for tok in lines[0].split())
        n, d = int(head["n"]), int(head["d"])
        addrs = [Address.from_string(ln, capacity=max(n, 64)) for ln in lines[1:]]
        if any(a.n != n for a in addrs):
            raise ValueError("codeword length disagrees with header")
        return cls(addrs, d)


def hamming_bound(n: int, m: int) -> int:
    """Largest codebook the sphere-packing bound allows at distance ``2m + 1``."""
    ball = sum(math.comb(n, k) for k in range(m + 1))
    return (1 << n) // ball


def _to_bits(value: int, n: int) -> tuple:
    return tuple((value >> (n - 1 - i)) & 1 for i in range(n))


def build_codebook(count: int, n: int, m: int, seed: int | None = None, capacity: int = 64) -> Codebook:
    """Greedy lexicode of ``count`` words with pairwise distance at least ``2m + 1``.

    Words are scanned in increasing numeric order (first address bit most
    significant) and kept when far enough from everything kept so far. The result
    is deterministic; ``seed`` is accepted for interface symmetry and unused.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    d = 2 * m + 1
    if n > 64:
        raise ValueError("codebooks are limited to 64-bit addresses")
    if count > hamming_bound(n, m):
        raise CapacityError(
            f"{count} words of {n} bits at distance {d} exceed the Hamming bound {hamming_bound(n, m)}",
            "hamming",
        )
    words = _lexicode_small(count, n, d) if n <= 20 else _lexicode_large(count, n, d)
    if len(words) < count:
        raise CapacityError(
            f"the greedy lexicode for n={n}, d={d} holds only {len(words)} words, {count} requested",
            "lexicode",
        )
    return Codebook([Address(_to_bits(w, n), capacity) for w in words], d)


def _lexicode_small(count, n, d):
    free = np.ones(1 << n, dtype=bool)
    ball = [0]
    for r in range(1, d):
        for pos in combinations(range(n), r):
            ball.append(sum(1 << p for p in pos))
    ball = np.array(ball, dtype=np.int64)
    words, cand = [], 0
    while len(words) < count:
        nxt = np.flatnonzero(free[cand:])
        if nxt.size == 0:
            break
        w = cand + int(nxt[0])
        words.append(w)
        free[ball ^ w] = False
        cand = w + 1
    return words


def _lexicode_large(count, n, d, block=1 << 14):
    words = []
    kept = np.zeros(0, dtype=np.uint64)
    cand = 0
    limit = 1 << n
    while len(words) < count and cand < limit:
        hi = min(cand + block, limit)
        batch = np.arange(cand, hi, dtype=np.uint64)
        if kept.size:
            dist = np.bitwise_count(batch[:, None] ^ kept[None, :]).min(axis=1)
            batch = batch[dist >= d]
        for w in batch.tolist():
            if all((w ^ v).bit_count() >= d for v in words[len(kept):]):
                words.append(w)
                if len(words) == count:
                    break
        kept = np.array(words, dtype=np.uint64)
        cand = hi
    return words
