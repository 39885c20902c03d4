import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wurkit.channel import (
    CapacityError,
    ChannelError,
    ChannelModel,
    Codebook,
    StreamRecipe,
    ber,
    build_codebook,
    exact_false_wake,
    false_wake_rate,
    gen_test_stream,
    hamming_bound,
    monte_carlo_detection,
    p_conv,
    p_lpsd,
)
from wurkit.decoder import Address, DecoderConfig, run_stream


def enumerate_detection(n, m, p):
    """Sum over every error pattern of n bits."""
    total = 0.0
    for pat in itertools.product((0, 1), repeat=n):
        k = sum(pat)
        if k <= m:
            total += p ** k * (1 - p) ** (n - k)
    return total


class TestBer:
    def test_values(self):
        assert ber(0.5, 0) == 0.5
        assert ber(0.5, math.log(5)) == pytest.approx(0.1)
        assert ChannelModel(0.5, 0).p_b == 0.5

    @pytest.mark.parametrize("c,snr", [(2, 0), (-1, 1), (1, -1)])
    def test_invalid(self, c, snr):
        with pytest.raises(ChannelError):
            ber(c, snr)


class TestDetection:
    def test_conv(self):
        assert p_conv(5, 0) == 1
        assert p_conv(1, 0.1) == pytest.approx(0.9)
        assert p_conv(8, 0.1) == pytest.approx(0.43046721, abs=1e-12)

    def test_spot_value(self):
        assert p_lpsd(8, 1, 0.1) == pytest.approx(0.81310473, abs=1e-8)
        assert p_lpsd(8, 1, 0.1) == pytest.approx(enumerate_detection(8, 1, 0.1), abs=1e-12)

    @pytest.mark.parametrize("n,m,p", [(6, 2, 0.3), (10, 0, 0.05), (10, 3, 0.5), (12, 12, 0.7)])
    def test_against_enumeration(self, n, m, p):
        assert p_lpsd(n, m, p) == pytest.approx(enumerate_detection(n, m, p), abs=1e-12)

    def test_identities(self):
        assert p_lpsd(9, 0, 0.2) == pytest.approx(p_conv(9, 0.2))
        assert p_lpsd(9, 9, 0.2) == 1
        assert p_lpsd(9, 2, 0) == 1
        assert p_lpsd(9, 2, 1) == 0

    def test_large_n_is_finite(self):
        v = p_lpsd(5000, 40, 0.01)
        assert 0 < v <= 1

    def test_invalid(self):
        with pytest.raises(ChannelError):
            p_lpsd(4, 5, 0.1)
        with pytest.raises(ChannelError):
            p_lpsd(4, 1, 1.5)

    @given(st.integers(1, 64), st.integers(0, 5), st.floats(0.001, 0.999))
    def test_monotone(self, n, m, p):
        m = min(m, n)
        base = p_lpsd(n, m, p)
        assert base >= p_conv(n, p) - 1e-15
        if m < n:
            assert p_lpsd(n, m + 1, p) >= base - 1e-15
        assert p_lpsd(n, m, min(p + 0.01, 1)) <= base + 1e-15
        assert p_lpsd(n + 1, m, p) <= base + 1e-15


class TestStreams:
    def test_no_copies_is_plain_random(self):
        a = Address.from_string("1011")
        r = StreamRecipe(length=64, fraction_exact=0, fraction_near=0, fraction_half=0, seed=3)
        ts = gen_test_stream(a, r)
        assert ts.placements == []
        assert ts.bits.tolist() == np.random.default_rng(3).integers(0, 2, 64, dtype=np.uint8).tolist()

    def test_budget(self):
        a = Address(np.random.default_rng(0).integers(0, 2, 16))
        ts = gen_test_stream(a, StreamRecipe())
        kinds = [p.kind for p in ts.placements]
        assert kinds.count("exact") * 16 == pytest.approx(350, abs=16)
        assert kinds.count("near") * 16 == pytest.approx(500, abs=16)
        assert kinds.count("half") * 16 == pytest.approx(1000, abs=16)

    def test_placements_disjoint_and_faithful(self):
        a = Address(np.random.default_rng(1).integers(0, 2, 12))
        ts = gen_test_stream(a, StreamRecipe(length=2000, seed=9))
        starts = sorted(p.start for p in ts.placements)
        assert all(b - s >= 13 for s, b in zip(starts, starts[1:]))
        for p in ts.placements:
            window = ts.bits[p.start:p.start + 12]
            flipped = np.flatnonzero(window != a.as_array()).tolist()
            assert flipped == list(p.flips)
            lo, hi = {"exact": (0, 0), "near": (1, 2), "half": (6, 6)}[p.kind]
            assert lo <= len(flipped) <= hi

    def test_deterministic(self):
        a = Address.from_string("10011101")
        assert np.array_equal(gen_test_stream(a).bits, gen_test_stream(a).bits)

    @pytest.mark.parametrize("kw", [dict(fraction_exact=-0.1), dict(fraction_exact=0.6, fraction_near=0.6), dict(length=0)])
    def test_bad_recipe(self, kw):
        with pytest.raises(ValueError):
            StreamRecipe(**kw)

    def test_does_not_fit(self):
        with pytest.raises(ValueError):
            gen_test_stream(Address((1,) * 4), StreamRecipe(length=8, fraction_exact=1.0, fraction_near=0, fraction_half=0))

    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_decoder_wakes_at_planted_copies(self, m):
        a = Address(np.random.default_rng(5).integers(0, 2, 16))
        ts = gen_test_stream(a, StreamRecipe(seed=5))
        trace, _ = run_stream(DecoderConfig(16, m), a, ts.bits)
        for p in ts.placements:
            if len(p.flips) <= m:
                assert trace[p.end(16)] == 1
        assert all(trace[t] for t in ts.terminals(16, "exact"))


class TestMonteCarlo:
    def test_clean(self):
        assert monte_carlo_detection(DecoderConfig(16, 1), 0.0, 1000) == (1.0, 0.0)

    def test_all_flipped(self):
        assert monte_carlo_detection(DecoderConfig(8), 1.0, 500)[0] == 0.0

    def test_agrees_with_analytic(self):
        est, se = monte_carlo_detection(DecoderConfig(16, 1), 0.05, 100_000, seed=1)
        assert abs(est - p_lpsd(16, 1, 0.05)) <= 3 * se

    def test_legacy_path(self):
        est, se = monte_carlo_detection(DecoderConfig(8, architecture="legacy"), 0.1, 20_000, seed=2)
        assert abs(est - p_conv(8, 0.1)) <= 3 * se

    def test_seeded(self):
        cfg = DecoderConfig(8, 1)
        assert monte_carlo_detection(cfg, 0.1, 5000, seed=4) == monte_carlo_detection(cfg, 0.1, 5000, seed=4)

    def test_bad_trials(self):
        with pytest.raises(ValueError):
            monte_carlo_detection(DecoderConfig(8), 0.1, 0)


class TestCodebook:
    def test_pair(self):
        book = build_codebook(2, 3, 1)
        assert [str(a) for a in book.addresses] == ["000", "111"]

    def test_d1_first_strings(self):
        book = build_codebook(5, 4, 0)
        assert [str(a) for a in book.addresses] == ["0000", "0001", "0010", "0011", "0100"]

    def test_capacity(self):
        with pytest.raises(CapacityError) as exc:
            build_codebook(3, 3, 1)
        assert exc.value.bound == "hamming"

    def test_greedy_shortfall_names_lexicode(self):
        # sphere packing allows 5 words of 5 bits at distance 3, the greedy code finds 4
        with pytest.raises(CapacityError) as exc:
            build_codebook(5, 5, 1)
        assert exc.value.bound == "lexicode"

    def test_lexicode_limit(self):
        # the [7,4] Hamming code is perfect; the lexicode reaches it exactly
        assert len(build_codebook(16, 7, 1).addresses) == 16
        with pytest.raises(CapacityError):
            build_codebook(17, 7, 1)

    @pytest.mark.parametrize("count,n,m", [(20, 10, 1), (8, 24, 2), (30, 40, 3)])
    def test_distance(self, count, n, m):
        book = build_codebook(count, n, m)
        assert len(book.addresses) == count and book.verify()
        d = book.distances()
        assert d[~np.eye(count, dtype=bool)].min() >= 2 * m + 1

    def test_small_and_large_paths_agree(self):
        from wurkit.channel import _lexicode_large

        small = build_codebook(12, 12, 1)
        assert [int(str(a), 2) for a in small.addresses] == _lexicode_large(12, 12, 3, block=64)

    def test_roundtrip(self):
        book = build_codebook(4, 8, 1)
        text = book.dumps()
        assert text.splitlines()[0] == "n=8 d=3"
        again = Codebook.loads(text)
        assert [str(a) for a in again.addresses] == [str(a) for a in book.addresses]

    def test_hamming_bound(self):
        assert hamming_bound(7, 1) == 16
        assert hamming_bound(3, 1) == 2


class TestFalseWake:
    def test_clean_channel_is_zero(self):
        book = build_codebook(6, 12, 1)
        cfg = DecoderConfig(12, 1)
        for pair in itertools.permutations(range(6), 2):
            assert false_wake_rate(book, cfg, 0.0, 200, pair=pair)[0] == 0.0

    def test_against_enumeration(self):
        a = Address.from_string("00000000")
        b = Address.from_string("00000111")
        book = Codebook([a, b], 3)
        p = 0.1
        exact = 0.0
        for pat in itertools.product((0, 1), repeat=8):
            rx = [x ^ e for x, e in zip(a.bits, pat)]
            if sum(r != y for r, y in zip(rx, b.bits)) <= 1:
                exact += p ** sum(pat) * (1 - p) ** (8 - sum(pat))
        assert exact_false_wake(a, b, 1, p) == pytest.approx(exact, abs=1e-14)
        est, se = false_wake_rate(book, DecoderConfig(8, 1), p, 100_000, seed=7)
        assert abs(est - exact) <= 3 * se

    def test_same_device(self):
        book = build_codebook(2, 3, 1)
        with pytest.raises(ValueError):
            false_wake_rate(book, DecoderConfig(3, 1), 0.1, 100, pair=(1, 1))
