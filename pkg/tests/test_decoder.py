import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wurkit.decoder import (
    Address,
    Architecture,
    DecoderConfig,
    LegacyState,
    LpsdState,
    g_block_eval,
    reset,
    run_stream,
    set_effective_length,
    step,
    wake_oracle,
    wake_positions,
)


def bits(text):
    return [int(c) for c in text]


def window_distance(stream, t, addr_bits):
    """Hamming distance between stream[t-len+1..t] and addr_bits, or None if too early."""
    k = len(addr_bits)
    if t + 1 < k:
        return None
    return sum(a != b for a, b in zip(stream[t - k + 1:t + 1], addr_bits))


class TestAddress:
    def test_from_string(self):
        a = Address.from_string("10011101")
        assert a.n == 8
        assert str(a) == "10011101"
        assert a.as_array().dtype == np.uint8

    @pytest.mark.parametrize("text", ["", "0" * 65])
    def test_length_bounds(self, text):
        with pytest.raises(ValueError):
            Address.from_string(text)

    def test_capacity_configurable(self):
        assert Address.from_string("1" * 100, capacity=128).n == 100

    def test_rejects_non_binary(self):
        with pytest.raises(ValueError):
            Address((0, 2, 1))

    def test_suffix(self):
        assert Address.from_string("10011101").suffix(4) == (1, 1, 0, 1)


class TestConfig:
    def test_defaults(self):
        c = DecoderConfig(8)
        assert c.effective_length == 8 and c.bypassed == 0 and c.layers == 1

    @pytest.mark.parametrize("kwargs", [
        dict(n=8, m=1, architecture="legacy"),
        dict(n=8, architecture="legacy", effective_length=4),
        dict(n=8, m=8),
        dict(n=8, effective_length=9),
        dict(n=8, effective_length=0),
        dict(n=0),
        dict(n=8, m=-1),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            DecoderConfig(**kwargs)

    def test_layer_cap_configurable(self):
        assert DecoderConfig(16, m=9, layer_cap=10).layers == 10

    def test_set_effective_length(self):
        c = set_effective_length(DecoderConfig(8), 4)
        assert c.bypassed == 4
        with pytest.raises(ValueError):
            set_effective_length(DecoderConfig(8), 0)
        with pytest.raises(ValueError):
            set_effective_length(DecoderConfig(8, architecture="legacy"), 4)


class TestGBlock:
    @pytest.mark.parametrize("a,b,c", list(itertools.product((0, 1), repeat=3)))
    def test_truth_table(self, a, b, c):
        assert g_block_eval(a, b, c) == int(c == 1 and a == b)


class TestReset:
    def test_all_clear(self):
        s = reset(DecoderConfig(8))
        assert isinstance(s, LpsdState)
        assert s.q.shape == (1, 8) and not s.q.any() and s.cycle == 0

    def test_bypassed_stages_read_one(self):
        q = reset(DecoderConfig(8, effective_length=5)).q
        assert q[0, :3].tolist() == [1, 1, 1]
        assert not q[0, 3:].any()

    def test_layers(self):
        q = reset(DecoderConfig(8, m=2)).q
        assert q.shape == (3, 8) and not q.any()

    def test_legacy(self):
        s = reset(DecoderConfig(8, architecture=Architecture.LEGACY))
        assert isinstance(s, LegacyState)
        assert not s.shift_reg.any()


class TestStepExamples:
    def test_short_address(self):
        a = Address.from_string("101")
        s = reset(DecoderConfig(3))
        wakes = [step(s, b, a).wake for b in bits("0101")]
        assert wakes == [False, False, False, True]

    @pytest.mark.parametrize("arch", ["lpsd", "legacy"])
    def test_wake_on_last_address_bit(self, arch):
        a = Address.from_string("10011101")
        stream = bits("011") + list(a.bits)
        s = reset(DecoderConfig(8, architecture=arch))
        wakes = [step(s, b, a).wake for b in stream]
        # cycle 11 counting from 1
        assert [i for i, w in enumerate(wakes) if w] == [10]

    def test_one_flip_tolerated(self):
        a = Address.from_string("10011101")
        stream = list(a.bits)
        stream[3] ^= 1
        for m, expected in ((0, False), (1, True)):
            s = reset(DecoderConfig(8, m=m))
            assert [step(s, b, a).wake for b in stream][-1] is expected

    def test_shift_register_holds_recent_bits(self, rng):
        a = Address(rng.integers(0, 2, 8))
        s = reset(DecoderConfig(8, architecture="legacy"))
        stream = rng.integers(0, 2, 50)
        for t, b in enumerate(stream):
            step(s, int(b), a)
            if t >= 7:
                # Q_0 is the newest bit
                assert s.shift_reg.tolist() == stream[t - 7:t + 1][::-1].tolist()

    def test_xnor_outputs_compare_aligned_bits(self, rng):
        a = Address(rng.integers(0, 2, 8))
        s = reset(DecoderConfig(8, architecture="legacy"))
        for b in rng.integers(0, 2, 30):
            step(s, int(b), a)
            assert s.xnor_out.tolist() == (s.shift_reg == a.as_array()[::-1]).astype(int).tolist()

    def test_no_reset_on_wake(self):
        a = Address.from_string("1111")
        s = reset(DecoderConfig(4))
        wakes = [step(s, 1, a).wake for _ in range(6)]
        assert wakes == [False, False, False, True, True, True]

    def test_rejects_bad_input(self):
        a = Address.from_string("11")
        with pytest.raises(ValueError):
            step(reset(DecoderConfig(2)), 2, a)
        with pytest.raises(ValueError):
            step(reset(DecoderConfig(3)), 1, a)

    def test_delta_bounds(self, rng):
        cfg = DecoderConfig(8, m=2)
        a = Address(rng.integers(0, 2, 8))
        s = reset(cfg)
        for b in rng.integers(0, 2, 200):
            d = step(s, int(b), a).delta
            assert 0 <= d.ff_toggles <= 8 * 3
            assert 3 <= d.ff_enable_events <= 8 * 3
            assert d.gate_transitions >= 0

    def test_first_flip_flop_always_enabled(self):
        a = Address.from_string("1010")
        s = reset(DecoderConfig(4))
        assert step(s, 0, a).delta.ff_enable_events == 1


class TestLayerSemantics:
    @pytest.mark.parametrize("n,m,l", [(5, 0, 5), (6, 1, 6), (6, 2, 6), (7, 2, 4), (4, 1, 1)])
    def test_per_cycle_probe(self, rng, n, m, l):
        cfg = DecoderConfig(n, m, effective_length=l)
        a = Address(rng.integers(0, 2, n))
        b = n - l
        stream = rng.integers(0, 2, 300).tolist()
        s = reset(cfg)
        for t, x in enumerate(stream):
            step(s, x, a)
            q = s.q
            for j in range(m + 1):
                for i in range(n):
                    if i < b:
                        assert q[j, i] == 1
                        continue
                    d = window_distance(stream, t, a.bits[b:i + 1])
                    assert q[j, i] == int(d == j), (t, j, i)


class TestRunStream:
    def test_single_copy(self):
        a = Address.from_string("10011101")
        trace, act = run_stream(DecoderConfig(8), a, a.as_array())
        assert wake_positions(trace).tolist() == [7]
        assert act.cycles == 8

    def test_repeated(self):
        a = Address.from_string("10011101")
        trace, _ = run_stream(DecoderConfig(8), a, np.tile(a.as_array(), 2))
        assert wake_positions(trace).tolist() == [7, 15]

    def test_empty(self):
        with pytest.raises(ValueError):
            run_stream(DecoderConfig(2), Address.from_string("10"), [])

    def test_string_stream(self):
        trace, _ = run_stream(DecoderConfig(3), Address.from_string("101"), "0101")
        assert trace.tolist() == [0, 0, 0, 1]

    def test_suffix_match(self):
        a = Address.from_string("10011101")
        trace, _ = run_stream(DecoderConfig(8, effective_length=4), a, "0001101")
        assert wake_positions(trace).tolist() == [6]

    @pytest.mark.parametrize("arch,m,l", [("lpsd", 0, 8), ("lpsd", 1, 8), ("lpsd", 2, 5), ("legacy", 0, 8)])
    def test_step_api_matches_batch(self, rng, arch, m, l):
        cfg = DecoderConfig(8, m, arch, effective_length=l)
        a = Address(rng.integers(0, 2, 8))
        stream = rng.integers(0, 2, 400)
        trace, act = run_stream(cfg, a, stream)
        s = reset(cfg)
        outs = [step(s, int(b), a) for b in stream]
        assert [o.wake for o in outs] == trace.astype(bool).tolist()
        assert sum(o.delta.ff_toggles for o in outs) == act.ff_toggles
        assert sum(o.delta.ff_enable_events for o in outs) == act.ff_enable_events
        assert sum(o.delta.gate_transitions for o in outs) == act.gate_transitions
        assert sum(o.delta.input_fanout_events for o in outs) == act.input_fanout_events

    def test_deterministic(self, rng):
        a = Address(rng.integers(0, 2, 16))
        stream = rng.integers(0, 2, 2000)
        r1 = run_stream(DecoderConfig(16, 1), a, stream)
        r2 = run_stream(DecoderConfig(16, 1), a, stream)
        assert (r1[0] == r2[0]).all()
        assert r1[1].ff_toggles == r2[1].ff_toggles and r1[1].gate_transitions == r2[1].gate_transitions


class TestOracle:
    @pytest.mark.parametrize("addr,m,stream,expected", [
        ("1111", 0, "1111", [0, 0, 0, 1]),
        ("1111", 1, "1101", [0, 0, 0, 1]),
        ("1111", 1, "1001", [0, 0, 0, 0]),
    ])
    def test_examples(self, addr, m, stream, expected):
        assert wake_oracle(Address.from_string(addr), stream, m).tolist() == expected

    def test_short_stream(self):
        assert wake_oracle(Address.from_string("111"), "11").tolist() == [0, 0]

    def test_bad_length(self):
        with pytest.raises(ValueError):
            wake_oracle(Address.from_string("111"), "111", length=4)


class TestProperties:
    @given(
        st.lists(st.integers(0, 1), min_size=1, max_size=12),
        st.lists(st.integers(0, 1), min_size=1, max_size=200),
        st.integers(0, 3),
        st.data(),
    )
    def test_lpsd_matches_oracle(self, addr, stream, m, data):
        n = len(addr)
        m = min(m, n)
        l = data.draw(st.integers(1, n))
        a = Address(addr)
        trace, _ = run_stream(DecoderConfig(n, m, effective_length=l), a, stream)
        assert trace.tolist() == wake_oracle(a, stream, m, l).tolist()

    @given(st.lists(st.integers(0, 1), min_size=1, max_size=12), st.lists(st.integers(0, 1), min_size=1, max_size=200))
    def test_legacy_matches_oracle(self, addr, stream):
        a = Address(addr)
        trace, _ = run_stream(DecoderConfig(len(addr), architecture="legacy"), a, stream)
        assert trace.tolist() == wake_oracle(a, stream).tolist()

    @pytest.mark.parametrize("n", [8, 16, 32])
    def test_lpsd_activity_below_legacy(self, rng, n):
        a = Address(rng.integers(0, 2, n))
        stream = rng.integers(0, 2, 20000)
        _, lp = run_stream(DecoderConfig(n), a, stream)
        _, lg = run_stream(DecoderConfig(n, architecture="legacy"), a, stream)
        assert lp.ff_toggles + lp.gate_transitions < lg.ff_toggles + lg.gate_transitions
