"""Hot loops for whole-stream decoder simulation.

Two interchangeable implementations of every kernel live here:

* ``_lpsd_loop`` / ``_legacy_loop`` walk the stream cycle by cycle and are
  compiled with numba when it is available.
* ``_lpsd_numpy`` / ``_legacy_numpy`` never iterate over time. They rebuild the
  flip-flop contents from sliding-window mismatch counts and derive every
  internal net from those, vectorised over chunks of cycles.

Both return identical results; :func:`lpsd_run` and :func:`legacy_run` pick one
according to :data:`wurkit._accel.HAS_NUMBA` unless told otherwise.

Activity is returned as ``counts = [ff_toggles, ff_enable_events,
gate_transitions, input_fanout_events]``. Gate transitions are output changes
of every modelled gate. Fan-out events count one per gating-AND input each time
the serial input changes, since that net drives every G-block; the correlator
input drives a single flip-flop and has none.
"""

import numpy as np

from ._accel import HAS_NUMBA, njit

# per-stage nets of one LPSD layer, in storage order
_G1, _G2, _G3, _F, _H1, _H2, _H3, _FM, _D, _EN = range(10)
_NETS = 10

CHUNK = 1 << 14


def lpsd_fanout(n_layers: int, length: int) -> int:
    """Gating-AND inputs tied to the serial input net."""
    return length * (2 * n_layers - 1)


@njit(cache=True)
def _lpsd_loop(stream, addr, m, b):
    n = addr.shape[0]
    L = m + 1
    T = stream.shape[0]
    fan = (n - b) * (2 * L - 1)
    q = np.zeros((L, n), dtype=np.uint8)
    d = np.zeros((L, n), dtype=np.uint8)
    prev = np.zeros((L, n, _NETS), dtype=np.uint8)
    cur = np.zeros(_NETS, dtype=np.uint8)
    wake = np.zeros(T, dtype=np.uint8)
    occ = np.zeros((L, n), dtype=np.int64)
    toggles = 0
    enables = 0
    gates = 0
    fanout = 0
    prev_x = 0
    prev_or = 0
    # t == -1 primes the net history from the reset state with a 0 input
    for t in range(-1, T):
        x = 0 if t < 0 else stream[t]
        if t >= 0 and x != prev_x:
            fanout += fan
        for j in range(L):
            for i in range(b, n):
                a_i = addr[i]
                if i > b:
                    cs = q[j, i - 1]
                else:
                    cs = 1 if j == 0 else 0
                cur[_G1] = x & cs
                cur[_G2] = a_i & cs
                cur[_G3] = 1 - (cur[_G1] ^ cur[_G2])
                cur[_F] = cs & cur[_G3]
                if j > 0:
                    if i > b:
                        cm = q[j - 1, i - 1]
                    else:
                        cm = 1 if j == 1 else 0
                    cur[_H1] = x & cm
                    cur[_H2] = a_i & cm
                    cur[_H3] = cur[_H1] ^ cur[_H2]
                    cur[_FM] = cm & cur[_H3]
                    cur[_D] = cur[_F] | cur[_FM]
                else:
                    cur[_H1] = 0
                    cur[_H2] = 0
                    cur[_H3] = 0
                    cur[_FM] = 0
                    cur[_D] = cur[_F]
                cur[_EN] = (cur[_D] ^ q[j, i]) if i > b else 0
                if t >= 0:
                    for k in range(_NETS):
                        # layer 0 has no merge gate: D is the G-block output wire
                        if k == _D and j == 0:
                            continue
                        if cur[k] != prev[j, i, k]:
                            gates += 1
                for k in range(_NETS):
                    prev[j, i, k] = cur[k]
                d[j, i] = cur[_D]
        if t < 0:
            continue
        any_final = 0
        for j in range(L):
            enables += 1
            for i in range(b, n):
                if d[j, i] != q[j, i]:
                    toggles += 1
                    if i > b:
                        enables += 1
                    q[j, i] = d[j, i]
                if q[j, i]:
                    occ[j, i] += 1
            any_final |= q[j, n - 1]
        if L > 1 and any_final != prev_or:
            gates += 1
        prev_or = any_final
        wake[t] = any_final
        prev_x = x
    for j in range(L):
        for i in range(b):
            occ[j, i] = T
    counts = np.zeros(4, dtype=np.int64)
    counts[0] = toggles
    counts[1] = enables
    counts[2] = gates
    counts[3] = fanout
    return wake, counts, occ


@njit(cache=True)
def _legacy_loop(stream, addr):
    n = addr.shape[0]
    T = stream.shape[0]
    n_and = n - 1
    # shift register: index 0 holds the newest bit, so Q_i aligns with A_{n-1-i}
    arev = addr[::-1].copy()
    q = np.zeros(n, dtype=np.uint8)
    xn = np.zeros(n, dtype=np.uint8)
    nodes = np.zeros(max(n_and, 1), dtype=np.uint8)
    level = np.zeros(n, dtype=np.uint8)
    wake = np.zeros(T, dtype=np.uint8)
    occ = np.zeros((1, n), dtype=np.int64)
    toggles = 0
    gates = 0
    for t in range(-1, T):
        if t >= 0:
            x = stream[t]
            for i in range(n - 1, 0, -1):
                if q[i] != q[i - 1]:
                    toggles += 1
                    q[i] = q[i - 1]
            if q[0] != x:
                toggles += 1
                q[0] = x
            for i in range(n):
                if q[i]:
                    occ[0, i] += 1
        for i in range(n):
            v = 1 - (q[i] ^ arev[i])
            if t >= 0 and v != xn[i]:
                gates += 1
            xn[i] = v
            level[i] = v
        width = n
        node = 0
        while width > 1:
            half = width // 2
            for k in range(half):
                v = level[2 * k] & level[2 * k + 1]
                if t >= 0 and v != nodes[node]:
                    gates += 1
                nodes[node] = v
                level[k] = v
                node += 1
            if width % 2 == 1:
                level[half] = level[width - 1]
                width = half + 1
            else:
                width = half
        # fill qualifier: reset zeros must not complete an address
        if t >= n - 1:
            wake[t] = level[0]
    counts = np.zeros(4, dtype=np.int64)
    counts[0] = toggles
    counts[1] = n * T
    counts[2] = gates
    return wake, counts, occ


def _changes(rows, first):
    """Per-column count of value changes down ``rows``, starting from ``first``."""
    return (rows[0] != first).sum() + (rows[1:] != rows[:-1]).sum()


def _lpsd_numpy(stream, addr, m, b):
    n = addr.shape[0]
    L = m + 1
    T = stream.shape[0]
    lf = n - b
    fan = lpsd_fanout(L, lf)
    addr_f = addr[b:].astype(np.uint8)

    wake = np.zeros(T, dtype=np.uint8)
    occ = np.zeros((L, n), dtype=np.int64)
    occ[:, :b] = T
    toggles = enables = gates = fanout = 0

    # carried between chunks: last mismatch-distance row, last Q row, last net rows
    dist_last = np.zeros(lf, dtype=np.int64)
    q_last = np.zeros((L, lf), dtype=np.uint8)
    nets_last = None
    x_last = 0
    or_last = 0
    stages = np.arange(lf)

    for t0 in range(0, T, CHUNK):
        x = stream[t0:t0 + CHUNK].astype(np.uint8)
        c = x.shape[0]
        tt = np.arange(t0, t0 + c)[:, None]
        # distance of the window ending at t against A_b..A_{b+k}
        mism = (x[:, None] != addr_f[None, :]).astype(np.int64)
        dist = np.empty((c, lf), dtype=np.int64)
        dist[:, 0] = mism[:, 0]
        for k in range(1, lf):
            dist[0, k] = dist_last[k - 1] + mism[0, k]
            dist[1:, k] = dist[:-1, k - 1] + mism[1:, k]
        valid = tt >= stages[None, :]
        q = np.stack([(valid & (dist == j)).astype(np.uint8) for j in range(L)])
        q_prev = np.concatenate([q_last[:, None, :], q[:, :-1, :]], axis=1)

        xb = x[:, None]
        nets = []
        for j in range(L):
            cs = np.empty((c, lf), dtype=np.uint8)
            cs[:, 0] = 1 if j == 0 else 0
            cs[:, 1:] = q_prev[j, :, :-1]
            g1 = xb & cs
            g2 = addr_f[None, :] & cs
            g3 = 1 - (g1 ^ g2)
            f = cs & g3
            layer = [g1, g2, g3, f]
            dn = f
            if j > 0:
                cm = np.empty((c, lf), dtype=np.uint8)
                cm[:, 0] = 1 if j == 1 else 0
                cm[:, 1:] = q_prev[j - 1, :, :-1]
                h1 = xb & cm
                h2 = addr_f[None, :] & cm
                h3 = h1 ^ h2
                fm = cm & h3
                dn = f | fm
                layer += [h1, h2, h3, fm, dn]
            layer.append((dn ^ q_prev[j])[:, 1:])
            nets.append(layer)

        if nets_last is None:
            nets_last = _primed_nets(addr_f, L)
        for j in range(L):
            for k, arr in enumerate(nets[j]):
                gates += int(_changes(arr, nets_last[j][k]))
        nets_last = [[arr[-1] for arr in layer] for layer in nets]

        x_prev = np.concatenate([[x_last], x[:-1]])
        fanout += fan * int((x != x_prev).sum())

        flips = q != q_prev
        toggles += int(flips.sum())
        enables += L * c + int(flips[:, :, 1:].sum())
        occ[:, b:] += q.sum(axis=1, dtype=np.int64)

        w = q[:, :, -1].max(axis=0)
        wake[t0:t0 + c] = w
        if L > 1:
            gates += int(_changes(w, or_last))
            or_last = w[-1]

        dist_last = dist[-1]
        q_last = q[:, -1, :]
        x_last = x[-1]

    counts = np.array([toggles, enables, gates, fanout], dtype=np.int64)
    return wake, counts, occ


def _primed_nets(addr_f, L):
    """Net values under the reset state with a 0 input (the t = -1 history)."""
    lf = addr_f.shape[0]
    layers = []
    for j in range(L):
        cs = np.zeros(lf, dtype=np.uint8)
        cs[0] = 1 if j == 0 else 0
        g1 = np.zeros(lf, dtype=np.uint8)
        g2 = addr_f & cs
        g3 = 1 - (g1 ^ g2)
        f = cs & g3
        layer = [g1, g2, g3, f]
        dn = f
        if j > 0:
            cm = np.zeros(lf, dtype=np.uint8)
            cm[0] = 1 if j == 1 else 0
            h1 = np.zeros(lf, dtype=np.uint8)
            h2 = addr_f & cm
            h3 = h1 ^ h2
            fm = cm & h3
            dn = f | fm
            layer += [h1, h2, h3, fm, dn]
        layer.append(dn[1:].copy())
        layers.append(layer)
    return layers


def _legacy_numpy(stream, addr):
    n = addr.shape[0]
    T = stream.shape[0]
    arev = addr[::-1].astype(np.uint8)
    wake = np.zeros(T, dtype=np.uint8)
    occ = np.zeros((1, n), dtype=np.int64)
    toggles = gates = 0

    padded = np.concatenate([np.zeros(n, dtype=np.uint8), stream.astype(np.uint8)])
    q_last = np.zeros(n, dtype=np.uint8)
    tree_last = _and_tree(1 - (q_last[None, :] ^ arev[None, :]))
    tree_last = [lvl[0] for lvl in tree_last]

    for t0 in range(0, T, CHUNK):
        c = min(CHUNK, T - t0)
        # row r holds the register after consuming stream[t0 + r]; column i is i cycles old
        win = np.lib.stride_tricks.sliding_window_view(padded[t0 + 1:t0 + c + n], n)[:, ::-1]
        toggles += int(_changes(win, q_last))
        occ[0] += win.sum(axis=0, dtype=np.int64)
        xn = 1 - (win ^ arev[None, :])
        tree = _and_tree(xn)
        for k, lvl in enumerate(tree):
            gates += int(_changes(lvl, tree_last[k]))
        wake[t0:t0 + c] = tree[-1][:, 0] if n > 1 else xn[:, 0]
        q_last = win[-1]
        tree_last = [lvl[-1] for lvl in tree]

    wake[:n - 1] = 0
    counts = np.array([toggles, n * T, gates, 0], dtype=np.int64)
    return wake, counts, occ


def _and_tree(xn):
    """XNOR layer followed by every AND2 level, each as a (rows, gates) array.

    An odd leftover input passes straight up to the next level without a gate.
    """
    levels = [xn]
    cur = xn
    while cur.shape[1] > 1:
        w = cur.shape[1]
        half = w // 2
        gated = cur[:, 0:2 * half:2] & cur[:, 1:2 * half:2]
        levels.append(gated)
        cur = np.concatenate([gated, cur[:, w - 1:]], axis=1) if w % 2 else gated
    return levels


def lpsd_run(stream, addr, m=0, b=0, use_numba=None):
    """Simulate an LPSD over ``stream``; returns ``(wake, counts, occupancy)``."""
    stream = np.ascontiguousarray(stream, dtype=np.uint8)
    addr = np.ascontiguousarray(addr, dtype=np.uint8)
    if use_numba is None:
        use_numba = HAS_NUMBA
    if use_numba:
        return _lpsd_loop(stream, addr, int(m), int(b))
    return _lpsd_numpy(stream, addr, int(m), int(b))


def legacy_run(stream, addr, use_numba=None):
    """Simulate the XNOR-correlator decoder; returns ``(wake, counts, occupancy)``."""
    stream = np.ascontiguousarray(stream, dtype=np.uint8)
    addr = np.ascontiguousarray(addr, dtype=np.uint8)
    if use_numba is None:
        use_numba = HAS_NUMBA
    if use_numba:
        return _legacy_loop(stream, addr)
    return _legacy_numpy(stream, addr)


# ---------------------------------------------------------------------------
# batch kernels: many short streams, each into a freshly reset decoder, wake only


@njit(cache=True)
def _lpsd_batch_loop(rows, addr, m, b):
    R, T = rows.shape
    n = addr.shape[0]
    L = m + 1
    l = n - b
    full = np.uint64(0xFFFFFFFFFFFFFFFF) >> np.uint64(64 - l)
    top = np.uint64(1) << np.uint64(l - 1)
    one = np.uint64(1)
    out = np.zeros(R, dtype=np.uint8)
    q = np.zeros(L, dtype=np.uint64)
    s = np.zeros(L, dtype=np.uint64)
    # bit k of eq1/eq0 is set when a functional stage b+k stores a 1/0
    a1 = np.uint64(0)
    for k in range(l):
        if addr[b + k]:
            a1 |= one << np.uint64(k)
    a0 = full & ~a1
    for r in range(R):
        for j in range(L):
            q[j] = 0
        for t in range(T):
            eq = a1 if rows[r, t] else a0
            for j in range(L):
                s[j] = ((q[j] << one) | (one if j == 0 else np.uint64(0))) & full
            for j in range(L):
                nxt = s[j] & eq
                if j > 0:
                    nxt |= s[j - 1] & ~eq & full
                q[j] = nxt
            for j in range(L):
                if q[j] & top:
                    out[r] = 1
    return out


def _lpsd_batch_numpy(rows, addr, m, b):
    R, T = rows.shape
    n = addr.shape[0]
    L = m + 1
    l = n - b
    full = np.uint64((1 << l) - 1)
    top = np.uint64(1 << (l - 1))
    one = np.uint64(1)
    weights = (np.uint64(1) << np.arange(l, dtype=np.uint64))
    a1 = np.uint64(int((addr[b:].astype(np.uint64) * weights).sum()))
    a0 = full & ~a1
    q = np.zeros((L, R), dtype=np.uint64)
    out = np.zeros(R, dtype=bool)
    for t in range(T):
        eq = np.where(rows[:, t].astype(bool), a1, a0)
        s = (q << one) & full
        s[0] |= one
        nxt = s & eq
        nxt[1:] |= s[:-1] & ~eq & full
        q = nxt
        out |= ((q & top) != 0).any(axis=0)
    return out.astype(np.uint8)


def lpsd_batch(rows, addr, m=0, b=0, use_numba=None):
    """Wake flag per row: does an LPSD reset before the row wake on any bit of it?"""
    rows = np.ascontiguousarray(np.atleast_2d(rows), dtype=np.uint8)
    addr = np.ascontiguousarray(addr, dtype=np.uint8)
    if addr.shape[0] - int(b) > 64:
        # masks no longer fit a machine word; fall back to the full simulator
        return np.array([lpsd_run(r, addr, m, b, use_numba)[0].any() for r in rows], dtype=np.uint8)
    if use_numba is None:
        use_numba = HAS_NUMBA
    if use_numba:
        return _lpsd_batch_loop(rows, addr, int(m), int(b))
    return _lpsd_batch_numpy(rows, addr, int(m), int(b))


def legacy_batch(rows, addr):
    """Wake flag per row for the correlator decoder reset before each row."""
    rows = np.atleast_2d(np.asarray(rows, dtype=np.uint8))
    addr = np.asarray(addr, dtype=np.uint8)
    n = addr.shape[0]
    if rows.shape[1] < n:
        return np.zeros(rows.shape[0], dtype=np.uint8)
    win = np.lib.stride_tricks.sliding_window_view(rows, n, axis=1)
    return (win == addr).all(axis=2).any(axis=1).astype(np.uint8)
