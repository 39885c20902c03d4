"""``wurkit`` command line.

Every subcommand writes a table to stdout (or ``--out``) as CSV or JSON. CSV
output starts with ``#`` comment lines echoing the seed and all parameters.
Exit status is 0 on success, 1 when results fail a check or are infeasible and
2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bits import BitParseError, parse_bits, read_stream_file
from .channel import CapacityError, StreamRecipe, build_codebook, monte_carlo_detection, p_lpsd
from .decoder import Address, Architecture, DecoderConfig, run_stream, wake_positions
from .energy import PAIRS, SWEEP_COLUMNS, InfeasibleError, Profiles, sweep
from .power import (
    DEFAULT_PARAMS,
    DEFAULT_TARGETS,
    POWER_COLUMNS,
    AREA_TABLE,
    CalibrationError,
    PowerParams,
    TechTiming,
    area_estimate,
    calibrate,
    default_address,
    max_delay,
    sweep_rows,
)

MIN_TRIALS = 100


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def _list(conv):
    def parse(text):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        try:
            return [conv(t) for t in items]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _rate(text: str) -> float:
    """Accept plain numbers and k/M/G suffixes, e.g. ``1M`` or ``10k``."""
    mult = {"k": 1e3, "K": 1e3, "M": 1e6, "G": 1e9}
    if text and text[-1] in mult:
        return float(text[:-1]) * mult[text[-1]]
    return float(text)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("WURKIT_SEED")
    if env is None or env.strip() == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"WURKIT_SEED={env!r} is not an integer") from None


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


class Output:
    """Collects comment lines and rows, renders them once at the end."""

    def __init__(self, command: str, seed: int, params: dict, columns):
        self.command = command
        self.seed = seed
        self.params = params
        self.columns = list(columns)
        self.rows: list = []
        self.notes: list = []

    def add(self, row: dict):
        self.rows.append(row)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            doc = {"command": self.command, "seed": self.seed, "params": self.params,
                   "columns": self.columns, "rows": self.rows, "notes": self.notes}
            return json.dumps(doc, indent=2, sort_keys=False, default=_json_default) + "\n"
        buf = io.StringIO()
        buf.write(f"# wurkit {self.command} seed={self.seed}\n")
        for k, v in self.params.items():
            buf.write(f"# {k}={_param_str(v)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in self.columns])
        for note in self.notes:
            buf.write(f"# {note}\n")
        return buf.getvalue()


def _param_str(v) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, default=_json_default)
    return _fmt(v)


def _json_default(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    raise TypeError(f"cannot serialise {type(v).__name__}")


def _emit(args, out: Output):
    text = out.render(args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_decode(args, seed):
    if args.address is None:
        raise UsageError("--address is required")
    try:
        addr_bits = parse_bits(args.address)
    except BitParseError as exc:
        raise UsageError(f"--address: {exc}") from None
    if (args.stream is None) == (args.stream_file is None):
        raise UsageError("give exactly one of --stream and --stream-file")
    try:
        stream = parse_bits(args.stream) if args.stream is not None else read_stream_file(args.stream_file)
    except BitParseError as exc:
        src = "--stream" if args.stream is not None else args.stream_file
        raise UsageError(f"{src}: {exc}") from None
    except OSError as exc:
        raise UsageError(f"cannot read stream file: {exc}") from None
    n = len(addr_bits)
    if args.n is not None and args.n != [n]:
        raise UsageError(f"--n {args.n[0]} disagrees with the {n}-bit address")
    m = args.m[0] if args.m else 0
    arch = Architecture(args.arch[0] if args.arch else "lpsd")
    try:
        cfg = DecoderConfig(n, m, arch, effective_length=args.len, capacity=max(n, 64))
        address = Address(addr_bits, capacity=max(n, 64))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    trace, act = run_stream(cfg, address, stream)
    out = Output("decode", seed, {"arch": arch.value, "address": args.address, "n": n, "m": m,
                                  "len": cfg.effective_length, "stream_bits": int(len(stream))}, ["wake_index"])
    for p in wake_positions(trace):
        out.add({"wake_index": int(p)})
    summary = {"cycles": act.cycles, "ff_toggles": act.ff_toggles,
               "ff_enable_events": act.ff_enable_events, "gate_transitions": act.gate_transitions,
               "input_fanout_events": act.input_fanout_events}
    out.notes.append("activity " + " ".join(f"{k}={v}" for k, v in summary.items()))
    out.params["activity"] = summary
    _emit(args, out)
    return 0


def _load_params(path) -> tuple:
    if path is None:
        return DEFAULT_PARAMS, "built-in"
    try:
        return PowerParams.from_json(Path(path).read_text()), str(path)
    except FileNotFoundError:
        print(f"warning: calibration file {path} not found, using built-in parameters", file=sys.stderr)
        return DEFAULT_PARAMS, "built-in"
    except (ValueError, TypeError) as exc:
        raise UsageError(f"cannot parse calibration file {path}: {exc}") from None


def cmd_sweep_power(args, seed):
    archs = args.arch or ["legacy", "lpsd"]
    ns = args.n or [8, 16, 32, 64]
    ms = args.m or [0]
    rates = args.bit_rate or [1e6]
    params, source = _load_params(args.params)
    recipe = StreamRecipe(length=args.len or 5000, seed=seed)
    try:
        rows = sweep_rows(archs, ns, ms, rates, params, TechTiming(), recipe)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Output("sweep-power", seed, {"arch": archs, "n": ns, "m": ms, "bit_rate_hz": rates,
                                       "params": source, "stream_length": recipe.length}, POWER_COLUMNS)
    for r in rows:
        out.add(r)
    _emit(args, out)
    return 0


def cmd_reliability(args, seed):
    if args.trials < MIN_TRIALS:
        raise UsageError(f"--trials must be at least {MIN_TRIALS}")
    n = (args.n or [16])[0]
    ms = args.m or [0, 1, 2]
    pbs = args.p_b or [0.01, 0.05, 0.1]
    if args.address is not None:
        try:
            address = Address(parse_bits(args.address), capacity=max(len(args.address), 64))
        except BitParseError as exc:
            raise UsageError(f"--address: {exc}") from None
        n = address.n
    else:
        address = default_address(n, seed)
    if any(not 0 <= p <= 1 for p in pbs):
        raise UsageError("--p-b values must lie in [0, 1]")
    out = Output("reliability", seed, {"address": str(address), "trials": args.trials},
                 ["n", "m", "p_b", "trials", "estimate", "stderr", "analytic", "pass"])
    failed = False
    for m in ms:
        try:
            cfg = DecoderConfig(n, m, capacity=max(n, 64))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        for k, pb in enumerate(pbs):
            est, se = monte_carlo_detection(cfg, pb, args.trials, seed=seed * 1_000_003 + m * 1009 + k, address=address)
            ana = p_lpsd(n, m, pb)
            # the binomial spread of the analytic value guards rows whose estimate is exactly 0 or 1
            tol = 3 * max(se, math.sqrt(ana * (1 - ana) / args.trials))
            ok = abs(est - ana) <= tol
            failed |= not ok
            out.add({"n": n, "m": m, "p_b": pb, "trials": args.trials, "estimate": est,
                     "stderr": se, "analytic": ana, "pass": "pass" if ok else "fail"})
    _emit(args, out)
    return 1 if failed else 0


_DEFAULT_RATES = {
    "paging_rate": [0.01, 0.02, 0.1, 0.5, 1.0],
    "report_rate": [0.001, 0.003, 0.01, 0.03, 0.1],
}


def cmd_energy(args, seed):
    pair = args.pair
    variable = args.variable or ("paging_rate" if pair == "DL" else "report_rate")
    rates = args.rates or _DEFAULT_RATES[variable]
    if args.profiles:
        try:
            profiles = Profiles.from_json(Path(args.profiles).read_text())
        except (OSError, ValueError, TypeError) as exc:
            raise UsageError(f"cannot load profiles {args.profiles}: {exc}") from None
    else:
        profiles = Profiles()
    try:
        rows = sweep(pair, variable, rates, profiles.power, profiles.timing, profiles.traffic)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    params = {"pair": pair, "variable": variable, **profiles.to_dict()}
    out = Output("energy", seed, params, SWEEP_COLUMNS)
    bad = False
    for r in rows:
        if r.feasible:
            out.add({"scenario": r.scenario, "variable": r.variable, "rate_hz": r.rate_hz,
                     "power_without_w": r.power_without_w, "power_with_w": r.power_with_w, "gap_w": r.gap_w})
        else:
            bad = True
            out.add({"scenario": r.scenario, "variable": r.variable, "rate_hz": r.rate_hz,
                     "power_without_w": "infeasible", "power_with_w": "infeasible", "gap_w": "infeasible"})
    _emit(args, out)
    return 1 if bad else 0


def _timing(args) -> TechTiming:
    base = TechTiming()
    try:
        return TechTiming(
            args.t_ff_toggle if args.t_ff_toggle is not None else base.t_ff_toggle,
            args.t_ff_enable if args.t_ff_enable is not None else base.t_ff_enable,
            args.t_gate if args.t_gate is not None else base.t_gate,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_delay(args, seed):
    timing = _timing(args)
    archs = args.arch or ["legacy", "lpsd"]
    ns = args.n or [8, 16, 32, 64]
    ms = args.m or [0]
    out = Output("delay", seed, {"t_ff_toggle_s": timing.t_ff_toggle, "t_ff_enable_s": timing.t_ff_enable,
                                 "t_gate_s": timing.t_gate}, ["arch", "n", "m", "delay_s"])
    for a in archs:
        for n in ns:
            for m in ms:
                if a == "legacy" and m:
                    continue
                try:
                    d = max_delay(a, n, m, timing)
                except ValueError as exc:
                    raise UsageError(str(exc)) from None
                out.add({"arch": a, "n": n, "m": m, "delay_s": d})
    _emit(args, out)
    return 0


def cmd_area(args, seed):
    archs = args.arch or ["legacy", "lpsd"]
    ns = args.n or [8, 16, 32, 64]
    ms = args.m or [0, 1, 2]
    out = Output("area", seed, {}, ["arch", "n", "m", "area_um2", "extrapolated"])
    for a in archs:
        for n in ns:
            for m in ms:
                if (Architecture(a), m) not in AREA_TABLE:
                    continue
                try:
                    est = area_estimate(a, n, m)
                except ValueError as exc:
                    raise UsageError(str(exc)) from None
                out.add({"arch": a, "n": n, "m": m, "area_um2": est.um2, "extrapolated": str(est.extrapolated).lower()})
    _emit(args, out)
    return 0


def cmd_codebook(args, seed):
    n = (args.n or [8])[0]
    m = (args.m or [1])[0]
    try:
        book = build_codebook(args.count, n, m, seed=seed)
    except CapacityError as exc:
        print(f"error: {exc} (binding bound: {exc.bound})", file=sys.stderr)
        return 1
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not book.verify():
        print("error: codebook failed its distance check", file=sys.stderr)
        return 1
    if args.format == "json":
        out = Output("codebook", seed, {"count": args.count, "n": n, "m": m, "d": book.min_distance}, ["address"])
        for a in book.addresses:
            out.add({"address": str(a)})
        _emit(args, out)
    else:
        text = book.dumps()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    return 0


def cmd_calibrate(args, seed):
    targets = [
        type(t)(t.config, t.bit_rate, t.power, StreamRecipe(length=args.len or 5000, seed=seed))
        for t in DEFAULT_TARGETS
    ]
    try:
        params = calibrate(targets)
    except CalibrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = params.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


COMMANDS = {
    "decode": cmd_decode,
    "sweep-power": cmd_sweep_power,
    "reliability": cmd_reliability,
    "energy": cmd_energy,
    "delay": cmd_delay,
    "area": cmd_area,
    "codebook": cmd_codebook,
    "calibrate": cmd_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (falls back to $WURKIT_SEED, then 0)")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--n", type=_list(int), default=None, help="address length(s), comma separated")
    common.add_argument("--m", type=_list(int), default=None, help="mismatch tolerance(s), comma separated")
    common.add_argument("--arch", type=_list(lambda s: Architecture(s).value), default=None, help="legacy and/or lpsd")

    p = argparse.ArgumentParser(prog="wurkit", description="Wake-up receiver address decoder toolkit.")
    p.add_argument("--version", action="version", version=f"wurkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("decode", parents=[common], help="run a decoder over a bit stream")
    s.add_argument("--address")
    s.add_argument("--stream")
    s.add_argument("--stream-file")
    s.add_argument("--len", type=int, default=None, help="effective address length")

    s = sub.add_parser("sweep-power", parents=[common], help="power, delay and area over configurations")
    s.add_argument("--bit-rate", type=_list(_rate), default=None, help="bit rates in Hz, k/M suffixes allowed")
    s.add_argument("--params", default=None, help="calibration JSON")
    s.add_argument("--len", type=int, default=None, help="test stream length in bits")

    s = sub.add_parser("reliability", parents=[common], help="Monte Carlo detection against the analytic value")
    s.add_argument("--p-b", type=_list(float), default=None)
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--address", default=None)

    s = sub.add_parser("energy", parents=[common], help="device power with and without a wake-up receiver")
    s.add_argument("--pair", choices=sorted(PAIRS), default="DL")
    s.add_argument("--variable", choices=["paging_rate", "report_rate"], default=None)
    s.add_argument("--rates", type=_list(float), default=None, help="event rates in Hz, increasing")
    s.add_argument("--profiles", default=None, help="profiles JSON")

    s = sub.add_parser("delay", parents=[common], help="worst-case decoding delay")
    s.add_argument("--t-ff-toggle", type=float, default=None)
    s.add_argument("--t-ff-enable", type=float, default=None)
    s.add_argument("--t-gate", type=float, default=None)

    sub.add_parser("area", parents=[common], help="synthesis area lookup")

    s = sub.add_parser("codebook", parents=[common], help="addresses at pairwise distance 2m+1")
    s.add_argument("--count", type=int, default=4)

    s = sub.add_parser("calibrate", parents=[common], help="fit power coefficients to the anchor points")
    s.add_argument("--len", type=int, default=None, help="test stream length in bits")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        seed = _seed(args)
        return COMMANDS[args.command](args, seed)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
