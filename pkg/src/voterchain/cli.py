"""Command-line harness: thermodynamic tables, tape-machine simulation,
exact distribution evolution, the verification suite, and parameter sweeps.

Output is CSV with `#` comment lines recording the artifact version, the
resolved configuration, and the seed; identical configurations give
byte-identical files whether trajectories run serially or across workers.
Numbers are written with 9 significant digits unless --digits says otherwise.
A plain key=value file passed as --config supplies defaults; explicit flags
override it.
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .core import Boundary, ModelParams, SpinTape, decode_state, encode_state, magnetization_vector
from .dynamics import build_generator, evolve_exact, point_mass, uniform_distribution
from .thermo import gamma_from_temperature, thermo_report
from .verify import run_verify
from .voter import TuringVoter

SI_BOLTZMANN = 1.380649e-23

_HEADER_SKIP = {"func", "command", "config", "out", "events", "seed", "workers"}


def _fmt(value: float, digits: int) -> str:
    return f"{value:.{digits}g}"


def _config_line(args: argparse.Namespace) -> str:
    parts = []
    for key in sorted(vars(args)):
        if key in _HEADER_SKIP:
            continue
        value = getattr(args, key)
        if value is None or callable(value):
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        parts.append(f"{key.replace('_', '-')}={value}")
    return " ".join(parts)


def _header(args: argparse.Namespace) -> list[str]:
    return [
        f"# voterchain {__version__}",
        f"# command: {args.command}",
        f"# config: {_config_line(args)}",
        f"# seed: {getattr(args, 'seed', 0)}",
    ]


def _write_text(path: str, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _resolve_boltzmann(args: argparse.Namespace) -> float:
    if args.units == "si":
        if args.boltzmann is None:
            raise ValueError("--units si requires an explicit --boltzmann")
        return args.boltzmann
    return 1.0 if args.boltzmann is None else args.boltzmann


def _resolve_params(args: argparse.Namespace) -> ModelParams:
    boundary = Boundary(args.boundary)
    triple = args.coupling is not None or args.temperature is not None
    if args.gamma is not None and triple:
        raise ValueError("give either --gamma or --coupling/--temperature, not both")
    if args.gamma is not None:
        return ModelParams.from_gamma(args.gamma, boundary=boundary)
    if args.coupling is None or args.temperature is None:
        raise ValueError("need --gamma, or both --coupling and --temperature")
    return ModelParams.from_physical(args.coupling, args.temperature,
                                     _resolve_boltzmann(args), boundary=boundary)


def _initial_tape(spec: str, n: int, boundary: Boundary,
                  rng: np.random.Generator | None) -> SpinTape:
    if spec == "all-up":
        return SpinTape.uniform(n, +1, boundary)
    if spec == "all-down":
        return SpinTape.uniform(n, -1, boundary)
    if spec == "alternating":
        return SpinTape.alternating(n, boundary)
    if spec == "random":
        if rng is None:
            raise ValueError("a random initial tape needs a sampling stream")
        return SpinTape.random(n, rng, boundary)
    if spec.startswith("index:"):
        return decode_state(int(spec.split(":", 1)[1]), n, boundary)
    raise ValueError(f"unknown --init {spec!r}")


def _thermo_row(n: int, coupling: float, temperature: float, k: float, digits: int) -> str:
    rep = thermo_report(n, coupling, temperature, k)
    gamma = gamma_from_temperature(coupling, temperature, k)
    fields = [str(n)] + [
        _fmt(v, digits)
        for v in (coupling, temperature, k, gamma, rep.free_energy, rep.internal_energy,
                  rep.entropy, rep.landauer_floor, rep.gap)
    ]
    return ",".join(fields)


THERMO_COLUMNS = "N,J,T,k,gamma,F,U,S,landauer_floor,gap"


def cmd_thermo(args: argparse.Namespace) -> int:
    if args.gamma is not None:
        raise ValueError("closed-form thermodynamics need --coupling and --temperature")
    if args.coupling is None or args.temperature is None:
        raise ValueError("need both --coupling and --temperature")
    k = _resolve_boltzmann(args)
    lines = _header(args) + [THERMO_COLUMNS,
                             _thermo_row(args.n, args.coupling, args.temperature, k, args.digits)]
    _write_text(args.out, lines)
    return 0


def _run_trajectory(payload) -> tuple[bool, int | None, int, float, list | None]:
    init, n, params, max_steps, child, want_events = payload
    rng = np.random.default_rng(child)
    tape = _initial_tape(init, n, params.boundary, rng)
    machine = TuringVoter(tape, params, rng)
    events: list | None = [] if want_events else None
    msum = int(tape.symbols.sum(dtype=np.int64))
    spent = 0
    while not machine.is_consensus() and spent < max_steps:
        ev = machine.step()
        spent += 1
        if ev.flipped:
            msum += 2 * ev.new_symbol
            if events is not None:
                events.append((machine.time, ev.site, ev.new_symbol, msum / n))
    halted = machine.is_consensus()
    symbol = int(machine.tape.symbols[0]) if halted else None
    return halted, symbol, machine.step_count, msum / n, events


def cmd_simulate(args: argparse.Namespace) -> int:
    params = _resolve_params(args)
    n = args.n
    if args.max_steps is not None:
        max_steps = args.max_steps
    elif args.t_end is not None:
        max_steps = math.ceil(args.t_end * n)
    else:
        max_steps = 10_000
    if max_steps < 0:
        raise ValueError("--max-steps must be nonnegative")
    want_events = args.events is not None
    children = np.random.SeedSequence(args.seed).spawn(args.trajectories)
    payloads = [(args.init, n, params, max_steps, child, want_events) for child in children]
    if args.workers > 1 and payloads:
        chunk = max(1, len(payloads) // (args.workers * 8))
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_run_trajectory, payloads, chunksize=chunk))
    else:
        results = [_run_trajectory(p) for p in payloads]
    d = args.digits
    lines = _header(args) + ["trajectory_id,halted,consensus_symbol,steps,final_magnetization"]
    for i, (halted, symbol, steps, final_m, _) in enumerate(results):
        sym = "" if symbol is None else str(symbol)
        lines.append(f"{i},{'true' if halted else 'false'},{sym},{steps},{_fmt(final_m, d)}")
    _write_text(args.out, lines)
    if want_events:
        ev_lines = _header(args) + ["time,site,new_symbol,magnetization"]
        for i, (_, _, _, _, events) in enumerate(results):
            ev_lines.append(f"# trajectory {i}")
            for t, site, sym, m in events:
                ev_lines.append(f"{_fmt(t, d)},{site},{sym},{_fmt(m, d)}")
        _write_text(args.events, ev_lines)
    return 0


def _summary_path(out: str) -> str:
    if out == "-":
        return "-"
    if out.endswith(".csv"):
        return out[:-4] + ".summary.csv"
    return out + ".summary"


def cmd_exact(args: argparse.Namespace) -> int:
    params = _resolve_params(args)
    n = args.n
    gen = build_generator(n, params)
    if args.init == "uniform":
        p0 = uniform_distribution(n)
    else:
        p0 = point_mass(encode_state(_initial_tape(args.init, n, params.boundary, None)), n)
    if args.t_steps < 1:
        raise ValueError("--t-steps must be at least 1")
    times = np.linspace(0.0, args.t_end, args.t_steps + 1)
    m = magnetization_vector(n)
    d = args.digits
    dist_lines = _header(args) + ["time,state_index,probability"]
    summary_lines = _header(args) + ["time,mean_magnetization"]
    for t in times:
        p = evolve_exact(p0, gen, float(t))
        clipped = np.clip(p, 0.0, None)
        for idx in range(2**n):
            dist_lines.append(f"{_fmt(t, d)},{idx},{_fmt(clipped[idx], d)}")
        summary_lines.append(f"{_fmt(t, d)},{_fmt(float(m @ p), d)}")
    _write_text(args.out, dist_lines)
    summary_out = _summary_path(args.out)
    _write_text(summary_out, summary_lines)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    results = run_verify(seed=args.seed, fast=args.fast,
                         inject_gamma_error=args.inject_gamma_error)
    d = args.digits
    lines = _header(args) + ["name,status,residual,tolerance"]
    for r in results:
        lines.append(f"{r.name},{r.status},{_fmt(r.residual, d)},{_fmt(r.tolerance, d)}")
    for r in results:
        if r.detail:
            lines.append(f"# note {r.name}: {r.detail}")
    _write_text(args.out, lines)
    return 0 if all(r.passed for r in results) else 1


def _parse_n_range(text: str) -> range:
    try:
        a, b = (int(part) for part in text.split(":"))
    except ValueError as exc:
        raise ValueError(f"--sweep-n expects a:b, got {text!r}") from exc
    if b < a or a < 1:
        raise ValueError(f"empty or invalid size range {text!r}")
    return range(a, b + 1)


def _parse_betaj_range(text: str) -> np.ndarray:
    try:
        a, b, steps = text.split(":")
        lo, hi, count = float(a), float(b), int(steps)
    except ValueError as exc:
        raise ValueError(f"--sweep-betaj expects a:b:steps, got {text!r}") from exc
    if count < 1:
        raise ValueError("--sweep-betaj needs at least one point")
    return np.linspace(lo, hi, count)


def cmd_sweep(args: argparse.Namespace) -> int:
    lines = _header(args) + [THERMO_COLUMNS]
    if args.petabit:
        if args.sweep_n or args.sweep_betaj:
            raise ValueError("--petabit is a preset; drop the sweep ranges")
        lines.append(_thermo_row(10**15, 0.0, 300.0, SI_BOLTZMANN, args.digits))
        _write_text(args.out, lines)
        return 0
    if not args.sweep_n or not args.sweep_betaj:
        raise ValueError("sweep needs --sweep-n and --sweep-betaj (or --petabit)")
    temperature = 1.0 if args.temperature is None else args.temperature
    k = _resolve_boltzmann(args)
    for n in _parse_n_range(args.sweep_n):
        for x in _parse_betaj_range(args.sweep_betaj):
            lines.append(_thermo_row(n, float(x) * k * temperature, temperature, k, args.digits))
    _write_text(args.out, lines)
    return 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value file supplying flag defaults")
    sub.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
    sub.add_argument("--seed", type=int, default=0, help="master seed, recorded in headers")
    sub.add_argument("--digits", type=int, default=9, help="significant digits in output")
    sub.add_argument("--units", choices=("natural", "si"), default="natural",
                     help="natural: k defaults to 1; si: --boltzmann required")


def _add_model(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n", type=int, required=True, help="number of cells")
    sub.add_argument("--gamma", type=float, help="flip-rate bias in [-1, 1]")
    sub.add_argument("--coupling", type=float, help="bond energy J")
    sub.add_argument("--temperature", type=float, help="temperature T")
    sub.add_argument("--boltzmann", type=float, help="Boltzmann constant k")
    sub.add_argument("--boundary", choices=("periodic", "open"), default="periodic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voterchain",
                                     description="Voter-style tape machine and spin-chain toolkit")
    parser.add_argument("--version", action="version", version=f"voterchain {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("thermo", help="one closed-form thermodynamics row")
    _add_model(p)
    _add_common(p)
    p.set_defaults(func=cmd_thermo)

    p = commands.add_parser("simulate", help="sample seeded machine trajectories")
    _add_model(p)
    _add_common(p)
    p.add_argument("--trajectories", type=int, default=1)
    p.add_argument("--t-end", type=float, help="machine-time budget (ceil(t*N) steps)")
    p.add_argument("--max-steps", type=int, help="explicit step budget (overrides --t-end)")
    p.add_argument("--init", default="all-up",
                   help="all-up | all-down | alternating | random | index:<int>")
    p.add_argument("--events", help="also write a per-flip event log to this path")
    p.add_argument("--workers", type=int, default=1,
                   help="process count; output bytes do not depend on it")
    p.set_defaults(func=cmd_simulate)

    p = commands.add_parser("exact", help="evolve the full distribution exactly")
    _add_model(p)
    _add_common(p)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--t-steps", type=int, default=10,
                   help="number of intervals on [0, t-end]")
    p.add_argument("--init", default="all-up",
                   help="all-up | all-down | alternating | uniform | index:<int>")
    p.set_defaults(func=cmd_exact)

    p = commands.add_parser("verify", help="run the verification suite")
    _add_common(p)
    p.add_argument("--fast", action="store_true", help="shrink sampled checks")
    p.add_argument("--inject-gamma-error", action="store_true",
                   help="append a negative control that must fail")
    p.set_defaults(func=cmd_verify)

    p = commands.add_parser("sweep", help="thermodynamics over a parameter grid")
    _add_common(p)
    p.add_argument("--sweep-n", help="cell-count range a:b (inclusive)")
    p.add_argument("--sweep-betaj", help="J/(kT) range a:b:steps")
    p.add_argument("--temperature", type=float, help="temperature for the grid (default 1)")
    p.add_argument("--boltzmann", type=float, help="Boltzmann constant k")
    p.add_argument("--petabit", action="store_true",
                   help="preset: 10^15 cells at 300 K with the SI Boltzmann constant")
    p.set_defaults(func=cmd_sweep)
    return parser


def _config_tokens(path: str) -> list[str]:
    tokens: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line without '=': {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if value.lower() in ("true", "yes", "on"):
                tokens.append(flag)
            elif value.lower() in ("false", "no", "off"):
                continue
            else:
                tokens.extend([flag, value])
    return tokens


def _apply_config_file(argv: list[str]) -> list[str]:
    path = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path is None or not argv:
        return argv
    return [argv[0]] + _config_tokens(path) + argv[1:]


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_apply_config_file(argv))
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
