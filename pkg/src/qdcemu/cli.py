"""Command-line entry point: ``qdcemu {cost,rcnot-sweep,ghz,tomography,dump-circuit}``.

Exit codes: 0 success, 1 configuration/validation error, 2 internal invariant
violation.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import config as cfg
from .catcomm import RcnotPlan, new_circuit, remote_cnot
from .harness import InvariantError, run_cost, run_ghz, run_rcnot_sweep, run_tomography
from .ghz import compile_ghz
from .noise import NoiseError, NoiseParams
from .topology import TopologyError, make_line, make_topology
from .circuit import CircuitError
from .states import StateError

SUBCOMMANDS = {
    "cost": "cost",
    "rcnot-sweep": "rcnot_sweep",
    "ghz": "ghz",
    "tomography": "tomography",
}

_NOISE_FLAGS = {
    "kappa_t": "kappa_T",
    "kappa_f": "kappa_F",
    "delta_t": "delta_t",
    "n_coll_t": "n_coll_T",
    "n_coll_f": "n_coll_F",
    "fiber_length_km": "fiber_length_km",
    "attenuation": "attenuation_per_km",
    "idle_theta": "idle_damping_theta",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config; flags override its values")
    p.add_argument("--n", type=int, dest="n_qpus", help="number of QPUs")
    p.add_argument("--kinds", help="comma-separated topology kinds (line,ring,star)")
    p.add_argument("--kappa-t", type=float, help="transduction coupling (default 0.5)")
    p.add_argument("--kappa-f", type=float, help="fiber coupling; omit to calibrate from attenuation")
    p.add_argument("--delta-t", type=float)
    p.add_argument("--n-coll-t", type=int, help="collisions per transducer interface")
    p.add_argument("--n-coll-f", type=int, help="collisions per fiber segment")
    p.add_argument("--fiber-length-km", type=float)
    p.add_argument("--attenuation", type=float, help="fiber attenuation per km")
    p.add_argument("--idle-theta", type=float, help="synthetic idle damping angle per hop")
    p.add_argument("--hops", type=int, help="max hops (rcnot-sweep) or hop count (tomography)")
    p.add_argument("--backend", choices=cfg.BACKENDS)
    p.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="write JSON-lines records here")
    p.add_argument("--csv", help="write a CSV projection of the records here")
    p.add_argument("--timing", action="store_true", help="include wall_time_ms in records")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for independent points")


_HELP = {
    "cost": "Bell-link cost of GHZ preparation per topology",
    "rcnot-sweep": "remote CNOT fidelity against hop count",
    "ghz": "GHZ fidelity per topology",
    "tomography": "Choi-state process fidelity of the remote CNOT",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdcemu", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        _add_common(sub.add_parser(name, help=_HELP[name]))
    dump = sub.add_parser("dump-circuit", help="print a circuit listing")
    _add_common(dump)
    dump.add_argument("--kind", default="star", help="topology kind for the GHZ circuit")
    dump.add_argument("--rcnot", action="store_true", help="dump the --hops remote CNOT instead of GHZ")
    return parser


def config_from_args(args, experiment: str) -> cfg.ExperimentConfig:
    if args.config:
        base = cfg.read_config(args.config)
        if base.experiment != experiment:
            base = replace(base, experiment=experiment)
    else:
        base = cfg.ExperimentConfig(experiment)

    noise = base.noise.to_dict()
    for flag, key in _NOISE_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            noise[key] = value
    try:
        params = NoiseParams(**noise)
    except NoiseError as exc:
        raise cfg.ConfigError(f"noise: {exc}") from None

    updates = {"noise": params}
    if args.n_qpus is not None:
        updates["n_qpus"] = args.n_qpus
        updates["n_values"] = None
    if args.kinds:
        updates["kinds"] = [k.strip() for k in args.kinds.split(",") if k.strip()]
    if args.hops is not None:
        updates["max_hops"] = args.hops
        updates["hops"] = args.hops
    for name in ("backend", "shots", "seed"):
        if getattr(args, name) is not None:
            updates[name] = getattr(args, name)
    if args.out is not None:
        updates["output"] = args.out
    backend = updates.get("backend", base.backend)
    if backend == "exact" and (args.seed is not None or args.shots is not None):
        raise cfg.ConfigError("--seed/--shots only apply to the trajectories backend")
    return replace(base, **updates)


def _fidelity_table(records) -> str:
    lines = [f"{'experiment':<12} {'kind':<6} {'n':>3} {'hops':>4} {'input':<8} {'fidelity':>10} {'stderr':>10}"]
    for r in records:
        hops = "" if r.hops is None else r.hops
        lines.append(
            f"{r.experiment:<12} {r.kind:<6} {r.n:>3} {hops!s:>4} {r.input:<8} {r.fidelity:>10.6f} {r.stderr:>10.6f}"
        )
    return "\n".join(lines) + "\n"


def _cost_table(rows) -> str:
    lines = [f"{'kind':<6} {'n':>3} {'formula':>8} {'counted':>8}"]
    for r in rows:
        formula = "-" if r.links_formula is None else r.links_formula
        lines.append(f"{r.kind:<6} {r.n:>3} {formula!s:>8} {r.links_counted:>8}")
    return "\n".join(lines) + "\n"


def _emit(records, text: str, args, log) -> None:
    sys.stdout.write(text)
    if args.out:
        cfg.write_results(records, args.out)
        log(f"wrote {len(records)} records to {args.out}")
    if args.csv:
        if records and isinstance(records[0], cfg.CostRow):
            raise cfg.ConfigError("--csv applies to fidelity experiments only")
        Path(args.csv).write_text(cfg.format_csv(records))
        log(f"wrote CSV to {args.csv}")


def _run(args, log) -> None:
    if args.command == "dump-circuit":
        config = config_from_args(args, "ghz")
        if args.rcnot:
            t = make_line(config.hops + 1)
            c = new_circuit(t)
            plan = RcnotPlan(t.qpu(1).processing[0], t.qpu(t.n).processing[0], tuple(t.ids), tuple(c.add_clbits(2)))
            remote_cnot(c, t, plan, config.noise)
        else:
            _, c = compile_ghz(make_topology(args.kind, config.n_qpus), config.noise)
        sys.stdout.write(c.dump())
        return

    experiment = SUBCOMMANDS[args.command]
    config = config_from_args(args, experiment)
    log(f"running {experiment} (backend={config.backend}, n={config.n_qpus})")
    if experiment == "cost":
        rows = run_cost(config)
        _emit(rows, _cost_table(rows), args, log)
        return
    if experiment == "rcnot_sweep":
        records = run_rcnot_sweep(config, jobs=args.jobs)
    elif experiment == "ghz":
        records = run_ghz(config, jobs=args.jobs)
    else:
        report = run_tomography(config)
        records = report.records(cfg.params_echo(config.noise))
        log(f"average basis-state fidelity {report.average_basis_fidelity:.6f}")
    if not args.timing:
        for r in records:
            r.wall_time_ms = None
    for r in records:
        if not 0.0 <= r.fidelity <= 1.0:
            raise InvariantError(f"fidelity {r.fidelity} outside [0, 1]")
    _emit(records, _fidelity_table(records), args, log)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    def log(msg):
        print(f"qdcemu: {msg}", file=sys.stderr)

    try:
        _run(args, log)
    except (cfg.ConfigError, NoiseError, TopologyError, CircuitError, StateError, OSError) as exc:
        log(f"error: {exc}")
        return 1
    except (InvariantError, AssertionError) as exc:
        log(f"internal invariant violated: {exc}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
