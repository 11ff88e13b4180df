"""Command-line front end: compile, verify, faults, sweep, cost.

Exit codes: 0 success, 1 usage or I/O error, 2 compile (partition) failure,
3 verification mismatch. Every artifact embeds the run configuration and
tool version; outputs are byte-identical for identical configuration and
seed (output paths are not part of the configuration).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import __version__
from .compiler import PartitionError, compile_program, expand_reference
from .faults import (
    NoiseModel,
    enumerate_pair_faults,
    enumerate_single_faults,
    first_order_oracle,
    gadgetize,
    monte_carlo_infidelity,
    spacetime_cost,
    surgery_baseline_cost,
)
from .ir import (
    Circuit,
    Gate,
    ParseError,
    parse_circuit,
    parse_rotation_program,
    with_x_detection,
)
from .semantics import (
    NotDiagonalizableError,
    equal_up_to_global_phase,
    phase_polynomial_of,
    poly_equal,
    simulate,
)


_PATH_FIELDS = {"infile", "circuit", "a", "b"}


def _config_dict(args, fields: list[str]) -> dict:
    """Reproducibility header; input paths are reduced to their basenames so
    artifacts stay byte-identical across working directories."""
    config = {"version": __version__}
    for f in fields:
        value = getattr(args, f)
        if f in _PATH_FIELDS and isinstance(value, str):
            value = os.path.basename(value)
        config[f] = value
    return config


def _read(path: str) -> str:
    with open(path) as f:
        return f.read()


def _write(path: str, text: str):
    with open(path, "w") as f:
        f.write(text)


def _load_circuit_or_program(path: str):
    """Returns ('circuit', Circuit) or ('program', RotationProgram)."""
    text = _read(path)
    payload = json.loads(text)
    if "gates" in payload:
        return "circuit", parse_circuit(text)
    return "program", parse_rotation_program(text)


def _qubit_list(text: str | None) -> list[int]:
    if not text:
        return []
    return [int(x) for x in text.split(",") if x != ""]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_compile(args) -> int:
    try:
        program = parse_rotation_program(_read(args.infile))
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        report = compile_program(
            program,
            budget=args.budget,
            seed=args.seed,
            objective=args.objective,
        )
    except PartitionError as exc:
        print(f"compile failed: {exc}", file=sys.stderr)
        return 2
    circuit = report.circuit
    if args.measure_x:
        circuit = with_x_detection(circuit, _qubit_list(args.measure_x))
    config = _config_dict(args, ["infile", "objective", "budget", "seed", "measure_x"])
    _write(args.out, circuit.to_json() + "\n")
    if args.diagram:
        _write(args.diagram, circuit.render_text())
    if args.report:
        payload = {
            "config": config,
            "t_depth": report.t_depth,
            "cnot_depth": report.cnot_depth,
            "cnot_count": report.cnot_count,
            "t_count": report.t_count,
            "orderings_tried": report.orderings_tried,
            "blocks": [b.to_lists() for b in report.partition.blocks]
            if report.partition
            else [],
            "ordering": list(report.partition.ordering) if report.partition else [],
        }
        _write(args.report, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(
        f"compiled: t_depth={report.t_depth} cnot_depth={report.cnot_depth} "
        f"cnot_count={report.cnot_count} t_count={report.t_count}"
    )
    return 0


def _as_body(kind: str, obj) -> Circuit:
    return expand_reference(obj) if kind == "program" else obj


def cmd_verify(args) -> int:
    try:
        kind_a, a = _load_circuit_or_program(args.a)
        kind_b, b = _load_circuit_or_program(args.b)
    except (OSError, ParseError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.oracle == "poly":
        try:
            pa = phase_polynomial_of(_as_body(kind_a, a))
            pb = phase_polynomial_of(_as_body(kind_b, b))
        except NotDiagonalizableError as exc:
            print(
                f"error: {exc}; the polynomial oracle needs the unitary "
                "X/CNOT/SWAP/diagonal fragment, try --oracle dense",
                file=sys.stderr,
            )
            return 1
        ok = poly_equal(pa, pb, up_to_global=not args.strict_global)
    else:
        sides = []
        for kind, obj in ((kind_a, a), (kind_b, b)):
            if kind == "program":
                body = expand_reference(obj)
                preps = tuple(Gate("PrepPlus", (q,)) for q in range(body.n))
                circ = Circuit(body.n, preps + body.gates)
            else:
                circ = obj
            ref = simulate(circ, seed=0)
            post = dict(ref.outcomes)
            res = simulate(circ, postselect=post, seed=0)
            sides.append(res.state)
        if sides[0].shape != sides[1].shape:
            ok = False
        else:
            ok = equal_up_to_global_phase(sides[0], sides[1], 1e-8)
    if ok:
        print("equivalent")
        return 0
    print("NOT equivalent", file=sys.stderr)
    return 3


def cmd_faults(args) -> int:
    try:
        circuit = parse_circuit(_read(args.circuit))
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    outputs = _qubit_list(args.outputs)
    if args.gadgetize:
        circuit = gadgetize(circuit)
    payload: dict = {
        "config": _config_dict(
            args, ["circuit", "outputs", "singles", "pairs", "first_order", "gadgetize", "tdecode"]
        )
    }
    if args.singles:
        table = enumerate_single_faults(circuit, outputs, sites=args.sites)
        payload["singles"] = table.to_dict()
        print(
            f"singles: {table.count('detected')} detected, "
            f"{table.count('harmless')} harmless, {table.count('harmful')} harmful"
        )
    if args.pairs:
        pairs = enumerate_pair_faults(circuit, outputs)
        payload["pairs"] = pairs.to_dict()
        print(f"pairs: {pairs.harmful} harmful of {pairs.total}")
    if args.first_order:
        fo = first_order_oracle(
            circuit, outputs, NoiseModel(1e-4, 0.0, args.tdecode)
        )
        payload["first_order"] = fo.to_dict()
        print(f"first-order p_L coefficient: {fo.coefficient:.6f}")
    if args.out:
        _write(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_sweep(args) -> int:
    try:
        circuit = parse_circuit(_read(args.circuit))
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    outputs = _qubit_list(args.outputs)
    if args.gadgetize:
        circuit = gadgetize(circuit)
    pls = [float(x) for x in args.pl.split(",")]
    rs_ = [float(x) for x in args.r.split(",")]
    shots = int(float(args.shots))
    rows = []
    for p_l in pls:
        for r in rs_:
            nm = NoiseModel.from_ratio(p_l, r, args.tdecode)
            rep = monte_carlo_infidelity(circuit, outputs, nm, shots, seed=args.seed)
            rows.append(
                (p_l, r, shots, rep.accepted, rep.infidelity, rep.stderr)
            )
            if rep.undefined:
                print(f"warning: zero accepted shots at p_L={p_l} r={r}", file=sys.stderr)
    with open(args.out, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["p_L", "r", "shots", "accepted", "infidelity", "stderr"])
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_cost(args) -> int:
    distances = [int(x) for x in args.distance.split(",")]
    print("d  qubit-cycles  surgery-baseline  ratio")
    for d in distances:
        ours = spacetime_cost(
            d, rounds=args.rounds, patches=args.patches,
            qubits_per_patch_factor=args.factor,
        )
        base = surgery_baseline_cost(d)
        print(f"{d}  {ours}  {base:.0f}  {base / ours:.2f}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotsynth",
        description="Compile multi-qubit phase-rotation programs into "
        "minimal-T-depth circuits and analyze their fault tolerance.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a rotation program")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="circuit JSON output")
    p.add_argument("--report", help="compile report JSON output")
    p.add_argument("--diagram", help="text diagram output")
    p.add_argument("--objective", choices=["cnot-depth", "cnot-count"],
                   default="cnot-depth")
    p.add_argument("--budget", type=int, default=200,
                   help="ordering samples; 1 compiles the given order")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--measure-x", dest="measure_x",
                   help="append X-basis detection on these qubits (comma list)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("verify", help="check equivalence of two artifacts")
    p.add_argument("--a", required=True, help="circuit or program JSON")
    p.add_argument("--b", required=True)
    p.add_argument("--oracle", choices=["poly", "dense"], default="dense")
    p.add_argument("--strict-global", action="store_true",
                   help="compare global phase too (poly oracle)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("faults", help="exhaustive fault enumeration")
    p.add_argument("--circuit", required=True)
    p.add_argument("--outputs", required=True, help="output qubits, comma list")
    p.add_argument("--singles", action="store_true")
    p.add_argument("--pairs", action="store_true")
    p.add_argument("--first-order", dest="first_order", action="store_true")
    p.add_argument("--sites", choices=["tprep", "all"], default="tprep")
    p.add_argument("--gadgetize", action="store_true",
                   help="replace in-circuit T gates by teleportation gadgets")
    p.add_argument("--tdecode", type=int, default=1)
    p.add_argument("--out", help="report JSON output")
    p.set_defaults(func=cmd_faults)

    p = sub.add_parser("sweep", help="Monte Carlo noise sweep, CSV output")
    p.add_argument("--circuit", required=True)
    p.add_argument("--outputs", required=True)
    p.add_argument("--pl", required=True, help="comma list of p_L values")
    p.add_argument("--r", required=True, help="comma list of p_T/p_L ratios")
    p.add_argument("--shots", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tdecode", type=int, default=1)
    p.add_argument("--gadgetize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cost", help="spacetime cost model")
    p.add_argument("--distance", required=True, help="comma list of distances")
    p.add_argument("--rounds", type=int, default=7)
    p.add_argument("--patches", type=int, default=8)
    p.add_argument("--factor", type=int, default=3)
    p.set_defaults(func=cmd_cost)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
