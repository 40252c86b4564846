"""Command-line front end.

Subcommands: ``simulate``, ``protocol``, ``figure1``, ``verify``.

Exit codes: 0 success, 1 invalid input, 2 verification failure.  Output is
written in full or not at all; numbers carry 17 significant digits.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import os
import sys
import tempfile
from typing import Any, Sequence

import numpy as np

from cavity_w.analytic import propagate_general
from cavity_w.oracle import (
    MAX_FULL_ATOMS,
    build_subspace_hamiltonian,
    full_space_subspace_propagate,
    oracle_propagate,
)
from cavity_w.protocol import ProtocolError, ProtocolTrace, run_full_protocol
from cavity_w.subspace import PROPAGATION_TOL, CouplingConfig, SubspaceState, basis_ket, make_w_state
from cavity_w.timing import figure1_grid, plan_timing
from cavity_w import verify as verify_mod

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFY_FAILED = 2

EXPLICIT_NORM_TOL = 1e-6


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class VerificationFailed(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for failed verification
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def fmt(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        # + 0.0 folds -0.0 into 0.0
        return format(float(x) + 0.0, ".17g")
    return str(x)


def dump_text(data: dict, indent: int = 0) -> str:
    """Nested ``key: value`` text; dicts indent by two spaces."""
    out = []
    pad = "  " * indent
    for key, value in data.items():
        if isinstance(value, dict):
            out.append(f"{pad}{key}:\n")
            out.append(dump_text(value, indent + 1))
        elif isinstance(value, (list, tuple)):
            out.append(f"{pad}{key}: [{', '.join(fmt(v) for v in value)}]\n")
        else:
            out.append(f"{pad}{key}: {fmt(value)}\n")
    return "".join(out)


def flatten(data: dict, prefix: str = "") -> list[tuple[str, str]]:
    rows = []
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            rows += flatten(value, name + ".")
        elif isinstance(value, (list, tuple)):
            rows.append((name, " ".join(fmt(v) for v in value)))
        else:
            rows.append((name, fmt(value)))
    return rows


def amplitudes_dict(state: SubspaceState) -> dict:
    out = {}
    for k, c in enumerate(state.amplitudes, start=1):
        out[f"c{k}_re"] = c.real
        out[f"c{k}_im"] = c.imag
    return out


def write_output(text: str, path: str | None) -> None:
    """Write atomically to ``path`` (stdout when None)."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cavity_w-", suffix=".tmp")
    except OSError as exc:
        raise ConfigError("out", f"cannot write to {path!r} ({exc.strerror})") from exc
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise ConfigError("out", f"cannot write to {path!r} ({exc.strerror})") from exc


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def parse_number(text: str, field: str) -> float:
    """Real number or simple arithmetic with ``pi``, e.g. ``3*pi/2``."""

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](ev(node.operand))
        raise ValueError

    try:
        value = ev(ast.parse(str(text).strip(), mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError):
        raise ConfigError(field, f"cannot parse {text!r} as a number") from None
    if not math.isfinite(value):
        raise ConfigError(field, f"{text!r} is not finite")
    return value


def parse_list(value: Any, field: str) -> list[float]:
    if value is None:
        return []
    if isinstance(value, (int, float)):
        return [float(value)]
    if isinstance(value, str):
        items = [s for s in value.replace(" ", "").split(",") if s]
    else:
        items = list(value)
    return [parse_number(v, field) if isinstance(v, str) else float(v) for v in items]


def parse_couplings(value: Any) -> CouplingConfig:
    f = parse_list(value, "couplings")
    if not f:
        raise ConfigError("couplings", "at least one coupling is required")
    if any(x <= 0 for x in f):
        raise ConfigError("couplings", "every f_j > 0 is required")
    return CouplingConfig(np.array(f))


def parse_initial(spec: Any, n_atoms: int) -> SubspaceState:
    """``excite:q``, ``photon``, ``w-minus:M``, ``w-plus:M`` or explicit amplitudes."""
    text = str(spec).strip()
    kind, _, arg = text.partition(":")
    kind = kind.lower()
    try:
        if kind == "photon" and not arg:
            return basis_ket(n_atoms, n_atoms + 1)
        if kind == "excite":
            return basis_ket(n_atoms, int(arg))
        if kind in ("w-minus", "w-plus"):
            return make_w_state(int(arg), -1 if kind == "w-minus" else 1, embed_into=n_atoms)
    except ValueError as exc:
        raise ConfigError("initial", str(exc)) from None
    try:
        amps = np.array([complex(s) for s in text.replace(" ", "").split(",") if s])
    except ValueError:
        raise ConfigError("initial", f"unrecognised initial state {text!r}") from None
    if amps.size != n_atoms + 1:
        raise ConfigError("initial", f"need {n_atoms + 1} amplitudes, got {amps.size}")
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > EXPLICIT_NORM_TOL:
        raise ConfigError("initial", f"amplitudes not normalized (norm {norm!r})")
    return SubspaceState(amps / norm)


def _positive_int(value: Any, field: str, minimum: int = 1) -> int:
    try:
        v = int(value)
    except (TypeError, ValueError):
        raise ConfigError(field, f"expected an integer, got {value!r}") from None
    if v != float(value) or v < minimum:
        raise ConfigError(field, f"must be an integer >= {minimum}")
    return v


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path!r} ({exc.strerror})") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON in {path!r} ({exc.msg})") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be an object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def merged(args: argparse.Namespace, key: str, default: Any = None) -> Any:
    """Flag value, else config-file value, else default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    return args.config_data.get(key, default)


def _check_state(state: SubspaceState, tol: float) -> None:
    if abs(state.norm - 1.0) > tol:
        raise VerificationFailed(f"emitted state has norm {state.norm!r}")


def cmd_simulate(args: argparse.Namespace) -> int:
    config = parse_couplings(merged(args, "couplings"))
    n = config.n_atoms
    initial = parse_initial(merged(args, "initial", "excite:1"), n)
    times_spec = merged(args, "times")
    t_max = merged(args, "t_max")
    if times_spec is not None:
        times = parse_list(times_spec, "times")
    elif t_max is not None:
        steps = _positive_int(merged(args, "steps", 101), "steps", minimum=0)
        times = list(np.linspace(0.0, parse_number(str(t_max), "t_max"), steps))
    else:
        raise ConfigError("times", "give --times or --t-max/--steps")
    method = merged(args, "propagator", "analytic")
    if method == "full" and n > MAX_FULL_ATOMS:
        raise ConfigError("propagator", f"full-space propagation supports at most {MAX_FULL_ATOMS} atoms")
    if method not in ("analytic", "oracle", "full"):
        raise ConfigError("propagator", f"unknown value {method!r}")
    tol = float(merged(args, "tolerance", PROPAGATION_TOL))

    h = build_subspace_hamiltonian(config)
    records = []
    for t in times:
        if method == "analytic":
            s = propagate_general(config, initial, t)
        elif method == "oracle":
            s = oracle_propagate(h, initial, t)
        else:
            s = full_space_subspace_propagate(config, initial, t)
        _check_state(s, tol)
        records.append((t, s))

    columns = [f"c{k}_{part}" for k in range(1, n + 2) for part in ("re", "im")]
    if merged(args, "format", "csv") == "csv":
        rows = []
        for t, s in records:
            parts = [v for c in s.amplitudes for v in (c.real, c.imag)]
            rows.append([t, *parts, s.norm, abs(s.photonic) ** 2])
        text = csv_text(["t", *columns, "norm", "photon_prob"], rows)
    else:
        doc = {
            "command": "simulate",
            "n_atoms": n,
            "couplings": list(config.couplings),
            "propagator": method,
            "n_records": len(records),
        }
        for i, (t, s) in enumerate(records):
            doc[f"record_{i}"] = {"t": t, **amplitudes_dict(s), "norm": s.norm, "photon_prob": abs(s.photonic) ** 2}
        text = dump_text(doc)
    write_output(text, merged(args, "out"))
    return EXIT_OK


def trace_document(trace: ProtocolTrace) -> dict:
    p = trace.plan
    tau_t, theta_t = plan_timing(p)
    plan = {
        "m1": p.m1,
        "m2": p.m2,
        "n_atoms": p.n_atoms,
        "strategy": p.strategy.value,
        "prep_size": p.prep_size,
        "f1": p.f1,
        "f2": p.f2,
        "f_prepared": p.f_prepared,
        "f_other": p.f_other,
        "ratio": p.ratio,
        "f_aux": p.f_aux,
        "tau": p.tau,
        "theta": p.theta,
        "tau_tilde": tau_t,
        "theta_tilde": theta_t,
    }
    step1 = {"trivial": trace.step1_trivial}
    if trace.after_step1 is not None:
        step1["after_step1"] = amplitudes_dict(trace.after_step1)
    step1.update(
        {
            "prepared_state": amplitudes_dict(trace.prepared_state),
            "aux_amplitude": trace.aux_amplitude,
            "fidelity_w_minus": trace.fidelity_step1,
            "cavity_reset": trace.cavity_reset_step1,
        }
    )
    step2 = {
        "initial_register": amplitudes_dict(trace.initial_register),
        "final_state": amplitudes_dict(trace.final_state),
        "cavity_reset": trace.cavity_reset_step2,
    }
    return {
        "command": "protocol",
        "propagator": trace.propagator,
        "plan": plan,
        "step1": step1,
        "step2": step2,
        "fidelity_final": trace.fidelity_final,
        "succeeded": trace.succeeded,
    }


def cmd_protocol(args: argparse.Namespace) -> int:
    m1 = _positive_int(args.m1_pos if args.m1_pos is not None else merged(args, "m1"), "m1")
    m2 = _positive_int(args.m2_pos if args.m2_pos is not None else merged(args, "m2"), "m2")
    method = merged(args, "propagator", "analytic")
    if method not in ("analytic", "oracle", "full"):
        raise ConfigError("propagator", f"unknown value {method!r}")
    if method == "full" and m1 + m2 > MAX_FULL_ATOMS:
        raise ConfigError("propagator", f"full-space propagation supports at most {MAX_FULL_ATOMS} atoms")
    strategy = merged(args, "strategy", "auto")
    trace = run_full_protocol(m1, m2, propagator=method, strategy=strategy, check=False)
    tol = float(merged(args, "tolerance", PROPAGATION_TOL))
    for s in (trace.prepared_state, trace.final_state):
        _check_state(s, tol)
    doc = trace_document(trace)
    if merged(args, "format", "text") == "csv":
        text = csv_text(["key", "value"], flatten(doc))
    else:
        text = dump_text(doc)
    write_output(text, merged(args, "out"))
    if not trace.succeeded:
        raise VerificationFailed("protocol did not reach the W-state with an empty cavity")
    return EXIT_OK


def parse_grid(value: Any) -> tuple[int, int]:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        a, b = value
    else:
        parts = str(value).lower().replace("x", ",").split(",")
        if len(parts) != 2:
            raise ConfigError("grid", f"expected M1xM2, got {value!r}")
        a, b = parts
    return _positive_int(a, "m1_max"), _positive_int(b, "m2_max")


def cmd_figure1(args: argparse.Namespace) -> int:
    if args.m1_max is not None or args.m2_max is not None:
        if args.m1_max is None or args.m2_max is None:
            raise ConfigError("grid", "give both M1_MAX and M2_MAX")
        m1_max = _positive_int(args.m1_max, "m1_max")
        m2_max = _positive_int(args.m2_max, "m2_max")
    else:
        m1_max, m2_max = parse_grid(merged(args, "grid", "25x25"))
    records = figure1_grid(m1_max, m2_max)
    if merged(args, "format", "csv") == "csv":
        text = csv_text(["m1", "m2", "tau_tilde", "theta_tilde", "total"], [r.as_row() for r in records])
    else:
        doc = {"command": "figure1", "m1_max": m1_max, "m2_max": m2_max}
        for r in records:
            doc[f"cell_{r.m1}_{r.m2}"] = {"tau_tilde": r.tau_tilde, "theta_tilde": r.theta_tilde, "total": r.total}
        text = dump_text(doc)
    write_output(text, merged(args, "out"))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    seed = _positive_int(merged(args, "seed", 42), "seed", minimum=0)
    trials = _positive_int(merged(args, "trials", 100), "trials")
    n_max = _positive_int(merged(args, "n_max", 8), "n_max")
    tolerance = merged(args, "tolerance")
    if tolerance is not None:
        tolerance = float(tolerance)
        if not tolerance >= 0:
            raise ConfigError("tolerance", "must be >= 0")
    report = verify_mod.run_verification(seed, trials, n_max, tolerance)
    if merged(args, "format", "text") == "csv":
        rows = [
            (b.name, b.checks, b.max_deviation, b.tolerance, "PASS" if b.passed else "FAIL")
            for b in report.batteries
        ]
        text = csv_text(["battery", "checks", "max_deviation", "tolerance", "status"], rows)
    else:
        doc = {"command": "verify", "seed": seed, "trials": trials, "n_max": n_max, "batteries": {}}
        for b in report.batteries:
            doc["batteries"][b.name] = {
                "checks": b.checks,
                "max_deviation": b.max_deviation,
                "tolerance": b.tolerance,
                "status": "PASS" if b.passed else "FAIL",
            }
        doc["overall"] = "PASS" if report.passed else "FAIL"
        text = dump_text(doc)
    write_output(text, merged(args, "out"))
    return EXIT_OK if report.passed else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cavity-w", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with defaults; flags override its values")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "text"), help="output format")
    common.add_argument("--tolerance", type=float, help="override numerical tolerances")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", parents=[common], help="propagate a state and emit a trajectory (csv)")
    sim.add_argument("--couplings", help="comma-separated f_j > 0, e.g. 1,2,3")
    sim.add_argument("--initial", help="excite:q | photon | w-minus:M | w-plus:M | c1,c2,... (default excite:1)")
    sim.add_argument("--times", help="comma-separated times; 'pi' allowed, e.g. 0,pi/2")
    sim.add_argument("--t-max", dest="t_max", help="last time of an evenly spaced grid starting at 0")
    sim.add_argument("--steps", type=int, help="number of grid points for --t-max (default 101)")
    sim.add_argument("--propagator", choices=("analytic", "oracle", "full"), help="default analytic")
    sim.set_defaults(func=cmd_simulate)

    proto = sub.add_parser("protocol", parents=[common], help="run the two-step protocol (text)")
    proto.add_argument("m1_pos", nargs="?", type=int, metavar="M1")
    proto.add_argument("m2_pos", nargs="?", type=int, metavar="M2")
    proto.add_argument("--m1", type=int, help="atoms in group 1")
    proto.add_argument("--m2", type=int, help="atoms in group 2")
    proto.add_argument("--propagator", choices=("analytic", "oracle", "full"), help="default analytic")
    proto.add_argument("--strategy", choices=("auto", "group1", "group2"), help="default auto")
    proto.set_defaults(func=cmd_protocol)

    fig = sub.add_parser("figure1", parents=[common], help="dimensionless generation-time grid (csv)")
    fig.add_argument("m1_max", nargs="?", type=int, metavar="M1_MAX")
    fig.add_argument("m2_max", nargs="?", type=int, metavar="M2_MAX")
    fig.add_argument("--grid", help="M1_MAXxM2_MAX (default 25x25)")
    fig.set_defaults(func=cmd_figure1)

    ver = sub.add_parser("verify", parents=[common], help="run the cross-validation batteries (text)")
    ver.add_argument("--seed", type=int, help="default 42")
    ver.add_argument("--trials", type=int, help="random trials per battery (default 100)")
    ver.add_argument("--n-max", dest="n_max", type=int, help="largest N in random trials (default 8)")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.config_data = load_config(args.config)
        return args.func(args)
    except VerificationFailed as exc:
        print(f"cavity-w: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    except ProtocolError as exc:
        print(f"cavity-w: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    except ValueError as exc:
        print(f"cavity-w: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
