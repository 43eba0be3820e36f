"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 infinite gain or infeasible problem.
"""

from __future__ import annotations

import argparse
import math
import sys

from . import analysis, io
from .allocator import (
    AllocationProblem,
    AllocatorOptions,
    InfeasibleProblem,
    TooManyEdges,
    grid_oracle,
    maximize_connectivity,
    optimize_weights,
)
from .graph import PSD_RTOL, DisconnectedPort, GraphError, SignedGraph, is_psd, signed_laplacian
from .simulator import gain_check, simulate, worst_case_signal

EXIT_OK, EXIT_INPUT, EXIT_INFINITE = 0, 1, 2

_DEFAULTS = AllocatorOptions()


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _emit(args, text):
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        io.atomic_write(args.output, text)


def _network(args):
    if args.input is None:
        raise _Fail(EXIT_INPUT, "--input is required")
    try:
        return io.load_network(args.input)
    except OSError as exc:
        raise _Fail(EXIT_INPUT, f"cannot read {args.input}: {exc}")


def cmd_analyze(args):
    net = _network(args)
    g, p = net.graph(), net.port_set()
    cert = analysis.hinf_norm(g, p)
    bound = analysis.connectivity_bound(g, p)
    res = []
    for i, j in p.ports:
        try:
            res.append(analysis.siso_gain_via_resistance(g, (i, j)))
        except DisconnectedPort:
            res.append(math.inf)
    out = io.certificate_to_dict(cert, bound, res)
    if not cert.infinite:
        out["lmi_feasible"] = bool(analysis.lmi_feasible(g, p, cert.gamma, args.tol)[0])
        out["riccati_holds"] = bool(analysis.riccati_feasible(g, p, cert.gamma, rtol=args.tol)[0])
    _emit(args, io.dumps(out))
    return EXIT_INFINITE if cert.infinite else EXIT_OK


def cmd_bound(args):
    net = _network(args)
    report = analysis.connectivity_bound(net.graph(), net.port_set())
    _emit(args, io.dumps(io.bound_to_dict(report)))
    return EXIT_INFINITE if math.isinf(report.bound) else EXIT_OK


def cmd_optimize(args):
    net = _network(args)
    opts = AllocatorOptions(
        max_iters=args.max_iters,
        rtol=args.rtol,
        step0=args.step0,
        seed=args.seed,
        restarts=args.restarts,
        oracle_step=args.oracle_step,
        tie_break=not args.no_tie_break,
    )
    try:
        prob = AllocationProblem(net.topology(), net.port_set(), args.budget)
    except InfeasibleProblem as exc:
        raise _Fail(EXIT_INFINITE, str(exc))
    if args.objective == "connectivity":
        result = maximize_connectivity(prob, opts)
    else:
        result = optimize_weights(prob, opts)
    sub = None
    if args.oracle:
        try:
            oracle = grid_oracle(prob, opts.oracle_step)
        except TooManyEdges as exc:
            raise _Fail(EXIT_INPUT, str(exc))
        sub = (result.gamma - oracle.gamma) / oracle.gamma
    out = io.allocation_to_dict(result, sub)
    out["edges"] = [{"u": u, "v": v, "w": float(w)} for (u, v), w in zip(prob.topology.pairs, result.weights)]
    _emit(args, io.dumps(out))
    return EXIT_INFINITE if math.isinf(result.gamma) else EXIT_OK


def cmd_simulate(args):
    net = _network(args)
    g, p = net.graph(), net.port_set()
    cert = analysis.hinf_norm(g, p)
    gamma = args.gamma if args.gamma is not None else cert.gamma
    if math.isinf(gamma):
        raise _Fail(EXIT_INFINITE, "gain is infinite; pass --gamma to simulate anyway")
    rate = analysis.slowest_rate(g)
    if args.worst_case:
        if cert.infinite:
            raise _Fail(EXIT_INFINITE, "no achieving direction for an infinite gain")
        duration = args.duration if args.duration is not None else 50.0 / rate
        signal = worst_case_signal(cert.achieving_direction, duration)
    elif args.signal is not None:
        try:
            signal = io.load_signal(args.signal)
        except OSError as exc:
            raise _Fail(EXIT_INPUT, f"cannot read {args.signal}: {exc}")
    else:
        raise _Fail(EXIT_INPUT, "give --signal or --worst-case")
    t_final = args.t_final
    if t_final is None:
        t_final = float(signal.breakpoints[-1]) + (20.0 / rate if rate > 0 else 1.0)
    try:
        trace = simulate(g, p, signal, t_final, args.dt)
    except ValueError as exc:
        raise _Fail(EXIT_INPUT, str(exc))
    holds, worst = gain_check(trace, gamma)
    _emit(args, io.trace_to_csv(trace, gamma))
    sys.stderr.write(f"{'holds' if holds else 'violated'} gamma={gamma!r} worst_margin={worst!r}\n")
    return EXIT_OK


def cmd_check_signed(args):
    net = _network(args)
    g = net.graph()
    negs = list(net.negative_edges)
    for spec in args.negative or []:
        try:
            u, v, w = spec.split(",")
            negs.append((int(u), int(v), float(w)))
        except ValueError:
            raise _Fail(EXIT_INPUT, f"--negative expects U,V,W, got {spec!r}")
    if not negs:
        raise _Fail(EXIT_INPUT, "no negative edge given (use --negative U,V,W or 'negative_edges')")
    if args.numeric_only:
        L = signed_laplacian(SignedGraph(g, negs))
        psd, lam = is_psd(L, args.tol)
        out = {"psd": bool(psd), "lambda_min": float(lam), "threshold": None, "numeric_psd": bool(psd)}
    else:
        if len(negs) > 1:
            raise _Fail(
                EXIT_INPUT,
                f"{len(negs)} negative edges given; the resistance criterion needs exactly one "
                "(use --numeric-only for the eigenvalue test alone)",
            )
        u, v, w = negs[0]
        check = analysis.signed_psd_check(g, (u, v), w, args.tol)
        out = io.signed_check_to_dict(check)
    _emit(args, io.dumps(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", "-i", help="graph JSON file")
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--seed", type=int, default=_DEFAULTS.seed, help="RNG seed for random restarts (default: %(default)s)")
    common.add_argument(
        "--tol", type=float, default=PSD_RTOL, help="relative PSD tolerance for feasibility verdicts (default: %(default)s)"
    )

    parser = argparse.ArgumentParser(prog="flowgain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common], help="H-infinity norm and certificates")
    sub.add_parser("bound", parents=[common], help="algebraic-connectivity upper bound")

    opt = sub.add_parser("optimize", parents=[common], help="allocate an edge-weight budget")
    opt.add_argument("--budget", "-c", type=float, default=1.0, help="total edge weight (default: %(default)s)")
    opt.add_argument("--objective", choices=["hinf", "connectivity"], default="hinf")
    opt.add_argument("--max-iters", type=int, default=_DEFAULTS.max_iters, help="(default: %(default)s)")
    opt.add_argument("--rtol", type=float, default=_DEFAULTS.rtol, help="stall tolerance (default: %(default)s)")
    opt.add_argument("--step0", type=float, default=None, help="initial step (default: the budget)")
    opt.add_argument("--restarts", type=int, default=_DEFAULTS.restarts, help="random restarts (default: %(default)s)")
    opt.add_argument("--oracle", action="store_true", help="compare with the lattice oracle (m <= 5)")
    opt.add_argument("--oracle-step", type=float, default=_DEFAULTS.oracle_step, help="(default: %(default)s)")
    opt.add_argument("--no-tie-break", action="store_true", help="skip the least-resistance tie-break")

    sim = sub.add_parser("simulate", parents=[common], help="time-domain gain verification, CSV out")
    sim.add_argument("--signal", "-s", help="signal JSON file")
    sim.add_argument("--worst-case", action="store_true", help="hold the top gain direction instead of --signal")
    sim.add_argument("--duration", type=float, default=None, help="worst-case hold time (default: 50 / rate)")
    sim.add_argument("--gamma", type=float, default=None, help="gain to check against (default: certified)")
    sim.add_argument("--dt", type=float, default=1e-3, help="RK4 step (default: %(default)s)")
    sim.add_argument("--t-final", type=float, default=None, help="horizon (default: last breakpoint + 20 / rate)")

    chk = sub.add_parser("check-signed", parents=[common], help="PSD test with negative edges")
    chk.add_argument("--negative", action="append", metavar="U,V,W", help="negative edge, repeatable")
    chk.add_argument("--numeric-only", action="store_true", help="eigenvalue test only; allows several negative edges")
    return parser


_COMMANDS = {
    "analyze": cmd_analyze,
    "bound": cmd_bound,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
    "check-signed": cmd_check_signed,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _Fail as exc:
        sys.stderr.write(f"flowgain: {exc}\n")
        return exc.code
    except (io.InputError, GraphError, ValueError) as exc:
        sys.stderr.write(f"flowgain: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
