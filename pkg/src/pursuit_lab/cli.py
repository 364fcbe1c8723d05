"""Command-line entry point: ``pursuit-lab <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .bounds import bounds_report, check_adjoint_lower_bound, check_rip_consequences
from .ensembles import EnsembleSpec, concentration_check, generate, rip_exhaustive, rip_sampled
from .experiments import (
    parse_compressible_config,
    parse_phase_config,
    run_compressible_study,
    run_phase_transition,
    write_phase_outputs,
    write_snr_table,
)
from .pursuit import TRACE_COLUMNS, PursuitConfig, run_pursuit
from .rng import Domain, Stream
from .selection import SelectionRule


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _emit(obj) -> None:
    # non-finite floats are written as the JSON-ish tokens Infinity / NaN
    print(json.dumps(obj, default=_json_default, sort_keys=False))


def cmd_gen(args) -> int:
    A = generate(EnsembleSpec(args.kind, args.m, args.n, args.seed))
    io.save_array(args.out, A)
    return 0


def cmd_rip(args) -> int:
    A = io.load_matrix(args.input)
    if args.sampled is not None:
        cert = rip_sampled(A, args.k, args.sampled, args.seed)
    else:
        cert = rip_exhaustive(A, args.k)
    _emit(cert.to_dict())
    return 0


def cmd_concentration(args) -> int:
    _emit(concentration_check(args.kind, args.m, args.eps, args.trials, args.seed).to_dict())
    return 0


def cmd_solve(args) -> int:
    Phi = io.load_matrix(args.matrix)
    y = io.load_vector(args.y)
    cfg = PursuitConfig(args.algo, SelectionRule(args.rule, args.alpha), max_iterations=args.max_iter,
                        residual_tol=args.tol, sparsity_k=args.k, prune_to_k=args.prune)
    state, trace = run_pursuit(Phi, y, cfg)
    io.write_table(args.trace_out, TRACE_COLUMNS, trace.rows())
    if args.x_out:
        io.save_array(args.x_out, state.estimate)
    _emit({
        "status": trace.status.value,
        "reason": trace.reason,
        "iterations": trace.iterations,
        "residual_norm": float(np.linalg.norm(state.residual)),
        "support": state.support.tolist(),
    })
    return 0


def cmd_bounds(args) -> int:
    _emit(bounds_report(args.delta, args.delta1, args.k, args.alpha, args.alpha_tilde).to_dict())
    return 0


def cmd_verify(args) -> int:
    A = io.load_matrix(args.matrix)
    m, N = A.shape
    cert = rip_exhaustive(A, args.k)
    if not cert.is_rip:
        print(f"FAIL: delta_{args.k} = {cert.delta:.6g} >= 1, matrix is not RIP of order {args.k}")
        return 1
    picks = Stream(args.seed, Domain.SUPPORT_SAMPLE).sample_subsets(args.supports, N, args.k)
    worst = {}
    passed = True
    for i, pick in enumerate(picks):
        s_size = args.k - args.k // 2
        S, T = np.sort(pick[:s_size]), np.sort(pick[s_size:])
        reports = [
            check_rip_consequences(A, S, T, cert, args.trials, args.seed + i, raise_on_violation=False),
            check_adjoint_lower_bound(A, np.sort(pick), cert, args.trials, args.seed + i,
                                      raise_on_violation=False),
        ]
        for rep in reports:
            passed &= rep.passed
            for c in rep.checks:
                prev = worst.get(c.name)
                margin = c.observed / c.bound
                tighter = prev is None or (margin > prev[0] if c.kind == "upper" else margin < prev[0])
                if tighter:
                    worst[c.name] = (margin, c)
    print(f"{'PASS' if passed else 'FAIL'}: delta_{args.k} = {cert.delta:.6g}, "
          f"{args.supports} supports x {args.trials} probes")
    for name, (_, c) in worst.items():
        rel = "<=" if c.kind == "upper" else ">="
        print(f"  {name}: worst {c.observed:.6g} {rel} {c.bound:.6g} {'ok' if c.holds else 'VIOLATED'}")
    return 0 if passed else 1


def cmd_phase(args) -> int:
    spec = parse_phase_config(Path(args.config).read_text())
    result = run_phase_transition(spec, workers=args.workers)
    paths = write_phase_outputs(result, args.out_dir, per_trial=not args.no_trials)
    if not args.no_figures:
        from .plotting import plot_phase_transition
        paths.append(plot_phase_transition(result, Path(args.out_dir) / "phase.png"))
    for p in paths:
        print(p)
    return 0


def cmd_compressible(args) -> int:
    spec = parse_compressible_config(Path(args.config).read_text())
    results = run_compressible_study(spec)
    write_snr_table(results, args.out)
    if args.figure:
        from .plotting import plot_snr
        plot_snr(results, args.figure)
    for r in results:
        print(f"{r.solver}: mean SNR {r.snr_db:.3f} dB over {r.trials} trials")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pursuit-lab", description="Greedy pursuit sparse recovery toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="draw a random sensing matrix")
    g.add_argument("--kind", choices=["gaussian", "bernoulli"], required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output file (.csv for text, otherwise binary)")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("rip", help="certify (or sample) the RIP constant of a matrix")
    r.add_argument("--in", dest="input", required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--sampled", type=int, metavar="TRIALS", help="sample TRIALS supports instead of enumerating")
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_rip)

    c = sub.add_parser("concentration", help="Monte Carlo concentration check")
    c.add_argument("--kind", choices=["gaussian", "bernoulli"], required=True)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--trials", type=int, required=True)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_concentration)

    s = sub.add_parser("solve", help="run a pursuit and write its trace")
    s.add_argument("--matrix", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--algo", choices=["mp", "omp", "gp"], required=True)
    s.add_argument("--rule", choices=["weak", "relaxed"], default="weak")
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--k", type=int)
    s.add_argument("--prune", action="store_true")
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--trace-out", required=True)
    s.add_argument("--x-out", help="also write the estimate")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bounds", help="evaluate the theoretical constants")
    b.add_argument("--delta", type=float, required=True, help="delta_k")
    b.add_argument("--delta1", type=float, required=True, help="delta_{k+1}")
    b.add_argument("--k", type=int, required=True)
    b.add_argument("--alpha", type=float)
    b.add_argument("--alpha-tilde", type=float)
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("verify-rip-lemmas", help="probe the RIP consequences on random supports")
    v.add_argument("--matrix", required=True)
    v.add_argument("--k", type=int, required=True)
    v.add_argument("--trials", type=int, required=True)
    v.add_argument("--supports", type=int, default=10)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    ph = sub.add_parser("phase", help="phase-transition sweep")
    ph.add_argument("--config", required=True)
    ph.add_argument("--out-dir", required=True)
    ph.add_argument("--workers", type=int, default=1)
    ph.add_argument("--no-trials", action="store_true", help="skip trials.csv")
    ph.add_argument("--no-figures", action="store_true", help="skip phase.png")
    ph.set_defaults(func=cmd_phase)

    cs = sub.add_parser("compressible", help="SNR study on power-law signals")
    cs.add_argument("--config", required=True)
    cs.add_argument("--out", required=True)
    cs.add_argument("--figure", help="also write a bar chart PNG")
    cs.set_defaults(func=cmd_compressible)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"pursuit-lab {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
