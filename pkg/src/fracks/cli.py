"""Command-line entry point.

Exit codes: 0 success, 1 domain error (bad exponents, failed criteria), 2 I/O error, 64 usage error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import report

EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _emit(obj, out: str | None):
    text = report.dumps(obj) + "\n"
    if out:
        _write(Path(out), text)
    else:
        sys.stdout.write(text)


def _verdict_table(verdicts) -> str:
    rows = [f"{'criterion':<16} {'satisfied':<9} {'margin':>24} {'constant':>24}  source"]
    for v in verdicts:
        rows.append(f"{v.name:<16} {str(v.satisfied):<9} {report.fmt(v.margin):>24} "
                    f"{report.fmt(v.constant):>24}  {v.provenance}")
    return "\n".join(rows)


def _constants(cfg):
    from .criteria import CriteriaConstants, default_constants

    p = cfg.params
    over = cfg.criteria_constants
    try:
        base = default_constants(p.d, p.alpha, p.beta, p.gamma)
    except KeyError:
        base = CriteriaConstants(None, None, None, {})
    prov = dict(base.provenance)
    for k in over:
        prov[k] = "configured"
    return CriteriaConstants(over.get("eps", base.eps), over.get("c", base.c), over.get("M_gamma", base.M_gamma), prov)


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(args) -> int:
    from .config import load
    from .fieldio import write_field
    from .initial import from_recipe
    from .plots import emit_plots
    from .solver import run

    cfg = load(args.config)
    dg = cfg.digest
    out = Path(args.out or cfg.outputs["dir"])
    p = cfg.params
    u0 = from_recipe(p.grid, cfg.initial_condition)
    every = int(cfg.outputs.get("snapshot_every", 0))
    snaps = []

    def observe(state):
        if every and len(state.series) % every == 0:
            snaps.append((state.t, state.u))

    res = run(p, u0, constants=_constants(cfg), observer=observe if every else None)
    s = res.series
    out.mkdir(parents=True, exist_ok=True)
    _write(out / "series.csv", report.csv_text(s.columns(), s.rows(), dg))
    summary = {"config_digest": dg, "status": res.state.status, "t_end": res.state.t, "steps": res.state.steps,
               "message": res.state.message, "report": res.report.as_dict() if res.report else None}
    _write(out / "report.json", report.dumps(summary) + "\n")
    write_field(out / "final", res.state.u, res.state.t, dg)
    for i, (t, f) in enumerate(snaps):
        write_field(out / f"snapshot_{i:04d}", f, t, dg)
    if cfg.outputs.get("plots", True):
        emit_plots(s, out, dg)
    print(f"{res.state.status} at t={report.fmt(res.state.t)} after {res.state.steps} steps; outputs in {out}")
    return EXIT_OK


def cmd_check(args) -> int:
    from .config import load
    from .criteria import applicable_verdicts
    from .fieldio import read_field
    from .initial import from_recipe

    if bool(args.config) == bool(args.field):
        raise UsageError("check: give exactly one of --config or --field")
    if args.config:
        cfg = load(args.config)
        p = cfg.params
        u0 = from_recipe(p.grid, cfg.initial_condition)
        d, alpha, beta, gamma = p.d, p.alpha, p.beta, p.gamma
        consts = _constants(cfg)
        dg = cfg.digest
    else:
        if None in (args.alpha, args.beta, args.gamma):
            raise UsageError("check --field needs --alpha, --beta and --gamma")
        u0, header = read_field(args.field)
        d, alpha, beta, gamma = u0.grid.d, args.alpha, args.beta, args.gamma
        consts = None
        dg = report.digest({"field": header, "alpha": alpha, "beta": beta, "gamma": gamma})
    verdicts = applicable_verdicts(u0, d, alpha, beta, gamma, consts)
    _emit({"config_digest": dg, "verdicts": [v.as_dict() for v in verdicts]}, args.out)
    print(_verdict_table(verdicts), file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def cmd_virial(args) -> int:
    from .virial import holder_exponents, proof_constants, weight_sup_norm

    d, alpha, beta, gamma = args.d, args.alpha, args.beta, args.gamma
    pc = proof_constants(d, alpha, beta, gamma, samples=args.samples, seed=args.seed)
    he = holder_exponents(d, beta, gamma)
    sup = weight_sup_norm(alpha, gamma, d)
    out = {"d": d, "alpha": alpha, "beta": beta, "gamma": gamma,
           "weight_sup_norm": sup.value, "weight_sup_location": sup.location,
           "holder": {"nu": he.nu, "delta": he.delta, "p": he.p, "p_conj": he.p_conj},
           "C3": pc.C3, "mass_threshold": pc.mass_threshold}
    if d + 2 - alpha - beta > 0:
        c, m0 = pc.best_concentration_constant()
        out["concentration_constant"] = c
        out["concentration_M0"] = m0
    out["config_digest"] = report.digest({k: out[k] for k in ("d", "alpha", "beta", "gamma")})
    _emit(out, args.out)
    return EXIT_OK


def cmd_kernel_table(args) -> int:
    import numpy as np

    from .stable import stable_kernel_profile

    r = np.geomspace(args.rmin, args.rmax, args.count)
    p = stable_kernel_profile(args.alpha, args.d, args.t, r)
    dg = report.digest({"alpha": args.alpha, "d": args.d, "t": args.t, "rmin": args.rmin, "rmax": args.rmax,
                        "count": args.count})
    text = report.csv_text(["r", "p"], list(zip(r, p)), dg)
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_picard(args) -> int:
    from .config import load
    from .initial import from_recipe
    from .solver import picard_exponent, picard_iterate

    cfg = load(args.config)
    p = cfg.params
    u0 = from_recipe(p.grid, cfg.initial_condition)
    res = picard_iterate(p, u0, args.T_local, max_iter=args.max_iter, nodes=args.nodes, p=args.p)
    _emit({"config_digest": cfg.digest, "T_local": args.T_local, "p": res.p, "distances": res.distances,
           "contraction_factors": res.contraction_factors, "converged": res.converged,
           "contracting": res.contracting, "expected_T_exponent": picard_exponent(p.d, p.alpha, p.beta, res.p)},
          args.out)
    return EXIT_OK


def cmd_acceptance(args) -> int:
    from .acceptance import CHECKS, run_suite

    names = args.only.split(",") if args.only else list(CHECKS)
    results = []
    for name in names:
        r = run_suite([name])[0]
        results.append(r)
        print(r.line(), flush=True)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    if args.json:
        _emit({"config_digest": report.digest({"suite": [r.name for r in results]}),
               "results": [r.as_dict() for r in results]}, args.json)
    return EXIT_OK if passed == len(results) else EXIT_DOMAIN


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fracks", description="Keller-Segel dynamics with fractional diffusion")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("simulate", help="run a configured simulation")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output directory (default: outputs.dir of the config)")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("check", help="evaluate the a-priori criteria on initial data")
    c.add_argument("--config")
    c.add_argument("--field", help="field file (.raw with .json sidecar)")
    c.add_argument("--alpha", type=float)
    c.add_argument("--beta", type=float)
    c.add_argument("--gamma", type=float)
    c.add_argument("--out")
    c.set_defaults(func=cmd_check)

    v = sub.add_parser("virial", help="constants of the moment argument")
    v.add_argument("--d", type=int, default=2)
    v.add_argument("--alpha", type=float, required=True)
    v.add_argument("--beta", type=float, required=True)
    v.add_argument("--gamma", type=float, required=True)
    v.add_argument("--samples", type=int, default=200000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(func=cmd_virial)

    k = sub.add_parser("kernel-table", help="tabulate the stable heat kernel")
    k.add_argument("--alpha", type=float, required=True)
    k.add_argument("--d", type=int, default=2)
    k.add_argument("--t", type=float, default=1.0)
    k.add_argument("--rmin", type=float, default=1e-3)
    k.add_argument("--rmax", type=float, default=1e2)
    k.add_argument("--count", type=int, default=101)
    k.add_argument("--out")
    k.set_defaults(func=cmd_kernel_table)

    p = sub.add_parser("picard", help="fixed-point iterates of the mild formulation")
    p.add_argument("--config", required=True)
    p.add_argument("--T-local", dest="T_local", type=float, required=True)
    p.add_argument("--nodes", type=int, default=32)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=30)
    p.add_argument("--p", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_picard)

    a = sub.add_parser("acceptance", help="run the acceptance suite")
    a.add_argument("--only", help="comma-separated subset, e.g. A1,A3")
    a.add_argument("--json", help="also write results as JSON")
    a.set_defaults(func=cmd_acceptance)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    raise SystemExit(main())
