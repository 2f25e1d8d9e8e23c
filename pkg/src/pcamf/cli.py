"""Command line entry point: ``pcamf <subcommand> [flags]``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import dynamics, experiment, markov
from .engine import RuleParams, run
from .graphs import TopologySpec
from .meanfield import KINDS, MeanFieldMap, sigma2_for


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _topology(args) -> TopologySpec:
    n = args.n if args.n is not None else (args.side ** 2 if args.side else None)
    if n is None:
        raise SystemExit("need --n or --side")
    return TopologySpec(args.kind, n, gamma=args.gamma, p_edge=args.p_edge,
                        p_wire=args.p_wire, seed=args.seed, dim=args.dim)


def _map(args, p=None) -> MeanFieldMap:
    p = args.p if p is None else p
    return MeanFieldMap(args.map, p, n=args.n, gamma=args.gamma, p_e=args.p_edge,
                        p_w=args.p_wire, inner=args.inner)


def cmd_topology(args):
    _emit(_topology(args).build().to_edgelist(), args.out)


def cmd_simulate(args):
    spec = _topology(args)
    rule = RuleParams(args.p)
    if args.trace:
        rows = experiment.evolution_trace(spec, rule, args.steps, args.seed, args.rho0)
        _emit(experiment.trace_csv(rows), args.out)
        return
    series = run(spec.build(), rule, rho0=args.rho0, T=args.steps, seed=args.seed)
    series.meta.update(topology=spec.kind, gamma=spec.gamma, p_edge=spec.p_edge, p_wire=spec.p_wire)
    _emit(series.to_csv(), args.out)


def cmd_meanfield(args):
    mf = _map(args)
    rho = np.linspace(0.0, 1.0, args.points)
    mu = mf(rho)
    n = args.n or 100
    var = sigma2_for(mf, n, rho)
    der = mf.derivative(rho)
    lines = ["rho,mu,sigma2,derivative"]
    lines += [",".join(repr(float(x)) for x in row) for row in zip(rho, mu, var, der)]
    _emit("\n".join(lines) + "\n", args.out)


def cmd_bifurcate(args):
    mf = _map(args, p=0.5)
    p_values = np.round(np.arange(1, int(round(0.5 / args.p_step)) + 1) * args.p_step, 10)
    diag = dynamics.bifurcation(mf, p_values, transient=args.transient, keep=args.keep,
                                rho0=args.rho0 if args.rho0 is not None else 0.3)
    _emit(diag.to_csv(), args.out)
    if args.fixed_out:
        Path(args.fixed_out).write_text(diag.fixed_points_csv())


def cmd_markov(args):
    mf = _map(args)
    kernel = markov.build_kernel(args.n, mf)
    if args.kernel_out:
        Path(args.kernel_out).write_text(kernel.to_csv())
    _emit(markov.distribution_csv(markov.stationary(kernel)), args.out)


def cmd_sweep(args):
    over = dict(runs=args.runs, seed=args.seed, delta=args.delta_snip, workers=args.workers)
    if args.kind:
        over["structures"] = (args.kind,)
    for key, val in (("n", args.n), ("T", args.steps), ("p", args.p),
                     ("p_e", args.p_edge), ("p_w", args.p_wire)):
        if val is not None:
            over[key] = (val,)
    cfg = (experiment.SweepConfig.from_file(args.config, **over) if args.config
           else experiment.with_overrides(experiment.SweepConfig(), **over))
    rows = experiment.coverage_table(cfg)
    _emit(experiment.rows_to_csv(rows), args.out)
    if args.marginal_out:
        Path(args.marginal_out).write_text(experiment.marginal_csv(experiment.marginalize(rows)))


def cmd_verify(args):
    import pytest

    return pytest.main(["-q", "-rA", args.tests])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pcamf", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, p_default=0.1):
        sp.add_argument("--kind", choices=("torus", "random", "smallworld"))
        sp.add_argument("--n", type=int)
        sp.add_argument("--side", type=int)
        sp.add_argument("--dim", type=int, default=0)
        sp.add_argument("--gamma", type=int, default=4)
        sp.add_argument("--p", type=float, default=p_default)
        sp.add_argument("--p-edge", type=float)
        sp.add_argument("--p-wire", type=float)
        sp.add_argument("--steps", type=int, default=100)
        sp.add_argument("--runs", type=int)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--rho0", type=float)
        sp.add_argument("--delta-snip", type=float)
        sp.add_argument("--level", type=float, default=0.95)
        sp.add_argument("--out")
        sp.add_argument("--map", choices=KINDS, default="grid")
        sp.add_argument("--inner", choices=("literal", "full"), default="literal")

    sp = sub.add_parser("topology", help="generate and export a graph")
    common(sp)
    sp.set_defaults(func=cmd_topology, kind="torus")

    sp = sub.add_parser("simulate", help="single PCA run to CSV")
    common(sp)
    sp.add_argument("--trace", action="store_true", help="emit t,rho_sim,rho_mf")
    sp.set_defaults(func=cmd_simulate, kind="torus")

    sp = sub.add_parser("meanfield", help="tabulate a mean-field map")
    common(sp)
    sp.add_argument("--points", type=int, default=101)
    sp.set_defaults(func=cmd_meanfield)

    sp = sub.add_parser("bifurcate", help="bifurcation diagram CSV")
    common(sp)
    sp.add_argument("--p-step", type=float, default=0.005)
    sp.add_argument("--transient", type=int, default=1000)
    sp.add_argument("--keep", type=int, default=50)
    sp.add_argument("--fixed-out")
    sp.set_defaults(func=cmd_bifurcate)

    sp = sub.add_parser("markov", help="density-chain kernel and stationary law")
    common(sp)
    sp.add_argument("--kernel-out")
    sp.set_defaults(func=cmd_markov)

    sp = sub.add_parser("sweep", help="coverage table over a parameter sweep")
    common(sp, p_default=None)
    sp.add_argument("--config")
    sp.add_argument("--workers", type=int)
    sp.add_argument("--marginal-out")
    sp.set_defaults(func=cmd_sweep, steps=None, seed=None)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    sp.add_argument("--tests", default="tests/test_acceptance.py")
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    rc = args.func(args)
    return int(rc or 0)


if __name__ == "__main__":
    raise SystemExit(main())
