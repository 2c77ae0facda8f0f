"""Command-line entry point.

Subcommands:
  evolve              run a seeded evolution experiment from a JSON config
  check-loss          certify a loss family and print the certificate
  neighborhood-audit  print the guaranteed-improvement inequality sides
  csq-lab             build-pair / greedy-sets / audit utilities
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import csq
from .domain import distribution_from_json, halfspace_from_json, rep_from_json
from .exceptions import EvolvesimError
from .harness import (
    ExperimentConfig,
    audit_neighborhood,
    build_loss,
    run_experiment,
)
from .losses import linear_loss, power_loss, unscaled_quadratic, verify_well_behaved


def _print_json(doc) -> None:
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _cmd_evolve(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    bundle = run_experiment(config, args.out)
    _print_json(bundle.get("summary") or bundle.get("report"))
    return 0


def _cmd_check_loss(args) -> int:
    if args.family == "power":
        loss = power_loss(args.c)
    elif args.family == "quadratic-unscaled":
        loss = unscaled_quadratic()
    elif args.family == "linear":
        loss = linear_loss()
    else:
        raise EvolvesimError(f"unknown loss family: {args.family}")
    result = verify_well_behaved(loss)
    _print_json(result.as_dict())
    return 0 if result.as_dict().get("certified") else 1


def _cmd_neighborhood_audit(args) -> int:
    f = halfspace_from_json(Path(args.target).read_text())
    D = distribution_from_json(Path(args.distribution).read_text())
    rep = rep_from_json(Path(args.rep).read_text())
    loss = build_loss({"family": args.loss, "c": args.c})
    _print_json(audit_neighborhood(f, D, rep, args.epsilon, loss))
    return 0


def _cmd_csq_build_pair(args) -> int:
    members = [int(v) for v in args.set.split(",")] if args.set else list(
        range(1, args.k + 1)
    )
    pair = csq.build_pair(members)
    _print_json(
        {
            "S": sorted(pair.S),
            "k": pair.k,
            "alpha_scale": pair.alpha_scale,
            "l1_phi": pair.l1_phi,
            "t_table": pair.t_table.tolist(),
            "theta_table": pair.theta_table.tolist(),
            "density": pair.density.tolist(),
            "ratio_min": float(pair.ratio.min()),
            "ratio_max": float(pair.ratio.max()),
        }
    )
    return 0


def _cmd_csq_greedy(args) -> int:
    family = csq.greedy_disjoint_sets(args.n, args.k)
    _print_json({"n": args.n, "k": args.k, "size": len(family),
                 "sets": [sorted(s) for s in family]})
    return 0


def _cmd_csq_audit(args) -> int:
    family = csq.greedy_disjoint_sets(args.n, args.k)[: args.pairs]
    pairs = [csq.build_pair(s) for s in family]
    rng = np.random.default_rng(args.seed)
    queries = []
    for _ in range(args.queries):
        g = rng.standard_normal(2**args.n)
        g /= max(1.0, float(np.max(np.abs(g))))
        queries.append(g)
    report = csq.distinguishing_audit(
        pairs, queries, args.tau, args.epsilon, args.n
    )
    _print_json(report)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="evolvesim",
        description="Mutation/selection learning of halfspaces and the "
        "correlational-query lab.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="run a seeded experiment from a JSON config")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("-o", "--out", default="results")
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("check-loss", help="certify a loss family")
    p.add_argument("--family", required=True,
                   choices=["power", "quadratic-unscaled", "linear"])
    p.add_argument("--c", type=float, default=2.0)
    p.set_defaults(func=_cmd_check_loss)

    p = sub.add_parser("neighborhood-audit",
                       help="guaranteed-improvement inequality for one instance")
    p.add_argument("--target", required=True)
    p.add_argument("--distribution", required=True)
    p.add_argument("--rep", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--loss", default="power")
    p.add_argument("--c", type=float, default=2.0)
    p.set_defaults(func=_cmd_neighborhood_audit)

    p = sub.add_parser("csq-lab", help="Fourier lab utilities")
    csq_sub = p.add_subparsers(dest="csq_command", required=True)

    q = csq_sub.add_parser("build-pair")
    q.add_argument("--n", type=int, default=None)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--set", default=None, help="comma-separated 1-based indices")
    q.set_defaults(func=_cmd_csq_build_pair)

    q = csq_sub.add_parser("greedy-sets")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, required=True)
    q.set_defaults(func=_cmd_csq_greedy)

    q = csq_sub.add_parser("audit")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--pairs", type=int, default=4)
    q.add_argument("--queries", type=int, default=10)
    q.add_argument("--tau", type=float, default=0.05)
    q.add_argument("--epsilon", type=float, default=0.01)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=_cmd_csq_audit)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EvolvesimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
