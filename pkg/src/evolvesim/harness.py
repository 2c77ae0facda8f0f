"""Experiment configuration, seeded batch execution, and persistence.

A single JSON config describes an experiment (target family or file,
distribution, loss, epsilon, seeds, budget); run_experiment produces one
trajectory CSV and verdict JSON per seed plus an aggregate summary. Every
output byte is determined by (config, seeds).
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .domain import (
    BoundedLinearRep,
    FiniteDistribution,
    Halfspace,
    all_bit_patterns,
    conjunction_halfspace,
    distribution_from_json,
    halfspace_from_json,
    majority_halfspace,
    margin,
    scaled_cube_points,
    scaled_hypercube_uniform,
    zero_rep,
)
from .driver import (
    DEFAULT_BUDGET,
    EvolutionParams,
    Trajectory,
    derive_params,
    evolve,
    monotonicity_check,
    trajectory_csv,
)
from .exceptions import ConfigError, InputDomainError
from .losses import (
    Loss,
    linear_loss,
    lperf_true,
    power_loss,
    target_values,
    unscaled_quadratic,
    verify_well_behaved,
)
from .mutation import (
    NeighborhoodSpec,
    best_neighbor_exact,
    design_matrix,
    theoretical_alpha,
)

__all__ = [
    "ExperimentConfig",
    "run_experiment",
    "summarize",
    "build_target",
    "build_distribution",
    "build_loss",
    "audit_neighborhood",
    "worker_count",
]


def worker_count() -> int:
    """Worker-pool size, from EVOLVESIM_WORKERS (default 1: serial runs)."""
    try:
        return max(1, int(os.environ.get("EVOLVESIM_WORKERS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    target: dict
    distribution: dict
    loss: dict
    epsilon: float
    seeds: tuple[int, ...]
    budget: int = DEFAULT_BUDGET
    shrink_to_budget: bool = False
    r0: str | list = "zero"
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in {"evolve", "neighborhood-audit", "loss-check", "csq-lab"}:
            raise ConfigError("kind", f"unknown experiment kind: {self.kind}")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError("epsilon", "epsilon must be in (0, 1)")
        if len(self.seeds) < 1:
            raise ConfigError("seeds", "need at least one seed")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = {
            "kind",
            "target",
            "distribution",
            "loss",
            "epsilon",
            "seeds",
            "budget",
            "shrink_to_budget",
            "r0",
            "gamma",
        }
        for key in doc:
            if key not in known:
                raise ConfigError(key, f"unknown config field: {key}")
        for key in ("kind", "target", "distribution", "loss", "epsilon", "seeds"):
            if key not in doc:
                raise ConfigError(key, f"missing config field: {key}")
        doc = dict(doc)
        doc["seeds"] = tuple(int(s) for s in doc["seeds"])
        return cls(**doc)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("<document>", f"malformed JSON: {exc}") from exc
        return cls.from_dict(doc)


def build_target(spec: dict, n: int | None = None) -> Halfspace:
    if "file" in spec:
        path = Path(spec["file"])
        if not path.exists():
            raise ConfigError("target.file", f"missing target file: {path}")
        return halfspace_from_json(path.read_text())
    family = spec.get("family")
    if family == "majority":
        return majority_halfspace(int(spec["n"]))
    if family == "conjunction":
        return conjunction_halfspace(int(spec["n"]), int(spec["k"]))
    raise ConfigError("target", f"unknown target family: {family}")


def build_distribution(spec: dict) -> FiniteDistribution:
    if "file" in spec:
        path = Path(spec["file"])
        if not path.exists():
            raise ConfigError("distribution.file", f"missing distribution file: {path}")
        return distribution_from_json(path.read_text())
    kind = spec.get("kind")
    if kind == "scaled-hypercube-uniform":
        return scaled_hypercube_uniform(int(spec["n"]))
    if kind == "product":
        n = int(spec["n"])
        bias = np.asarray(spec["bias"], dtype=np.float64)
        if bias.shape != (n,) or np.any(bias <= 0.0) or np.any(bias >= 1.0):
            raise ConfigError("distribution.bias", "bias must be n values in (0, 1)")
        bits = all_bit_patterns(n)
        points = scaled_cube_points(bits, n)
        probs = np.prod(np.where(bits > 0, bias, 1.0 - bias), axis=1)
        return FiniteDistribution(points=points, probs=probs)
    raise ConfigError("distribution", f"unknown distribution kind: {kind}")


def build_loss(spec: dict) -> Loss:
    family = spec.get("family")
    if family == "power":
        return power_loss(float(spec.get("c", 2)))
    if family == "quadratic-unscaled":
        return unscaled_quadratic()
    if family == "linear":
        return linear_loss()
    raise ConfigError("loss", f"unknown loss family: {family}")


def _build_r0(spec, n: int) -> BoundedLinearRep:
    if spec == "zero":
        return zero_rep(n)
    if spec == "ones":
        return BoundedLinearRep(np.ones(n + 1))
    if isinstance(spec, (list, tuple)):
        return BoundedLinearRep(np.asarray(spec, dtype=np.float64))
    raise ConfigError("r0", f"unknown starting representation: {spec!r}")


def _one_run(args) -> tuple[int, Trajectory]:
    f, D, params, loss, r0, seed = args
    return seed, evolve(f, D, params, loss, r0, seed)


def run_experiment(config: ExperimentConfig, out_dir: str | Path) -> dict:
    """Execute all seeds, write per-seed artifacts and a summary; return the bundle."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if config.kind == "loss-check":
        loss = build_loss(config.loss)
        result = verify_well_behaved(loss)
        report = {"loss": config.loss, "certificate": result.as_dict()}
        (out / "loss_check.json").write_text(_dumps(report))
        return {"kind": config.kind, "report": report}

    f = build_target(config.target)
    D = build_distribution(config.distribution)
    loss = build_loss(config.loss)
    gamma = config.gamma if config.gamma is not None else margin(f, D)

    if config.kind == "neighborhood-audit":
        rep = _build_r0(config.r0, D.n)
        report = audit_neighborhood(f, D, rep, config.epsilon, loss, gamma)
        (out / "neighborhood_audit.json").write_text(_dumps(report))
        return {"kind": config.kind, "report": report}
    if config.kind != "evolve":
        raise ConfigError("kind", f"kind {config.kind} is not runnable here")

    params = derive_params(
        D.n,
        config.epsilon,
        gamma,
        loss,
        budget=config.budget,
        shrink_to_budget=config.shrink_to_budget,
    )
    r0 = _build_r0(config.r0, D.n)
    jobs = [(f, D, params, loss, r0, seed) for seed in config.seeds]
    workers = worker_count()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_one_run, jobs))
    else:
        results = dict(_one_run(job) for job in jobs)

    trajectories = {}
    for seed in config.seeds:
        traj = results[seed]
        trajectories[seed] = traj
        (out / f"trajectory_seed{seed}.csv").write_text(trajectory_csv(traj))
        (out / f"verdict_seed{seed}.json").write_text(_dumps(traj.verdict))
    bundle = {
        "kind": "evolve",
        "trajectories": trajectories,
        "cap_report": params.cap_report,
        "params": params,
    }
    summary = summarize(bundle)
    (out / "summary.json").write_text(_dumps(summary))
    bundle["summary"] = summary
    return bundle


def summarize(bundle: dict) -> dict:
    """Aggregate convergence/monotonicity rates over the bundle's runs."""
    trajectories = bundle.get("trajectories") or {}
    if not trajectories:
        raise InputDomainError("bundle has no runs to summarize")
    verdicts = [t.verdict for t in trajectories.values()]
    runs = len(verdicts)
    return {
        "runs": runs,
        "converged_fraction": sum(v["converged"] for v in verdicts) / runs,
        "monotone_fraction": sum(v["monotone"] for v in verdicts) / runs,
        "mean_final_lperf": sum(v["final_lperf"] for v in verdicts) / runs,
        "mean_generations": sum(v["generations_used"] for v in verdicts) / runs,
        "capped": bundle.get("cap_report") is not None,
        "cap_report": bundle.get("cap_report"),
    }


def audit_neighborhood(
    f: Halfspace,
    D: FiniteDistribution,
    rep: BoundedLinearRep,
    epsilon: float,
    loss: Loss,
    gamma: float | None = None,
) -> dict:
    """Left/right sides of the guaranteed-improvement inequality as a report.

    Quadratic: some neighbor at step size alpha = eps*gamma/(3 sqrt n)
    satisfies ||f - phi'||^2 <= max(||f - phi||^2 - alpha^2, eps).
    Certified losses: expected loss drops by at least alpha^2 * B / 2 with
    the corresponding alpha, whenever the expected loss exceeds eps.
    """
    if gamma is None:
        gamma = margin(f, D)
    n = D.n
    fv = target_values(f, D)
    quadratic = bool(loss.params and loss.params[0] in ("power", "quadratic_unscaled"))
    quadratic = quadratic and (
        loss.params[0] == "quadratic_unscaled" or float(loss.params[1]) == 2.0
    )
    if quadratic:
        alpha = theoretical_alpha(epsilon, gamma, n)
    else:
        alpha = theoretical_alpha(epsilon, gamma, n, loss.bounds)
    spec = NeighborhoodSpec((alpha,))
    best, _gain = best_neighbor_exact(rep, f, D, loss, spec)
    design = design_matrix(D)

    def expected_loss(r: BoundedLinearRep) -> float:
        vals = np.clip(design @ r.coeffs, -1.0, 1.0)
        return float(loss.eval(fv, vals) @ D.probs)

    if quadratic:
        def sqdist(r: BoundedLinearRep) -> float:
            vals = np.clip(design @ r.coeffs, -1.0, 1.0)
            return float(((fv - vals) ** 2) @ D.probs)

        lhs = sqdist(best)
        rhs = max(sqdist(rep) - alpha**2, epsilon)
        guarantee = "squared distance"
    else:
        _a, _A, B = loss.bounds
        lhs = expected_loss(best)
        current = expected_loss(rep)
        rhs = current - alpha**2 * B / 2.0 if current > epsilon else current
        guarantee = "expected loss"
    return {
        "guarantee": guarantee,
        "alpha": alpha,
        "gamma": gamma,
        "epsilon": epsilon,
        "lhs": lhs,
        "rhs": rhs,
        "satisfied": bool(lhs <= rhs + 1e-12),
    }


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (EvolutionParams, NeighborhoodSpec)):
        return obj.__dict__ | {}
    if hasattr(obj, "__dict__"):
        return vars(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")
