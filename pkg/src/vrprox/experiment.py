"""Config-driven experiment orchestration and CSV emission.

One experiment expands to a grid of (horizon, seed) runs, each written to
``trace_T<T>_s<seed>.csv`` with per-iteration diagnostics, plus one
``summary.csv`` aggregating seed means and the a-priori stationarity bound
(when the problem's constants are certified), and a ``run_meta.txt`` pinning
the config, the resolved seeds and the library version.  No timestamps are
written anywhere: identical config and master seed reproduce every output
file byte for byte, regardless of the worker count.

Floats are written with 17 significant digits, enough to round-trip doubles.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, problems
from .config import ConfigError, ExperimentConfig
from .estimators import KINDS
from .optimizer import DivergenceError, HyperParams, mean_grad_map_sq, run, schedule_from_T
from .oracle import ProblemInstance, full_value
from .prox import Zero, parse_psi, psi_value

TRACE_HEADER = "t,grad_map_sq,obj,est_err_sq,step_sq"
SUMMARY_HEADER = "T,seeds,mean_grad_map_sq,stderr,bound_rhs,oracle_calls,status"
COMPARE_HEADER = "T,seed,estimator,mean_grad_map_sq,obj_final,oracle_calls,status"


@dataclass
class ExperimentResult:
    exit_code: int
    output_dir: Path
    summary_rows: list
    n_divergent: int


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def expand_seeds(seeds, master_seed: int = 0) -> list[int]:
    """Resolve a seed list or count into explicit seeds.

    A count expands deterministically from the master seed, so one number
    reproduces a whole sweep.
    """
    if isinstance(seeds, int):
        if seeds < 1:
            raise ValueError(f"seed count must be >= 1, got {seeds}")
        state = np.random.SeedSequence(master_seed).generate_state(seeds, dtype=np.uint64)
        return [int(s) for s in state]
    return [int(s) for s in seeds]


def stationarity_bound_rhs(
    prob: ProblemInstance, psi, T: int, x0: np.ndarray | None = None
) -> float | None:
    """A-priori bound (4 L [F(x0) - F*] + 4 sigma^2) / (T+1)^{2/3}.

    Only available when L and sigma^2 are certified and the known minimum
    applies to the composite objective, i.e. with the zero regularizer.
    None otherwise.
    """
    if not isinstance(psi, Zero):
        return None
    if not (prob.lipschitz_certified and prob.sigma_certified):
        return None
    if prob.sigma_bound is None or prob.f_star_ref is None:
        return None
    if x0 is None:
        x0 = prob.x0 if prob.x0 is not None else np.zeros(prob.dim)
    gap = full_value(prob, x0) + psi_value(psi, x0) - prob.f_star_ref
    return float(
        (4.0 * prob.lipschitz_L * gap + 4.0 * prob.sigma_bound)
        / float(np.cbrt(T + 1.0)) ** 2
    )


def _write_trace(path: Path, trace) -> None:
    lines = [TRACE_HEADER]
    diag = trace.grad_map_sq is not None
    for t in range(trace.T + 1):
        lines.append(
            ",".join(
                [
                    str(t),
                    _fmt(trace.grad_map_sq[t]) if diag else "",
                    _fmt(trace.obj[t]) if diag else "",
                    _fmt(trace.est_err_sq[t]) if diag else "",
                    _fmt(trace.step_sq[t]),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n")


def _single_run(task: dict) -> dict:
    """Execute one (T, seed) run; used directly and by worker processes.

    Problems are rebuilt from their key inside the worker (instances hold
    closures and are deterministic in the seed, so rebuilding is exact).
    """
    prob = problems.from_key(task["problem"], task["problem_seed"])
    psi = parse_psi(task["psi"])
    hp: HyperParams = task["hp"]
    row = {
        "T": hp.T,
        "seed": task["seed"],
        "estimator": task["estimator"],
        "status": "ok",
        "mean_gms": None,
        "obj_final": None,
        "oracle_calls": None,
    }
    try:
        trace = run(
            prob,
            psi,
            hp,
            rng=task["seed"],
            diagnostics=task["diagnostics"],
            kind=task["estimator"],
        )
    except DivergenceError as exc:
        row["status"] = f"divergent(t={exc.t})"
        return row
    row["oracle_calls"] = trace.oracle_calls
    if trace.grad_map_sq is not None:
        row["mean_gms"] = mean_grad_map_sq(trace)
        row["obj_final"] = float(trace.obj[-1])
    if task.get("trace_path"):
        _write_trace(Path(task["trace_path"]), trace)
    return row


def _run_tasks(tasks: list[dict], jobs: int) -> list[dict]:
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_single_run, tasks))
    return [_single_run(t) for t in tasks]


def _hyperparams_for(cfg: ExperimentConfig, prob: ProblemInstance, T: int) -> HyperParams:
    if cfg.schedule == "auto":
        if not prob.lipschitz_certified:
            raise ConfigError(
                "schedule = auto needs a problem with certified L; "
                f"{prob.name!r} carries an empirical constant"
            )
        return schedule_from_T(T, prob.lipschitz_L)
    return HyperParams(eta=cfg.eta, beta=cfg.beta, b_tilde=cfg.b_tilde, T=T, eta0=cfg.eta)


def _write_meta(path: Path, cfg: ExperimentConfig, seeds: list[int], master_seed: int) -> None:
    lines = [
        f"vrprox_version = {__version__}",
        f"master_seed = {master_seed}",
        "seeds = " + ",".join(str(s) for s in seeds),
        "config:",
    ]
    lines.extend("  " + line for line in cfg.source_text.splitlines())
    path.write_text("\n".join(lines) + "\n")


def run_experiment(
    cfg: ExperimentConfig,
    output_dir=None,
    master_seed: int = 0,
    jobs: int = 1,
) -> ExperimentResult:
    """Run the full (T, seed) grid of an experiment and write its files.

    Returns exit code 0 when every run finished, 2 when any run diverged
    (divergent runs are recorded in the summary's status column).
    """
    out = Path(output_dir or cfg.output_dir or "runs")
    out.mkdir(parents=True, exist_ok=True)
    prob = problems.from_key(cfg.problem, cfg.problem_seed)
    psi = parse_psi(cfg.psi)
    seeds = expand_seeds(cfg.seeds, master_seed)

    tasks = []
    for T in cfg.T:
        hp = _hyperparams_for(cfg, prob, T)
        for seed in seeds:
            tasks.append(
                {
                    "problem": cfg.problem,
                    "problem_seed": cfg.problem_seed,
                    "psi": cfg.psi,
                    "estimator": cfg.estimator,
                    "hp": hp,
                    "seed": seed,
                    "diagnostics": cfg.diagnostics,
                    "trace_path": str(out / f"trace_T{T}_s{seed}.csv"),
                }
            )
    rows = _run_tasks(tasks, jobs)

    summary_lines = [SUMMARY_HEADER]
    summary_rows = []
    n_divergent = 0
    for T in cfg.T:
        t_rows = [r for r in rows if r["T"] == T]
        ok = [r for r in t_rows if r["status"] == "ok"]
        divergent = [r for r in t_rows if r["status"] != "ok"]
        n_divergent += len(divergent)
        means = [r["mean_gms"] for r in ok if r["mean_gms"] is not None]
        mean = float(np.mean(means)) if means else None
        stderr = (
            float(np.std(means, ddof=1) / np.sqrt(len(means))) if len(means) > 1 else
            (0.0 if means else None)
        )
        bound = stationarity_bound_rhs(prob, psi, T)
        calls = ok[0]["oracle_calls"] if ok else None
        status = "ok" if not divergent else f"divergent:{len(divergent)}"
        record = {
            "T": T,
            "seeds": len(t_rows),
            "mean_grad_map_sq": mean,
            "stderr": stderr,
            "bound_rhs": bound,
            "oracle_calls": calls,
            "status": status,
        }
        summary_rows.append(record)
        summary_lines.append(
            ",".join(
                [
                    str(T),
                    str(len(t_rows)),
                    _fmt(mean),
                    _fmt(stderr),
                    _fmt(bound),
                    _fmt(calls),
                    status,
                ]
            )
        )
    (out / "summary.csv").write_text("\n".join(summary_lines) + "\n")
    _write_meta(out / "run_meta.txt", cfg, seeds, master_seed)

    return ExperimentResult(
        exit_code=0 if n_divergent == 0 else 2,
        output_dir=out,
        summary_rows=summary_rows,
        n_divergent=n_divergent,
    )


def compare_experiment(
    cfg: ExperimentConfig,
    kinds=KINDS,
    output_dir=None,
    master_seed: int = 0,
    jobs: int = 1,
) -> ExperimentResult:
    """Run the same seeds across estimator kinds and emit one joined CSV.

    Every kind sees identical (problem, schedule, seed) triples, which makes
    the oracle-call columns directly comparable (two evaluations per step for
    the same-sample recursion versus three for the hybrid).
    """
    out = Path(output_dir or cfg.output_dir or "runs")
    out.mkdir(parents=True, exist_ok=True)
    kinds = list(kinds)
    for kind in kinds:
        if kind not in KINDS:
            raise ConfigError(f"unknown estimator {kind!r}; valid kinds: {', '.join(KINDS)}")
    prob = problems.from_key(cfg.problem, cfg.problem_seed)
    seeds = expand_seeds(cfg.seeds, master_seed)

    tasks = []
    for T in cfg.T:
        hp = _hyperparams_for(cfg, prob, T)
        for seed in seeds:
            for kind in kinds:
                tasks.append(
                    {
                        "problem": cfg.problem,
                        "problem_seed": cfg.problem_seed,
                        "psi": cfg.psi,
                        "estimator": kind,
                        "hp": hp,
                        "seed": seed,
                        "diagnostics": cfg.diagnostics,
                        "trace_path": None,
                    }
                )
    rows = _run_tasks(tasks, jobs)

    lines = [COMPARE_HEADER]
    n_divergent = 0
    for row in rows:
        if row["status"] != "ok":
            n_divergent += 1
        lines.append(
            ",".join(
                [
                    str(row["T"]),
                    str(row["seed"]),
                    row["estimator"],
                    _fmt(row["mean_gms"]),
                    _fmt(row["obj_final"]),
                    _fmt(row["oracle_calls"]),
                    row["status"],
                ]
            )
        )
    (out / "compare.csv").write_text("\n".join(lines) + "\n")
    _write_meta(out / "run_meta.txt", cfg, seeds, master_seed)

    return ExperimentResult(
        exit_code=0 if n_divergent == 0 else 2,
        output_dir=out,
        summary_rows=rows,
        n_divergent=n_divergent,
    )
