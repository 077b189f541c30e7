"""Self-contained pass/fail suite behind ``vrprox validate``.

Each check exercises one guarantee the library claims: the variance recursion
(one-step and unrolled), the schedule constraint, the a-priori stationarity
bound, decay of the averaged squared gradient mapping, gradient correctness
against central finite differences, mean-square smoothness, oracle-call
accounting, the degenerate estimator equivalences, the prox toolkit's
contraction/optimality properties, and byte-level reproducibility of the
experiment outputs.

``quick`` trims the sample counts for a fast smoke run; the default scales
match the acceptance suite where runtime permits (the decay check runs at a
reduced horizon grid here, the full grid lives in the test suite).
"""

from __future__ import annotations

import tempfile
from pathlib import Path

import numpy as np

from .config import parse_config
from .estimators import (
    HYBRID_SARAH,
    MOMENTUM_SARAH,
    SARAH,
    SGD,
    EstimatorState,
    estimator_error,
    init_estimator,
    update_momentum_sarah,
)
from .experiment import run_experiment, stationarity_bound_rhs
from .optimizer import HyperParams, gradient_mapping, mean_grad_map_sq, run, schedule_from_T
from .oracle import estimate_sigma2, sample_gradient, smoothness_spot_check
from .problems import make_nonconvex_sigmoid, make_quadratic, make_robust_regression
from .prox import L1, BoxIndicator, ElasticNet, Zero, prox, psi_value
from .validation import check_variance_recursion_step, check_variance_recursion_unrolled, check_schedule_constraint, rate_slope


def _row(check: str, passed: bool, value, threshold: str, detail: str = "") -> dict:
    return {
        "check": check,
        "passed": bool(passed),
        "value": value,
        "threshold": threshold,
        "detail": detail,
    }


def central_difference_gradient(prob, x: np.ndarray, sample_id: int, h: float = 1e-5) -> np.ndarray:
    """Per-sample gradient by central differences of value_sample (the
    independent oracle for gradient checks)."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (prob.value_sample(x + e, sample_id) - prob.value_sample(x - e, sample_id)) / (
            2.0 * h
        )
    return g


def _check_schedule(quick: bool) -> dict:
    horizon = 10_000 if quick else 1_000_000
    margins = {}
    all_pass = True
    worst = np.inf
    for L in (0.1, 1.0, 10.0):
        rep = check_schedule_constraint(range(1, horizon + 1), L, keep_margins=True)
        margins[L] = rep.margins
        all_pass &= rep.passed
        worst = min(worst, rep.worst_margin)
    spread = max(
        float(np.max(np.abs(margins[0.1] - margins[1.0]))),
        float(np.max(np.abs(margins[10.0] - margins[1.0]))),
    )
    return _row(
        "schedule_constraint",
        all_pass and spread <= 1e-12,
        f"worst_margin={worst:.3e} L_spread={spread:.1e}",
        "margin >= 0 for T=1..{:g}, L-invariant to 1e-12".format(horizon),
    )


def _check_variance_recursion_step(quick: bool, seed: int) -> dict:
    prob = make_quadratic(50, 10, 1.0, seed=seed)
    rng = np.random.Generator(np.random.PCG64([seed, 1]))
    n_tuples = 100 if quick else 1000
    worst = np.inf
    for _ in range(n_tuples):
        x_prev = rng.normal(0.0, 2.0, prob.dim)
        x_curr = x_prev + rng.normal(0.0, 0.5, prob.dim)
        v_prev = rng.normal(0.0, 2.0, prob.dim)
        beta = rng.uniform(0.01, 0.99)
        rep = check_variance_recursion_step(prob, x_prev, x_curr, v_prev, beta)
        worst = min(worst, rep.rhs - rep.lhs_mc)
        if not rep.passed:
            return _row("variance_recursion_step", False, f"slack={worst:.3e}",
                        "lhs <= rhs on every tuple (exact enumeration)")
    return _row(
        "variance_recursion_step",
        worst >= 0.0,
        f"min_slack={worst:.3e}",
        f"lhs <= rhs on {n_tuples} random tuples (exact enumeration)",
    )


def _check_variance_recursion_unrolled(quick: bool, seed: int) -> dict:
    prob = make_quadratic(50, 10, 1.0, seed=seed)
    rng = np.random.Generator(np.random.PCG64([seed, 2]))
    n_traj = 10 if quick else 100
    n_mc = 2000 if quick else 10_000
    worst = np.inf
    for k in range(n_traj):
        steps = rng.normal(0.0, 0.3, (9, prob.dim))
        traj = np.vstack([rng.normal(0.0, 1.0, prob.dim), steps]).cumsum(axis=0)
        beta = rng.uniform(0.05, 0.95)
        v0 = int(rng.integers(1, 11)) if k % 2 == 0 else rng.normal(0.0, 1.0, prob.dim)
        rep = check_variance_recursion_unrolled(prob, traj, v0, beta, n_mc=n_mc, rng=rng)
        worst = min(worst, rep.rhs + 3 * rep.stderr - rep.lhs_mc)
        if not rep.passed:
            return _row("variance_recursion_unrolled", False, f"slack={worst:.3e}",
                        "lhs <= rhs + 3 stderr on every trajectory")
    return _row(
        "variance_recursion_unrolled",
        True,
        f"min_slack={worst:.3e}",
        f"lhs <= rhs + 3 stderr on {n_traj} frozen 10-point trajectories, {n_mc} replays",
    )


def _check_stationarity_bound(quick: bool, seed: int) -> dict:
    prob = make_quadratic(100, 20, 1.0, seed=seed)
    psi = Zero()
    T = 200 if quick else 1000
    n_seeds = 8 if quick else 20
    hp = schedule_from_T(T, prob.lipschitz_L)
    means = [
        mean_grad_map_sq(run(prob, psi, hp, rng=1000 + s, diagnostics=True))
        for s in range(n_seeds)
    ]
    mean = float(np.mean(means))
    se = float(np.std(means, ddof=1) / np.sqrt(n_seeds))
    bound = stationarity_bound_rhs(prob, psi, T)
    return _row(
        "stationarity_bound",
        mean <= bound + 3 * se,
        f"mean={mean:.3e} bound={bound:.3e}",
        f"seed mean over {n_seeds} seeds <= bound + 3 stderr at T={T}",
    )


def _check_rate(quick: bool, seed: int) -> dict:
    prob = make_quadratic(100, 20, 1.0, seed=seed)
    psi = Zero()
    Ts = (50, 200, 800) if quick else (100, 400, 1600)
    n_seeds = 5 if quick else 10
    summary = []
    for T in Ts:
        hp = schedule_from_T(T, prob.lipschitz_L)
        means = [
            mean_grad_map_sq(run(prob, psi, hp, rng=2000 + s, diagnostics=True))
            for s in range(n_seeds)
        ]
        summary.append((T, float(np.mean(means))))
    slope = rate_slope(summary)
    return _row(
        "decay_exponent",
        slope <= -0.5,
        f"slope={slope:.3f}",
        f"log-log slope over T={Ts} <= -0.5 (theory -2/3)",
    )


def _check_gradients(quick: bool, seed: int) -> list[dict]:
    rows = []
    families = [
        ("quad", make_quadratic(20, 10, 1.0, seed=seed)),
        ("sigmoid", make_nonconvex_sigmoid(30, 8, seed=seed)),
        ("robust", make_robust_regression(30, 8, seed=seed)),
    ]
    n_points = 20 if quick else 100
    for name, prob in families:
        rng = np.random.Generator(np.random.PCG64([seed, 3]))
        worst = 0.0
        for _ in range(n_points):
            x = rng.uniform(-2.0, 2.0, prob.dim)
            i = int(rng.integers(0, prob.num_components))
            g = sample_gradient(prob, x, i)
            fd = central_difference_gradient(prob, x, i)
            rel = float(np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1e-8))
            worst = max(worst, rel)
        rows.append(
            _row(
                f"gradient_fd_{name}",
                worst <= 1e-6,
                f"max_rel={worst:.2e}",
                f"central differences at h=1e-5 on {n_points} points, rel <= 1e-6",
            )
        )
    return rows


def _check_smoothness(quick: bool, seed: int) -> list[dict]:
    rows = []
    families = [
        ("quad", make_quadratic(20, 10, 1.0, seed=seed)),
        ("sigmoid", make_nonconvex_sigmoid(30, 8, seed=seed)),
        ("robust", make_robust_regression(30, 8, seed=seed)),
    ]
    n_pairs = 200 if quick else 1000
    for name, prob in families:
        rng = np.random.Generator(np.random.PCG64([seed, 4]))
        rep = smoothness_spot_check(prob, rng, n_pairs=n_pairs)
        rows.append(
            _row(
                f"smoothness_{name}",
                rep["passed"],
                f"mean_ratio={rep['mean_ratio']:.3f}",
                "MC mean of ||dg||^2 / (L^2 ||dx||^2) <= 1 + 3 stderr",
            )
        )
    return rows


def _check_sigma_consistency(seed: int) -> dict:
    prob = make_quadratic(50, 10, 1.0, seed=seed)
    rng = np.random.Generator(np.random.PCG64([seed, 5]))
    xs = [rng.normal(0.0, 3.0, prob.dim) for _ in range(10)]
    est = estimate_sigma2(prob, xs)
    err = abs(est - prob.sigma_bound)
    return _row(
        "sigma2_enumeration",
        err <= 1e-12,
        f"abs_err={err:.2e}",
        "enumerated variance equals the closed form to 1e-12 at 10 random points",
    )


def _check_oracle_accounting(seed: int) -> dict:
    prob = make_quadratic(20, 5, 1.0, seed=seed)
    hp = HyperParams(eta=0.1, beta=0.5, b_tilde=4, T=25, eta0=0.1)
    expected = {MOMENTUM_SARAH: hp.b_tilde + 2 * hp.T, SARAH: hp.b_tilde + 2 * hp.T,
                HYBRID_SARAH: hp.b_tilde + 3 * hp.T, SGD: hp.b_tilde + hp.T}
    got = {
        kind: run(prob, Zero(), hp, rng=7, diagnostics=False, kind=kind).oracle_calls
        for kind in expected
    }
    ok = got == expected
    return _row(
        "oracle_accounting",
        ok,
        ",".join(f"{k}={v}" for k, v in got.items()),
        "b+2T same-sample / b+3T hybrid / b+T sgd, exactly",
    )


def _check_degenerate_equivalences(seed: int) -> dict:
    prob = make_quadratic(30, 6, 1.0, seed=seed)
    hp = HyperParams(eta=0.1, beta=1.0, b_tilde=3, T=100, eta0=0.1)
    tr_sgd = run(prob, Zero(), hp, rng=seed + 11, diagnostics=True, kind=SGD)
    tr_mom = run(prob, Zero(), hp, rng=seed + 11, diagnostics=True, kind=MOMENTUM_SARAH)
    bitwise = (
        np.array_equal(tr_sgd.step_sq, tr_mom.step_sq)
        and np.array_equal(tr_sgd.grad_map_sq, tr_mom.grad_map_sq)
        and np.array_equal(tr_sgd.est_err_sq, tr_mom.est_err_sq)
        and np.array_equal(tr_sgd.output_x, tr_mom.output_x)
    )

    # beta = 0 telescoping along a random path.
    rng = np.random.Generator(np.random.PCG64([seed, 6]))
    x = rng.normal(0.0, 1.0, prob.dim)
    state = init_estimator(prob, x, 5, rng, kind=SARAH)
    v0 = state.v.copy()
    total = np.zeros(prob.dim)
    for _ in range(20):
        x_new = x + rng.normal(0.0, 0.3, prob.dim)
        i = int(rng.integers(0, prob.num_components))
        total += sample_gradient(prob, x_new, i) - sample_gradient(prob, x, i)
        state = update_momentum_sarah(state, x_new, i, 0.0, prob)
        x = x_new
    telescoping = float(np.linalg.norm(state.v - v0 - total))

    # Full-batch updates keep the direction exact at every step.
    all_ids = np.arange(prob.num_components)
    x = rng.normal(0.0, 1.0, prob.dim)
    state = EstimatorState(
        v=prob.grad_batch(x, all_ids).mean(axis=0), x_prev=x, t=0, kind=MOMENTUM_SARAH
    )
    worst_exact = estimator_error(state, x, prob)
    for _ in range(10):
        x = x + rng.normal(0.0, 0.3, prob.dim)
        state = update_momentum_sarah(state, x, all_ids, 0.3, prob)
        worst_exact = max(worst_exact, estimator_error(state, x, prob))

    ok = bitwise and telescoping <= 1e-12 and worst_exact <= 1e-12
    return _row(
        "degenerate_equivalences",
        ok,
        f"bitwise={bitwise} telescope={telescoping:.1e} fullbatch={worst_exact:.1e}",
        "beta=1 == sgd bitwise; beta=0 telescoping and full-batch error <= 1e-12",
    )


def _check_prox_properties(quick: bool, seed: int) -> dict:
    rng = np.random.Generator(np.random.PCG64([seed, 8]))
    p = 8
    variants = [
        Zero(),
        L1(lam=0.7),
        BoxIndicator(lo=-np.ones(p), hi=np.ones(p)),
        ElasticNet(lam1=0.5, lam2=1.5),
    ]
    n_inputs = 2000 if quick else 10_000
    n_cert = 200 if quick else 1000
    worst_expand = -np.inf
    worst_cert = -np.inf
    for psi in variants:
        taus = rng.uniform(0.01, 10.0, 50)
        per_tau = n_inputs // 50
        for tau in taus:
            Z1 = rng.normal(0.0, 3.0, (per_tau, p))
            Z2 = rng.normal(0.0, 3.0, (per_tau, p))
            d_out = np.linalg.norm(prox(psi, Z1, tau) - prox(psi, Z2, tau), axis=1)
            d_in = np.linalg.norm(Z1 - Z2, axis=1)
            worst_expand = max(worst_expand, float(np.max(d_out - d_in)))
        for _ in range(n_cert // 4):
            tau = float(rng.uniform(0.01, 10.0))
            z = rng.normal(0.0, 3.0, p)
            u = prox(psi, z, tau)
            f_u = psi_value(psi, u) + np.sum((u - z) ** 2) / (2 * tau)
            deltas = rng.normal(0.0, 1.0, (100, p))
            deltas *= (0.1 * rng.random((100, 1))) / np.linalg.norm(deltas, axis=1, keepdims=True)
            W = u + deltas
            f_w = np.array([psi_value(psi, w) for w in W]) + np.sum(
                (W - z) ** 2, axis=1
            ) / (2 * tau)
            worst_cert = max(worst_cert, float(np.max(f_u - f_w)))

    lasso = make_quadratic(1, 1, centers=np.array([[2.0]]))
    gm = max(
        float(np.abs(gradient_mapping(lasso, L1(lam=1.0), np.array([1.0]), eta))[0])
        for eta in (0.1, 0.5)
    )
    ok = worst_expand <= 1e-10 and worst_cert <= 1e-12 and gm <= 1e-10
    return _row(
        "prox_toolkit",
        ok,
        f"expansion={worst_expand:.1e} cert={worst_cert:.1e} lasso_gm={gm:.1e}",
        "nonexpansive, prox minimizes its objective, stationary lasso point maps to 0",
    )


_REPRO_CFG = """\
problem = quad:30:6:1.0
problem_seed = 3
psi = l1:0.1
estimator = momentum_sarah
T = 40
seeds = 3
schedule = auto
diagnostics = on
"""


def _check_reproducibility() -> dict:
    cfg = parse_config(_REPRO_CFG)
    with tempfile.TemporaryDirectory() as tmp:
        a = Path(tmp) / "a"
        b = Path(tmp) / "b"
        run_experiment(cfg, output_dir=a, master_seed=5)
        run_experiment(cfg, output_dir=b, master_seed=5)
        names = sorted(f.name for f in a.iterdir())
        same = names == sorted(f.name for f in b.iterdir()) and all(
            (a / n).read_bytes() == (b / n).read_bytes() for n in names
        )
    return _row(
        "reproducibility",
        same,
        f"files={len(names)}",
        "two identical runs produce byte-identical outputs",
    )


def run_suite(quick: bool = False, seed: int = 0) -> list[dict]:
    """Run every check; returns one row per check."""
    rows = [
        _check_schedule(quick),
        _check_variance_recursion_step(quick, seed),
        _check_variance_recursion_unrolled(quick, seed),
        _check_stationarity_bound(quick, seed),
        _check_rate(quick, seed),
    ]
    rows.extend(_check_gradients(quick, seed))
    rows.extend(_check_smoothness(quick, seed))
    rows.append(_check_sigma_consistency(seed))
    rows.append(_check_oracle_accounting(seed))
    rows.append(_check_degenerate_equivalences(seed))
    rows.append(_check_prox_properties(quick, seed))
    rows.append(_check_reproducibility())
    return rows


def format_table(rows: list[dict]) -> str:
    width = max(len(r["check"]) for r in rows)
    lines = []
    for r in rows:
        status = "PASS" if r["passed"] else "FAIL"
        lines.append(f"{r['check']:<{width}}  {status}  {r['value']}  [{r['threshold']}]")
    n_fail = sum(not r["passed"] for r in rows)
    lines.append(f"{len(rows) - n_fail}/{len(rows)} checks passed")
    return "\n".join(lines)


def write_csv(rows: list[dict], path) -> None:
    lines = ["check,passed,value,threshold"]
    for r in rows:
        value = str(r["value"]).replace(",", ";")
        threshold = r["threshold"].replace(",", ";")
        lines.append(f"{r['check']},{str(r['passed']).lower()},{value},{threshold}")
    Path(path).write_text("\n".join(lines) + "\n")
