"""Monte-Carlo and analytic checkers for the method's guarantees.

This module verifies what desk-scale computation *can* verify:

* the one-step variance recursion of the direction estimator,
  E_xi ||v_t - grad f(x_t)||^2
    <= (1-beta)^2 ||v_{t-1} - grad f(x_{t-1})||^2
       + 2 (1-beta)^2 L^2 ||x_t - x_{t-1}||^2 + 2 beta^2 sigma^2,
  by exact enumeration over the components of a finite sum;
* its unrolled form along a trajectory,
  E ||v_t - grad f(x_t)||^2
    <= (1-beta)^{2t} E ||v_0 - grad f(x_0)||^2 + 2 beta sigma^2
       + 2 L^2 sum_i (1-beta)^{2(t-i)} E ||x_{i+1} - x_i||^2,
  by replaying the recursion many times along a *frozen* trajectory.  The
  true statement takes expectations over the iterates as well; freezing the
  points checks the conditional version (the strongest realizable surrogate
  from sample paths) and is reported as such;
* the schedule compatibility constraint beta >= 2 L^2 eta^2 / (1 - L eta),
  exactly, for whole ranges of horizons;
* the empirical decay exponent of the averaged squared gradient mapping.

All statistical checks pass at three standard errors; the inequalities are
one-sided bounds, which leaves headroom.  Checks that need true constants
refuse instances whose (L, sigma^2) are not certified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .optimizer import schedule_from_T
from .oracle import (
    ProblemInstance,
    full_gradient,
    gradient_rows,
    sigma2_at,
)


@dataclass(frozen=True)
class VarianceBoundReport:
    """Outcome of one variance-recursion check.

    ``lhs_mc`` estimates the conditional expectation on the left (stderr is 0
    when it was enumerated exactly); ``rhs`` is assembled from certified
    constants only.  ``passed`` means lhs_mc <= rhs + 3 * stderr.
    """

    lhs_mc: float
    stderr: float
    rhs: float
    passed: bool
    inputs: dict


@dataclass(frozen=True)
class ScheduleReport:
    """Worst-case margin of beta - 2 L^2 eta^2 / (1 - L eta) over a horizon range."""

    passed: bool
    worst_margin: float
    worst_T: int
    n_checked: int
    margins: np.ndarray | None = None


def _require_certified(prob: ProblemInstance, what: str) -> None:
    if not prob.is_finite_sum:
        raise ValueError(f"{what} needs a finite-sum instance with exact expectations")
    if not (prob.lipschitz_certified and prob.sigma_certified and prob.sigma_bound is not None):
        raise ValueError(
            f"{what} needs certified L and exact sigma^2; "
            f"instance {prob.name!r} carries empirical constants only"
        )


def _check_beta_open(beta: float) -> float:
    beta = float(beta)
    if not (0.0 < beta <= 1.0):
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    return beta


def variance_recursion_rhs(
    prob: ProblemInstance,
    x_prev: np.ndarray,
    x_curr: np.ndarray,
    v_prev: np.ndarray,
    beta: float,
) -> float:
    """Right-hand side of the one-step variance recursion, from certified constants."""
    d_dir = v_prev - full_gradient(prob, x_prev)
    d_step = np.asarray(x_curr, dtype=float) - np.asarray(x_prev, dtype=float)
    one_m = (1.0 - beta) ** 2
    return float(
        one_m * (d_dir @ d_dir)
        + 2.0 * one_m * prob.lipschitz_L**2 * (d_step @ d_step)
        + 2.0 * beta**2 * prob.sigma_bound
    )


def check_variance_recursion_step(
    prob: ProblemInstance,
    x_prev: np.ndarray,
    x_curr: np.ndarray,
    v_prev: np.ndarray,
    beta: float,
    n_mc: int = 10_000,
    rng=None,
) -> VarianceBoundReport:
    """Check the one-step variance recursion at a single (x_prev, x_curr, v_prev).

    The left side is the conditional expectation over the one fresh sample;
    for a finite sum of n components it is enumerated exactly whenever
    n <= max(n_mc, 10^4), otherwise estimated from n_mc uniform draws.
    """
    _require_certified(prob, "the one-step variance check")
    beta = _check_beta_open(beta)
    x_prev = np.asarray(x_prev, dtype=float)
    x_curr = np.asarray(x_curr, dtype=float)
    v_prev = np.asarray(v_prev, dtype=float)

    n = prob.num_components
    g_curr = full_gradient(prob, x_curr)
    if n <= max(n_mc, 10_000):
        ids = np.arange(n)
        exact = True
    else:
        if rng is None:
            raise ValueError("Monte-Carlo mode needs an rng")
        ids = rng.integers(0, n, size=n_mc)
        exact = False
    rows_curr = gradient_rows(prob, x_curr, ids)
    rows_prev = gradient_rows(prob, x_prev, ids)
    v_new = rows_curr + (1.0 - beta) * (v_prev - rows_prev)
    errs = np.sum((v_new - g_curr) ** 2, axis=1)
    lhs = float(errs.mean())
    stderr = 0.0 if exact else float(errs.std(ddof=1) / np.sqrt(errs.size))

    rhs = variance_recursion_rhs(prob, x_prev, x_curr, v_prev, beta)
    return VarianceBoundReport(
        lhs_mc=lhs,
        stderr=stderr,
        rhs=rhs,
        passed=lhs <= rhs + 3.0 * stderr,
        inputs={
            "x_prev": x_prev,
            "x_curr": x_curr,
            "v_prev": v_prev,
            "beta": beta,
            "n_mc": ids.size,
            "exact": exact,
        },
    )


def initial_direction_variance(prob: ProblemInstance, x0: np.ndarray, b_tilde: int) -> float:
    """Exact E||v_0 - grad f(x_0)||^2 for a without-replacement batch of b_tilde.

    Mean of a simple random sample without replacement from n vectors with
    per-point scatter s2 has variance (s2 / b) * (n - b) / (n - 1).
    """
    n = prob.num_components
    if n is None:
        raise ValueError("exact initial variance needs a finite-sum instance")
    if not 1 <= b_tilde <= n:
        raise ValueError(f"b_tilde must lie in [1, {n}], got {b_tilde}")
    if n == 1 or b_tilde == n:
        return 0.0
    return sigma2_at(prob, x0) * (n - b_tilde) / (b_tilde * (n - 1))


def check_variance_recursion_unrolled(
    prob: ProblemInstance,
    trajectory: np.ndarray,
    v0,
    beta: float,
    n_mc: int = 10_000,
    rng=None,
) -> VarianceBoundReport:
    """Replay the recursion along a frozen trajectory and compare against the
    unrolled variance bound.

    ``trajectory`` is an array of shape (k+1, dim) of fixed points
    x_0, ..., x_k; only the sample draws are random, so the expectation being
    estimated is conditional on the path (the frozen-trajectory surrogate for
    the full bound).  ``v0`` is either a fixed initial direction (an array) or
    an integer batch size, in which case every replay draws a fresh
    without-replacement initial batch and the bound's initial term uses the
    exact without-replacement variance.
    """
    _require_certified(prob, "the unrolled variance check")
    beta = _check_beta_open(beta)
    if rng is None:
        raise ValueError("the unrolled check needs an rng")
    if n_mc < 2:
        raise ValueError("need n_mc >= 2 replays")
    trajectory = np.asarray(trajectory, dtype=float)
    if trajectory.ndim != 2 or trajectory.shape[1] != prob.dim:
        raise ValueError(f"trajectory must have shape (k+1, {prob.dim})")
    k = trajectory.shape[0] - 1
    n = prob.num_components
    all_ids = np.arange(n)

    # Initial directions, one per replay.
    x0 = trajectory[0]
    rows0 = gradient_rows(prob, x0, all_ids)
    if np.ndim(v0) == 0:
        b_tilde = int(v0)
        if not 1 <= b_tilde <= n:
            raise ValueError(f"initial batch size must lie in [1, {n}], got {b_tilde}")
        if b_tilde == 1:
            batch = rng.integers(0, n, size=(n_mc, 1))
        else:
            batch = rng.permuted(
                np.broadcast_to(all_ids, (n_mc, n)).copy(), axis=1
            )[:, :b_tilde]
        V = rows0[batch].mean(axis=1)
        init_term = initial_direction_variance(prob, x0, b_tilde)
        v0_record = b_tilde
    else:
        v0 = np.asarray(v0, dtype=float)
        V = np.broadcast_to(v0, (n_mc, prob.dim)).copy()
        d0 = v0 - rows0.mean(axis=0)
        init_term = float(d0 @ d0)
        v0_record = v0

    for i in range(1, k + 1):
        rows_curr = gradient_rows(prob, trajectory[i], all_ids)
        rows_prev = gradient_rows(prob, trajectory[i - 1], all_ids)
        ids = rng.integers(0, n, size=n_mc)
        V = rows_curr[ids] + (1.0 - beta) * (V - rows_prev[ids])

    g_final = full_gradient(prob, trajectory[k])
    errs = np.sum((V - g_final) ** 2, axis=1)
    lhs = float(errs.mean())
    stderr = float(errs.std(ddof=1) / np.sqrt(n_mc))

    decay = (1.0 - beta) ** 2
    steps = np.sum(np.diff(trajectory, axis=0) ** 2, axis=1)  # ||x_{i+1} - x_i||^2
    weights = decay ** np.arange(k, 0, -1)  # (1-beta)^{2(k-i)} for i = 0..k-1
    rhs = float(
        decay**k * init_term
        + 2.0 * beta * prob.sigma_bound
        + 2.0 * prob.lipschitz_L**2 * np.sum(weights * steps)
    )
    return VarianceBoundReport(
        lhs_mc=lhs,
        stderr=stderr,
        rhs=rhs,
        passed=lhs <= rhs + 3.0 * stderr,
        inputs={"k": k, "beta": beta, "n_mc": n_mc, "v0": v0_record},
    )


def check_schedule_constraint(
    T_range, L: float, slack: float = 1e-12, keep_margins: bool = False
) -> ScheduleReport:
    """Verify beta >= 2 L^2 eta^2 / (1 - L eta) for every horizon in ``T_range``.

    The whole range is evaluated vectorized with the same float operations the
    scalar schedule uses, and a deterministic subsample is cross-checked
    bitwise against :func:`schedule_from_T` to pin the two paths together.
    """
    Ts = np.asarray(T_range, dtype=np.int64)
    if Ts.size == 0:
        raise ValueError("empty horizon range")
    if np.any(Ts < 1):
        raise ValueError("horizons must be >= 1")
    c = np.cbrt(Ts + 1.0)
    eta = 1.0 / (2.0 * L * c)
    beta = 1.0 / (c * c)
    q = L * eta
    constraint = 2.0 * (L * L) * (eta * eta) / (1.0 - q)
    margins = beta - constraint

    ok = bool(
        np.all(constraint > 0.0) and np.all(beta < 1.0) and np.all(margins >= -slack)
    )

    # Bind the vectorized formulas to the scalar schedule on a subsample.
    probe = np.unique(
        np.concatenate(
            [[0, Ts.size - 1], np.arange(0, Ts.size, max(1, Ts.size // 97))]
        )
    )
    for i in probe:
        hp = schedule_from_T(int(Ts[i]), L)
        if hp.eta != eta[i] or hp.beta != beta[i]:
            raise AssertionError(
                f"vectorized schedule disagrees with schedule_from_T at T={Ts[i]}"
            )

    worst = int(np.argmin(margins))
    return ScheduleReport(
        passed=ok,
        worst_margin=float(margins[worst]),
        worst_T=int(Ts[worst]),
        n_checked=int(Ts.size),
        margins=margins if keep_margins else None,
    )


def rate_slope(summary) -> float:
    """Least-squares slope of log(mean ||G||^2) against log(T+1).

    ``summary`` is a sequence of (T, seed-averaged mean squared gradient
    mapping) pairs covering at least three distinct horizons.
    """
    pairs = [(int(T), float(m)) for T, m in summary]
    Ts = np.array([T for T, _ in pairs], dtype=float)
    means = np.array([m for _, m in pairs], dtype=float)
    if np.unique(Ts).size < 3:
        raise ValueError("rate fit needs at least three distinct horizons")
    if np.any(means <= 0):
        raise ValueError("rate fit needs positive means")
    return float(np.polyfit(np.log(Ts + 1.0), np.log(means), 1)[0])
