"""Single-loop variance-reduced proximal gradient method.

One run minimizes F(x) = f(x) + psi(x) by iterating

    x_{t+1} = prox_{eta * psi}(x_t - eta * v_t),

where v_t is one of the direction recursions in :mod:`vrprox.estimators`,
initialized from a mini-batch of size b_tilde.  The T-step parameter schedule

    eta = 1 / (2 L (T+1)^{1/3}),   beta = 1 / (T+1)^{2/3},
    b_tilde = ceil((T+1)^{1/3} / 2)

drives the average squared gradient-mapping norm to O((T+1)^{-2/3}) at a cost
of b_tilde + 2T sample-gradient evaluations (same-sample recursion), and it
always satisfies the step/weight compatibility constraint
beta >= 2 L^2 eta^2 / (1 - L eta).

Stationarity is measured by the gradient mapping

    G_eta(x) = (x - prox_{eta * psi}(x - eta * grad f(x))) / eta,

which vanishes exactly at stationary points of F.  The run returns the
uniformly selected output iterate (drawn up front, captured in O(p) memory)
plus optional per-iteration diagnostics computed from exact full gradients;
diagnostic evaluations are counted separately and never enter the oracle-call
tally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimators import (
    EVALS_PER_STEP,
    HYBRID_SARAH,
    KINDS,
    MOMENTUM_SARAH,
    SARAH,
    SGD,
    init_estimator,
    update_hybrid_sarah,
    update_momentum_sarah,
    update_sgd,
)
from .oracle import (
    DiagnosticUnsupportedError,
    ProblemInstance,
    draw_sample_ids,
    full_gradient,
    full_value,
)
from .prox import PsiSpec, add_psi, is_psi_infinite, prox, psi_value

# Iterates beyond this norm abort the run; a misconfigured step size must fail
# loudly instead of emitting garbage traces.
MAX_ITERATE_NORM = 1e12


class DivergenceError(RuntimeError):
    """Raised when an iterate leaves the finite range the run can trust."""

    def __init__(self, t: int, norm: float):
        super().__init__(f"iterate diverged at t={t} (||x_t|| = {norm:.6g})")
        self.t = t
        self.norm = norm


@dataclass(frozen=True)
class HyperParams:
    """Step size, estimator weight, initial batch and horizon of one run.

    ``eta0`` is the step used for the very first update (the schedule keeps a
    single constant step, eta0 = eta).
    """

    eta: float
    beta: float
    b_tilde: int
    T: int
    eta0: float

    def __post_init__(self):
        if not (self.eta > 0 and np.isfinite(self.eta)):
            raise ValueError(f"eta must be a positive finite scalar, got {self.eta}")
        if not (self.eta0 > 0 and np.isfinite(self.eta0)):
            raise ValueError(f"eta0 must be a positive finite scalar, got {self.eta0}")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.b_tilde < 1:
            raise ValueError(f"b_tilde must be >= 1, got {self.b_tilde}")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")


def schedule_from_T(T: int, L: float) -> HyperParams:
    """Horizon-indexed schedule: eta, beta and b_tilde as cube-root powers of T+1.

    The initial batch size is resolved in exact integer arithmetic
    (ceil((T+1)^{1/3} / 2) equals the least m with 8 m^3 >= T+1), so float
    cube roots can never misround it at perfect cubes.
    """
    T = int(T)
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    if not (L > 0 and np.isfinite(L)):
        raise ValueError(f"L must be a positive finite scalar, got {L}")
    c = float(np.cbrt(T + 1.0))
    eta = 1.0 / (2.0 * L * c)
    beta = 1.0 / (c * c)
    m = max(int(np.ceil(np.cbrt((T + 1) / 8.0))), 1)
    while 8 * m**3 < T + 1:
        m += 1
    while m > 1 and 8 * (m - 1) ** 3 >= T + 1:
        m -= 1
    return HyperParams(eta=eta, beta=beta, b_tilde=m, T=T, eta0=eta)


def gradient_mapping(
    prob: ProblemInstance, psi: PsiSpec, x: np.ndarray, eta: float
) -> np.ndarray:
    """G_eta(x) = (x - prox_{eta psi}(x - eta grad f(x))) / eta; finite-sum only."""
    if not (eta > 0 and np.isfinite(eta)):
        raise ValueError(f"eta must be a positive finite scalar, got {eta}")
    x = np.asarray(x, dtype=float)
    g = full_gradient(prob, x)
    return (x - prox(psi, x - eta * g, eta)) / eta


@dataclass
class RunTrace:
    """Per-iteration diagnostics and the uniformly selected output iterate.

    ``oracle_calls`` counts only algorithmic sample-gradient evaluations
    (b_tilde + 2T for the same-sample recursion, b_tilde + 3T for the hybrid,
    b_tilde + T for plain SGD, at unit batch size); the full gradients spent
    on diagnostics are tallied in ``diagnostic_full_gradients``.  Diagnostic
    arrays have length T+1 (entries t = 0..T) and are None when diagnostics
    were off; ``step_sq[t] = ||x_{t+1} - x_t||^2`` is always recorded.
    """

    T: int
    kind: str
    seed: int | None
    output_index: int
    output_x: np.ndarray
    oracle_calls: int
    diagnostic_full_gradients: int
    step_sq: np.ndarray
    grad_map_sq: np.ndarray | None
    obj: np.ndarray | None
    est_err_sq: np.ndarray | None


def mean_grad_map_sq(trace: RunTrace) -> float:
    """Average of ||G_eta(x_t)||^2 over t = 0..T (the quantity the output
    iterate's expectation equals under uniform selection)."""
    if trace.grad_map_sq is None:
        raise ValueError("trace carries no diagnostics")
    return float(np.mean(trace.grad_map_sq))


def _guard(x: np.ndarray, t: int) -> None:
    if not np.all(np.isfinite(x)):
        raise DivergenceError(t, float(np.max(np.abs(x[np.isfinite(x)]), initial=0.0)))
    norm = float(np.linalg.norm(x))
    if norm > MAX_ITERATE_NORM:
        raise DivergenceError(t, norm)


def _draw(prob: ProblemInstance, batch_size: int, rng):
    ids = draw_sample_ids(prob, batch_size, rng)
    return int(ids[0]) if batch_size == 1 else ids


def run(
    prob: ProblemInstance,
    psi: PsiSpec,
    hp: HyperParams,
    rng,
    diagnostics: bool = True,
    kind: str = MOMENTUM_SARAH,
    x0: np.ndarray | None = None,
    batch_size: int = 1,
) -> RunTrace:
    """Execute one T-step run and return its trace.

    ``rng`` is a numpy Generator or an integer seed (an integer is recorded in
    the trace, which makes reruns bit-reproducible).  ``kind`` selects the
    direction recursion; ``sarah`` runs the same-sample recursion with weight
    0 regardless of ``hp.beta``, and ``sgd`` ignores the weight entirely.
    ``batch_size`` is the optional per-iteration mini-batch knob (default: a
    single sample per evaluation point, which is what the schedule assumes).

    Diagnostics (stationarity, objective, estimator error per iteration)
    require a finite-sum instance; requesting them on a streaming one raises
    :class:`DiagnosticUnsupportedError`.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown estimator kind {kind!r}; expected one of {KINDS}")
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    seed = None
    if isinstance(rng, (int, np.integer)):
        seed = int(rng)
        rng = np.random.Generator(np.random.PCG64(seed))
    if diagnostics and not prob.is_finite_sum:
        raise DiagnosticUnsupportedError(
            "per-iteration diagnostics need exact full gradients (finite-sum only); "
            "rerun with diagnostics off"
        )

    if x0 is None:
        x0 = prob.x0 if prob.x0 is not None else np.zeros(prob.dim)
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (prob.dim,) or not np.all(np.isfinite(x)):
        raise ValueError("x0 must be a finite point of the problem dimension")
    if is_psi_infinite(psi_value(psi, x)):
        raise ValueError("x0 lies outside the domain of the regularizer")

    T = hp.T
    state = init_estimator(prob, x, hp.b_tilde, rng, kind=kind)
    oracle_calls = hp.b_tilde
    output_index = int(rng.integers(0, T + 1))
    evals_per_step = EVALS_PER_STEP[kind] * batch_size

    step_sq = np.empty(T + 1)
    if diagnostics:
        grad_map_sq = np.empty(T + 1)
        obj = np.empty(T + 1)
        est_err_sq = np.empty(T + 1)
    else:
        grad_map_sq = obj = est_err_sq = None
    diagnostic_fulls = 0

    def record(t: int, xt: np.ndarray, vt: np.ndarray) -> None:
        nonlocal diagnostic_fulls
        g = full_gradient(prob, xt)
        diagnostic_fulls += 1
        gm = (xt - prox(psi, xt - hp.eta * g, hp.eta)) / hp.eta
        grad_map_sq[t] = gm @ gm
        obj[t] = add_psi(full_value(prob, xt), psi_value(psi, xt))
        dv = vt - g
        est_err_sq[t] = dv @ dv

    output_x = x.copy() if output_index == 0 else None
    if diagnostics:
        record(0, x, state.v)

    x_next = prox(psi, x - hp.eta0 * state.v, hp.eta0)
    _guard(x_next, 1)
    d = x_next - x
    step_sq[0] = d @ d
    x = x_next

    for t in range(1, T + 1):
        # Loop invariant: x is x_t, state.v is v_{t-1} formed at x_{t-1}.
        if kind == HYBRID_SARAH:
            s_xi = _draw(prob, batch_size, rng)
            s_zeta = _draw(prob, batch_size, rng)
            state = update_hybrid_sarah(state, x, s_xi, s_zeta, hp.beta, prob)
        elif kind == SGD:
            state = update_sgd(state, x, _draw(prob, batch_size, rng), prob)
        elif kind == SARAH:
            state = update_momentum_sarah(state, x, _draw(prob, batch_size, rng), 0.0, prob)
        else:
            state = update_momentum_sarah(state, x, _draw(prob, batch_size, rng), hp.beta, prob)
        oracle_calls += evals_per_step

        if t == output_index:
            output_x = x.copy()
        if diagnostics:
            record(t, x, state.v)

        x_next = prox(psi, x - hp.eta * state.v, hp.eta)
        _guard(x_next, t + 1)
        d = x_next - x
        step_sq[t] = d @ d
        x = x_next

    return RunTrace(
        T=T,
        kind=kind,
        seed=seed,
        output_index=output_index,
        output_x=output_x,
        oracle_calls=oracle_calls,
        diagnostic_full_gradients=diagnostic_fulls,
        step_sq=step_sq,
        grad_map_sq=grad_map_sq,
        obj=obj,
        est_err_sq=est_err_sq,
    )
