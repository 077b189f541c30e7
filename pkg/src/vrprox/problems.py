"""Synthetic finite-sum problem generators with certified constants.

Three families, all deterministic in their seed:

* ``make_quadratic``        -- f_i(x) = 0.5 ||x - c_i||^2.  Everything is
  exact: L = 1 (sample gradients are x - c_i, so gradient differences are
  x - y for every sample), sigma^2 = mean_i ||c_i - cbar||^2 at every x, and
  min f = f(cbar) = sigma^2 / 2.
* ``make_nonconvex_sigmoid`` -- binary-classification loss
  f_i(x) = s(-y_i <a_i, x>) with s the logistic sigmoid.  Smooth, bounded and
  nonconvex in x.  Certified L = max|s''| * max_i ||a_i||^2 with
  max|s''| = 1/(6 sqrt(3)) ~= 0.09623 (the logistic curvature bound).
* ``make_robust_regression`` -- f_i(x) = r_i^2 / (1 + r_i^2) with residual
  r_i = <a_i, x> - b_i, a smooth redescending loss.  Certified
  L = 2 * max_i ||a_i||^2 since |phi''(r)| = |2(1 - 3r^2)/(1 + r^2)^3| <= 2.

The quadratic family carries fully certified (L, sigma^2, f*) and is the one
bound checks run on.  For the nonconvex families sigma^2 is an empirical
estimate (enumerated on a sampling ball of radius 10 and inflated by 1.5) and
is labeled uncertified.
"""

from __future__ import annotations

import numpy as np

from .oracle import ProblemInstance, estimate_sigma2

# max |s''| for the logistic sigmoid s(u) = 1 / (1 + exp(-u)).
SIGMOID_CURVATURE_BOUND = 1.0 / (6.0 * np.sqrt(3.0))

# max |phi''| for phi(r) = r^2 / (1 + r^2), attained at r = 0.
REDESCENDING_CURVATURE_BOUND = 2.0

# Radius of the ball the empirical sigma^2 surrogate samples; variance outside
# it is not certified (documented caveat for the nonconvex families).
SIGMA_ESTIMATION_RADIUS = 10.0
SIGMA_INFLATION = 1.5


def _ball_points(rng, count: int, dim: int, radius: float) -> np.ndarray:
    """Uniform points in the ball of the given radius."""
    directions = rng.standard_normal((count, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.random(count) ** (1.0 / dim)
    return directions * radii[:, None]


def make_quadratic(
    n: int, p: int, spread: float = 1.0, seed: int = 0, centers: np.ndarray | None = None
) -> ProblemInstance:
    """Finite sum of quadratics f_i(x) = 0.5 ||x - c_i||^2.

    Centers are uniform in the ball of radius ``spread`` unless given
    explicitly.  All constants are exact: L = 1, sigma^2 is the center scatter
    (independent of x), and f* = sigma^2 / 2 at x = cbar.
    """
    if n < 1 or p < 1:
        raise ValueError("need n >= 1 and p >= 1")
    if centers is None:
        if not spread > 0:
            raise ValueError(f"spread must be positive, got {spread}")
        rng = np.random.Generator(np.random.PCG64(seed))
        centers = _ball_points(rng, n, p, spread)
    else:
        centers = np.asarray(centers, dtype=float)
        if centers.shape != (n, p):
            raise ValueError(f"centers must have shape ({n}, {p}), got {centers.shape}")
    cbar = centers.mean(axis=0)
    sigma2 = float(np.mean(np.sum((centers - cbar) ** 2, axis=1)))

    def grad_sample(x, i):
        return x - centers[i]

    def value_sample(x, i):
        d = x - centers[i]
        return 0.5 * float(d @ d)

    def grad_batch(x, ids):
        return x - centers[ids]

    def mean_grad(x):
        return x - cbar

    def mean_value(x):
        d = x - cbar
        return 0.5 * float(d @ d) + 0.5 * sigma2

    return ProblemInstance(
        name=f"quadratic(n={n},p={p})",
        dim=p,
        num_components=n,
        grad_sample=grad_sample,
        value_sample=value_sample,
        lipschitz_L=1.0,
        lipschitz_certified=True,
        sigma_bound=sigma2,
        sigma_certified=True,
        f_star_ref=0.5 * sigma2,
        grad_batch=grad_batch,
        mean_grad=mean_grad,
        mean_value=mean_value,
        sampling_radius=max(10.0 * float(np.max(np.abs(centers))), 1.0),
        meta={"family": "quad", "n": n, "p": p, "seed": seed, "centers": centers, "cbar": cbar},
    )


def _sigmoid(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


def _empirical_sigma2(prob: ProblemInstance, seed: int) -> float:
    """Enumerated gradient variance on the sampling ball, inflated x1.5."""
    rng = np.random.Generator(np.random.PCG64([seed, 0x5167]))
    xs = [np.zeros(prob.dim)]
    xs.extend(_ball_points(rng, 32, prob.dim, SIGMA_ESTIMATION_RADIUS))
    return SIGMA_INFLATION * estimate_sigma2(prob, xs)


def make_nonconvex_sigmoid(n: int, p: int, seed: int = 0) -> ProblemInstance:
    """Nonconvex binary-classification loss f_i(x) = s(-y_i <a_i, x>).

    Features a_i have ||a_i|| <= 1; labels come from a planted direction with
    flip noise.  Certified L = max|s''| * max_i ||a_i||^2.  sigma^2 is an
    empirical (uncertified) estimate on the sampling ball.
    """
    if n < 1 or p < 1:
        raise ValueError("need n >= 1 and p >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    A = _ball_points(rng, n, p, 1.0)
    w_true = rng.standard_normal(p)
    y = np.where(A @ w_true + 0.1 * rng.standard_normal(n) >= 0, 1.0, -1.0)

    def margin(x, i):
        return -y[i] * float(A[i] @ x)

    def grad_sample(x, i):
        s = _sigmoid(margin(x, i))
        return (s * (1.0 - s) * (-y[i])) * A[i]

    def value_sample(x, i):
        return float(_sigmoid(margin(x, i)))

    def grad_batch(x, ids):
        u = -(A[ids] @ x) * y[ids]
        s = _sigmoid(u)
        return (s * (1.0 - s) * (-y[ids]))[:, None] * A[ids]

    def mean_grad(x):
        u = -(A @ x) * y
        s = _sigmoid(u)
        return A.T @ (s * (1.0 - s) * (-y)) / n

    def mean_value(x):
        return float(np.mean(_sigmoid(-(A @ x) * y)))

    prob = ProblemInstance(
        name=f"sigmoid(n={n},p={p})",
        dim=p,
        num_components=n,
        grad_sample=grad_sample,
        value_sample=value_sample,
        lipschitz_L=float(SIGMOID_CURVATURE_BOUND * np.max(np.sum(A * A, axis=1))),
        lipschitz_certified=True,
        sigma_bound=None,
        sigma_certified=False,
        grad_batch=grad_batch,
        mean_grad=mean_grad,
        mean_value=mean_value,
        sampling_radius=SIGMA_ESTIMATION_RADIUS,
        meta={"family": "sigmoid", "n": n, "p": p, "seed": seed, "A": A, "y": y},
    )
    return _with_empirical_sigma(prob, seed)


def make_robust_regression(n: int, p: int, seed: int = 0) -> ProblemInstance:
    """Redescending robust regression f_i(x) = r_i^2 / (1 + r_i^2).

    Targets follow a planted model with Gaussian noise plus a 10% fraction of
    gross outliers (the regime this loss is built for).  Certified
    L = 2 * max_i ||a_i||^2.  sigma^2 is empirical, as for the sigmoid family.
    """
    if n < 1 or p < 1:
        raise ValueError("need n >= 1 and p >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    A = _ball_points(rng, n, p, 1.0)
    w_true = rng.standard_normal(p)
    b = A @ w_true + 0.1 * rng.standard_normal(n)
    outliers = rng.random(n) < 0.1
    b = np.where(outliers, b + rng.choice([-5.0, 5.0], size=n), b)

    def grad_sample(x, i):
        r = float(A[i] @ x) - b[i]
        return (2.0 * r / (1.0 + r * r) ** 2) * A[i]

    def value_sample(x, i):
        r = float(A[i] @ x) - b[i]
        return r * r / (1.0 + r * r)

    def grad_batch(x, ids):
        r = A[ids] @ x - b[ids]
        return (2.0 * r / (1.0 + r * r) ** 2)[:, None] * A[ids]

    def mean_grad(x):
        r = A @ x - b
        return A.T @ (2.0 * r / (1.0 + r * r) ** 2) / n

    def mean_value(x):
        r = A @ x - b
        return float(np.mean(r * r / (1.0 + r * r)))

    prob = ProblemInstance(
        name=f"robust(n={n},p={p})",
        dim=p,
        num_components=n,
        grad_sample=grad_sample,
        value_sample=value_sample,
        lipschitz_L=float(REDESCENDING_CURVATURE_BOUND * np.max(np.sum(A * A, axis=1))),
        lipschitz_certified=True,
        sigma_bound=None,
        sigma_certified=False,
        grad_batch=grad_batch,
        mean_grad=mean_grad,
        mean_value=mean_value,
        sampling_radius=SIGMA_ESTIMATION_RADIUS,
        meta={"family": "robust", "n": n, "p": p, "seed": seed, "A": A, "b": b},
    )
    return _with_empirical_sigma(prob, seed)


def _with_empirical_sigma(prob: ProblemInstance, seed: int) -> ProblemInstance:
    from dataclasses import replace

    return replace(prob, sigma_bound=_empirical_sigma2(prob, seed), sigma_certified=False)


def parse_key(key: str) -> dict:
    """Validate a problem config key and return its fields.

    Accepted forms: ``quad:<n>:<p>:<spread>``, ``sigmoid:<n>:<p>``,
    ``robust:<n>:<p>``.
    """
    parts = key.strip().split(":")
    family = parts[0]
    try:
        if family == "quad" and len(parts) == 4:
            fields = {"family": "quad", "n": int(parts[1]), "p": int(parts[2]),
                    "spread": float(parts[3])}
        elif family == "sigmoid" and len(parts) == 3:
            fields = {"family": "sigmoid", "n": int(parts[1]), "p": int(parts[2])}
        elif family == "robust" and len(parts) == 3:
            fields = {"family": "robust", "n": int(parts[1]), "p": int(parts[2])}
        else:
            raise ValueError("unrecognized form")
        if fields["n"] < 1 or fields["p"] < 1:
            raise ValueError("need n >= 1 and p >= 1")
        if fields.get("spread", 1.0) <= 0:
            raise ValueError("spread must be positive")
    except ValueError as exc:
        raise ValueError(
            f"bad problem key {key!r} ({exc}); expected "
            "quad:<n>:<p>:<spread> | sigmoid:<n>:<p> | robust:<n>:<p>"
        ) from None
    return fields


def from_key(key: str, seed: int = 0) -> ProblemInstance:
    """Build a problem from a config key (see :func:`parse_key` for forms)."""
    fields = parse_key(key)
    if fields["family"] == "quad":
        return make_quadratic(fields["n"], fields["p"], fields["spread"], seed=seed)
    if fields["family"] == "sigmoid":
        return make_nonconvex_sigmoid(fields["n"], fields["p"], seed=seed)
    return make_robust_regression(fields["n"], fields["p"], seed=seed)
