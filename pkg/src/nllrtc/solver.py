"""
Low-rank tensor completion by ADMM.

:func:`admm_complete` minimizes a weighted sum of logDet rank surrogates of
every unfolding subject to agreement with the observed entries. Each
iteration averages the auxiliary tensors on the missing entries (observed
ones stay pinned), shrinks every unfolding with weighted singular value
thresholding, and updates the multipliers. :func:`halrtc_complete` runs the
same iteration with unit weights, i.e. plain nuclear-norm shrinkage.
"""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import EmptyObservationError, NumericError, ShapeError
from .tensor import fold, unfold


@dataclass(frozen=True)
class SolverConfig:
    """ADMM parameters.

    Attributes
    ----------
    alphas : tuple of float
        Nonnegative mode weights summing to one, one per tensor mode.
    beta : float
        Penalty parameter.
    epsilon : float or tuple of float
        logDet offset, scalar or one value per mode.
    tol : float
        Stop once the relative change of the estimate drops below this.
    max_iter : int
    weighting : {"current", "previous"}
        Where the logDet weights come from. ``"current"`` linearizes at the
        singular values of the matrix being thresholded; ``"previous"`` uses
        the singular values of the previous auxiliary iterate (the first
        iteration, whose iterate is zero, falls back to ``"current"``).
    """

    alphas: tuple = (0.25, 0.25, 0.25, 0.25)
    beta: float = 1.0
    epsilon: object = 1e-4
    tol: float = 1e-5
    max_iter: int = 100
    weighting: str = "current"

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        if any(a < 0 for a in alphas):
            raise ValueError("alphas must be nonnegative")
        if abs(sum(alphas) - 1.0) > 1e-12:
            raise ValueError(f"alphas must sum to 1, got {sum(alphas)!r}")
        eps = np.atleast_1d(np.asarray(self.epsilon, dtype=float))
        if np.any(eps <= 0):
            raise ValueError("epsilon must be positive")
        if eps.size not in (1, len(alphas)):
            raise ValueError("epsilon must be a scalar or have one entry per mode")
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.weighting not in ("current", "previous"):
            raise ValueError(f"unknown weighting {self.weighting!r}")

    @classmethod
    def for_range(cls, value_range, **kwargs):
        """Defaults for data in ``[0, value_range]``: epsilon 1e-4 above 1, else 1e-2."""
        kwargs.setdefault("epsilon", 1e-4 if value_range > 1 else 1e-2)
        return cls(**kwargs)

    def epsilons(self, order):
        eps = np.atleast_1d(np.asarray(self.epsilon, dtype=float))
        return np.broadcast_to(eps, (order,)).copy()


@dataclass
class SolverTrace:
    """Iteration log of one solver run."""

    iterations: int = 0
    changes: list = field(default_factory=list)
    converged: bool = False


def logdet_weights(sigma, eps):
    """Linearization weights ``1 / (sigma + eps)`` of the logDet surrogate."""
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma < 0):
        raise ValueError("singular values must be nonnegative")
    return 1.0 / (sigma + eps)


def weighted_svt(matrix, tau, omega):
    """Weighted singular value thresholding.

    Returns ``U diag(max(s - tau * omega, 0)) V^T`` for the thin SVD
    ``matrix = U diag(s) V^T`` with ``s`` nonincreasing. With nondecreasing
    weights this is the minimizer of
    ``tau * omega @ sigma(X) + 0.5 * ||X - matrix||_F^2``.
    """
    out, _ = _svt(np.asarray(matrix, dtype=float), tau, np.asarray(omega, dtype=float))
    return out


def _svt(matrix, tau, omega):
    u, s, vt = np.linalg.svd(matrix, full_matrices=False)
    if callable(omega):
        omega = omega(s)
    if omega.shape != s.shape:
        raise ShapeError(f"need {s.size} weights, got {omega.size}")
    shrunk = np.maximum(s - tau * omega, 0.0)
    keep = shrunk > 0
    out = (u[:, keep] * shrunk[keep]) @ vt[keep]
    return out, shrunk


def admm_complete(values, mask, cfg=None):
    """Complete a tensor with the logDet-weighted ADMM iteration.

    Parameters
    ----------
    values : ndarray
        Tensor of order ``len(cfg.alphas)``; entries where `mask` is 0 are
        ignored.
    mask : ndarray
        1 for observed entries, 0 for missing ones.
    cfg : SolverConfig, optional

    Returns
    -------
    completed : ndarray
        Equal to `values` on every observed entry.
    trace : SolverTrace
    """
    return _admm(values, mask, cfg or SolverConfig(), weighted=True)


def halrtc_complete(values, mask, cfg=None):
    """Complete a tensor by nuclear-norm ADMM (unit singular value weights)."""
    return _admm(values, mask, cfg or SolverConfig(), weighted=False)


def _admm(values, mask, cfg, weighted):
    values = np.asarray(values, dtype=float)
    obs = np.asarray(mask).astype(bool)
    if obs.shape != values.shape:
        raise ShapeError(f"mask shape {obs.shape} differs from values shape {values.shape}")
    order = values.ndim
    if len(cfg.alphas) != order:
        raise ShapeError(f"{len(cfg.alphas)} mode weights given for an order-{order} tensor")
    if not np.all(np.isfinite(values[obs])):
        raise NumericError("observed entries must be finite")
    if not obs.any():
        raise EmptyObservationError("cannot complete a tensor without observed entries")

    trace = SolverTrace()
    observed = np.where(obs, values, 0.0)
    if obs.all():
        trace.converged = True
        return observed, trace

    beta = cfg.beta
    eps = cfg.epsilons(order)
    # a zero weight removes the mode from the model altogether
    active = [i for i in range(order) if cfg.alphas[i] > 0]
    aux = {i: np.zeros_like(observed) for i in active}
    mult = {i: np.zeros_like(observed) for i in active}
    sigma = {i: np.zeros(min(values.shape[i], values.size // values.shape[i])) for i in active}

    x_prev = None
    for _ in range(cfg.max_iter):
        # while every auxiliary tensor is still shrunk to zero the estimate
        # cannot move, so a zero change then says nothing about convergence
        warming_up = all(not s.any() for s in sigma.values())
        avg = sum(aux[i] - mult[i] / beta for i in active) / len(active)
        x = np.where(obs, values, avg)
        for i in active:
            if not weighted:
                omega = np.ones_like(sigma[i])
            elif cfg.weighting == "previous" and sigma[i].any():
                omega = logdet_weights(sigma[i], eps[i])
            else:
                omega = lambda s, e=eps[i]: logdet_weights(s, e)
            low, sigma[i] = _svt(unfold(x + mult[i] / beta, i), cfg.alphas[i] / beta, omega)
            aux[i] = fold(low, i, x.shape)
            mult[i] += beta * (x - aux[i])
        if not np.all(np.isfinite(x)):
            raise NumericError(f"non-finite estimate at iteration {trace.iterations + 1}")
        trace.iterations += 1

        if x_prev is not None:
            base = np.linalg.norm(x_prev)
            diff = np.linalg.norm(x - x_prev)
            change = diff / base if base > 0 else (0.0 if diff == 0 else np.inf)
            trace.changes.append(float(change))
            if change < cfg.tol and not warming_up:
                trace.converged = True
                x_prev = x
                break
        x_prev = x
    return x_prev, trace
