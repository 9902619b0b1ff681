import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nllrtc.exceptions import EmptyObservationError, NumericError, ShapeError
from nllrtc.solver import (SolverConfig, admm_complete, halrtc_complete, logdet_weights,
                           weighted_svt)
from nllrtc.synthetic import multilinear_tensor
from nllrtc.tensor import fold, unfold


def rel_err(x, ref):
    return np.linalg.norm(x - ref) / np.linalg.norm(ref)


def test_logdet_weights_examples():
    np.testing.assert_allclose(logdet_weights([0.0, 0.0], 0.5), [2.0, 2.0])
    np.testing.assert_allclose(logdet_weights([3.0, 1.0], 1e-4), [0.333322, 0.999900], atol=1e-6)
    with pytest.raises(ValueError):
        logdet_weights([-1.0], 0.1)


def test_svt_zero_weights_is_identity(rng):
    a = rng.standard_normal((5, 7))
    np.testing.assert_allclose(weighted_svt(a, 2.0, np.zeros(5)), a, atol=1e-12)


def test_svt_diagonal_example():
    out = weighted_svt(np.diag([3.0, 1.0]), 0.5, np.array([1 / 3, 1.0]))
    np.testing.assert_allclose(out, np.diag([3 - 0.5 / 3, 0.5]), atol=1e-12)
    assert out[0, 0] == pytest.approx(2.8333, abs=1e-4)


def test_svt_matches_brute_force_on_diagonal():
    # for a diagonal input the optimum is diagonal, so enumerate a grid of
    # diagonal candidates and compare objective values
    s = np.array([2.0, 1.2, 0.3])
    tau, omega = 0.7, np.array([0.2, 0.5, 1.0])
    out = weighted_svt(np.diag(s), tau, omega)
    objective = lambda d: tau * np.sort(np.abs(d))[::-1] @ omega + 0.5 * np.sum((d - s) ** 2)
    grid = np.linspace(0, 2.5, 51)
    best = min(objective(np.array(d)) for d in itertools.product(grid, repeat=3))
    assert objective(np.diag(out)) <= best + 1e-12
    np.testing.assert_allclose(np.diag(out), np.maximum(s - tau * omega, 0))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), tau=st.floats(0, 3))
def test_svt_singular_values_and_nonexpansive(seed, tau):
    r = np.random.default_rng(seed)
    a, b = r.standard_normal((6, 4)), r.standard_normal((6, 4))
    omega = np.sort(r.random(4))
    out = weighted_svt(a, tau, omega)
    s = np.linalg.svd(a, compute_uv=False)
    expected = np.sort(np.maximum(s - tau * omega, 0))[::-1]
    np.testing.assert_allclose(np.linalg.svd(out, compute_uv=False), expected, atol=1e-10)
    unit = np.ones(4)
    diff = weighted_svt(a, tau, unit) - weighted_svt(b, tau, unit)
    assert np.linalg.norm(diff) <= np.linalg.norm(a - b) + 1e-10


def test_svt_weight_count_checked(rng):
    with pytest.raises(ShapeError):
        weighted_svt(rng.random((3, 4)), 1.0, np.ones(4))


def test_fully_observed_returns_input(rng):
    x = rng.random((3, 3, 2, 4))
    out, trace = admm_complete(x, np.ones(x.shape))
    np.testing.assert_array_equal(out, x)
    assert trace.converged and trace.iterations == 0


def tucker_case(seed=0):
    x = multilinear_tensor((4, 4, 3, 16), (2, 2, 2, 3), seed=seed)
    mask = (np.random.default_rng(100 + seed).random(x.shape) >= 0.4).astype(np.uint8)
    return x, mask


def test_tucker_recovery():
    x, mask = tucker_case(0)
    out, trace = admm_complete(x, mask, SolverConfig(beta=1.0, epsilon=1e-2))
    assert trace.converged
    assert rel_err(out, x) < 1e-2


def test_observed_entries_pinned():
    x, mask = tucker_case(1)
    corrupted = np.where(mask == 1, x, 99.0)
    out, _ = admm_complete(corrupted, mask, SolverConfig(epsilon=1e-2, max_iter=10))
    np.testing.assert_array_equal(out[mask == 1], x[mask == 1])


def test_deterministic():
    x, mask = tucker_case(2)
    cfg = SolverConfig(epsilon=1e-2, max_iter=20)
    a, ta = admm_complete(x, mask, cfg)
    b, tb = admm_complete(x, mask, cfg)
    assert a.tobytes() == b.tobytes()
    assert ta.changes == tb.changes


def matrix_completion_oracle(m, obs, beta, eps, iters):
    """Reference ADMM on a single matrix with logDet weights."""
    aux = np.zeros_like(m)
    mult = np.zeros_like(m)
    x = None
    for _ in range(iters):
        x = np.where(obs, m, aux - mult / beta)
        u, s, vt = np.linalg.svd(x + mult / beta, full_matrices=False)
        s = np.maximum(s - (1 / beta) / (s + eps), 0)
        aux = (u * s) @ vt
        mult = mult + beta * (x - aux)
    return x


def test_single_mode_matches_matrix_completion():
    x, mask = tucker_case(3)
    cfg = SolverConfig(alphas=(1, 0, 0, 0), beta=1.0, epsilon=1e-2, max_iter=15, tol=1e-300)
    out, trace = admm_complete(x, mask, cfg)
    assert trace.iterations == 15
    ref = matrix_completion_oracle(unfold(x, 0), unfold(mask, 0).astype(bool), 1.0, 1e-2, 15)
    np.testing.assert_allclose(out, fold(ref, 0, x.shape), atol=1e-10)


def test_halrtc_within_factor_of_weighted():
    x, mask = tucker_case(0)
    nl, _ = admm_complete(x, mask, SolverConfig(beta=1.0, epsilon=1e-2))
    ha, _ = halrtc_complete(x, mask, SolverConfig(beta=0.1, max_iter=300))
    assert rel_err(ha, x) < 10 * max(rel_err(nl, x), 1e-2)


def test_trace_changes_logged():
    x, mask = tucker_case(4)
    _, trace = admm_complete(x, mask, SolverConfig(epsilon=1e-2, max_iter=7, tol=1e-300))
    assert trace.iterations == 7 and len(trace.changes) == 6 and not trace.converged


def test_errors(rng):
    x = rng.random((2, 2, 2, 2))
    with pytest.raises(EmptyObservationError):
        admm_complete(x, np.zeros(x.shape))
    with pytest.raises(ShapeError):
        admm_complete(x, np.ones((2, 2, 2)))
    with pytest.raises(ShapeError):
        admm_complete(x[0], np.ones((2, 2, 2)))
    bad = x.copy()
    bad[0, 0, 0, 0] = np.nan
    with pytest.raises(NumericError):
        admm_complete(bad, np.ones(x.shape))


@pytest.mark.parametrize("kwargs", [
    dict(alphas=(0.5, 0.5, 0.5, 0.5)), dict(alphas=(1.5, -0.5, 0, 0)), dict(beta=0),
    dict(epsilon=0), dict(epsilon=(1e-2, 1e-2)), dict(tol=0), dict(max_iter=0),
    dict(weighting="other"),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SolverConfig(**kwargs)


def test_for_range_epsilon():
    assert SolverConfig.for_range(255).epsilon == 1e-4
    assert SolverConfig.for_range(1.0).epsilon == 1e-2
