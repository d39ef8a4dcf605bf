import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import BACKENDS, _core, _fallback
from svdlid import _kernels


def test_backend_name_matches_selected_module():
    assert _kernels.BACKEND in ("cython", "python")
    if os.environ.get("SVDLID_PURE_PYTHON"):
        assert _kernels.BACKEND == "python" and _kernels.smo is _fallback.smo
    elif _core is not None:
        assert _kernels.BACKEND == "cython" and _kernels.smo is _core.smo


@given(st.lists(st.integers(0, 9), min_size=2, max_size=300), st.integers(1, 7))
@settings(max_examples=60, deadline=None)
def test_skipgram_counts_agree_with_pair_loop(seq, k):
    seq = np.array(seq, dtype=np.int64)
    want = oracles.skipgram_counts(seq, k, 10)
    for mod in BACKENDS:
        np.testing.assert_array_equal(mod.skipgram_counts(seq, k, 10), want)


def _chain(rng, m):
    p = rng.dirichlet(np.ones(m), size=m)
    cum = np.ascontiguousarray(np.cumsum(p, axis=1))
    cum[:, -1] = 1.0
    return p, cum


def test_markov_walk_backends_identical(rng):
    _, cum = _chain(rng, 6)
    u = rng.random(5000)
    walks = [mod.markov_walk(cum, u, 2) for mod in BACKENDS]
    for w in walks[1:]:
        np.testing.assert_array_equal(w, walks[0])
    assert walks[0][0] == 2


def test_markov_walk_is_inverse_cdf_sampling(rng):
    _, cum = _chain(rng, 4)
    u = rng.random(200)
    walk = _fallback.markov_walk(cum, u, 0)
    for t in range(1, len(u)):
        row = cum[walk[t - 1]]
        j = walk[t]
        assert u[t] < row[j] and (j == 0 or u[t] >= row[j - 1])


def test_markov_walk_transition_frequencies(rng):
    p, cum = _chain(rng, 3)
    walk = _kernels.markov_walk(cum, rng.random(200000), 0)
    counts = oracles.skipgram_counts(walk, 1, 3).astype(float)
    freq = counts / counts.sum(axis=1, keepdims=True)
    np.testing.assert_allclose(freq, p, atol=0.01)


def test_smo_backends_agree(rng):
    for _ in range(5):
        x = rng.normal(size=(40, 3))
        y = np.where(x[:, 0] + 0.3 * rng.normal(size=40) > 0, 1.0, -1.0)
        k = np.ascontiguousarray(x @ x.T)
        res = [mod.smo(k, y, 1.0, 1e-6, 100000) for mod in BACKENDS]
        for a, g, it in res[1:]:
            np.testing.assert_allclose(a, res[0][0], atol=1e-10)
            np.testing.assert_allclose(g, res[0][1], atol=1e-9)
            assert it == res[0][2]


def test_smo_respects_box_and_equality(rng, backend):
    x = rng.normal(size=(30, 2))
    y = np.where(rng.random(30) < 0.5, 1.0, -1.0)
    k = np.ascontiguousarray(x @ x.T)
    alpha, grad, _ = backend.smo(k, y, 0.5, 1e-8, 100000)
    assert alpha.min() >= -1e-12 and alpha.max() <= 0.5 + 1e-12
    assert abs(alpha @ y) < 1e-9
    np.testing.assert_allclose(grad, (y[:, None] * y[None, :] * k) @ alpha - 1.0, atol=1e-8)


@pytest.mark.parametrize("seed", range(3))
def test_smo_matches_bruteforce_qp(seed, backend):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(6, 2))
    y = np.array([1, 1, 1, -1, -1, -1], dtype=float)
    k = np.ascontiguousarray(x @ x.T)
    alpha, _, _ = backend.smo(k, y, 1.0, 1e-8, 100000)
    q = y[:, None] * y[None, :] * k
    obj = alpha.sum() - 0.5 * alpha @ q @ alpha
    best, _ = oracles.qp_dual_bruteforce(k, y, 1.0)
    assert abs(obj - best) < 1e-6
