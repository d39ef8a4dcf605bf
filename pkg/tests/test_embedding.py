import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from svdlid.embedding import (energy_curve, fit, project, retained_rank, thin_svd,
                              write_energy_curve)
from svdlid.errors import DimensionMismatchError, EmbeddingError


def test_diagonal_example():
    x = np.diag([3.0, 2.0, 1.0])
    space, emb = fit(x, 0.60)
    # 9/14 = 0.643 already reaches 0.6.
    assert space.rank == 1
    np.testing.assert_allclose(space.spectrum, [3, 2, 1])
    np.testing.assert_allclose(np.abs(emb.rows[:, 0]), [1, 0, 0], atol=1e-14)
    curve = energy_curve(space)
    np.testing.assert_allclose([f for _, f in curve], [9 / 14, 13 / 14, 1.0])
    assert [i for i, _ in curve] == [1, 2, 3]


@pytest.mark.parametrize("tau,want", [(0.5, 1), (9 / 14, 1), (0.65, 2), (13 / 14, 2), (0.95, 3), (1.0, 3)])
def test_retained_rank_thresholds(tau, want):
    assert retained_rank([3.0, 2.0, 1.0], tau) == want


def test_sign_convention_is_reproducible(rng):
    x = rng.normal(size=(12, 7))
    u, s, vt = thin_svd(x)
    piv = np.argmax(np.abs(u), axis=0)
    assert np.all(u[piv, np.arange(u.shape[1])] >= 0)
    np.testing.assert_allclose((u * s) @ vt, x, atol=1e-12)
    u2, _, _ = thin_svd(x.copy())
    np.testing.assert_array_equal(u, u2)


@given(st.integers(3, 30), st.integers(2, 40), st.sampled_from([0.55, 0.6, 0.65, 0.9]),
       st.integers(0, 2**31 - 1))
@settings(max_examples=60, deadline=None)
def test_svd_properties(n, d, tau, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d)) * rng.uniform(0.1, 3.0, d)
    space, emb = fit(x, tau)
    v = space.vectors
    assert np.max(np.abs(v.T @ v - np.eye(space.rank))) <= 1e-8
    u, s, _ = thin_svd(x)
    assert np.max(np.abs(emb.rows - u[:, :space.rank])) <= 1e-8
    recon = (emb.rows * space.singular_values) @ v.T
    err = np.linalg.norm(x - recon) ** 2 / np.linalg.norm(x) ** 2
    kept = (space.singular_values ** 2).sum() / (space.spectrum ** 2).sum()
    assert err == pytest.approx(1 - kept, abs=1e-6)
    frac = np.cumsum(space.spectrum ** 2) / (space.spectrum ** 2).sum()
    assert frac[space.rank - 1] >= tau - 1e-12
    assert space.rank == 1 or frac[space.rank - 2] < tau


def test_projection_is_linear(rng):
    space, _ = fit(rng.normal(size=(10, 6)), 0.8)
    a, b = rng.normal(size=6), rng.normal(size=6)
    np.testing.assert_allclose(project(space, 2 * a - 3 * b),
                               2 * project(space, a) - 3 * project(space, b), atol=1e-12)
    np.testing.assert_allclose(project(space, np.vstack([a, b])),
                               np.vstack([project(space, a), project(space, b)]), atol=1e-12)


def test_rank_deficient_directions_dropped(rng):
    base = rng.normal(size=(10, 2))
    x = np.hstack([base, base @ rng.normal(size=(2, 3))])
    space, _ = fit(x, 1.0)
    assert space.spectrum.size == 2
    assert space.rank == 2


def test_errors(rng):
    with pytest.raises(EmbeddingError):
        fit(np.zeros((4, 3)))
    with pytest.raises(EmbeddingError):
        fit(np.ones((1, 3)))
    with pytest.raises(EmbeddingError):
        fit(rng.normal(size=(4, 3)), 0.0)
    space, _ = fit(rng.normal(size=(4, 3)))
    with pytest.raises(DimensionMismatchError):
        project(space, np.zeros(4))
    with pytest.raises(EmbeddingError):
        energy_curve([])


def test_energy_curve_csv(tmp_path):
    write_energy_curve(energy_curve([2.0, 1.0]), tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "index,energy_fraction"
    assert lines[1] == "1,0.8" and lines[2] == "2,1.0"
