import math

import numpy as np
import pytest

from twinmatch import LossConfig, combined_loss, neg_cosine, nt_xent


def fd_grad(fn, z, step=1e-5):
    z = np.asarray(z, dtype=np.float64)
    grad = np.zeros_like(z)
    for idx in np.ndindex(z.shape):
        zp = z.copy()
        zm = z.copy()
        zp[idx] += step
        zm[idx] -= step
        grad[idx] = (fn(zp) - fn(zm)) / (2 * step)
    return grad


def rel_err(analytic, numeric):
    return np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12)


# ---------------------------------------------------------------- nt_xent

def test_single_pair_batch_is_exactly_zero():
    loss, (g1, g2) = nt_xent([[3.0, 4.0]], [[-1.0, 2.0]])
    assert loss == 0.0
    assert np.all(g1 == 0.0) and np.all(g2 == 0.0)


def test_identical_quadruple_equals_ln3():
    v = [0.3, -1.2, 0.7]
    loss, _ = nt_xent([v, v], [v, v])
    assert abs(loss - math.log(3)) <= 1e-12


def test_separated_positives_beat_uniform_level():
    loss, _ = nt_xent([[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]])
    assert 0.0 < loss < math.log(3)


def test_scale_invariance():
    rng = np.random.default_rng(0)
    z1 = rng.normal(size=(4, 6))
    z2 = rng.normal(size=(4, 6))
    base, (g1, _) = nt_xent(z1, z2, temperature=0.5)
    for c in (2.0, 3.7):
        scaled, (s1, _) = nt_xent(c * z1, c * z2, temperature=0.5)
        assert abs(scaled - base) <= 1e-12
        # raw-input gradient shrinks with the norm it divides by
        assert np.allclose(s1, g1 / c, rtol=1e-10, atol=1e-12)


def test_batch_symmetry():
    rng = np.random.default_rng(1)
    z1 = rng.normal(size=(5, 4))
    z2 = rng.normal(size=(5, 4))
    fwd, _ = nt_xent(z1, z2)
    rev, _ = nt_xent(z2, z1)
    assert abs(fwd - rev) <= 1e-12


def test_nt_xent_gradients_match_finite_differences():
    rng = np.random.default_rng(2)
    for trial in range(10):
        b = int(rng.integers(2, 6))
        dim = int(rng.integers(2, 9))
        tau = float(rng.choice([0.3, 0.5, 1.0]))
        z1 = rng.normal(size=(b, dim))
        z2 = rng.normal(size=(b, dim))
        _, (g1, g2) = nt_xent(z1, z2, temperature=tau)
        f1 = fd_grad(lambda z: nt_xent(z, z2, temperature=tau)[0], z1)
        f2 = fd_grad(lambda z: nt_xent(z1, z, temperature=tau)[0], z2)
        assert rel_err(g1, f1) <= 1e-5, f"trial {trial}: z1 gradient off"
        assert rel_err(g2, f2) <= 1e-5, f"trial {trial}: z2 gradient off"


def test_nt_xent_validation():
    with pytest.raises(ValueError, match="shapes differ"):
        nt_xent([[1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError, match="row 1 has zero norm"):
        nt_xent([[1.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError, match="non-finite"):
        nt_xent([[1.0, np.nan]], [[1.0, 0.0]])
    with pytest.raises(ValueError, match="temperature"):
        nt_xent([[1.0, 0.0]], [[0.0, 1.0]], temperature=0.0)
    with pytest.raises(ValueError, match="matrix"):
        nt_xent([1.0, 0.0], [0.0, 1.0])


# ------------------------------------------------------------- neg_cosine

def test_neg_cosine_exact_landmarks():
    # norms here are powers of two, so the unit vectors are exact
    z = np.array([[1.0, 1.0, 1.0, 1.0]])
    assert neg_cosine(z, z)[0] == -1.0
    assert neg_cosine(z, -z)[0] == 1.0
    assert neg_cosine([[1.0, 0.0]], [[0.0, 2.0]])[0] == 0.0


def test_neg_cosine_gradient_zero_at_alignment():
    z = np.array([[1.0, 1.0, 1.0, 1.0], [2.0, 0.0, 0.0, 0.0]])
    loss, (ga, gc) = neg_cosine(z, z)
    assert loss == -1.0
    assert np.all(ga == 0.0) and np.all(gc == 0.0)


def test_neg_cosine_gradients_match_finite_differences():
    rng = np.random.default_rng(3)
    for trial in range(10):
        b = int(rng.integers(1, 6))
        dim = int(rng.integers(2, 9))
        z = rng.normal(size=(b, dim))
        w = rng.normal(size=(b, dim))
        _, (ga, gc) = neg_cosine(z, w)
        fa = fd_grad(lambda v: neg_cosine(v, w)[0], z)
        fc = fd_grad(lambda v: neg_cosine(z, v)[0], w)
        assert rel_err(ga, fa) <= 1e-5, f"trial {trial}: z gradient off"
        assert rel_err(gc, fc) <= 1e-5, f"trial {trial}: z_other gradient off"


def test_neg_cosine_bounds_and_validation():
    rng = np.random.default_rng(4)
    z = rng.normal(size=(6, 3))
    w = rng.normal(size=(6, 3))
    loss, _ = neg_cosine(z, w)
    assert -1.0 <= loss <= 1.0
    with pytest.raises(ValueError, match="zero norm"):
        neg_cosine([[0.0, 0.0]], [[1.0, 0.0]])
    with pytest.raises(ValueError, match="shapes differ"):
        neg_cosine([[1.0, 0.0]], [[1.0, 0.0, 0.0]])


# ---------------------------------------------------------- combined_loss

def test_lambda_zero_is_exactly_the_view_loss():
    rng = np.random.default_rng(5)
    for _ in range(20):
        l_view = float(rng.normal())
        l_twin = float(rng.normal())
        assert combined_loss(l_view, l_twin, 0.0) == l_view


def test_combined_example():
    assert combined_loss(0.5, 0.25, 1.0) == 0.75


def test_combined_exactly_affine_in_lambda():
    a, b = 0.5, 0.25
    for lam in (0.0, 0.5, 1.0, 2.0, 4.0):
        assert combined_loss(a, b, 2 * lam) - combined_loss(a, b, lam) == lam * b


def test_combined_validation():
    with pytest.raises(ValueError, match="l_view"):
        combined_loss(np.inf, 0.0, 1.0)
    with pytest.raises(ValueError, match="l_twin"):
        combined_loss(0.0, np.nan, 1.0)
    with pytest.raises(ValueError, match="nonnegative"):
        combined_loss(0.0, 0.0, -0.5)


def test_loss_config_invariants():
    cfg = LossConfig()
    assert cfg.temperature == 0.5 and cfg.lam == 1.0
    with pytest.raises(ValueError):
        LossConfig(temperature=0.0)
    with pytest.raises(ValueError):
        LossConfig(lam=-1.0)
