import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hiddengibbs import (
    IndexedMatrix,
    NotPrimitiveError,
    RowAllowabilityError,
    SimplexVector,
    hilbert_metric,
    normalized_product,
    perron_data,
    phi_of,
    primitivity_index,
    project_apply,
    tau_of,
)


def simplex(*values):
    return SimplexVector.normalized(np.array(values, dtype=float))


def brute_force_hilbert(x, y):
    # direct max over index pairs, the definition
    worst = 0.0
    for e in range(len(x)):
        for f in range(len(x)):
            worst = max(worst, math.log(x[e] * y[f] / (x[f] * y[e])))
    return worst


def brute_force_phi(a):
    m, n = a.shape
    if np.any(a == 0):
        return 0.0
    best = math.inf
    for e in range(m):
        for f in range(m):
            for ep in range(n):
                for fp in range(n):
                    best = min(best, a[e, ep] * a[f, fp] / (a[e, fp] * a[f, ep]))
    return best


def test_hilbert_metric_identity():
    x = simplex(0.3, 0.7)
    assert hilbert_metric(x, x) == 0.0


def test_hilbert_metric_frozen_example():
    # max over the 4 index pairs of log[x(e)y(f)/(x(f)y(e))] = log 2
    x = simplex(0.5, 0.5)
    y = simplex(2 / 3, 1 / 3)
    assert abs(hilbert_metric(x, y) - math.log(2.0)) < 1e-14


def test_hilbert_metric_projective_invariance():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = rng.uniform(0.1, 5.0, 4)
        b = rng.uniform(0.1, 5.0, 4)
        scaled = hilbert_metric(
            SimplexVector.normalized(3.7 * a), SimplexVector.normalized(0.2 * b)
        )
        plain = hilbert_metric(SimplexVector.normalized(a), SimplexVector.normalized(b))
        assert abs(scaled - plain) < 1e-12


def test_hilbert_metric_matches_brute_force():
    rng = np.random.default_rng(4)
    for _ in range(25):
        a = rng.uniform(0.05, 2.0, 5)
        b = rng.uniform(0.05, 2.0, 5)
        x, y = SimplexVector.normalized(a), SimplexVector.normalized(b)
        assert abs(hilbert_metric(x, y) - brute_force_hilbert(x.entries, y.entries)) < 1e-12


def test_phi_frozen_example():
    m = IndexedMatrix.from_entries([[2.0, 1.0], [1.0, 2.0]])
    assert abs(phi_of(m) - 0.25) < 1e-15
    assert abs(tau_of(m) - 1.0 / 3.0) < 1e-15


def test_phi_all_equal_entries():
    m = IndexedMatrix.from_entries(np.full((3, 3), 2.5))
    assert phi_of(m) == 1.0
    assert tau_of(m) == 0.0


def test_phi_zero_entry():
    m = IndexedMatrix.from_entries([[1.0, 0.0], [1.0, 1.0]])
    assert phi_of(m) == 0.0
    assert tau_of(m) == 1.0


def test_phi_matches_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(20):
        a = rng.uniform(0.2, 3.0, (4, 3))
        m = IndexedMatrix.from_entries(a)
        assert abs(phi_of(m) - brute_force_phi(a)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_phi_invariant_under_positive_scalings(seed):
    # phi is a cross-ratio: positive row and column scalings cancel
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.2, 3.0, (3, 4))
    rows = rng.uniform(0.1, 10.0, (3, 1))
    cols = rng.uniform(0.1, 10.0, (1, 4))
    p1 = phi_of(IndexedMatrix.from_entries(a))
    p2 = phi_of(IndexedMatrix.from_entries(rows * a * cols))
    assert abs(p1 - p2) < 1e-10


def test_phi_symmetric_under_simultaneous_swaps():
    rng = np.random.default_rng(6)
    a = rng.uniform(0.2, 3.0, (4, 4))
    perm = rng.permutation(4)
    p1 = phi_of(IndexedMatrix.from_entries(a))
    p2 = phi_of(IndexedMatrix.from_entries(a[np.ix_(perm, perm)]))
    assert abs(p1 - p2) < 1e-14


def test_project_apply_frozen_example():
    m = IndexedMatrix.from_entries([[2.0, 1.0], [1.0, 2.0]])
    out = project_apply(m, simplex(0.9, 0.1))
    # (M x) = (2*0.9 + 1*0.1, 1*0.9 + 2*0.1) = (1.9, 1.1), normalized
    assert np.allclose(out.entries, [19.0 / 30.0, 11.0 / 30.0], atol=1e-15)


def test_project_apply_uniform_fixed_point():
    m = IndexedMatrix.from_entries(np.full((3, 3), 0.7))
    out = project_apply(m, SimplexVector.uniform(range(3)))
    assert np.allclose(out.entries, 1.0 / 3.0)


def test_project_apply_zero_row():
    m = IndexedMatrix.from_entries([[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(RowAllowabilityError):
        project_apply(m, simplex(0.5, 0.5))


def test_contraction_random_battery():
    rng = np.random.default_rng(7)
    for _ in range(200):
        dim = int(rng.integers(2, 6))
        m = IndexedMatrix.from_entries(rng.uniform(0.05, 4.0, (dim, dim)))
        x = SimplexVector.normalized(rng.uniform(0.01, 1.0, dim))
        y = SimplexVector.normalized(rng.uniform(0.01, 1.0, dim))
        lhs = hilbert_metric(project_apply(m, x), project_apply(m, y))
        rhs = tau_of(m) * hilbert_metric(x, y)
        assert lhs <= rhs + 1e-12


def test_primitivity_positive_matrix():
    m = IndexedMatrix.from_entries([[1.0, 2.0], [3.0, 4.0]])
    assert primitivity_index(m) == 1


def test_primitivity_permutation_not_primitive():
    m = IndexedMatrix.from_entries([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(NotPrimitiveError):
        primitivity_index(m)


def test_primitivity_of_transfer_matrix(alpha2):
    from hiddengibbs import build_transfer
    from tests.conftest import random_potential

    for r in (1, 2, 3):
        pot = random_potential(alpha2, r, seed=r)
        transfer = build_transfer(pot)
        assert primitivity_index(transfer.matrix) == r


def test_perron_symmetric_example():
    m = IndexedMatrix.from_entries([[2.0, 1.0], [1.0, 2.0]])
    data = perron_data(m)
    assert abs(data.rho - 3.0) < 1e-12
    assert np.allclose(data.right.entries, [0.5, 0.5], atol=1e-13)
    assert np.allclose(data.left, [1.0, 1.0], atol=1e-12)


def test_perron_row_stochastic():
    rng = np.random.default_rng(8)
    q = rng.uniform(0.1, 1.0, (4, 4))
    q /= q.sum(axis=1, keepdims=True)
    data = perron_data(IndexedMatrix.from_entries(q))
    assert abs(data.rho - 1.0) < 1e-12
    assert np.allclose(data.right.entries, 0.25, atol=1e-12)
    # left eigenvector = stationary distribution scaled by the dimension
    from hiddengibbs import stationary_distribution

    pi = stationary_distribution(q)
    assert np.allclose(data.left, 4.0 * pi, atol=1e-9)


def test_perron_matches_dense_eigensolver():
    rng = np.random.default_rng(9)
    from hiddengibbs.oracle import dense_eigendata

    for _ in range(5):
        a = rng.uniform(0.1, 2.0, (8, 8))
        data = perron_data(IndexedMatrix.from_entries(a))
        rho, right, left = dense_eigendata(a)
        assert abs(data.rho - rho) < 1e-9 * rho
        assert np.allclose(data.right.entries, right, atol=1e-9)
        assert np.allclose(data.left, left, atol=1e-9)


def test_perron_scaling_invariance():
    a = np.array([[1.0, 0.5, 0.1], [0.3, 0.9, 1.1], [0.2, 0.4, 0.6]])
    base = perron_data(IndexedMatrix.from_entries(a))
    scaled = perron_data(IndexedMatrix.from_entries(a).scaled(math.log(37.0)))
    assert np.array_equal(base.right.entries, scaled.right.entries)
    assert np.array_equal(base.left, scaled.left)
    assert abs(scaled.rho - 37.0 * base.rho) < 1e-9 * scaled.rho


def test_perron_residual_and_normalization_invariants():
    rng = np.random.default_rng(10)
    for _ in range(20):
        dim = int(rng.integers(2, 7))
        data = perron_data(IndexedMatrix.from_entries(rng.uniform(0.05, 3.0, (dim, dim))))
        assert data.residual_right <= 1e-12
        assert data.residual_left <= 1e-12
        assert abs(float(data.left @ data.right.entries) - 1.0) <= 1e-12
        assert np.all(data.right.entries > 0) and np.all(data.left > 0)
        assert 0.0 <= data.tau < 1.0
        assert data.aposteriori_delta <= data.certified_residual


def test_perron_warm_start_uncertified():
    m = IndexedMatrix.from_entries([[2.0, 1.0], [1.0, 2.0]])
    data = perron_data(m, seed=simplex(0.7, 0.3))
    assert not data.certified
    assert abs(data.rho - 3.0) < 1e-9


def test_normalized_product_empty_chain():
    seed = simplex(0.25, 0.75)
    out, scale = normalized_product([], seed)
    assert np.array_equal(out.entries, seed.entries)
    assert scale == 0.0


def test_normalized_product_single_matrix():
    m = IndexedMatrix.from_entries([[2.0, 1.0], [1.0, 2.0]])
    seed = simplex(0.5, 0.5)
    out, scale = normalized_product([m], seed)
    assert np.allclose(out.entries, [0.5, 0.5])
    assert abs(scale - math.log(3.0)) < 1e-14


def test_normalized_product_reconstructs_direct_product():
    rng = np.random.default_rng(11)
    mats = [rng.uniform(0.1, 2.0, (4, 4)) for _ in range(20)]
    seed_raw = rng.uniform(0.1, 1.0, 4)
    seed = SimplexVector.normalized(seed_raw)

    # independent log-domain oracle: multiply with per-step rescaling
    vec = seed.entries.copy()
    log_scale = 0.0
    for a in reversed(mats):
        vec = a @ vec
        s = vec.max()
        vec /= s
        log_scale += math.log(s)

    out, scale = normalized_product(
        [IndexedMatrix.from_entries(a) for a in mats], seed
    )
    direct = vec / vec.sum()
    assert np.allclose(out.entries, direct, rtol=1e-9)
    assert abs((scale - (log_scale + math.log(vec.sum())))) < 1e-9
