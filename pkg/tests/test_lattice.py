from math import comb, sqrt

import numpy as np
import pytest
from hypothesis import given, strategies as st

from densinterp.lattice import (
    DEFAULT_MAX_NODES, ResourceLimitError, barycentric, basis_eval, basis_matrix,
    interpolate_eval, lebesgue_constant, min_singular_value, monomials, multi_indices,
    principal_lattice, random_simplex_points, sv_lower_bound, vandermonde)


def cartesian(lat):
    return [tuple(float(v) for v in p) for p in lat.points]


# ---- barycentric ----------------------------------------------------------

@pytest.mark.parametrize("x, expected", [
    ((0.25, 0.25), (0.5, 0.25, 0.25)),
    ((0.0, 0.0), (1.0, 0.0, 0.0)),
    ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0, 0.0)),
])
def test_barycentric_examples(x, expected):
    np.testing.assert_array_equal(barycentric(x), expected)


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=6))
def test_barycentric_sums_to_one(x):
    lam = barycentric(x)
    assert lam.shape == (len(x) + 1,)
    assert abs(lam.sum() - 1.0) <= 1e-12 * (1 + np.abs(x).sum())
    np.testing.assert_array_equal(lam[1:], x)


def test_barycentric_batch():
    lam = barycentric(np.array([[0.1, 0.2], [0.5, 0.5]]))
    np.testing.assert_allclose(lam, [[0.7, 0.1, 0.2], [0.0, 0.5, 0.5]])


# ---- enumeration ----------------------------------------------------------

def test_lattice_degree_one_is_vertex_set():
    lat = principal_lattice(1, 2)
    assert set(cartesian(lat)) == {(0, 0), (1, 0), (0, 1)}
    assert lat.size == 3


def test_lattice_degree_two_plane():
    lat = principal_lattice(2, 2)
    assert set(cartesian(lat)) == {(0, 0), (.5, 0), (1, 0), (0, .5), (.5, .5), (0, 1)}
    assert lat.size == 6


def test_canonical_order_is_graded_lex():
    # degree first, then lexicographically decreasing within a degree
    lat = principal_lattice(2, 2)
    assert [tuple(r) for r in lat.nodes[:, 1:]] == [
        (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert multi_indices(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_lattice_count_three_three():
    assert principal_lattice(3, 3).size == comb(6, 3) == 20


@pytest.mark.parametrize("ell", range(6))
@pytest.mark.parametrize("dim", range(1, 6))
def test_lattice_count(ell, dim):
    lat = principal_lattice(ell, dim)
    assert lat.size == comb(ell + dim, ell)
    assert len(set(map(tuple, lat.nodes))) == lat.size
    assert np.all(lat.nodes >= 0)
    assert np.all(lat.nodes.sum(axis=1) == ell)
    pts = lat.points
    assert np.all(pts >= 0) and np.all(pts.sum(axis=1) <= 1 + 1e-15)


def test_degree_zero_is_origin():
    lat = principal_lattice(0, 3)
    assert lat.size == 1
    np.testing.assert_array_equal(lat.points, [[0, 0, 0]])


def test_lattice_is_immutable():
    lat = principal_lattice(2, 2)
    with pytest.raises(ValueError):
        lat.nodes[0, 0] = 5


def test_resource_cap():
    with pytest.raises(ResourceLimitError):
        principal_lattice(30, 10)
    assert comb(40, 10) > DEFAULT_MAX_NODES
    with pytest.raises(ResourceLimitError):
        principal_lattice(3, 3, max_nodes=10)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        principal_lattice(-1, 2)
    with pytest.raises(ValueError):
        principal_lattice(2, 0)


# ---- basis ----------------------------------------------------------------

def test_linear_basis_is_barycentric():
    lat = principal_lattice(1, 2)
    i = cartesian(lat).index((1.0, 0.0))
    assert basis_eval(lat, i, (0.3, 0.4)) == pytest.approx(0.3, abs=1e-15)


def test_quadratic_midpoint_basis_by_hand():
    lat = principal_lattice(2, 1)
    i = cartesian(lat).index((0.5,))
    # 4 x (1 - x) at 0.25
    assert basis_eval(lat, i, (0.25,)) == pytest.approx(0.75, abs=1e-15)


def test_degree_zero_basis_is_one():
    lat = principal_lattice(0, 2)
    assert basis_eval(lat, 0, (3.0, -7.0)) == 1.0


@pytest.mark.parametrize("ell", range(5))
@pytest.mark.parametrize("dim", range(1, 4))
def test_lagrange_property(ell, dim):
    lat = principal_lattice(ell, dim)
    pts = lat.points
    gram = np.array([[basis_eval(lat, i, pts[j]) for j in range(lat.size)]
                     for i in range(lat.size)])
    assert np.max(np.abs(gram - np.eye(lat.size))) <= 1e-10
    np.testing.assert_allclose(basis_matrix(lat, pts), np.eye(lat.size), atol=1e-10)


@pytest.mark.parametrize("ell, dim", [(2, 2), (3, 1), (4, 3), (1, 3)])
def test_basis_matrix_matches_product_formula(ell, dim, backend):
    from densinterp import _backend
    lat = principal_lattice(ell, dim)
    x = np.random.default_rng(ell * 10 + dim).uniform(-0.5, 1.5, (40, dim))
    ref = np.array([[basis_eval(lat, i, xi) for i in range(lat.size)] for xi in x])
    got = _backend.get(backend).lattice_basis(lat.nodes, lat.ell, x)
    np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-12)


@given(st.integers(0, 4), st.integers(1, 3),
       st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_partition_of_unity(ell, dim, coords):
    lat = principal_lattice(ell, dim)
    x = np.array(coords[:dim])
    assert basis_matrix(lat, x).sum() == pytest.approx(1.0, abs=1e-10 * (1 + 4 ** ell))


# ---- interpolation --------------------------------------------------------

def _random_poly(rng, ell, dim):
    alphas = np.array(multi_indices(ell, dim))
    coef = rng.uniform(-1, 1, len(alphas))
    return lambda x: monomials(x, ell) @ coef


@pytest.mark.parametrize("ell", range(5))
@pytest.mark.parametrize("dim", range(1, 4))
def test_polynomial_reproduction(ell, dim):
    rng = np.random.default_rng(100 * ell + dim)
    lat = principal_lattice(ell, dim)
    x = random_simplex_points(100, dim, rng)
    worst = 0.0
    for _ in range(200):
        g = _random_poly(rng, ell, dim)
        worst = max(worst, np.max(np.abs(interpolate_eval(lat, g(lat.points), x) - g(x))))
    assert worst <= 1e-8


def test_plane_quadratic_example():
    lat = principal_lattice(2, 2)
    g = lambda x: x[..., 0] ** 2 + x[..., 0] * x[..., 1]  # noqa: E731
    x = random_simplex_points(100, 2, np.random.default_rng(7))
    assert np.max(np.abs(interpolate_eval(lat, g(lat.points), x) - g(x))) <= 1e-9


def test_constant_values():
    lat = principal_lattice(3, 2)
    x = np.random.default_rng(1).random((50, 2))
    np.testing.assert_allclose(interpolate_eval(lat, np.full(lat.size, 2.5), x), 2.5,
                               rtol=1e-12)


def test_indicator_values_give_basis():
    lat = principal_lattice(3, 2)
    x = (0.2, 0.3)
    for i in range(lat.size):
        e = np.zeros(lat.size)
        e[i] = 1.0
        assert interpolate_eval(lat, e, x) == pytest.approx(basis_eval(lat, i, x), abs=1e-14)


def test_interpolate_length_mismatch():
    with pytest.raises(ValueError):
        interpolate_eval(principal_lattice(2, 2), np.ones(5), (0.1, 0.1))


def test_interpolate_dimension_mismatch():
    with pytest.raises(ValueError):
        interpolate_eval(principal_lattice(2, 2), np.ones(6), (0.1, 0.1, 0.1))


# ---- Vandermonde ----------------------------------------------------------

def test_vandermonde_examples():
    np.testing.assert_array_equal(vandermonde(principal_lattice(1, 1)), [[1, 0], [1, 1]])
    np.testing.assert_array_equal(vandermonde(principal_lattice(0, 4)), [[1]])
    np.testing.assert_array_equal(vandermonde(principal_lattice(2, 1)),
                                  [[1, 0, 0], [1, .5, .25], [1, 1, 1]])


def test_min_singular_value_degree_one():
    # eigenvalues of V^T V = [[2, 1], [1, 1]] are (3 +- sqrt 5) / 2
    expected = sqrt((3 - sqrt(5)) / 2)
    oracle = sqrt(np.linalg.eigvalsh(np.array([[2.0, 1.0], [1.0, 1.0]])).min())
    assert oracle == pytest.approx(expected, rel=1e-12)
    assert min_singular_value(vandermonde(principal_lattice(1, 1))) == pytest.approx(
        expected, rel=1e-8)
    assert expected == pytest.approx(0.6180339887, abs=1e-10)


def test_min_singular_value_degree_zero():
    assert min_singular_value(vandermonde(principal_lattice(0, 3))) == pytest.approx(1.0)


def test_min_singular_value_rejects_non_square():
    with pytest.raises(ValueError):
        min_singular_value(np.ones((2, 3)))


@pytest.mark.parametrize("ell", range(5))
@pytest.mark.parametrize("dim", range(1, 4))
def test_singular_value_bound(ell, dim):
    V = vandermonde(principal_lattice(ell, dim))
    sigma = min_singular_value(V)
    oracle = sqrt(max(np.linalg.eigvalsh(V.T @ V).min(), 0.0))
    assert sigma == pytest.approx(oracle, rel=1e-6)
    assert sigma >= sv_lower_bound(ell, dim)


def test_sv_lower_bound_values():
    assert sv_lower_bound(1, 1) == 1 / 32
    assert sv_lower_bound(2, 2) == pytest.approx(1 / (216 * 16 * 16), rel=1e-12)
    assert sv_lower_bound(2, 2) == pytest.approx(1.8084e-5, rel=1e-4)
    assert sv_lower_bound(0, 5) == 1.0


@pytest.mark.parametrize("ell, dim", [(1, 1), (2, 2), (3, 2), (4, 3)])
def test_vandermonde_solve_recovers_coefficients(ell, dim):
    rng = np.random.default_rng(ell + 7 * dim)
    lat = principal_lattice(ell, dim)
    coef = rng.uniform(-1, 1, lat.size)
    y = monomials(lat.points, ell) @ coef
    np.testing.assert_allclose(np.linalg.solve(vandermonde(lat), y), coef, atol=1e-6)


def test_lebesgue_constant_regions():
    lat = principal_lattice(2, 1)
    # max of |p_0| + |p_1| + |p_2| on [0, 1] for nodes 0, 1/2, 1 is 1.25
    assert lebesgue_constant(lat, region="simplex") == pytest.approx(1.25, abs=1e-6)
    assert lebesgue_constant(lat, region="cube") == pytest.approx(1.25, abs=1e-6)
    with pytest.raises(ValueError):
        lebesgue_constant(lat, region="ball")
