# External imports
import numpy as np
import pytest
import scipy.linalg

# Own imports
from common.exceptions import EigensolverError
from spectral.lattice import Region, laplacian, region_graph
from spectral.linalg import (
    SymMatrix,
    numerical_rank,
    singular_values,
    spectral_distribution,
    sym_spectrum,
)
from spectral.stepfn import from_counts, sup_distance


def test_sym_matrix_rejects_asymmetric_input():
    with pytest.raises(ValueError):
        SymMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        SymMatrix(np.zeros((2, 3)))


def test_sym_matrix_difference():
    a = SymMatrix(np.eye(2))
    assert np.array_equal((a - a).entries, np.zeros((2, 2)))


def test_sym_spectrum_is_ascending():
    values = sym_spectrum(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    assert values == pytest.approx([1.0, 3.0])


def test_laplacian_kernel_snaps_to_exact_zero():
    values = sym_spectrum(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert values[0] == 0.0


def test_sym_spectrum_returns_orthonormal_vectors():
    matrix = np.array([[2.0, 1.0], [1.0, 2.0]])
    values, vectors = sym_spectrum(matrix, return_vectors=True)
    assert np.allclose(vectors.T @ vectors, np.eye(2))
    assert np.allclose(matrix @ vectors, vectors * values)


def test_eigensolver_failure_is_wrapped(mocker):
    mocker.patch("scipy.linalg.eigh", side_effect=scipy.linalg.LinAlgError("boom"))
    with pytest.raises(EigensolverError):
        sym_spectrum(np.eye(2))


def test_singular_values_of_nilpotent_matrix():
    values = singular_values(np.array([[0.0, 2.0], [0.0, 0.0]]))
    assert list(values) == [0.0, pytest.approx(2.0)]


def test_numerical_rank():
    assert numerical_rank(np.zeros((3, 3))) == 0
    u = np.array([[1.0], [2.0], [3.0]])
    assert numerical_rank(u @ u.T) == 1
    assert numerical_rank(np.eye(4)) == 4
    with pytest.raises(ValueError):
        numerical_rank(np.eye(2), tol=0.0)


def test_spectral_distribution_of_identity_is_one_jump():
    f = spectral_distribution(np.eye(3))
    assert list(f.breakpoints) == [pytest.approx(1.0)]
    assert f(0.99) == 0.0
    assert f(1.01) == 1.0


def _random_symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return (a + a.T) / 2


def test_eigenvalues_sum_to_the_trace():
    rng = np.random.default_rng(21)
    for n in range(1, 9):
        matrix = _random_symmetric(rng, n)
        assert sym_spectrum(matrix).sum() == pytest.approx(np.trace(matrix), abs=1e-10)


def test_singular_values_of_symmetric_matrix_are_absolute_eigenvalues():
    rng = np.random.default_rng(22)
    for n in range(1, 9):
        matrix = _random_symmetric(rng, n)
        expected = np.sort(np.abs(sym_spectrum(matrix)))
        assert np.allclose(singular_values(matrix), expected, atol=1e-10)


def test_rank_and_kernel_dimension_add_up():
    rng = np.random.default_rng(23)
    n = 7
    for r in range(n + 1):
        basis = np.linalg.qr(rng.normal(size=(n, n)))[0][:, :r]
        scales = rng.uniform(1.0, 3.0, size=r) * rng.choice([-1.0, 1.0], size=r)
        matrix = (basis * scales) @ basis.T
        matrix = (matrix + matrix.T) / 2
        rank_count = numerical_rank(matrix)
        kernel = scipy.linalg.null_space(matrix, rcond=1e-9)
        assert rank_count == r
        assert rank_count + kernel.shape[1] == n


def test_path_laplacian_spectrum_matches_closed_form():
    for n in (2, 5, 16):
        matrix = laplacian(region_graph(Region.cube(1, n)))
        expected = 2 - 2 * np.cos(np.arange(n) * np.pi / n)
        assert np.allclose(sym_spectrum(matrix), np.sort(expected), atol=1e-10)
        oracle = from_counts(expected, n)
        assert sup_distance(spectral_distribution(matrix), oracle) == 0.0
