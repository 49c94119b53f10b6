import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from linconsensus.errors import InvalidMatrixError
from linconsensus.linalg import symmetric_eig


def _sym(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    return (a + a.T) / 2


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 25), st.integers(0, 10**6))
def test_eigenvalues_match_lapack(n, seed):
    a = _sym(n, seed)
    vals, _ = symmetric_eig(a, vectors=False)
    ref = np.sort(np.linalg.eigvalsh(a))[::-1]
    assert np.allclose(vals, ref, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20), st.integers(0, 10**6))
def test_eigenvectors_diagonalize(n, seed):
    a = _sym(n, seed)
    vals, q = symmetric_eig(a)
    assert np.all(np.diff(vals) <= 1e-12)
    assert np.allclose(q.T @ q, np.eye(n), atol=1e-10)
    assert np.allclose(a @ q, q * vals, atol=1e-10)


def test_repeated_and_trivial_spectra():
    vals, q = symmetric_eig(np.eye(5) * 3.0)
    assert np.allclose(vals, 3.0) and np.allclose(q.T @ q, np.eye(5))
    vals, _ = symmetric_eig(np.array([[2.0]]))
    assert vals.tolist() == [2.0]
    vals, _ = symmetric_eig(np.ones((4, 4)))
    assert np.allclose(vals, [4, 0, 0, 0], atol=1e-12)


def test_two_by_two_closed_form():
    a, b, c = 1.0, 0.3, -2.0
    disc = np.sqrt(((a - c) / 2) ** 2 + b * b)
    vals, _ = symmetric_eig(np.array([[a, b], [b, c]]))
    assert np.allclose(vals, [(a + c) / 2 + disc, (a + c) / 2 - disc], atol=1e-14)


def test_rejects_bad_input():
    with pytest.raises(InvalidMatrixError):
        symmetric_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(InvalidMatrixError):
        symmetric_eig(np.zeros((2, 3)))
