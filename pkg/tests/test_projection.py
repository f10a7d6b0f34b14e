import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import coa_eig
from svcgrid.data import DataMatrix
from svcgrid.projection import Projection2D, coa, project, save_coords


def same_up_to_sign(a, b, tol):
    return all(min(np.abs(a[:, j] - b[:, j]).max(), np.abs(a[:, j] + b[:, j]).max()) <= tol
               for j in range(a.shape[1]))


def test_symmetric_two_by_two():
    # profiles (a, b)/(a+b) and (b, a)/(a+b) sit at +-(a-b)/(a+b) on the only axis
    a, b = 5.0, 2.0
    p = coa(np.array([[a, b], [b, a]]))
    assert sorted(p.coords[:, 0]) == pytest.approx([-(a - b) / (a + b), (a - b) / (a + b)], abs=1e-12)
    assert np.all(p.coords[:, 1] == 0)
    assert p.singular_values[1] == 0


@pytest.mark.parametrize("seed", range(5))
def test_matches_eigen_oracle(seed):
    X = np.random.default_rng(seed).integers(1, 20, size=(8, 5)).astype(float)
    p = coa(X)
    ref, sv = coa_eig(X)
    assert same_up_to_sign(p.coords, ref, 1e-10)
    assert p.singular_values == pytest.approx(sv, abs=1e-12)


def test_rank_one_table_collapses():
    X = np.outer([1.0, 2.0, 3.0], [2.0, 1.0, 4.0])
    p = coa(X)
    assert np.allclose(p.coords, 0, atol=1e-12)
    assert np.all(p.min_max[:, 1] - p.min_max[:, 0] == pytest.approx(1.0))


def test_identical_rows_coincide():
    X = np.array([[1, 2, 3], [1, 2, 3], [4, 0, 1], [0, 5, 1]], float)
    p = coa(X)
    assert np.allclose(p.coords[0], p.coords[1], rtol=0, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (6, 4), elements=st.integers(1, 30).map(float)), st.permutations(range(6)))
def test_row_permutation_equivariance(X, perm):
    a = coa(X)
    b = coa(X[list(perm)])
    assert same_up_to_sign(b.coords, a.coords[list(perm)], 1e-9)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (7, 4), elements=st.integers(0, 30).map(float)))
def test_weighted_centroid_is_origin(X):
    if np.any(X.sum(axis=1) == 0) or np.any(X.sum(axis=0) == 0):
        return
    p = coa(X)
    r = X.sum(axis=1) / X.sum()
    assert np.abs(r @ p.coords).max() <= 1e-10


def test_sign_convention():
    X = np.random.default_rng(9).integers(1, 10, size=(10, 4)).astype(float)
    p = coa(X)
    r = X.sum(axis=1) / X.sum()
    for a in range(2):
        u = p.coords[:, a] * np.sqrt(r)
        assert u[np.argmax(np.abs(u))] > 0


def test_scale_invariance():
    X = np.random.default_rng(1).integers(1, 9, size=(6, 3)).astype(float)
    assert np.allclose(coa(X).coords, coa(7.5 * X).coords, atol=1e-12)


@pytest.mark.parametrize("X", [np.array([[1.0, -1.0], [1.0, 2.0]]), np.zeros((2, 2)),
                               np.array([[0.0, 0.0], [1.0, 2.0]]), np.array([[0.0, 1.0], [0.0, 2.0]])])
def test_invalid_tables(X):
    with pytest.raises(ValueError):
        coa(X)


def test_project_columns(iris):
    p = project(iris, 3, 4)
    assert np.array_equal(p.coords, iris.values[:, [2, 3]])
    assert p.min_max.tolist() == [[1.0, 6.9], [0.1, 2.5]]
    with pytest.raises(ValueError):
        project(iris, 1, 5)
    with pytest.raises(ValueError):
        project(iris, 2, 2)


def test_project_coa_default():
    m = DataMatrix.from_rows(np.array([[1, 2], [3, 1], [2, 2]], float), ["a", "b", "c"])
    assert project(m).source == "coa"


def test_flat_axis_padded():
    p = Projection2D.from_coords([[1.0, 2.0], [3.0, 2.0]])
    assert p.min_max.tolist() == [[1.0, 3.0], [1.5, 2.5]]


def test_save_coords(tmp_path):
    p = Projection2D.from_coords([[0.5, 1.0], [0.25, -2.0]], row_names=("a", "b"))
    save_coords(p, tmp_path / "c.csv")
    assert (tmp_path / "c.csv").read_text() == "name,c1,c2\na,0.5,1.0\nb,0.25,-2.0\n"
