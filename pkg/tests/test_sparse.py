import numpy as np
import pytest

from gsan.errors import ArchiveError, NotSymmetric, ShapeError
from gsan.sparse import SparseOperator


def _op(dense) -> SparseOperator:
    dense = np.asarray(dense, dtype=float)
    rows, cols = np.nonzero(dense)
    return SparseOperator.from_triplets(*dense.shape, zip(rows, cols, dense[rows, cols]))


def test_duplicates_are_summed_and_zeros_dropped():
    op = SparseOperator.from_triplets(2, 2, [(0, 1, 1.0), (0, 1, 2.0), (1, 0, 0.0)])
    assert op.nnz == 1
    assert op.triplets() == [(0, 1, 3.0)]


def test_out_of_bounds_triplet():
    with pytest.raises(ShapeError):
        SparseOperator.from_triplets(2, 2, [(2, 0, 1.0)])


def test_exact_flag_drops_for_fractional_entries():
    assert SparseOperator.from_triplets(1, 1, [(0, 0, 2.0)], exact=True).exact
    assert not SparseOperator.from_triplets(1, 1, [(0, 0, 0.5)], exact=True).exact


def test_matmul_and_apply_match_dense():
    rng = np.random.default_rng(3)
    a = rng.integers(-2, 3, size=(4, 3)).astype(float)
    b = rng.integers(-2, 3, size=(3, 5)).astype(float)
    x = rng.normal(size=(3, 2))
    assert np.array_equal((_op(a) @ _op(b)).todense(), a @ b)
    assert np.allclose(_op(a).apply(x), a @ x)


def test_apply_shape_mismatch():
    with pytest.raises(ShapeError):
        SparseOperator.identity(3).apply(np.ones((4, 1)))


def test_symmetry_checks():
    sym = _op([[2, -1], [-1, 2]])
    assert sym.is_symmetric()
    sym.require_symmetric()
    skew = _op([[0, 1], [0, 0]])
    assert not skew.is_symmetric()
    with pytest.raises(NotSymmetric):
        skew.require_symmetric()


def test_conjugated_flips_signs():
    m = _op([[1, 2], [3, 4]])
    out = m.conjugated(np.array([1.0, -1.0])).todense()
    assert out.tolist() == [[1.0, -2.0], [-3.0, 4.0]]


def test_permuted_moves_entries():
    m = _op([[0, 5], [0, 0]])
    p = m.permuted(np.array([1, 0]), np.array([1, 0]))
    assert p.triplets() == [(1, 0, 5.0)]


def test_equals_with_tolerance():
    a = _op([[1.0, 0.0]])
    b = _op([[1.0 + 1e-12, 0.0]])
    assert not a.equals(b)
    assert a.equals(b, tol=1e-9)


def test_coordinate_file_round_trip(tmp_path):
    m = _op([[0, -1, 0], [2, 0, 0]])
    path = tmp_path / "m.coo"
    m.save(path)
    assert path.read_text().splitlines()[0] == "2 3 2"
    loaded = SparseOperator.load(path)
    assert loaded.exact
    assert loaded.equals(m)


@pytest.mark.parametrize("text", ["", "2 2 1\n", "2 2 1\n0 x 1\n"])
def test_malformed_coordinate_text(text):
    with pytest.raises(ArchiveError):
        SparseOperator.from_coordinate_text(text)
