import json

import numpy as np
import pytest

from gsan.complex import (
    boundary_identity_holds,
    build_complex,
    complex_from_json,
    incidence_matrix,
    load_complex,
    neighborhoods,
    save_complex,
)
from gsan.errors import (
    ArchiveError,
    EmptyOrder,
    InvalidSimplex,
    MissingFace,
    OrderExceeded,
    OrderOutOfRange,
)
from gsan.sparse import SparseOperator


@pytest.fixture(scope="session")
def tetra():
    return build_complex([(0, 1, 2, 3)], 3)


@pytest.fixture(scope="session")
def two_triangles():
    # filled (0,1,2) glued to filled (1,2,3) along edge (1,2)
    return build_complex([(0, 1, 2), (1, 2, 3)], 2)


def test_closure_sizes(tetra):
    assert tetra.sizes == (4, 6, 4, 1)
    assert tetra.total_size == 15


def test_simplices_are_sorted_and_lexicographic(two_triangles):
    assert two_triangles.simplices[1] == ((0, 1), (0, 2), (1, 2), (1, 3), (2, 3))
    assert two_triangles.simplices[2] == ((0, 1, 2), (1, 2, 3))


def test_unsorted_input_is_canonicalized():
    X = build_complex([(2, 0, 1)], 2)
    assert X.simplices[2] == ((0, 1, 2),)


def test_vertex_ids_are_reindexed_densely():
    X = build_complex([(10, 30), (30, 20)], 1)
    assert X.vertex_ids == (10, 20, 30)
    assert X.simplices[1] == ((0, 2), (1, 2))


def test_edge_incidence_signs():
    X = build_complex([(0, 1)], 1)
    B = X.boundary(1).todense()
    assert B[:, 0].tolist() == [-1.0, 1.0]


def test_triangle_incidence_signs():
    X = build_complex([(0, 1, 2)], 2)
    B2 = X.boundary(2).todense()[:, 0]
    # faces (0,1), (0,2), (1,2): dropping vertex 2, 1, 0 respectively
    assert B2.tolist() == [1.0, -1.0, 1.0]


def test_boundary_of_boundary_is_zero(tetra, two_triangles):
    assert boundary_identity_holds(tetra)
    assert boundary_identity_holds(two_triangles)
    for k in range(1, tetra.max_order):
        prod = tetra.boundary(k).todense() @ tetra.boundary(k + 1).todense()
        assert np.all(prod == 0)


def test_boundary_check_catches_a_flipped_sign(two_triangles):
    B1, B2 = two_triangles.boundary(1), two_triangles.boundary(2)
    triplets = B2.triplets()
    i, j, v = triplets[0]
    triplets[0] = (i, j, -v)
    broken = SparseOperator.from_triplets(B2.rows, B2.cols, triplets, exact=True)
    assert boundary_identity_holds([B1, B2])
    assert not boundary_identity_holds([B1, broken])


def test_repeated_vertex_is_rejected():
    with pytest.raises(InvalidSimplex):
        build_complex([(0, 0, 1)], 2)


def test_negative_vertex_is_rejected():
    with pytest.raises(InvalidSimplex):
        build_complex([(-1, 2)], 1)


def test_order_above_max_order_is_rejected():
    with pytest.raises(OrderExceeded):
        build_complex([(0, 1, 2)], 1)


def test_hollow_triangle_has_empty_top_order():
    X = build_complex([(0, 1), (1, 2), (0, 2)], 2)
    assert X.sizes == (3, 3, 0)
    assert X.boundary(2).shape == (3, 0)
    with pytest.raises(EmptyOrder):
        incidence_matrix(X, 2)


def test_incidence_matrix_order_range(two_triangles):
    with pytest.raises(OrderOutOfRange):
        incidence_matrix(two_triangles, 0)
    with pytest.raises(OrderOutOfRange):
        incidence_matrix(two_triangles, 3)


def test_n_simplices_out_of_range_is_an_index_error(two_triangles):
    with pytest.raises(IndexError):
        two_triangles.n_simplices(5)


def test_faces_of(two_triangles):
    faces = two_triangles.faces_of((1, 2, 3))
    index = two_triangles.index[1]
    assert faces == [index[(1, 2)], index[(1, 3)], index[(2, 3)]]


def test_faces_of_missing_face(two_triangles):
    with pytest.raises(MissingFace):
        two_triangles.faces_of((0, 1, 3))


def test_neighborhoods_include_self(two_triangles):
    lower, upper = neighborhoods(two_triangles, 1)
    index = two_triangles.index[1]
    e12 = index[(1, 2)]
    assert e12 in lower[e12] and e12 in upper[e12]
    # (1,2) is a face of both triangles, so every other edge is an upper neighbor
    assert sorted(upper[e12]) == list(range(5))
    # (0,1) and (2,3) share no vertex
    assert index[(2, 3)] not in lower[index[(0, 1)]]


def test_vertex_neighborhoods_have_trivial_lower_side(two_triangles):
    lower, upper = neighborhoods(two_triangles, 0)
    assert lower == [[i] for i in range(4)]
    assert upper[0] == [0, 1, 2]


def test_json_round_trip_keeps_original_ids(tmp_path):
    X = build_complex([(5, 7, 9), (7, 9, 11)], 2)
    path = tmp_path / "complex.json"
    save_complex(X, path)
    Y = load_complex(path)
    assert Y.simplices == X.simplices
    assert Y.vertex_ids == (5, 7, 9, 11)


def test_json_rejects_unsorted_tuple():
    doc = {"max_order": 1, "simplices": {"0": [[0], [1]], "1": [[1, 0]]}}
    with pytest.raises(InvalidSimplex):
        complex_from_json(doc)


def test_json_rejects_missing_face():
    doc = {"max_order": 2, "simplices": {"0": [[0], [1], [2]], "1": [[0, 1], [1, 2]], "2": [[0, 1, 2]]}}
    with pytest.raises(InvalidSimplex):
        complex_from_json(doc)


def test_json_rejects_missing_fields():
    with pytest.raises(ArchiveError):
        complex_from_json(json.loads('{"simplices": {}}'))
