"""Storage schemes, conversions and their structural invariants."""

import random

import pytest

from sparkbench.core import (
    CsrMatrix,
    DimensionError,
    ParameterError,
    Permutation,
    PermutationError,
    SingularMatrixError,
    SparseElement,
    build_ortho,
    csr_to_linked,
    csr_to_ortho,
    dense_matrix_dims,
    linked_to_csr,
    ortho_to_csr,
    zeros_matrix,
    zeros_vector,
)


def small_csr():
    # [[1, 0, 2],
    #  [0, 3, 0],
    #  [4, 0, 5]]
    return CsrMatrix(3, 3, [0, 2, 3, 5], [0, 2, 1, 0, 2],
                     [1.0, 2.0, 3.0, 4.0, 5.0])


def random_csr(rng, n=None, allow_empty_diag=False):
    n = n or rng.randint(2, 20)
    triples = []
    for i in range(n):
        cols = rng.sample(range(n), rng.randint(1, min(n, 4)))
        for j in cols:
            if i == j and allow_empty_diag and rng.random() < 0.5:
                continue
            triples.append((i, j, rng.uniform(-2, 2)))
    seen = set()
    unique = []
    for i, j, v in triples:
        if (i, j) not in seen:
            seen.add((i, j))
            unique.append((i, j, v))
    return CsrMatrix.from_triples(n, n, unique)


def test_sparse_element_has_no_dict():
    e = SparseElement(1.5, 2)
    assert e.value == 1.5 and e.col == 2
    assert e.next_in_row is None and e.next_in_col is None
    with pytest.raises(AttributeError):
        e.extra = 1


def test_from_triples_sorts_row_major():
    m = CsrMatrix.from_triples(2, 3, [(1, 2, 6.0), (0, 1, 2.0), (1, 0, 4.0)])
    assert m.row_ptr == [0, 1, 3]
    assert m.col_ind == [1, 0, 2]
    assert m.values == [2.0, 4.0, 6.0]
    assert m.nnz == 3
    assert list(m.triples()) == [(0, 1, 2.0), (1, 0, 4.0), (1, 2, 6.0)]


def test_from_triples_rejects_duplicates():
    with pytest.raises(ParameterError):
        CsrMatrix.from_triples(2, 2, [(0, 0, 1.0), (0, 0, 2.0)])


def test_validate_catches_bad_structure():
    with pytest.raises(ParameterError):
        CsrMatrix(2, 2, [0, 1], [0], [1.0]).validate()
    with pytest.raises(ParameterError):
        CsrMatrix(2, 2, [0, 2, 2], [1, 0], [1.0, 2.0]).validate()
    with pytest.raises(ParameterError):
        CsrMatrix(1, 1, [0, 1], [3], [1.0]).validate()
    small_csr().validate()


def test_csr_to_linked_orders_rows():
    lk = csr_to_linked(small_csr())
    assert lk.size == 3
    row0 = list(lk.row_elements(0))
    assert [(e.col, e.value) for e in row0] == [(0, 1.0), (2, 2.0)]
    assert [(e.col, e.value) for e in lk.row_elements(1)] == [(1, 3.0)]
    assert lk.nnz() == 5


def test_csr_to_linked_rejects_rectangular():
    with pytest.raises(DimensionError):
        csr_to_linked(CsrMatrix(1, 2, [0, 1], [1], [1.0]))


def test_linked_round_trip():
    rng = random.Random(5)
    for _ in range(30):
        m = random_csr(rng)
        back = linked_to_csr(csr_to_linked(m))
        assert back.row_ptr == m.row_ptr
        assert back.col_ind == m.col_ind
        assert back.values == m.values


def test_empty_rows_survive_conversion():
    m = CsrMatrix(3, 3, [0, 0, 1, 1], [2], [7.0])
    lk = csr_to_linked(m)
    assert list(lk.row_elements(0)) == []
    assert linked_to_csr(lk).row_ptr == [0, 0, 1, 1]


def test_ortho_inserts_zero_diagonal():
    # row 1 has no diagonal entry; conversion must create an explicit one
    m = CsrMatrix.from_triples(2, 2, [(0, 0, 1.0), (1, 0, 2.0)])
    o = csr_to_ortho(m)
    assert o.diag[1] is not None
    assert o.diag[1].value == 0.0 and o.diag[1].col == 1
    back = ortho_to_csr(o)
    assert list(back.triples()) == [(0, 0, 1.0), (1, 0, 2.0), (1, 1, 0.0)]


def test_ortho_column_chains():
    o = csr_to_ortho(small_csr())
    col0 = [(e.row, e.value) for e in o.col_elements(0)]
    assert col0 == [(0, 1.0), (2, 4.0)]
    col2 = [(e.row, e.value) for e in o.col_elements(2)]
    assert col2 == [(0, 2.0), (2, 5.0)]
    assert o.int_to_ext_row_map == [0, 1, 2]
    assert o.int_to_ext_col_map == [0, 1, 2]
    assert all(o.diag[i] is not None for i in range(3))


def test_ortho_round_trip_many():
    rng = random.Random(6)
    for _ in range(30):
        m = random_csr(rng)
        back = ortho_to_csr(csr_to_ortho(m))
        want = {(i, j): v for i, j, v in m.triples()}
        got = {(i, j): v for i, j, v in back.triples()}
        for key, v in want.items():
            assert got[key] == v
        # anything added by the conversion is an explicit zero diagonal
        for (i, j), v in got.items():
            if (i, j) not in want:
                assert i == j and v == 0.0


def test_build_ortho_custom_maps():
    rows = [[(0, 2.0), (1, 1.0)], [(1, 3.0)]]
    o = build_ortho(2, rows, [1, 0], [0, 1])
    assert o.int_to_ext_row_map == [1, 0]
    assert [(e.col, e.value) for e in o.row_elements(0)] == [(0, 2.0), (1, 1.0)]


def test_build_ortho_requires_diagonal():
    with pytest.raises(SingularMatrixError):
        build_ortho(2, [[(1, 5.0)], [(1, 1.0)]], [0, 1], [0, 1])


def test_permutation_builds_inverse():
    p = Permutation([2, 0, 1])
    assert p.inverse == [1, 2, 0]
    assert p.n == 3
    assert Permutation.identity(3).forward == [0, 1, 2]


def test_permutation_rejects_bad_maps():
    with pytest.raises(PermutationError):
        Permutation([0, 0, 1])
    with pytest.raises(PermutationError):
        Permutation([0, 3, 1])
    with pytest.raises(PermutationError):
        Permutation([1, 0], inverse=[0, 1])


def test_dense_helpers():
    assert zeros_vector(3) == [0.0, 0.0, 0.0]
    assert zeros_matrix(2, 3) == [[0.0] * 3, [0.0] * 3]
    assert dense_matrix_dims([[1.0, 2.0], [3.0, 4.0]]) == (2, 2)
    with pytest.raises(DimensionError):
        dense_matrix_dims([[1.0], [1.0, 2.0]])
