"""Matrix Market ingestion, generators and characteristic validation."""

import random

import pytest

from sparkbench.core import CsrMatrix
from sparkbench.matio import (
    MATRIX_NAMES,
    TABLE1_EXPECTED,
    MatrixMarketError,
    MatrixMeta,
    detect_symmetry,
    gen_all_standins,
    gen_arrow,
    gen_banded,
    gen_spd,
    gen_standin,
    gen_tri_mesh,
    matrix_path,
    read_matrix_market,
    read_mesh,
    symmetrize_lower,
    validate_characteristics,
    write_matrix_market,
    write_mesh,
)


def write_text(tmp_path, body, name="m.mtx"):
    p = tmp_path / name
    p.write_text(body, encoding="ascii")
    return p


def test_read_minimal_general(tmp_path):
    p = write_text(tmp_path, "\n".join([
        "%%MatrixMarket matrix coordinate real general",
        "% a comment",
        "",
        "2 3 3",
        "1 1 1.5",
        "2 3 -2",
        "1 2 3e-1",
    ]) + "\n")
    m, meta = read_matrix_market(p)
    assert (m.n_rows, m.n_cols) == (2, 3)
    assert list(m.triples()) == [(0, 0, 1.5), (0, 1, 0.3), (1, 2, -2.0)]
    assert meta.entries == 3
    assert meta.name == "m"


def test_read_fortran_exponent(tmp_path):
    p = write_text(tmp_path, "\n".join([
        "%%MatrixMarket matrix coordinate real general",
        "1 1 1",
        "1 1 1.5D+01",
    ]) + "\n")
    m, _ = read_matrix_market(p)
    assert m.values == [15.0]


def test_read_symmetric_mirrors_lower(tmp_path):
    p = write_text(tmp_path, "\n".join([
        "%%MatrixMarket matrix coordinate real symmetric",
        "2 2 2",
        "1 1 4.0",
        "2 1 7.0",
    ]) + "\n")
    m, meta = read_matrix_market(p)
    assert list(m.triples()) == [(0, 0, 4.0), (0, 1, 7.0), (1, 0, 7.0)]
    assert meta.entries == 2
    assert meta.symmetry == "symmetric"


@pytest.mark.parametrize("body,fragment", [
    ("%%MatrixMarket matrix array real general\n1 1 1\n1 1 1\n", "coordinate"),
    ("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n",
     "pattern"),
    ("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",
     "complex"),
    ("%%MatrixMarket matrix coordinate real skew-symmetric\n1 1 1\n1 1 1\n",
     "skew"),
    ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n1 1 2\n",
     "duplicate"),
    ("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n",
     "declares"),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
     "out of range"),
    ("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 5\n",
     "upper"),
    ("not a header\n1 1 1\n1 1 1\n", "header"),
])
def test_read_rejects_malformed(tmp_path, body, fragment):
    p = write_text(tmp_path, body)
    with pytest.raises(MatrixMarketError) as err:
        read_matrix_market(p)
    assert fragment.lower() in str(err.value).lower()


def test_error_messages_carry_position(tmp_path):
    p = write_text(tmp_path, "\n".join([
        "%%MatrixMarket matrix coordinate real general",
        "2 2 1",
        "1 1 not-a-number",
    ]) + "\n")
    with pytest.raises(MatrixMarketError) as err:
        read_matrix_market(p)
    assert ":3" in str(err.value)


def test_write_read_round_trip(tmp_path):
    rng = random.Random(3)
    for t in range(15):
        n = rng.randint(1, 12)
        triples = [(i, j, rng.uniform(-1e3, 1e3))
                   for i in range(n) for j in range(n) if rng.random() < 0.4]
        if not triples:
            triples = [(0, 0, 1.0)]
        m = CsrMatrix.from_triples(n, n, triples)
        p = tmp_path / f"t{t}.mtx"
        write_matrix_market(p, m)
        back, meta = read_matrix_market(p)
        assert list(back.triples()) == list(m.triples())
        assert meta.entries == m.nnz


def test_write_symmetric_keeps_lower_only(tmp_path):
    m = CsrMatrix.from_triples(
        2, 2, [(0, 0, 1.0), (0, 1, 5.0), (1, 0, 5.0), (1, 1, 2.0)])
    p = tmp_path / "s.mtx"
    write_matrix_market(p, m, symmetry="symmetric")
    text = p.read_text()
    assert not any(line.startswith("1 2 ") for line in text.splitlines()[2:])
    back, meta = read_matrix_market(p)
    assert list(back.triples()) == list(m.triples())
    assert meta.entries == 3


def test_detect_symmetry_classes():
    sym = CsrMatrix.from_triples(2, 2, [(0, 1, 2.0), (1, 0, 2.0)])
    struct = CsrMatrix.from_triples(2, 2, [(0, 1, 2.0), (1, 0, 3.0)])
    none = CsrMatrix.from_triples(2, 2, [(0, 1, 2.0)])
    assert detect_symmetry(sym) == "symmetric"
    assert detect_symmetry(struct) == "structural"
    assert detect_symmetry(none) == "none"


def test_symmetrize_lower():
    m = CsrMatrix.from_triples(
        3, 3, [(0, 0, 1.0), (0, 2, 9.0), (2, 0, 4.0), (1, 1, 2.0)])
    s = symmetrize_lower(m)
    got = {(i, j): v for i, j, v in s.triples()}
    # the upper entry 9.0 is discarded; the lower 4.0 is mirrored
    assert got == {(0, 0): 1.0, (1, 1): 2.0, (2, 0): 4.0, (0, 2): 4.0}
    assert detect_symmetry(s) == "symmetric"


def test_validate_characteristics_outcomes():
    expected = MatrixMeta("x", 10, 10, 30, "none")
    ok = validate_characteristics(MatrixMeta("x", 10, 10, 30, "none"), expected)
    assert ok.passed and not ok.warnings
    assert ok.lines() == ["ok"]
    warn = validate_characteristics(MatrixMeta("x", 10, 10, 29, "none"), expected)
    assert warn.passed and len(warn.warnings) == 1
    bad = validate_characteristics(MatrixMeta("x", 9, 10, 30, "structural"),
                                   expected)
    assert not bad.passed and len(bad.failures) == 2


def test_gen_banded_structure():
    m = gen_banded(10, [(1, 1.0, (-1.0, 1.0)), (-3, 0.5, (0.0, 2.0))], seed=4)
    entries = {(i, j) for i, j, _ in m.triples()}
    for i in range(10):
        assert (i, i) in entries
    for i, j, _ in m.triples():
        assert j - i in (0, 1, -3)
    for i in range(9):
        assert (i, i + 1) in entries
    # identical seed, identical matrix
    m2 = gen_banded(10, [(1, 1.0, (-1.0, 1.0)), (-3, 0.5, (0.0, 2.0))], seed=4)
    assert list(m2.triples()) == list(m.triples())


def test_gen_spd_is_spd():
    for seed in (1, 2, 3):
        m = gen_spd(25, seed=seed)
        assert detect_symmetry(m) == "symmetric"
        vals = {(i, j): v for i, j, v in m.triples()}
        for i in range(25):
            off = sum(abs(v) for (r, c), v in vals.items() if r == i and c != i)
            assert vals[(i, i)] > off  # Gershgorin: strictly dominant


def test_gen_arrow_shape():
    m = gen_arrow(8, seed=1)
    entries = {(i, j) for i, j, _ in m.triples()}
    for k in range(8):
        assert (0, k) in entries and (k, 0) in entries and (k, k) in entries


def test_gen_tri_mesh_geometry():
    mesh = gen_tri_mesh(3, 2)
    assert len(mesh.nodes) == 4 * 3
    assert len(mesh.elements) == 2 * 3 * 2
    mesh.validate()
    for a, b, c in mesh.elements:
        (x1, y1), (x2, y2), (x3, y3) = (mesh.nodes[a], mesh.nodes[b],
                                        mesh.nodes[c])
        det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)
        assert det > 0.0


def test_mesh_round_trip(tmp_path):
    mesh = gen_tri_mesh(2, 3)
    p = tmp_path / "m.txt"
    write_mesh(p, mesh)
    back = read_mesh(p)
    assert back.nodes == mesh.nodes
    assert back.elements == mesh.elements


def test_standins_match_published_characteristics(tmp_path):
    for name in MATRIX_NAMES:
        m, tag = gen_standin(name)
        expected = TABLE1_EXPECTED[name]
        assert (m.n_rows, m.n_cols) == (expected.n_rows, expected.n_cols)
        if tag == "symmetric":
            stored = sum(1 for i, j, _ in m.triples() if i >= j)
        else:
            stored = m.nnz
        assert stored == expected.entries


def test_standins_written_files_validate(tmp_path):
    paths = gen_all_standins(tmp_path)
    assert [p.name for p in paths] == [f"{n}.mtx" for n in MATRIX_NAMES]
    for name in MATRIX_NAMES:
        m, meta = read_matrix_market(matrix_path(tmp_path, name))
        report = validate_characteristics(meta, TABLE1_EXPECTED[name])
        assert report.passed, report.failures
        assert not report.warnings, report.warnings
        m.validate()


def test_standins_are_deterministic():
    a, _ = gen_standin("add32")
    b, _ = gen_standin("add32")
    assert a.col_ind == b.col_ind and a.values == b.values


def test_matrix_path_naming(tmp_path):
    assert matrix_path(tmp_path, "codecs4812.dc").name == "codecs4812.dc.mtx"
