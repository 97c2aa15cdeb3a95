import numpy as np
import pytest

from tannerlab import gf2


def dense_rank(mat: np.ndarray) -> int:
    """Independent elimination oracle over GF(2)."""
    a = (np.array(mat, dtype=np.uint8) & 1).copy()
    rank = 0
    col = 0
    rows, cols = a.shape
    for _ in range(rows):
        while col < cols and not a[rank:, col].any():
            col += 1
        if col >= cols:
            break
        piv = rank + int(np.flatnonzero(a[rank:, col])[0])
        a[[rank, piv]] = a[[piv, rank]]
        for r in range(rows):
            if r != rank and a[r, col]:
                a[r] ^= a[rank]
        rank += 1
        col += 1
    return rank


@pytest.mark.parametrize("seed", range(8))
def test_rank_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    mat = rng.integers(0, 2, size=(rng.integers(1, 20), rng.integers(1, 24)), dtype=np.uint8)
    assert gf2.rank(gf2.pack_rows(mat)) == dense_rank(mat)


def test_pack_unpack_roundtrip():
    rng = np.random.default_rng(0)
    mat = rng.integers(0, 2, size=(7, 33), dtype=np.uint8)
    assert np.array_equal(gf2.unpack_rows(gf2.pack_rows(mat), 33), mat)


@pytest.mark.parametrize("seed", range(6))
def test_nullspace_annihilates_and_spans(seed):
    rng = np.random.default_rng(100 + seed)
    mat = rng.integers(0, 2, size=(6, 12), dtype=np.uint8)
    rows = gf2.pack_rows(mat)
    basis = gf2.nullspace(rows, 12)
    assert len(basis) == 12 - gf2.rank(rows)
    for vec in basis:
        for row in rows:
            assert gf2.popcount(row & vec) % 2 == 0
    assert gf2.rank(basis) == len(basis)


@pytest.mark.parametrize("seed", range(6))
def test_solve_feasible_and_infeasible(seed):
    rng = np.random.default_rng(200 + seed)
    mat = rng.integers(0, 2, size=(8, 10), dtype=np.uint8)
    rows = gf2.pack_rows(mat)
    x = rng.integers(0, 2, size=10, dtype=np.uint8)
    rhs = list((mat @ x) % 2)
    sol = gf2.solve(rows, rhs, 10)
    assert sol is not None
    sol_vec = gf2.unpack_rows([sol], 10)[0]
    assert np.array_equal((mat @ sol_vec) % 2, np.array(rhs))


def test_solve_reports_infeasible():
    rows = gf2.pack_rows(np.array([[1, 1, 0], [1, 1, 0]], dtype=np.uint8))
    assert gf2.solve(rows, [1, 0], 3) is None


def test_in_rowspan():
    mat = np.array([[1, 0, 1, 0], [0, 1, 1, 0]], dtype=np.uint8)
    rows = gf2.pack_rows(mat)
    reduced, _ = gf2.row_reduce(rows)
    assert gf2.in_rowspan(gf2.pack_rows(mat[:1] ^ mat[1:])[0], reduced)
    assert not gf2.in_rowspan(0b1000, reduced)


def test_independent_subset_greedy_prefix():
    mat = np.array([[1, 1, 0], [1, 1, 0], [0, 0, 1]], dtype=np.uint8)
    assert gf2.independent_subset(gf2.pack_rows(mat)) == [0, 2]
