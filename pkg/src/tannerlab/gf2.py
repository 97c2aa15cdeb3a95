"""GF(2) linear algebra on int-bitset rows.

Rows are Python ints (bit j = column j), so rank/nullspace at a few
hundred columns stays essentially free and exact.
"""

from __future__ import annotations

import numpy as np


def pack_rows(mat: np.ndarray) -> list[int]:
    """Pack a dense 0/1 matrix into one int per row."""
    out = []
    for row in np.asarray(mat, dtype=np.uint8) & 1:
        val = 0
        for j in np.flatnonzero(row):
            val |= 1 << int(j)
        out.append(val)
    return out


def unpack_rows(rows: list[int], n_cols: int) -> np.ndarray:
    """Expand int-bitset rows back to a dense uint8 matrix."""
    out = np.zeros((len(rows), n_cols), dtype=np.uint8)
    for i, val in enumerate(rows):
        j = 0
        while val:
            if val & 1:
                out[i, j] = 1
            val >>= 1
            j += 1
    return out


def rank(rows: list[int]) -> int:
    """Rank over GF(2) by Gaussian elimination."""
    pivots: list[int] = []
    for row in rows:
        for p in pivots:
            row = min(row, row ^ p)
        if row:
            pivots.append(row)
    return len(pivots)


def row_reduce(rows: list[int]) -> tuple[list[int], list[int]]:
    """Reduced row-echelon form.

    Returns (reduced rows, pivot column per row), rows sorted by pivot.
    """
    work = [r for r in rows if r]
    reduced: list[int] = []
    for row in work:
        for r in reduced:
            low = r & -r
            if row & low:
                row ^= r
        if row:
            low = row & -row
            for i, r in enumerate(reduced):
                if r & low:
                    reduced[i] ^= row
            reduced.append(row)
    reduced.sort(key=lambda r: r & -r)
    pivot_cols = [(r & -r).bit_length() - 1 for r in reduced]
    return reduced, pivot_cols


def in_rowspan(vec: int, reduced: list[int]) -> bool:
    """Membership test against a row_reduce() basis."""
    for r in reduced:
        low = r & -r
        if vec & low:
            vec ^= r
    return vec == 0


def independent_subset(rows: list[int]) -> list[int]:
    """Indices of a maximal independent subset, greedy in row order."""
    pivots: list[int] = []
    keep: list[int] = []
    for i, row in enumerate(rows):
        red = row
        for p in pivots:
            red = min(red, red ^ p)
        if red:
            pivots.append(red)
            keep.append(i)
    return keep


def nullspace(rows: list[int], n_cols: int) -> list[int]:
    """Basis of the right nullspace {v : M v = 0} as int bitsets."""
    reduced, pivot_cols = row_reduce(rows)
    pivot_set = set(pivot_cols)
    free_cols = [c for c in range(n_cols) if c not in pivot_set]
    basis = []
    for free in free_cols:
        vec = 1 << free
        for r, pc in zip(reduced, pivot_cols):
            if (r >> free) & 1:
                vec |= 1 << pc
        basis.append(vec)
    return basis


def solve(rows: list[int], rhs: list[int], n_cols: int) -> int | None:
    """One solution x of M x = b over GF(2), or None if infeasible.

    rhs is a 0/1 bit per row.
    """
    aug = []
    for row, b in zip(rows, rhs):
        aug.append(row | ((int(b) & 1) << n_cols))
    reduced, pivot_cols = row_reduce(aug)
    sol = 0
    for r, pc in zip(reduced, pivot_cols):
        if pc == n_cols:
            return None
        if (r >> n_cols) & 1:
            sol |= 1 << pc
    return sol


def popcount(val: int) -> int:
    return val.bit_count()
