"""Small dense GF(2) linear algebra helpers (uint8 matrices, values 0/1)."""

from __future__ import annotations

import numpy as np


def gf2_rref(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2); returns (rref, pivot_columns)."""
    m = (np.asarray(a) & 1).astype(np.uint8).copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        hits = np.nonzero(m[r:, c])[0]
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        others = np.nonzero(m[:, c])[0]
        for o in others:
            if o != r:
                m[o] ^= m[r]
        pivots.append(c)
        r += 1
    return m, pivots


def gf2_rank(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    return len(gf2_rref(a)[1])


def gf2_row_space_equal(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff the two matrices span the same row space over GF(2)."""
    ra, rb = gf2_rank(a), gf2_rank(b)
    if ra != rb:
        return False
    return gf2_rank(np.vstack([a, b])) == ra


def gf2_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution x of a @ x = b over GF(2), or None if inconsistent."""
    a = (np.asarray(a) & 1).astype(np.uint8)
    b = (np.asarray(b).reshape(-1) & 1).astype(np.uint8)
    rows, cols = a.shape
    aug = np.concatenate([a, b[:, None]], axis=1)
    red, pivots = gf2_rref(aug)
    # inconsistent iff some pivot lands in the augmented column
    if cols in pivots:
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for r, c in enumerate(pivots):
        x[c] = red[r, cols]
    return x


def gf2_in_row_space(v: np.ndarray, a: np.ndarray) -> bool:
    """True iff v is a GF(2) combination of the rows of a."""
    return gf2_solve(a.T, v) is not None
