"""Repetition-code structure of the fixed-stabilizer parity checks.

Under pure phase noise every fixed stabilizer gives a classical parity
check on the per-qubit error bits.  For the GHZ-based pattern those checks
reduce, by iterated row additions, to independent two-bit checks whose
connected components are the two- and four-bit repetition blocks plus a
single length-d chain on the singles line.  This module performs that
reduction with an explicit row-operation certificate, provides an exact
maximum-likelihood oracle at small distance, and evaluates exact
repetition-code failure rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gf2 import gf2_rank, gf2_row_space_equal
from .lattice import CodeLayout
from .prep import InitPattern, NEW, PLUS_L

_ML_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


@dataclass
class CheckMatrix:
    """Fixed-stabilizer parity checks on the d^2 phase-error bits."""

    rows: np.ndarray  # (num_fixed, n) uint8
    row_meta: tuple[int, ...]  # originating stabilizer ids


@dataclass
class RepDecomposition:
    rep2_blocks: tuple[tuple[int, ...], ...]
    rep4_blocks: tuple[tuple[int, ...], ...]
    repd_chain: tuple[int, ...]  # ordered qubit indices of the length-d chain
    block_checks: np.ndarray  # (num_checks, n) uint8, all weight-2 rows
    transform: np.ndarray  # (num_checks, num_input_rows): block = transform @ input


class ReductionError(RuntimeError):
    """The checks did not reduce to two-bit block form."""


def build_check_matrix(layout: CodeLayout, pattern: InitPattern) -> CheckMatrix:
    """One parity-check row per fixed stabilizer (row support = stabilizer support)."""
    ids = sorted(pattern.fixed_stabilizers)
    rows = np.zeros((len(ids), layout.n), dtype=np.uint8)
    for r, sid in enumerate(ids):
        for q in layout.stabilizers[sid].support:
            rows[r, q] = 1
    return CheckMatrix(rows=rows, row_meta=tuple(ids))


def reduce_to_reps(cm: CheckMatrix, layout: CodeLayout) -> RepDecomposition:
    """Reduce the checks to two-bit form and classify the repetition blocks.

    Starting from the two-bit boundary checks, each four-bit check that
    contains a known two-bit check is replaced by their sum, which is again
    a two-bit check; this repeats until only two-bit checks remain.  The
    accumulated two-bit checks partition the qubits into connected
    components: pair blocks, four-qubit cycles, and one length-d path.
    Raises ReductionError when the recursion stalls (as it does for the
    standard pattern, which has no GHZ blocks).
    """
    n = layout.n
    num_in = cm.rows.shape[0]
    # each derived pair check carries its GF(2) combination of the input rows
    pair_checks: dict[tuple[int, int], np.ndarray] = {}
    quads: list[tuple[tuple[int, ...], np.ndarray]] = []

    for r in range(num_in):
        sup = tuple(int(q) for q in np.nonzero(cm.rows[r])[0])
        combo = np.zeros(num_in, dtype=np.uint8)
        combo[r] = 1
        if len(sup) == 2:
            pair_checks.setdefault(sup, combo)
        else:
            quads.append((sup, combo))

    # closure: a four-bit check containing a known pair implies the
    # complementary pair; iterate until no new pair checks appear (this is
    # the proof's double recursion, row pairs and column pairs together)
    explained = [False] * len(quads)
    progress = True
    while progress:
        progress = False
        for idx, (sup, combo) in enumerate(quads):
            for (a, b), pc in list(pair_checks.items()):
                if a in sup and b in sup:
                    explained[idx] = True
                    rest = tuple(q for q in sup if q not in (a, b))
                    if rest not in pair_checks:
                        pair_checks[rest] = combo ^ pc
                        progress = True
    if not all(explained):
        raise ReductionError(
            f"{explained.count(False)} checks did not reduce to two-bit form; "
            "the pattern does not have the GHZ block structure"
        )

    # classify connected components of the pair-check graph
    adj: dict[int, set[int]] = {}
    for (a, b) in pair_checks:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    seen: set[int] = set()
    rep2: list[tuple[int, ...]] = []
    rep4: list[tuple[int, ...]] = []
    chains: list[tuple[int, ...]] = []
    for start in sorted(adj):
        if start in seen:
            continue
        comp = _component(adj, start)
        seen.update(comp)
        if len(comp) == 2:
            rep2.append(tuple(sorted(comp)))
        elif len(comp) == 4 and all(len(adj[q] & comp) == 2 for q in comp):
            rep4.append(tuple(sorted(comp)))
        else:
            chains.append(_order_path(adj, comp))
    d = layout.d
    if len(chains) != 1 or len(chains[0]) != d:
        raise ReductionError(
            f"expected one length-{d} chain, got {[len(c) for c in chains]}"
        )
    if len(rep2) != (d - 1) // 2 or len(rep4) != ((d - 1) // 2) ** 2:
        raise ReductionError("block counts do not match the GHZ structure")

    keys = sorted(pair_checks)
    block_rows = np.zeros((len(keys), n), dtype=np.uint8)
    transform = np.zeros((len(keys), num_in), dtype=np.uint8)
    for i, key in enumerate(keys):
        block_rows[i, key[0]] = 1
        block_rows[i, key[1]] = 1
        transform[i] = pair_checks[key]
    return RepDecomposition(
        rep2_blocks=tuple(sorted(rep2)),
        rep4_blocks=tuple(sorted(rep4)),
        repd_chain=chains[0],
        block_checks=block_rows,
        transform=transform,
    )


def _component(adj: dict[int, set[int]], start: int) -> set[int]:
    comp = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in comp:
                comp.add(w)
                stack.append(w)
    return comp


def _order_path(adj: dict[int, set[int]], comp: set[int]) -> tuple[int, ...]:
    ends = sorted(q for q in comp if len(adj[q] & comp) == 1)
    if len(ends) != 2:
        raise ReductionError("chain component is not a simple path")
    path = [ends[0]]
    prev = None
    while len(path) < len(comp):
        nxt = [w for w in adj[path[-1]] & comp if w != prev]
        if len(nxt) != 1:
            raise ReductionError("chain component is not a simple path")
        prev = path[-1]
        path.append(nxt[0])
    return tuple(path)


def verify_row_space(cm: CheckMatrix, decomp: RepDecomposition) -> bool:
    """Row-space preservation plus certificate consistency."""
    if not gf2_row_space_equal(cm.rows, decomp.block_checks):
        return False
    derived = (decomp.transform @ cm.rows) % 2
    return bool(np.array_equal(derived.astype(np.uint8), decomp.block_checks))


def count_minweight_faults(d: int) -> int:
    """Number of least-weight uncorrectable phase configurations: C(d, (d+1)/2)."""
    if d % 2 == 0:
        raise ValueError("d must be odd")
    return math.comb(d, (d + 1) // 2)


def rep_logical_rate(d: int, p: float) -> float:
    """Exact majority-vote failure probability of a length-d repetition code."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be a probability")
    if d % 2 == 0:
        raise ValueError("d must be odd")
    return sum(
        math.comb(d, k) * p**k * (1.0 - p) ** (d - k)
        for k in range((d + 1) // 2, d + 1)
    )


def _logical_support(layout: CodeLayout, pattern: InitPattern) -> tuple[int, ...]:
    # the logical operator whose eigenstate is being prepared: Z errors are
    # adjudicated against it
    if pattern.target == PLUS_L:
        return layout.logical_x_support
    return layout.logical_y_support


def _ml_tables(layout: CodeLayout, pattern: InitPattern) -> tuple[np.ndarray, np.ndarray]:
    """min coset weight per (fixed-syndrome, logical parity), by full enumeration."""
    key = (layout.d, pattern.protocol, pattern.target)
    if key in _ML_CACHE:
        return _ML_CACHE[key]
    n = layout.n
    if n > 16:
        raise ValueError(f"exhaustive ML oracle supports n <= 16 qubits, got {n}")
    cm = build_check_matrix(layout, pattern)
    m = cm.rows.shape[0]
    log_sup = _logical_support(layout, pattern)
    col_syn = np.zeros(n, dtype=np.int64)
    for q in range(n):
        bits = 0
        for r in range(m):
            bits |= int(cm.rows[r, q]) << r
        col_syn[q] = bits
    log_mask = _mask(log_sup)
    minw = np.full((1 << m, 2), 255, dtype=np.uint8)
    for z in range(1 << n):
        s = 0
        w = 0
        zz = z
        while zz:
            q = (zz & -zz).bit_length() - 1
            s ^= int(col_syn[q])
            w += 1
            zz &= zz - 1
        par = bin(z & log_mask).count("1") & 1
        if w < minw[s, par]:
            minw[s, par] = w
    _ML_CACHE[key] = (minw, col_syn)
    return minw, col_syn


def _mask(support: tuple[int, ...]) -> int:
    m = 0
    for q in support:
        m |= 1 << q
    return m


def ml_oracle(layout: CodeLayout, pattern: InitPattern, z_error: np.ndarray) -> int:
    """Exact maximum-likelihood success bit for a pure phase-error pattern.

    Success means a most-likely correction leaves a residual that acts
    trivially on the prepared logical state (GHZ-block flips and gauge
    moves count as trivial).  Ties between the trivial and logical classes
    are adjudicated as failure.  d = 3 runs on full enumeration; larger d
    uses the repetition-block structure (only the chain majority matters).
    """
    z_error = np.asarray(z_error, dtype=np.uint8).reshape(-1)
    if z_error.shape[0] != layout.n:
        raise ValueError("error length does not match layout")
    if layout.n <= 16:
        minw, col_syn = _ml_tables(layout, pattern)
        s = 0
        par = 0
        log_mask = set(_logical_support(layout, pattern))
        for q in np.nonzero(z_error)[0]:
            s ^= int(col_syn[q])
            if int(q) in log_mask:
                par ^= 1
        return 1 if minw[s, par] < minw[s, par ^ 1] else 0
    if pattern.protocol != NEW:
        raise ValueError("block-structured oracle requires the GHZ pattern")
    decomp = reduce_to_reps(build_check_matrix(layout, pattern), layout)
    chain_weight = int(sum(z_error[q] for q in decomp.repd_chain))
    return 1 if chain_weight <= (layout.d - 1) // 2 else 0
