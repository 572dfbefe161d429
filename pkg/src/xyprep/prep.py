"""Initialization patterns for logical state preparation, and their inversion.

Two protocols are supported:

* ``standard``: every data qubit starts in a product state (|+> for the
  logical X target, |+i> for the logical Y target); only the stabilizers of
  the matching type have deterministic first-round outcomes.
* ``new``: qubits are first entangled into local GHZ blocks (four-qubit
  blocks on alternating bulk plaquettes, two-qubit blocks along one
  boundary) so that three quarters of the stabilizers are deterministic in
  the first round.

The inverted protocol measures the local stabilizers of each GHZ block
instead of single-qubit X, which keeps the same repetition-code protection
during logical readout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import CodeLayout, PauliFrame, Stabilizer, X_TYPE, Y_TYPE

STANDARD = "standard"
NEW = "new"
PLUS_L = "plus_L"
PLUS_I_L = "plus_i_L"


@dataclass(frozen=True)
class InitPattern:
    """Partition of the qubits into GHZ blocks plus the fixed-stabilizer set."""

    protocol: str
    target: str
    d: int
    ghz4_blocks: tuple[tuple[int, ...], ...]
    ghz2_blocks: tuple[tuple[int, ...], ...]
    singles: tuple[int, ...]
    fixed_stabilizers: frozenset[int]

    @property
    def n(self) -> int:
        return self.d * self.d

    @property
    def bulk_qubits(self) -> tuple[int, ...]:
        """All qubits entangled into GHZ blocks (everything but the singles)."""
        out: list[int] = []
        for b in self.ghz4_blocks + self.ghz2_blocks:
            out.extend(b)
        return tuple(sorted(out))

    def to_json_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "target": self.target,
            "d": self.d,
            "ghz4_blocks": [list(b) for b in self.ghz4_blocks],
            "ghz2_blocks": [list(b) for b in self.ghz2_blocks],
            "singles": list(self.singles),
            "fixed_stabilizers": sorted(self.fixed_stabilizers),
        }


@dataclass(frozen=True)
class Observable:
    """A local commuting observable measured during inverted logical readout."""

    label: str  # e.g. "YYYY", "IXXI", "X"
    qubits: tuple[int, ...]  # qubits the non-identity factors act on, in label order
    paulis: str  # the non-identity factors, same length as qubits

    def frame(self, n: int) -> PauliFrame:
        return PauliFrame.from_ops(n, dict(zip(self.qubits, self.paulis)))


@dataclass(frozen=True)
class MeasurementPattern:
    """Observable sets for the inverted measurement protocol."""

    d: int
    observables: tuple[Observable, ...]
    xl_inference_set: tuple[int, ...]  # indices into observables
    check_combos: tuple[tuple[int, ...], ...]  # per fixed stabilizer: observable ids
    check_stabilizers: tuple[int, ...]  # the fixed stabilizer id per check


def _plaquette_by_position(layout: CodeLayout) -> dict[tuple[int, int], Stabilizer]:
    return {s.position: s for s in layout.stabilizers}


def init_pattern(layout: CodeLayout, protocol: str, target: str) -> InitPattern:
    """Build the initialization pattern for (protocol, target) on this layout."""
    d = layout.d
    if protocol not in (STANDARD, NEW) or target not in (PLUS_L, PLUS_I_L):
        raise ValueError(f"unsupported (protocol, target) = ({protocol!r}, {target!r})")

    if protocol == STANDARD:
        kind = X_TYPE if target == PLUS_L else Y_TYPE
        fixed = frozenset(s.plaquette_id for s in layout.stabilizers if s.kind == kind)
        return InitPattern(
            protocol=protocol,
            target=target,
            d=d,
            ghz4_blocks=(),
            ghz2_blocks=(),
            singles=tuple(range(layout.n)),
            fixed_stabilizers=fixed,
        )

    by_pos = _plaquette_by_position(layout)
    ghz4: list[tuple[int, ...]] = []
    ghz2: list[tuple[int, ...]] = []

    if target == PLUS_L:
        # four-qubit blocks on the bulk Y-plaquettes at even rows / odd cols,
        # two-qubit blocks on the top-boundary Y-pairs, singles down the
        # rightmost column (the repetition-code chain)
        block_kind, all_fixed_kind = Y_TYPE, X_TYPE
        ghz4_positions = [
            (r, c) for r in range(2, d, 2) for c in range(1, d - 1, 2)
        ]
        ghz2_positions = [(0, c) for c in range(1, d - 1, 2)]
        singles = tuple(layout.qubit_index(i, d) for i in range(1, d + 1))
    else:
        # mirrored construction for the logical Y target: blocks on
        # X-plaquettes, pair blocks on the right-boundary X-pairs, singles
        # along the bottom row
        block_kind, all_fixed_kind = X_TYPE, Y_TYPE
        ghz4_positions = [
            (r, c) for r in range(1, d - 1, 2) for c in range(1, d - 1, 2)
        ]
        ghz2_positions = [(r, d) for r in range(1, d - 1, 2)]
        singles = tuple(layout.qubit_index(d, j) for j in range(1, d + 1))

    fixed = set(s.plaquette_id for s in layout.stabilizers if s.kind == all_fixed_kind)
    for pos in ghz4_positions:
        stab = by_pos[pos]
        assert stab.kind == block_kind and len(stab.support) == 4
        ghz4.append(stab.support)
        fixed.add(stab.plaquette_id)
    for pos in ghz2_positions:
        stab = by_pos[pos]
        assert stab.kind == block_kind and len(stab.support) == 2
        ghz2.append(stab.support)
        fixed.add(stab.plaquette_id)

    pattern = InitPattern(
        protocol=protocol,
        target=target,
        d=d,
        ghz4_blocks=tuple(ghz4),
        ghz2_blocks=tuple(ghz2),
        singles=singles,
        fixed_stabilizers=frozenset(fixed),
    )
    covered = sorted(q for b in pattern.ghz4_blocks + pattern.ghz2_blocks for q in b)
    covered += sorted(pattern.singles)
    if sorted(covered) != list(range(layout.n)):
        raise AssertionError("pattern bug: blocks and singles do not partition the qubits")
    return pattern


def expected_first_round(pattern: InitPattern, layout: CodeLayout) -> dict[int, int | None]:
    """Map stabilizer id -> 0 for deterministic (+1) first-round outcomes, None if random."""
    return {
        s.plaquette_id: (0 if s.plaquette_id in pattern.fixed_stabilizers else None)
        for s in layout.stabilizers
    }


def ghz_invariance_group(pattern: InitPattern) -> list[PauliFrame]:
    """Generators of the Pauli group acting trivially on the initial state.

    Z on every qubit of a GHZ block leaves the block state invariant (the
    block states are eigenstates of Z x Z and Z x Z x Z x Z); these frames
    generate the equivalence relation used when adjudicating preparation
    errors.  Empty for the standard protocol.
    """
    n = pattern.n
    gens = []
    for block in pattern.ghz2_blocks + pattern.ghz4_blocks:
        gens.append(PauliFrame.from_ops(n, {q: "Z" for q in block}))
    return gens


def _cyclic_block_order(layout: CodeLayout, block: tuple[int, ...]) -> list[int]:
    """Order 4 block qubits cyclically around their plaquette."""
    coords = sorted(layout.qubit_coords(q) for q in block)
    (r0, c0) = coords[0]
    cycle = [(r0, c0), (r0, c0 + 1), (r0 + 1, c0 + 1), (r0 + 1, c0)]
    return [layout.qubit_index(i, j) for (i, j) in cycle]


def measurement_pattern(layout: CodeLayout, pattern: InitPattern) -> MeasurementPattern:
    """Observable sets for inverted logical readout of the given pattern.

    For the standard protocol this is the trivial pattern (single-qubit X on
    every qubit); for the new protocol each GHZ block is read out through
    the local operators that stabilize it.
    """
    if pattern.target != PLUS_L:
        raise ValueError("inverted readout implemented for the plus_L target")
    n = layout.n
    observables: list[Observable] = []

    if pattern.protocol == STANDARD:
        for q in range(n):
            observables.append(Observable("X", (q,), "X"))
    else:
        for block in pattern.ghz4_blocks:
            cyc = _cyclic_block_order(layout, block)
            observables.append(Observable("YYYY", tuple(cyc), "YYYY"))
            observables.append(Observable("XXII", (cyc[0], cyc[1]), "XX"))
            observables.append(Observable("IXXI", (cyc[1], cyc[2]), "XX"))
            observables.append(Observable("IIXX", (cyc[2], cyc[3]), "XX"))
        for block in pattern.ghz2_blocks:
            observables.append(Observable("YY", tuple(block), "YY"))
            observables.append(Observable("XX", tuple(block), "XX"))
        for q in pattern.singles:
            observables.append(Observable("X", (q,), "X"))

    # logical X is inferred from the disjoint XX / X observables covering the
    # top row exactly once
    top_row = set(layout.logical_x_support)
    inference = []
    for idx, obs in enumerate(observables):
        if "Y" in obs.paulis:
            continue
        qs = set(obs.qubits)
        if qs <= top_row:
            inference.append(idx)
    covered = [q for i in inference for q in observables[i].qubits]
    if sorted(covered) != sorted(top_row):
        raise AssertionError("inference set does not cover the logical X support once")

    combos, combo_stabs = _stabilizer_observable_combos(layout, pattern, observables)
    return MeasurementPattern(
        d=layout.d,
        observables=tuple(observables),
        xl_inference_set=tuple(inference),
        check_combos=combos,
        check_stabilizers=combo_stabs,
    )


def _stabilizer_observable_combos(
    layout: CodeLayout,
    pattern: InitPattern,
    observables: list[Observable],
) -> tuple[tuple[tuple[int, ...], ...], tuple[int, ...]]:
    """Express every fixed stabilizer as a product of measured observables.

    Solved over GF(2) in symplectic form; raises if some fixed stabilizer is
    not a product of observables (which would mean the pattern is broken).
    """
    from .gf2 import gf2_solve

    n = layout.n
    obs_mat = np.zeros((len(observables), 2 * n), dtype=np.uint8)
    for i, obs in enumerate(observables):
        f = obs.frame(n)
        obs_mat[i, :n] = f.x
        obs_mat[i, n:] = f.z
    combos: list[tuple[int, ...]] = []
    stabs: list[int] = []
    for sid in sorted(pattern.fixed_stabilizers):
        s = layout.stabilizers[sid]
        target = np.concatenate([layout.sx[sid], layout.sz[sid]])
        sol = gf2_solve(obs_mat.T, target)
        if sol is None:
            raise AssertionError(f"fixed stabilizer {sid} is not a product of observables")
        combos.append(tuple(int(i) for i in np.nonzero(sol)[0]))
        stabs.append(sid)
    return tuple(combos), tuple(stabs)


def observable_flips_from_frame(
    mpattern: MeasurementPattern, layout: CodeLayout, frame: PauliFrame
) -> np.ndarray:
    """Which observable outcomes a physical Pauli frame flips (anticommutation)."""
    flips = np.zeros(len(mpattern.observables), dtype=np.uint8)
    for i, obs in enumerate(mpattern.observables):
        f = obs.frame(layout.n)
        flips[i] = (int(np.dot(f.x, frame.z)) + int(np.dot(f.z, frame.x))) % 2
    return flips


def decode_measurement(
    mpattern: MeasurementPattern,
    outcomes: np.ndarray,
    layout: CodeLayout,
) -> tuple[int, np.ndarray]:
    """Correct corrupted readout outcomes and infer the logical X bit.

    Outcomes are one bit per observable (0 for +1).  Decoding finds a
    minimum-weight set of outcome flips explaining the violated parity
    checks, applies it, and sums the inference set.  Exact coset-leader
    decoding is implemented for d <= 5 (the check space is enumerable);
    larger distances are not needed by any caller and raise.
    """
    outcomes = np.asarray(outcomes, dtype=np.uint8)
    if outcomes.shape[0] != len(mpattern.observables):
        raise ValueError("one outcome bit per observable required")
    n_checks = len(mpattern.check_combos)
    if n_checks > 20:
        raise ValueError(f"exact readout decoding supports d <= 5 ({n_checks} checks)")

    syndrome = 0
    for k, combo in enumerate(mpattern.check_combos):
        bit = 0
        for i in combo:
            bit ^= int(outcomes[i])
        syndrome |= bit << k

    leader = _coset_leaders(mpattern)[syndrome]
    corrected = outcomes.copy()
    for i in leader:
        corrected[i] ^= 1
    x_l = 0
    for i in mpattern.xl_inference_set:
        x_l ^= int(corrected[i])
    return x_l, corrected


_LEADER_CACHE: dict[tuple, list[tuple[int, ...]]] = {}


def _coset_leaders(mpattern: MeasurementPattern) -> list[tuple[int, ...]]:
    """Minimum-weight flip set per syndrome, by breadth-first search.

    Ties resolve to the first pattern found; the search enumerates flips in
    observable order, so the leader choice is deterministic.
    """
    key = (mpattern.d, mpattern.observables)
    if key in _LEADER_CACHE:
        return _LEADER_CACHE[key]
    n_obs = len(mpattern.observables)
    n_checks = len(mpattern.check_combos)
    col = [0] * n_obs
    for k, combo in enumerate(mpattern.check_combos):
        for i in combo:
            col[i] ^= 1 << k
    leaders: list[tuple[int, ...] | None] = [None] * (1 << n_checks)
    leaders[0] = ()
    frontier = [0]
    while frontier:
        nxt = []
        for s in frontier:
            base = leaders[s]
            for i in range(n_obs):
                s2 = s ^ col[i]
                if leaders[s2] is None:
                    leaders[s2] = base + (i,)
                    nxt.append(s2)
        frontier = nxt
    if any(v is None for v in leaders):
        raise AssertionError("check system is not surjective onto its syndrome space")
    _LEADER_CACHE[key] = leaders  # type: ignore[assignment]
    return leaders  # type: ignore[return-value]
