"""Rotated XY surface code: geometry, Pauli algebra, syndromes, logicals.

Conventions (fixed once so that every other module can rely on them):

* Data qubits sit on the vertices of a d x d grid, coordinates (i, j) with
  1 <= i, j <= d, linear index q = (i-1)*d + (j-1) (row-major).
* Plaquettes are labelled by the (row, col) of their upper-left qubit; the
  plaquette (r, c) covers qubits {(r,c), (r,c+1), (r+1,c), (r+1,c+1)}
  intersected with the grid.  Interior plaquettes are four-body, boundary
  half-plaquettes two-body.
* Plaquette (r, c) is X-type when (r + c) is even and Y-type when odd.
  With this colouring the two-body Y plaquettes live on the top and bottom
  boundaries and the two-body X plaquettes on the left and right boundaries.
* Logical X is a product of Pauli X along the top row, logical Y a product
  of Pauli Y down the leftmost column, logical Z is Z on every qubit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

X_TYPE = "X"
Y_TYPE = "Y"


@dataclass(frozen=True)
class Stabilizer:
    """One plaquette check: all-X or all-Y on a 2- or 4-qubit support."""

    kind: str
    support: tuple[int, ...]  # linear qubit indices, sorted
    plaquette_id: int
    position: tuple[int, int]  # (r, c) plaquette label, see module docstring


@dataclass
class PauliFrame:
    """Binary symplectic record of an n-qubit Pauli (phases ignored).

    Qubit q carries X iff x[q], Z iff z[q], Y iff both.
    """

    x: np.ndarray
    z: np.ndarray

    @classmethod
    def identity(cls, n: int) -> "PauliFrame":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_ops(cls, n: int, ops: dict[int, str]) -> "PauliFrame":
        """Build a frame from {qubit_index: 'X'|'Y'|'Z'}."""
        f = cls.identity(n)
        for q, p in ops.items():
            if p in ("X", "Y"):
                f.x[q] ^= 1
            if p in ("Z", "Y"):
                f.z[q] ^= 1
        return f

    def compose(self, other: "PauliFrame") -> "PauliFrame":
        return PauliFrame(self.x ^ other.x, self.z ^ other.z)

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def is_identity(self) -> bool:
        return not (self.x.any() or self.z.any())

    def copy(self) -> "PauliFrame":
        return PauliFrame(self.x.copy(), self.z.copy())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliFrame)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )


@dataclass
class CodeLayout:
    """Immutable description of the d x d rotated XY code."""

    d: int
    n: int
    stabilizers: list[Stabilizer]
    logical_x_support: tuple[int, ...]
    logical_y_support: tuple[int, ...]
    logical_z_support: tuple[int, ...]
    # symplectic rows of the stabilizers: sx[s], sz[s] are length-n uint8
    sx: np.ndarray = field(repr=False)
    sz: np.ndarray = field(repr=False)

    def qubit_index(self, i: int, j: int) -> int:
        return (i - 1) * self.d + (j - 1)

    def qubit_coords(self, q: int) -> tuple[int, int]:
        return q // self.d + 1, q % self.d + 1

    @property
    def num_stabilizers(self) -> int:
        return len(self.stabilizers)

    def stabilizers_of_kind(self, kind: str) -> list[Stabilizer]:
        return [s for s in self.stabilizers if s.kind == kind]

    def stabilizer_frame(self, s: Stabilizer) -> PauliFrame:
        """The stabilizer itself as a PauliFrame."""
        f = PauliFrame.identity(self.n)
        for q in s.support:
            f.x[q] = 1
            if s.kind == Y_TYPE:
                f.z[q] = 1
        return f


def _plaquette_sites(d: int, r: int, c: int) -> list[tuple[int, int]]:
    sites = []
    for i in (r, r + 1):
        for j in (c, c + 1):
            if 1 <= i <= d and 1 <= j <= d:
                sites.append((i, j))
    return sites


def _plaquette_kind(r: int, c: int) -> str:
    return X_TYPE if (r + c) % 2 == 0 else Y_TYPE


def build_code(d: int) -> CodeLayout:
    """Construct the rotated XY code layout for odd distance d >= 3."""
    if d < 3 or d % 2 == 0:
        raise ValueError(f"distance must be an odd integer >= 3, got {d}")
    n = d * d
    stabilizers: list[Stabilizer] = []
    for r in range(0, d + 1):
        for c in range(0, d + 1):
            sites = _plaquette_sites(d, r, c)
            if len(sites) == 4:
                pass  # interior plaquettes always present
            elif len(sites) == 2:
                # boundary half-plaquettes: Y-pairs top/bottom, X-pairs
                # left/right; the other colour is absent on that boundary
                kind = _plaquette_kind(r, c)
                horizontal = r in (0, d)
                if horizontal and kind != Y_TYPE:
                    continue
                if not horizontal and kind != X_TYPE:
                    continue
            else:
                continue  # corners
            support = tuple(sorted((i - 1) * d + (j - 1) for i, j in sites))
            stabilizers.append(
                Stabilizer(
                    kind=_plaquette_kind(r, c),
                    support=support,
                    plaquette_id=len(stabilizers),
                    position=(r, c),
                )
            )
    if len(stabilizers) != n - 1:
        raise AssertionError(
            f"layout bug: expected {n - 1} stabilizers, built {len(stabilizers)}"
        )
    sx = np.zeros((len(stabilizers), n), dtype=np.uint8)
    sz = np.zeros((len(stabilizers), n), dtype=np.uint8)
    for s in stabilizers:
        for q in s.support:
            sx[s.plaquette_id, q] = 1
            if s.kind == Y_TYPE:
                sz[s.plaquette_id, q] = 1
    layout = CodeLayout(
        d=d,
        n=n,
        stabilizers=stabilizers,
        logical_x_support=tuple(range(0, d)),  # top row
        logical_y_support=tuple(range(0, n, d)),  # leftmost column
        logical_z_support=tuple(range(n)),
        sx=sx,
        sz=sz,
    )
    return layout


def symplectic_product(ax: np.ndarray, az: np.ndarray, bx: np.ndarray, bz: np.ndarray) -> int:
    """0 if the two Paulis commute, 1 if they anticommute."""
    return int((np.dot(ax, bz) + np.dot(az, bx)) % 2)


def syndrome_of(layout: CodeLayout, frame: PauliFrame) -> np.ndarray:
    """Syndrome bit per stabilizer: 1 iff the stabilizer anticommutes with frame."""
    if frame.x.shape[0] != layout.n:
        raise ValueError("frame length does not match layout")
    syn = (layout.sx @ frame.z.astype(np.int64) + layout.sz @ frame.x.astype(np.int64)) % 2
    return syn.astype(np.uint8)


_LOGICAL_KEYS = ("X_L", "Y_L", "Z_L")


def logical_frame(layout: CodeLayout, which: str) -> PauliFrame:
    """Fixed representative of the requested logical operator."""
    if which == "X_L":
        return PauliFrame.from_ops(layout.n, {q: "X" for q in layout.logical_x_support})
    if which == "Y_L":
        return PauliFrame.from_ops(layout.n, {q: "Y" for q in layout.logical_y_support})
    if which == "Z_L":
        return PauliFrame.from_ops(layout.n, {q: "Z" for q in layout.logical_z_support})
    raise ValueError(f"unknown logical {which!r}, expected one of {_LOGICAL_KEYS}")


def logical_commutes(layout: CodeLayout, frame: PauliFrame, which: str) -> int:
    """Parity bit: 0 iff frame commutes with the chosen logical representative."""
    rep = logical_frame(layout, which)
    return symplectic_product(rep.x, rep.z, frame.x, frame.z)
