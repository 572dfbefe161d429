"""Symmetry-adapted matching decoder for XY-code state preparation.

Under biased noise the plaquette syndrome has two one-dimensional
symmetries: a phase flip fires one defect pair inside each of the two
adjacent plaquette columns and one pair inside each adjacent plaquette
row, while bit-flip mechanisms fire diagonal pairs that couple the lines.
Decoding therefore runs two independent matchings over all plaquettes:
the "vertical" graph (intra-column segments plus diagonals) and the
"horizontal" graph (intra-row segments plus diagonals), each with
time-like edges for measurement flips.

First-layer temporal boundary rules: vertices of stabilizers with random
first outcomes never fire but remain in the graph as free portals to the
boundary (zero-weight virtual edges); fixed-stabilizer vertices get a
virtual edge weighted like a measurement error.  For the product-state
protocol a first-epoch phase flip shows only its fixed-type diagonal pair
and is indistinguishable from the bit-flip Pauli with the same footprint,
so layer 0 keeps only those diagonal edges at the combined probability.

Corrections are assembled from clusters: overlaying the two matchings
makes every defect the endpoint of at most one vertical-mate and one
horizontal-mate link, so the defects organize into alternating paths and
cycles.  Within each cluster, consecutive same-type plaquettes are paired
and connected by strings of the opposite-type-blind Pauli (Y-strings
between X-plaquettes, X-strings between Y-plaquettes); the overlap of the
two string sets reconstructs phase flips.  Odd leftovers connect to their
sublattice boundary.  A final repair pass enforces that the correction
reproduces the observed fixed-stabilizer syndrome (uses of the
fixed-vertex virtual edges have no physical mechanism and are healed
here, as are rare cross-matching inconsistencies).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .framesim import DetectorSet, NoiseParams
from .lattice import CodeLayout, PauliFrame, X_TYPE, Y_TYPE
from .matching import BOUNDARY, MatchingGraph, solve_mwpm, weight_from_probability
from .prep import InitPattern, STANDARD

VERTICAL = "vertical"
HORIZONTAL = "horizontal"

TAG_NONE = -1
TAG_PHANTOM_BASE = -2  # -(2 + stabilizer_id): fixed layer-0 virtual edge


def _combine(q1: float, q2: float) -> float:
    return q1 * (1.0 - q2) + q2 * (1.0 - q1)


@dataclass
class DecoderConfig:
    layout: CodeLayout
    pattern: InitPattern
    noise: NoiseParams
    rounds: int  # noisy repetition rounds (0 when pm = 0)
    # weight multipliers for decoder-calibration experiments: mechanisms
    # contributing two edges per graph (line segments) vs a single edge
    # (merged diagonals, boundary stubs)
    line_scale: float = 0.5
    lone_scale: float = 1.0
    time_scale: float = 1.0
    # the fixed-vertex first-layer virtual edge of the reference description
    # corresponds to no mechanism under this detector convention (a first
    # round measurement flip is already the (s,1)-(s,2) time edge) and
    # measurably degrades thresholds; disabled by default, enable with 1.0
    phantom_scale: float = 0.0
    tie_bonus: int = 0
    tie_span_steps: float = 0.0

    @property
    def tie_span(self) -> float:
        if self.noise.p_z <= 0:
            return 0.0
        from .matching import weight_from_probability
        return self.tie_span_steps * weight_from_probability(self.noise.p_z)

    def __post_init__(self):
        if self.noise.pm == 0 and self.rounds != 0:
            raise ValueError(
                "with pm = 0 the repetition rounds carry no detector "
                "information; use rounds=0"
            )


@dataclass
class SublatticeGraph:
    which: str  # VERTICAL or HORIZONTAL
    layers: int
    nv: int  # num_stabilizers * layers
    edges: list[tuple[int, int, float, int]]  # (u, v, weight, tag)
    boundary: list[tuple[int, float, int]]
    detecting: np.ndarray
    # solver tables (filled by _prepare_tables)
    dist: np.ndarray = field(default=None, repr=False)
    bdist: np.ndarray = field(default=None, repr=False)
    exit_slot: list = field(default=None, repr=False)  # per vertex: plaquette slot of its cheapest exit

    def vertex(self, sid: int, t: int) -> int:
        return sid * self.layers + t


@njit(cache=True)
def _floyd_warshall(dist):
    nv = dist.shape[0]
    for k in range(nv):
        dk = dist[k]
        for i in range(nv):
            dik = dist[i, k]
            if dik == np.inf:
                continue
            row = dist[i]
            for j in range(nv):
                nd = dik + dk[j]
                if nd < row[j]:
                    row[j] = nd


def _qubit_faces(i: int, j: int) -> dict[str, list[tuple[int, int]]]:
    """X-type / Y-type plaquette positions around qubit (i, j)."""
    out = {X_TYPE: [], Y_TYPE: []}
    for r in (i - 1, i):
        for c in (j - 1, j):
            kind = X_TYPE if (r + c) % 2 == 0 else Y_TYPE
            out[kind].append((r, c))
    return out


def _build_sublattice(
    layout: CodeLayout,
    pattern: InitPattern,
    noise: NoiseParams,
    rounds: int,
    which: str,
    line_scale: float = 0.5,
    lone_scale: float = 1.0,
    time_scale: float = 1.0,
    phantom_scale: float = 0.0,
) -> SublatticeGraph:
    d = layout.d
    layers = rounds + 2
    ns = layout.num_stabilizers
    faces = {s.position: s.plaquette_id for s in layout.stabilizers}
    fixed = pattern.fixed_stabilizers

    g = SublatticeGraph(
        which=which,
        layers=layers,
        nv=ns * layers,
        edges=[],
        boundary=[],
        detecting=np.ones(ns * layers, dtype=np.uint8),
    )
    for sid in range(ns):
        if sid not in fixed:
            g.detecting[g.vertex(sid, 0)] = 0

    p_z, p_x, p_y = noise.p_z, noise.p_x, noise.p_y
    standard = pattern.protocol == STANDARD
    fixed_kind = layout.stabilizers[next(iter(fixed))].kind if fixed else None

    def add_edge(pos_a, pos_b, t, q_prob, tag=TAG_NONE, scale=1.0):
        if q_prob <= 0:
            return
        a = faces.get(pos_a)
        b = faces.get(pos_b)
        w = weight_from_probability(q_prob) * scale
        if a is not None and b is not None:
            g.edges.append((g.vertex(a, t), g.vertex(b, t), w, tag))
        elif a is not None:
            g.boundary.append((g.vertex(a, t), w, tag, pos_b))
        elif b is not None:
            g.boundary.append((g.vertex(b, t), w, tag, pos_a))

    # first-layer degenerate qubits: no fixed face of one type and two of
    # the other; their phase flip is indistinguishable from the bit flip
    # with the same footprint and is represented solely by the merged
    # diagonal edge (line segments witnessed only by such qubits would
    # underprice half of the mechanism)
    degenerate = np.zeros(layout.n, dtype=np.uint8)
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            qf = _qubit_faces(i, j)
            nfx = sum(1 for pos in qf[X_TYPE] if faces.get(pos) in fixed)
            nfy = sum(1 for pos in qf[Y_TYPE] if faces.get(pos) in fixed)
            if (nfx == 2 and nfy == 0) or (nfy == 2 and nfx == 0):
                degenerate[layout.qubit_index(i, j)] = 1

    def seg_witnesses(i1, j1, i2, j2):
        out = []
        for (i, j) in ((i1, j1), (i2, j2)):
            if 1 <= i <= d and 1 <= j <= d:
                out.append(layout.qubit_index(i, j))
        return out

    for t in range(0, rounds + 1):
        std_layer0 = standard and t == 0
        if not std_layer0:
            # line segments at the plain phase-flip rate (one taxicab step)
            if which == VERTICAL:
                for c in range(0, d + 1):
                    for i in range(1, d + 1):
                        ws = seg_witnesses(i, c, i, c + 1)
                        if t == 0 and ws and all(degenerate[q] for q in ws):
                            continue
                        add_edge((i - 1, c), (i, c), t, p_z, scale=line_scale)
            else:
                for r in range(0, d + 1):
                    for j in range(1, d + 1):
                        ws = seg_witnesses(r, j, r + 1, j)
                        if t == 0 and ws and all(degenerate[q] for q in ws):
                            continue
                        add_edge((r, j - 1), (r, j), t, p_z, scale=line_scale)
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                qf = _qubit_faces(i, j)
                if std_layer0:
                    # only the fixed-type diagonal pair is visible in the
                    # first layer; the phase flip is indistinguishable from
                    # the same-footprint bit flip and merges into one edge
                    pos = qf[fixed_kind]
                    q_prob = _combine(p_z, p_y if fixed_kind == X_TYPE else p_x)
                    add_edge(pos[0], pos[1], t, q_prob, scale=lone_scale)
                    continue
                # X flips the Y-type faces of the qubit, Y the X-type ones
                add_edge(qf[Y_TYPE][0], qf[Y_TYPE][1], t, p_x)
                add_edge(qf[X_TYPE][0], qf[X_TYPE][1], t, p_y)
                if t == 0:
                    # a qubit whose first-round-visible footprint degenerates
                    # to one diagonal pair (all its faces of the other type
                    # are unfixed or absent) makes its phase flips look like
                    # bit flips; merge them into the diagonal edge exactly as
                    # for the product-state protocol
                    for kind, p_other in ((X_TYPE, p_y), (Y_TYPE, p_x)):
                        other = Y_TYPE if kind == X_TYPE else X_TYPE
                        vis_kind = [
                            pos for pos in qf[kind]
                            if faces.get(pos) in fixed
                        ]
                        vis_other = [
                            pos for pos in qf[other]
                            if faces.get(pos) in fixed
                        ]
                        if len(vis_kind) == 2 and not vis_other:
                            add_edge(vis_kind[0], vis_kind[1], t, _combine(p_z, p_other), scale=lone_scale)

    if noise.pm > 0:
        w_pm = weight_from_probability(noise.pm) * time_scale
        for sid in range(ns):
            for t in range(layers - 1):
                g.edges.append((g.vertex(sid, t), g.vertex(sid, t + 1), w_pm, TAG_NONE))
        if phantom_scale > 0:
            for sid in fixed:
                # no spatial slot: uses of this virtual edge are healed by repair
                g.boundary.append((g.vertex(sid, 0), w_pm * phantom_scale, TAG_PHANTOM_BASE - sid, None))
    for sid in range(ns):
        if sid not in fixed:
            pos = layout.stabilizers[sid].position
            g.boundary.append((g.vertex(sid, 0), 0.0, TAG_NONE, pos))

    _prepare_tables(g)
    return g


def _prepare_tables(g: SublatticeGraph) -> None:
    nv = g.nv
    dist = np.full((nv, nv), np.inf, dtype=np.float64)
    np.fill_diagonal(dist, 0.0)
    for (u, v, w, _tag) in g.edges:
        if w < dist[u, v]:
            dist[u, v] = w
            dist[v, u] = w
    _floyd_warshall(dist)
    local_b = np.full(nv, np.inf)
    local_slot: list[tuple[int, int] | None] = [None] * nv
    for (v, w, _tag, slot) in g.boundary:
        if w < local_b[v]:
            local_b[v] = w
            local_slot[v] = slot
    g.dist = dist
    cand = dist + local_b[None, :]
    attach = np.argmin(cand, axis=1)
    g.bdist = cand[np.arange(nv), attach]
    g.exit_slot = [local_slot[a] for a in attach]


class TypedStrings:
    """Pauli strings through one plaquette type.

    A Y string moves through X-plaquettes flipping no Y-plaquette (and vice
    versa with X strings through Y-plaquettes).  Nodes are all plaquette
    positions of this type, including *virtual* ones: absent boundary slots
    and (for strings that may stop freely) the positions themselves when
    the plaquette is unfixed.  Every data qubit sits between exactly two
    same-type positions and forms one edge, so a string between any two
    nodes is the qubit path between them; flips land only on the real fixed
    plaquettes at its ends.
    """

    def __init__(self, layout: CodeLayout, pattern: InitPattern, kind: str):
        self.kind = kind
        self.layout = layout
        d = layout.d
        faces = {s.position: s.plaquette_id for s in layout.stabilizers}
        # enumerate all same-type positions touching the qubit grid
        positions: list[tuple[int, int]] = []
        for r in range(-1, d + 1):
            for c in range(-1, d + 1):
                if (X_TYPE if (r + c) % 2 == 0 else Y_TYPE) != kind:
                    continue
                touches = any(
                    1 <= i <= d and 1 <= j <= d
                    for i in (r, r + 1)
                    for j in (c, c + 1)
                )
                if touches:
                    positions.append((r, c))
        self.positions = positions
        self.node_of_pos = {pos: i for i, pos in enumerate(positions)}
        m = len(positions)
        self.node_of_sid = {}
        self.is_free = np.zeros(m, dtype=np.uint8)  # virtual or unfixed: strings may stop here
        for i, pos in enumerate(positions):
            sid = faces.get(pos)
            if sid is None:
                self.is_free[i] = 1
            else:
                self.node_of_sid[sid] = i
                if sid not in pattern.fixed_stabilizers:
                    self.is_free[i] = 1
        # one edge per data qubit between its two same-type positions
        adj: list[list[tuple[int, int]]] = [[] for _ in range(m)]
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                q = layout.qubit_index(i, j)
                pos_pair = _qubit_faces(i, j)[kind]
                a = self.node_of_pos[pos_pair[0]]
                b = self.node_of_pos[pos_pair[1]]
                adj[a].append((b, q))
                adj[b].append((a, q))
        self.adj = adj
        # BFS all-pairs hop distances with deterministic next-hop tables
        dist = np.full((m, m), 1 << 20, dtype=np.int32)
        nxt = np.full((m, m), -1, dtype=np.int32)
        nxt_q = np.full((m, m), -1, dtype=np.int32)
        for s in range(m):
            dist[s, s] = 0
            dq = [s]
            head = 0
            while head < len(dq):
                u = dq[head]
                head += 1
                for (v, q) in adj[u]:
                    if dist[s, v] > dist[s, u] + 1:
                        dist[s, v] = dist[s, u] + 1
                        if u == s:
                            nxt[s, v] = v
                            nxt_q[s, v] = q
                        else:
                            nxt[s, v] = nxt[s, u]
                            nxt_q[s, v] = nxt_q[s, u]
                        dq.append(v)
        self.hop_dist = dist
        self.nxt = nxt
        self.nxt_q = nxt_q
        # nearest free node per node (for repairs and unpaired leftovers)
        free_idx = np.nonzero(self.is_free)[0]
        if free_idx.size:
            sub = dist[:, free_idx]
            pick = np.argmin(sub, axis=1)
            self.nearest_free = free_idx[pick].astype(np.int32)
        else:
            self.nearest_free = np.full(m, -1, dtype=np.int32)

    def string_qubits(self, node_a: int, node_b: int) -> list[int]:
        """Qubits of a minimal string between two nodes."""
        a, b = node_a, node_b
        out = []
        while a != b:
            out.append(int(self.nxt_q[a, b]))
            a = int(self.nxt[a, b])
        return out

    def boundary_qubits(self, sid: int) -> list[int]:
        """Minimal string from a real plaquette to the nearest free node."""
        a = self.node_of_sid[sid]
        return self.string_qubits(a, int(self.nearest_free[a]))


@dataclass
class DecoderGraphs:
    """Static per-configuration decoder state shared by all shots."""

    cfg: DecoderConfig
    vertical: SublatticeGraph
    horizontal: SublatticeGraph
    strings_x: TypedStrings  # through X-plaquettes (Y strings)
    strings_y: TypedStrings  # through Y-plaquettes (X strings)
    stab_kind_x: np.ndarray  # uint8 per stabilizer: 1 if X-type
    _matching_graphs: dict = field(default_factory=dict, repr=False)
    _engine_pack: object = field(default=None, repr=False)

    def graph(self, which: str) -> SublatticeGraph:
        return self.vertical if which == VERTICAL else self.horizontal


def build_graphs(cfg: DecoderConfig) -> DecoderGraphs:
    gv = _build_sublattice(cfg.layout, cfg.pattern, cfg.noise, cfg.rounds, VERTICAL,
                           cfg.line_scale, cfg.lone_scale, cfg.time_scale, cfg.phantom_scale)
    gh = _build_sublattice(cfg.layout, cfg.pattern, cfg.noise, cfg.rounds, HORIZONTAL,
                           cfg.line_scale, cfg.lone_scale, cfg.time_scale, cfg.phantom_scale)
    kind_x = np.array(
        [1 if s.kind == X_TYPE else 0 for s in cfg.layout.stabilizers], dtype=np.uint8
    )
    return DecoderGraphs(
        cfg=cfg,
        vertical=gv,
        horizontal=gh,
        strings_x=TypedStrings(cfg.layout, cfg.pattern, X_TYPE),
        strings_y=TypedStrings(cfg.layout, cfg.pattern, Y_TYPE),
        stab_kind_x=kind_x,
    )


def detector_defects(g: SublatticeGraph, detectors: DetectorSet) -> list[int]:
    out = []
    for (sid, rnd) in detectors.events:
        t = rnd - 1
        if t >= g.layers:
            raise ValueError("detector round outside the configured window")
        out.append(g.vertex(sid, t))
    return sorted(out)


def _matching_graph(g: SublatticeGraph) -> MatchingGraph:
    mg = MatchingGraph(g.nv)
    for (u, v, w, tag) in g.edges:
        mg.add_edge(u, v, w, tag)
    for (v, w, tag, _slot) in g.boundary:
        mg.add_boundary_edge(v, w, tag)
    return mg


def fixed_syndrome_target(
    layout: CodeLayout, pattern: InitPattern, detectors: DetectorSet
) -> np.ndarray:
    """Final syndrome implied by the detectors, fixed stabilizers only."""
    target = np.zeros(layout.num_stabilizers, dtype=np.uint8)
    for (sid, _rnd) in detectors.events:
        if sid in pattern.fixed_stabilizers:
            target[sid] ^= 1
    return target


def clusters_from_matchings(
    defects: list[int],
    mate_v: dict[int, int],
    mate_h: dict[int, int],
    exit_v: dict[int, object],
    exit_h: dict[int, object],
) -> list[tuple[list[int], object, object]]:
    """Fuse the two matchings into alternating paths and cycles.

    mate_* maps defect vertex -> partner vertex or BOUNDARY; exit_* gives
    the typed exit (kind, node) of a boundary match, or None.  Returns
    ordered clusters with their head and tail exits (None for cycles),
    deterministically anchored at the smallest defect id.
    """
    seen: set[int] = set()
    out: list[tuple[list[int], object, object]] = []
    for start in defects:
        if start in seen:
            continue
        cluster = [start]
        seen.add(start)
        head_exit = None
        tail_exit = None
        for direction in (0, 1):
            cur = start
            use_v = direction == 0
            while True:
                mate = mate_v if use_v else mate_h
                exits = exit_v if use_v else exit_h
                nxt = mate[cur]
                if nxt == BOUNDARY:
                    if direction == 0:
                        tail_exit = exits.get(cur)
                    else:
                        head_exit = exits.get(cur)
                    break
                if nxt in seen:
                    break
                if direction == 0:
                    cluster.append(nxt)
                else:
                    cluster.insert(0, nxt)
                seen.add(nxt)
                cur = nxt
                use_v = not use_v
        out.append((cluster, head_exit, tail_exit))
    return out


def _second_stage(graphs: DecoderGraphs, defective, mask_y, mask_x) -> None:
    """Pair defective clusters (or send them to the boundary).

    A mixed unpaired pair is the signature of a phase-flip string ending
    inside the lattice; two such pairs are connected by a Y string between
    the X-plaquettes plus an X string between the Y-plaquettes (their
    overlap reconstructs the phase flips), a lone one exits through the
    nearest free nodes.
    """
    sx = graphs.strings_x
    sy = graphs.strings_y
    m = len(defective)
    if m == 0:
        return
    bcost = [
        int(sx.hop_dist[ax, sx.nearest_free[ax]]) + int(sy.hop_dist[ay, sy.nearest_free[ay]])
        for (ax, ay) in defective
    ]
    mate = [-1] * m
    if m > 1:
        from ._blossom import max_weight_matching_arrays

        ep0 = []
        ep1 = []
        gq = []
        for i in range(m):
            for j in range(i + 1, m):
                dij = int(sx.hop_dist[defective[i][0], defective[j][0]]) + int(
                    sy.hop_dist[defective[i][1], defective[j][1]]
                )
                g = bcost[i] + bcost[j] - dij
                if g >= 0:
                    ep0.append(i)
                    ep1.append(j)
                    gq.append(2 * g + 1)
        if ep0:
            res = max_weight_matching_arrays(
                m, np.array(ep0, dtype=np.int32), np.array(ep1, dtype=np.int32),
                np.array(gq, dtype=np.int64), maxcardinality=False,
            )
            mate = [int(x) for x in res]
    for i, (ax, ay) in enumerate(defective):
        j = mate[i]
        if j >= 0:
            if j < i:
                continue
            bx, by = defective[j]
            for q in sx.string_qubits(ax, bx):
                mask_y[q] ^= 1
            for q in sy.string_qubits(ay, by):
                mask_x[q] ^= 1
        else:
            for q in sx.string_qubits(ax, int(sx.nearest_free[ax])):
                mask_y[q] ^= 1
            for q in sy.string_qubits(ay, int(sy.nearest_free[ay])):
                mask_x[q] ^= 1


def assemble_correction(
    graphs: DecoderGraphs,
    defects: list[int],
    mate_v: dict[int, int],
    mate_h: dict[int, int],
    exit_v: dict[int, object],
    exit_h: dict[int, object],
    detectors: DetectorSet,
) -> PauliFrame:
    """Typed-string correction from the fused matchings."""
    layout = graphs.cfg.layout
    layers = graphs.vertical.layers
    n = layout.n
    mask_y = np.zeros(n, dtype=np.uint8)  # Y Paulis (strings in X-plaquette space)
    mask_x = np.zeros(n, dtype=np.uint8)  # X Paulis (strings in Y-plaquette space)
    defective: list[tuple[int, int]] = []

    for cluster, head_exit, tail_exit in clusters_from_matchings(
        defects, mate_v, mate_h, exit_v, exit_h
    ):
        xs: list[tuple[int, bool]] = []  # (typed node, is_virtual)
        ys: list[tuple[int, bool]] = []
        if head_exit is not None:
            kind, node = head_exit
            (xs if kind == X_TYPE else ys).append((node, True))
        for v in cluster:
            sid = v // layers
            if graphs.stab_kind_x[sid]:
                xs.append((graphs.strings_x.node_of_sid[sid], False))
            else:
                ys.append((graphs.strings_y.node_of_sid[sid], False))
        if tail_exit is not None:
            kind, node = tail_exit
            (xs if kind == X_TYPE else ys).append((node, True))
        leftovers: list[int | None] = []
        for group, strings, mask in (
            (xs, graphs.strings_x, mask_y),
            (ys, graphs.strings_y, mask_x),
        ):
            for k in range(0, len(group) - 1, 2):
                for q in strings.string_qubits(group[k][0], group[k + 1][0]):
                    mask[q] ^= 1
            if len(group) % 2 and not group[-1][1]:
                leftovers.append(group[-1][0])
            else:
                leftovers.append(None)
        if leftovers[0] is not None and leftovers[1] is not None:
            # defective cluster: one unpaired plaquette of each type; its
            # resolution couples clusters and is deferred to a second
            # matching stage (phase-flip strings connect mixed pairs)
            defective.append((leftovers[0], leftovers[1]))
        else:
            for node, strings, mask in (
                (leftovers[0], graphs.strings_x, mask_y),
                (leftovers[1], graphs.strings_y, mask_x),
            ):
                if node is not None:
                    for q in strings.string_qubits(node, int(strings.nearest_free[node])):
                        mask[q] ^= 1

    _second_stage(graphs, defective, mask_y, mask_x)
    frame = PauliFrame(x=(mask_y ^ mask_x).astype(np.uint8), z=mask_y.copy())

    # repair: the correction must reproduce the observed syndrome on every
    # fixed stabilizer (phantom virtual-edge uses have no physical
    # mechanism; string choices can disagree across the two matchings)
    from .lattice import syndrome_of

    target = fixed_syndrome_target(layout, graphs.cfg.pattern, detectors)
    syn = syndrome_of(layout, frame)
    for sid in sorted(graphs.cfg.pattern.fixed_stabilizers):
        if syn[sid] != target[sid]:
            if graphs.stab_kind_x[sid]:
                for q in graphs.strings_x.boundary_qubits(sid):
                    frame.x[q] ^= 1
                    frame.z[q] ^= 1
            else:
                for q in graphs.strings_y.boundary_qubits(sid):
                    frame.x[q] ^= 1
    return frame


def _exit_of(graphs: DecoderGraphs, g: SublatticeGraph, vertex: int):
    slot = g.exit_slot[vertex]
    if slot is None:
        return None
    kind = X_TYPE if (slot[0] + slot[1]) % 2 == 0 else Y_TYPE
    strings = graphs.strings_x if kind == X_TYPE else graphs.strings_y
    return (kind, strings.node_of_pos[slot])


def decode(graphs: DecoderGraphs, detectors: DetectorSet) -> PauliFrame:
    """Reference decode: exact matching per symmetry graph, then fusion."""
    defects: list[int] = []
    mates: dict[str, dict[int, int]] = {}
    exits: dict[str, dict[int, object]] = {}
    for which in (VERTICAL, HORIZONTAL):
        g = graphs.graph(which)
        if which not in graphs._matching_graphs:
            graphs._matching_graphs[which] = _matching_graph(g)
        mg = graphs._matching_graphs[which]
        defects = detector_defects(g, detectors)
        sol = solve_mwpm(mg, defects)
        mate: dict[int, int] = {}
        exi: dict[int, object] = {}
        for (u, v) in sol.pairs:
            if v == BOUNDARY:
                mate[u] = BOUNDARY
                exi[u] = _exit_of(graphs, g, u)
            else:
                mate[u] = v
                mate[v] = u
        mates[which] = mate
        exits[which] = exi
    return assemble_correction(
        graphs, defects, mates[VERTICAL], mates[HORIZONTAL],
        exits[VERTICAL], exits[HORIZONTAL], detectors
    )
