"""Minimum-weight perfect matching over weighted graphs with virtual boundaries.

A matching instance is a weighted graph on real vertices, where some
vertices additionally own a boundary edge to their private virtual vertex.
Defects (a subset of the real vertices) must be matched up pairwise or
against the boundary; pairs of defects without a direct edge are joined
through shortest paths, composing the edge tags along the way.

``solve_mwpm`` is exact (blossom kernel on integer-scaled weights);
``brute_force_mwpm`` enumerates every pairing and is the test oracle, with
its own Floyd-Warshall distance closure so the two routes stay independent.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np

from ._blossom import max_weight_matching_arrays, quantize_weights

BOUNDARY = -1  # partner id used for boundary matches

_INF = float("inf")


@dataclass
class MatchingGraph:
    """Weighted graph with optional per-vertex boundary edges."""

    num_vertices: int
    edges: list[tuple[int, int, float, object]] = field(default_factory=list)
    boundary_edges: list[tuple[int, float, object]] = field(default_factory=list)

    def add_edge(self, u: int, v: int, weight: float, tag: object = None) -> None:
        if weight < 0 or not np.isfinite(weight):
            raise ValueError("edge weights must be finite and non-negative")
        if u == v:
            raise ValueError("self loops are not allowed")
        self.edges.append((u, v, float(weight), tag))

    def add_boundary_edge(self, v: int, weight: float, tag: object = None) -> None:
        if weight < 0 or not np.isfinite(weight):
            raise ValueError("edge weights must be finite and non-negative")
        self.boundary_edges.append((v, float(weight), tag))


@dataclass
class Matching:
    """pairs: (u, v) with u < v, or (u, BOUNDARY); tags composed along paths."""

    pairs: list[tuple[int, int]]
    total_weight: float
    pair_tags: list[tuple[object, ...]]


def weight_from_probability(q: float) -> float:
    """Log-likelihood edge weight -ln(q/(1-q)), clamped for tiny q."""
    q = max(float(q), 1e-300)
    if q > 0.5:
        raise ValueError("mechanism probabilities above 1/2 are not supported")
    return float(-np.log(q / (1.0 - q)))


def _adjacency(graph: MatchingGraph) -> list[list[tuple[int, float, object]]]:
    adj: list[list[tuple[int, float, object]]] = [[] for _ in range(graph.num_vertices)]
    for (u, v, w, tag) in graph.edges:
        adj[u].append((v, w, tag))
        adj[v].append((u, w, tag))
    return adj


def _dijkstra(adj, source: int, nv: int) -> tuple[np.ndarray, list[int]]:
    dist = np.full(nv, _INF)
    prev = [-1] * nv
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for (v, w, _tag) in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    return dist, prev


def _best_boundary(graph: MatchingGraph, dist: np.ndarray) -> tuple[float, int, object]:
    """(total weight, attach vertex, boundary tag) of the cheapest boundary exit."""
    best = (_INF, -1, None)
    for (v, w, tag) in graph.boundary_edges:
        total = dist[v] + w
        if total < best[0] or (total == best[0] and v < best[1]):
            best = (total, v, tag)
    return best


def _path_tags(adj, prev: list[int], source: int, target: int) -> tuple[object, ...]:
    """Tags along the tree path source -> target (skipping None tags)."""
    tags = []
    v = target
    while v != source:
        u = prev[v]
        # find the matching edge (u, v); the lightest parallel edge was used
        best = None
        for (x, w, tag) in adj[u]:
            if x == v and (best is None or w < best[0]):
                best = (w, tag)
        if best is not None and best[1] is not None:
            tags.append(best[1])
        v = u
    return tuple(reversed(tags))


def solve_mwpm(graph: MatchingGraph, defects: list[int]) -> Matching:
    """Exact minimum-weight matching of the defects (boundary allowed).

    Shortest-path completion gives the effective weight between defect
    pairs; boundary matches use the cheapest path to any boundary edge.
    Deterministic: ties resolve through the fixed vertex ordering.
    """
    defects = sorted(set(int(v) for v in defects))
    for v in defects:
        if not 0 <= v < graph.num_vertices:
            raise ValueError(f"defect {v} outside vertex range")
    if not defects:
        return Matching(pairs=[], total_weight=0.0, pair_tags=[])
    adj = _adjacency(graph)
    nv = graph.num_vertices
    k = len(defects)
    dists = {}
    prevs = {}
    for u in defects:
        dists[u], prevs[u] = _dijkstra(adj, u, nv)
    bnd = {u: _best_boundary(graph, dists[u]) for u in defects}

    if not all(np.isfinite(bnd[u][0]) for u in defects):
        # some defect cannot reach the boundary: matching among defects is
        # forced; fall back to a perfect-matching formulation with a private
        # boundary partner per defect where available
        return _solve_with_clones(graph, defects, dists, prevs, bnd, adj)

    # fold the boundary option into a defect-only matching: matching pair
    # (i, j) saves b_i + b_j - d_ij relative to sending both to the boundary
    ep0: list[int] = []
    ep1: list[int] = []
    gain: list[float] = []
    for i in range(k):
        for j in range(i + 1, k):
            dij = float(dists[defects[i]][defects[j]])
            if not np.isfinite(dij):
                continue
            g = bnd[defects[i]][0] + bnd[defects[j]][0] - dij
            if g > 0:
                ep0.append(i)
                ep1.append(j)
                gain.append(g)
    wq = quantize_weights(np.array(gain)) if gain else np.zeros(0, dtype=np.int64)
    mate = max_weight_matching_arrays(
        k, np.array(ep0, dtype=np.int32), np.array(ep1, dtype=np.int32), wq,
        maxcardinality=False,
    )

    pairs: list[tuple[int, int]] = []
    tags: list[tuple[object, ...]] = []
    total = 0.0
    for i in range(k):
        u = defects[i]
        if mate.size and mate[i] >= 0:
            j = int(mate[i])
            if j < i:
                continue
            v = defects[j]
            pairs.append((u, v))
            tags.append(_path_tags(adj, prevs[u], u, v))
            total += float(dists[u][v])
        else:
            bw, battach, btag = bnd[u]
            pairs.append((u, BOUNDARY))
            t = _path_tags(adj, prevs[u], u, battach)
            if btag is not None:
                t = t + (btag,)
            tags.append(t)
            total += bw
    return Matching(pairs=pairs, total_weight=total, pair_tags=tags)


def _solve_with_clones(graph, defects, dists, prevs, bnd, adj) -> Matching:
    """Perfect-matching formulation with one boundary clone per defect."""
    k = len(defects)
    n = 2 * k
    ep0: list[int] = []
    ep1: list[int] = []
    wts: list[float] = []
    wmax = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            dij = float(dists[defects[i]][defects[j]])
            if np.isfinite(dij):
                ep0.append(i)
                ep1.append(j)
                wts.append(dij)
                wmax = max(wmax, dij)
        if np.isfinite(bnd[defects[i]][0]):
            ep0.append(i)
            ep1.append(k + i)
            wts.append(float(bnd[defects[i]][0]))
            wmax = max(wmax, float(bnd[defects[i]][0]))
    for i in range(k):
        for j in range(i + 1, k):
            ep0.append(k + i)
            ep1.append(k + j)
            wts.append(0.0)
    wq = -quantize_weights(np.array(wts))
    mate = max_weight_matching_arrays(
        n, np.array(ep0, dtype=np.int32), np.array(ep1, dtype=np.int32), wq,
        maxcardinality=True, greedy_init=True,
    )
    if np.any(mate[:k] < 0):
        raise ValueError("no perfect matching: some defect is unmatchable")
    pairs: list[tuple[int, int]] = []
    tags: list[tuple[object, ...]] = []
    total = 0.0
    for i in range(k):
        m = int(mate[i])
        u = defects[i]
        if m >= k:
            if m != k + i:
                raise ValueError("no perfect matching: boundary parity is blocked")
            bw, battach, btag = bnd[u]
            pairs.append((u, BOUNDARY))
            t = _path_tags(adj, prevs[u], u, battach)
            if btag is not None:
                t = t + (btag,)
            tags.append(t)
            total += bw
        elif m > i:
            v = defects[m]
            pairs.append((u, v))
            tags.append(_path_tags(adj, prevs[u], u, v))
            total += float(dists[u][v])
    return Matching(pairs=pairs, total_weight=total, pair_tags=tags)


def brute_force_mwpm(graph: MatchingGraph, defects: list[int]) -> Matching:
    """Exhaustive minimum over all pairings (boundary completions included).

    Independent oracle: distances come from a Floyd-Warshall closure rather
    than the production Dijkstra.  Limited to 10 defects.
    """
    defects = sorted(set(int(v) for v in defects))
    if len(defects) > 10:
        raise ValueError("brute force limited to 10 defects")
    if not defects:
        return Matching(pairs=[], total_weight=0.0, pair_tags=[])
    nv = graph.num_vertices
    dist = np.full((nv, nv), _INF)
    np.fill_diagonal(dist, 0.0)
    for (u, v, w, _tag) in graph.edges:
        if w < dist[u, v]:
            dist[u, v] = w
            dist[v, u] = w
    for mid in range(nv):
        dist = np.minimum(dist, dist[:, mid : mid + 1] + dist[mid : mid + 1, :])
    bdist = np.full(nv, _INF)
    for (v, w, _tag) in graph.boundary_edges:
        bdist = np.minimum(bdist, dist[:, v] + w)

    best_cost = _INF
    best_pairs: list[tuple[int, int]] | None = None

    def rec(remaining: tuple[int, ...], cost: float, pairs: list[tuple[int, int]]):
        nonlocal best_cost, best_pairs
        if cost >= best_cost:
            return
        if not remaining:
            best_cost = cost
            best_pairs = list(pairs)
            return
        u = remaining[0]
        rest = remaining[1:]
        # boundary option
        if np.isfinite(bdist[u]):
            pairs.append((u, BOUNDARY))
            rec(rest, cost + float(bdist[u]), pairs)
            pairs.pop()
        for idx, v in enumerate(rest):
            if np.isfinite(dist[u, v]):
                pairs.append((u, v))
                rec(rest[:idx] + rest[idx + 1 :], cost + float(dist[u, v]), pairs)
                pairs.pop()

    rec(tuple(defects), 0.0, [])
    if best_pairs is None:
        raise ValueError("no perfect matching exists for the defect set")
    return Matching(pairs=best_pairs, total_weight=float(best_cost), pair_tags=[() for _ in best_pairs])
