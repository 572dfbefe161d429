"""Monte Carlo engine: per-shot orchestration over the fused numba kernels.

Draws the identical per-shot uniform stream as framesim.run_shot (same
Philox key, same draw order), so the simulated records agree bit for bit
with the reference path; decoding runs on the precomputed decoder tables.
"""

from __future__ import annotations

import numpy as np

from . import _engine
from .decoder import DecoderGraphs, VERTICAL, HORIZONTAL
from .lattice import X_TYPE, CodeLayout
from .prep import PLUS_L


class FastEngine:
    """Reusable per-configuration simulation + decode state."""

    def __init__(self, graphs: DecoderGraphs):
        cfg = graphs.cfg
        layout = cfg.layout
        self.graphs = graphs
        self.layout = layout
        self.noise = cfg.noise
        self.rounds = cfg.rounds
        self.layers = graphs.vertical.layers
        n = layout.n
        ns = layout.num_stabilizers

        # qubit -> stabilizer CSR with kind bits
        per_q: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for s in layout.stabilizers:
            for q in s.support:
                per_q[q].append((s.plaquette_id, 1 if s.kind == X_TYPE else 0))
        off = np.zeros(n + 1, dtype=np.int64)
        for q in range(n):
            off[q + 1] = off[q] + len(per_q[q])
        self.q2s_off = off
        self.q2s_list = np.array(
            [sid for q in range(n) for (sid, _) in per_q[q]], dtype=np.int32
        )
        self.q2s_kindx = np.array(
            [kx for q in range(n) for (_, kx) in per_q[q]], dtype=np.uint8
        )
        self.fixed_mask = np.zeros(ns, dtype=np.uint8)
        for sid in cfg.pattern.fixed_stabilizers:
            self.fixed_mask[sid] = 1
        self.stab_kind_x = graphs.stab_kind_x

        sx = graphs.strings_x
        sy = graphs.strings_y
        self.node_of_sid_x = np.full(ns, -1, dtype=np.int32)
        for sid, node in sx.node_of_sid.items():
            self.node_of_sid_x[sid] = node
        self.node_of_sid_y = np.full(ns, -1, dtype=np.int32)
        for sid, node in sy.node_of_sid.items():
            self.node_of_sid_y[sid] = node
        self.nxtx, self.nxtqx, self.nfreex = sx.nxt, sx.nxt_q, sx.nearest_free
        self.nxty, self.nxtqy, self.nfreey = sy.nxt, sy.nxt_q, sy.nearest_free
        self.hopx, self.hopy = sx.hop_dist, sy.hop_dist

        def exit_arrays(g):
            kx = np.full(g.nv, -1, dtype=np.int8)
            node = np.full(g.nv, -1, dtype=np.int32)
            from .lattice import X_TYPE as XT
            for v in range(g.nv):
                slot = g.exit_slot[v]
                if slot is None:
                    continue
                if (slot[0] + slot[1]) % 2 == 0:
                    kx[v] = 1
                    node[v] = sx.node_of_pos[slot]
                else:
                    kx[v] = 0
                    node[v] = sy.node_of_pos[slot]
            return kx, node

        self.exit_kx_v, self.exit_node_v = exit_arrays(graphs.vertical)
        self.exit_kx_h, self.exit_node_h = exit_arrays(graphs.horizontal)

        if cfg.pattern.target == PLUS_L:
            self.logical_support = np.array(layout.logical_x_support, dtype=np.int64)
            self.logical_is_x = 1
        else:
            self.logical_support = np.array(layout.logical_y_support, dtype=np.int64)
            self.logical_is_x = 0

        self.dist_v = graphs.vertical.dist
        self.bdist_v = graphs.vertical.bdist
        self.dist_h = graphs.horizontal.dist
        self.bdist_h = graphs.horizontal.bdist

        nv = graphs.vertical.nv
        self._frame_x = np.zeros(n, dtype=np.uint8)
        self._frame_z = np.zeros(n, dtype=np.uint8)
        self._syn = np.zeros(ns, dtype=np.uint8)
        self._gauge = np.zeros(ns, dtype=np.uint8)
        self._prev = np.zeros(ns, dtype=np.uint8)
        self._out = np.zeros(ns, dtype=np.uint8)
        self._target = np.zeros(ns, dtype=np.uint8)
        self._defects = np.zeros(nv, dtype=np.int64)
        self._mate_v = np.zeros(nv, dtype=np.int32)
        self._mate_h = np.zeros(nv, dtype=np.int32)
        self._cl_xs = np.zeros(2 * nv + 4, dtype=np.int32)
        self._cl_ys = np.zeros(nv + 4, dtype=np.int32)
        self._cl_xv = np.zeros(2 * nv + 4, dtype=np.uint8)
        self._cl_yv = np.zeros(nv + 4, dtype=np.uint8)
        self._visited = np.zeros(nv, dtype=np.uint8)
        self._syn_c = np.zeros(ns, dtype=np.uint8)
        self._def_x = np.zeros(nv, dtype=np.int32)
        self._def_y = np.zeros(nv, dtype=np.int32)
        self._def_mate = np.zeros(nv, dtype=np.int32)
        self._corr_x = np.zeros(n, dtype=np.uint8)
        self._corr_z = np.zeros(n, dtype=np.uint8)
        self._empty_meas = np.zeros((self.rounds + 1, ns), dtype=np.float64)

    def shot_uniforms(self, seed: int):
        """Per-shot uniforms in exactly run_shot's draw order."""
        rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
        n = self.layout.n
        ns = self.layout.num_stabilizers
        u_gauge = rng.random(ns)
        u_eps = np.empty((self.rounds + 1, n))
        if self.noise.pm > 0:
            u_meas = np.empty((self.rounds + 1, ns))
        else:
            u_meas = self._empty_meas
        for e in range(self.rounds + 1):
            u_eps[e] = rng.random(n)
            if self.noise.pm > 0:
                u_meas[e] = rng.random(ns)
        return u_gauge, u_eps, u_meas

    def run(self, seed: int) -> tuple[int, int]:
        """One shot; returns (failure, valid)."""
        u_gauge, u_eps, u_meas = self.shot_uniforms(seed)
        nz = self.noise
        k = _engine.simulate_shot(
            u_gauge, u_eps, u_meas, nz.p_z, nz.p_x, nz.p_y, nz.pm,
            self.rounds, self.layers,
            self.q2s_off, self.q2s_list, self.q2s_kindx, self.fixed_mask,
            self._frame_x, self._frame_z, self._syn, self._gauge,
            self._prev, self._out, self._target, self._defects,
        )
        ds = self._defects[:k]
        tb = getattr(self.graphs.cfg, 'tie_bonus', 1)
        span = getattr(self.graphs.cfg, 'tie_span', 0.0)
        _engine.match_defects(ds, k, self.dist_v, self.bdist_v, self._mate_v, tb, span)
        _engine.match_defects(ds, k, self.dist_h, self.bdist_h, self._mate_h, tb, span)
        failure, valid = _engine.assemble_and_adjudicate(
            ds, k, self._mate_v, self._mate_h, self.layers,
            self.stab_kind_x,
            self.exit_kx_v, self.exit_node_v, self.exit_kx_h, self.exit_node_h,
            self.node_of_sid_x, self.nxtx, self.nxtqx, self.nfreex, self.hopx,
            self.node_of_sid_y, self.nxty, self.nxtqy, self.nfreey, self.hopy,
            self.fixed_mask, self._target,
            self.q2s_off, self.q2s_list, self.q2s_kindx,
            self._frame_x, self._frame_z,
            self.logical_support, self.logical_is_x,
            self._corr_x, self._corr_z, self._cl_xs, self._cl_ys,
            self._cl_xv, self._cl_yv, self._visited, self._syn_c,
            self._def_x, self._def_y, self._def_mate,
        )
        return int(failure), int(valid)

    def run_batch(self, seeds) -> tuple[int, int]:
        """Returns (failures, invalid_corrections) over the seed list."""
        fails = 0
        invalid = 0
        for s in seeds:
            f, v = self.run(int(s))
            fails += f
            invalid += 0 if v else 1
        return fails, invalid
