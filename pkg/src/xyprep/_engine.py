"""Fused simulation + decoding kernels for the Monte Carlo harness.

The reference path (framesim.run_shot + decoder.decode) builds Python
objects per shot; these kernels consume the same per-shot uniform stream
and the decoder's precomputed tables to produce identical statistics at
Monte Carlo speed.  Matching runs on the boundary-folded defect graph:
pairing two defects saves b_i + b_j - d_ij over sending both to the
boundary, only positive-gain edges are kept, and connected components are
solved independently (exact: pruned edges never appear in an optimum,
cross-component pairs have no positive edges).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ._blossom import _match_core

BOUNDARY = -1


@njit(cache=True)
def simulate_shot(
    u_gauge, u_eps, u_meas, pz, px, py, pm, rounds, layers,
    q2s_off, q2s_list, q2s_kindx, fixed_mask,
    frame_x, frame_z, syn, gauge, prev_out, out, target, defect_buf,
):
    """Simulate one preparation shot; returns the defect count.

    u_eps is (rounds+1, n) of uniforms, u_meas (rounds+1, ns) (unused when
    pm = 0).  Fills frame_x/z (accumulated error), target (final syndrome
    on fixed stabilizers) and defect_buf with vertex ids sid*layers + t.
    """
    n = u_eps.shape[1]
    ns = fixed_mask.shape[0]
    for s in range(ns):
        gauge[s] = 1 if (u_gauge[s] < 0.5 and fixed_mask[s] == 0) else 0
        syn[s] = 0
    for q in range(n):
        frame_x[q] = 0
        frame_z[q] = 0
    k = 0
    for e in range(rounds + 1):
        row = u_eps[e]
        for q in range(n):
            u = row[q]
            if u < pz:
                zq = 1
                xq = 0
            elif u < pz + px:
                zq = 0
                xq = 1
            elif u < pz + px + py:
                zq = 1
                xq = 1
            else:
                continue
            frame_x[q] ^= xq
            frame_z[q] ^= zq
            for ptr in range(q2s_off[q], q2s_off[q + 1]):
                s = q2s_list[ptr]
                kx = q2s_kindx[ptr]
                # X-type anticommutes with Z/Y content, Y-type with X/Z
                if kx == 1:
                    if zq == 1:
                        syn[s] ^= 1
                else:
                    if xq ^ zq == 1:
                        syn[s] ^= 1
        # measurement round e
        for s in range(ns):
            flip = 0
            if pm > 0.0 and u_meas[e, s] < pm:
                flip = 1
            out[s] = gauge[s] ^ syn[s] ^ flip
        if e == 0:
            for s in range(ns):
                if fixed_mask[s] == 1 and out[s] == 1:
                    defect_buf[k] = s * layers
                    k += 1
                prev_out[s] = out[s]
        else:
            for s in range(ns):
                if out[s] != prev_out[s]:
                    defect_buf[k] = s * layers + e
                    k += 1
                prev_out[s] = out[s]
    # final perfect round
    t = rounds + 1
    for s in range(ns):
        o = gauge[s] ^ syn[s]
        if o != prev_out[s]:
            defect_buf[k] = s * layers + t
            k += 1
        target[s] = syn[s] if fixed_mask[s] == 1 else 0
    return k


@njit(cache=True)
def _uf_find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


@njit(cache=True)
def match_defects(ds, k, dist, bdist, mate, tie_bonus=1, tie_span=0.0):
    """Boundary-folded minimum-weight matching of the defect list.

    mate[i] = partner index into ds, or -1 for a boundary match.
    """
    for i in range(k):
        mate[i] = -1
    if k == 0:
        return
    maxm = k * (k - 1) // 2
    ep0 = np.empty(maxm, dtype=np.int32)
    ep1 = np.empty(maxm, dtype=np.int32)
    gain = np.empty(maxm, dtype=np.float64)
    m = 0
    for i in range(k):
        di = ds[i]
        bi = bdist[di]
        drow = dist[di]
        for j in range(i + 1, k):
            g = bi + bdist[ds[j]] - drow[ds[j]]
            # zero-gain edges are kept only for short pairs: nearby
            # defects on a tie pair up (the assembly exploits their
            # correlation), distant ones go to the boundary
            if g > 0 or (tie_bonus > 0 and g >= 0 and drow[ds[j]] <= tie_span):
                ep0[m] = i
                ep1[m] = j
                gain[m] = g
                m += 1
    if m == 0:
        return
    # connected components of the positive-gain graph
    parent = np.arange(k, dtype=np.int32)
    for e in range(m):
        ra = _uf_find(parent, ep0[e])
        rb = _uf_find(parent, ep1[e])
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    comp_index = np.full(k, -1, dtype=np.int32)
    local_index = np.empty(k, dtype=np.int32)
    ncomp = 0
    comp_size = np.zeros(k, dtype=np.int32)
    for i in range(k):
        r = _uf_find(parent, i)
        if comp_index[r] < 0:
            comp_index[r] = ncomp
            ncomp += 1
        local_index[i] = comp_size[comp_index[r]]
        comp_size[comp_index[r]] += 1
    # bucket members and edges per component
    members_off = np.zeros(ncomp + 1, dtype=np.int32)
    for i in range(k):
        members_off[comp_index[_uf_find(parent, i)] + 1] += 1
    for c in range(ncomp):
        members_off[c + 1] += members_off[c]
    members = np.empty(k, dtype=np.int32)
    fill = members_off[:-1].copy()
    for i in range(k):
        c = comp_index[_uf_find(parent, i)]
        members[fill[c]] = i
        fill[c] += 1
    edge_count = np.zeros(ncomp + 1, dtype=np.int32)
    for e in range(m):
        edge_count[comp_index[_uf_find(parent, ep0[e])] + 1] += 1
    for c in range(ncomp):
        edge_count[c + 1] += edge_count[c]
    edge_order = np.empty(m, dtype=np.int32)
    fill_e = edge_count[:-1].copy()
    for e in range(m):
        c = comp_index[_uf_find(parent, ep0[e])]
        edge_order[fill_e[c]] = e
        fill_e[c] += 1
    for c in range(ncomp):
        csize = members_off[c + 1] - members_off[c]
        if csize < 2:
            continue
        ce0 = np.empty(edge_count[c + 1] - edge_count[c], dtype=np.int32)
        ce1 = np.empty(ce0.shape[0], dtype=np.int32)
        cw = np.empty(ce0.shape[0], dtype=np.float64)
        gmax = 0.0
        for idx in range(ce0.shape[0]):
            e = edge_order[edge_count[c] + idx]
            ce0[idx] = local_index[ep0[e]]
            ce1[idx] = local_index[ep1[e]]
            cw[idx] = gain[e]
            if gain[e] > gmax:
                gmax = gain[e]
        scale = (float(1 << 40) / gmax) if gmax > 0 else 0.0
        cwq = np.empty(ce0.shape[0], dtype=np.int64)
        for idx in range(ce0.shape[0]):
            # +tie_bonus implements the cardinality tie-break exactly
            cwq[idx] = 2 * np.int64(cw[idx] * scale + 0.5) + tie_bonus
        cmate = _match_core(csize, ce0.shape[0], ce0, ce1, cwq, False, False)
        for li in range(csize):
            gi = members[members_off[c] + li]
            if cmate[li] >= 0:
                mate[gi] = members[members_off[c] + cmate[li]]
    # symmetrize (already symmetric by construction)


@njit(cache=True)
def assemble_and_adjudicate(
    ds, k, mate_v, mate_h, layers,
    stab_kind_x,
    exit_kx_v, exit_node_v, exit_kx_h, exit_node_h,
    # typed string tables, X-plaquette space (Y strings)
    node_of_sid_x, nxtx, nxtqx, nfreex, hopx,
    # typed string tables, Y-plaquette space (X strings)
    node_of_sid_y, nxty, nxtqy, nfreey, hopy,
    fixed_mask, target,
    q2s_off, q2s_list, q2s_kindx,
    frame_x, frame_z, logical_support, logical_is_x,
    corr_x, corr_z, cl_xs, cl_ys, cl_xv, cl_yv, visited, syn_c,
    def_x, def_y, def_mate,
):
    """Cluster fusion, typed-string correction, repair, adjudication.

    Returns (failure, valid): failure is the logical anticommutation bit of
    the residual, valid is 0 when the repaired correction still violates a
    fixed stabilizer (which would indicate a decoder bug).
    """
    n = corr_x.shape[0]
    ns = fixed_mask.shape[0]
    for q in range(n):
        corr_x[q] = 0
        corr_z[q] = 0
    for i in range(k):
        visited[i] = 0
    ndef = 0

    for start in range(k):
        if visited[start] == 1:
            continue
        visited[start] = 1
        # typed sequences with virtual exit entries; built in cluster order:
        # walk backward via the horizontal mate first to find the head, then
        # forward via the vertical mate
        nx = 0
        ny = 0
        # backward walk collects nodes in reverse; store indices temporarily
        back_cnt = 0
        cur = start
        use_v = False
        head_kx = -1
        head_node = -1
        while True:
            nxt = mate_h[cur] if not use_v else mate_v[cur]
            if nxt < 0:
                if not use_v:
                    head_kx = exit_kx_h[ds[cur]]
                    head_node = exit_node_h[ds[cur]]
                else:
                    head_kx = exit_kx_v[ds[cur]]
                    head_node = exit_node_v[ds[cur]]
                break
            if visited[nxt] == 1:
                break
            visited[nxt] = 1
            cl_xs[back_cnt] = nxt  # reuse buffer to stash backward nodes
            back_cnt += 1
            cur = nxt
            use_v = not use_v
        # emit entries in cluster order: head exit, backward nodes
        # reversed, start, forward nodes, tail exit
        if head_kx == 1:
            cl_xv[nx] = 1
            cl_xs[back_cnt + nx] = head_node
            nx += 1
        elif head_kx == 0:
            cl_yv[ny] = 1
            cl_ys[ny] = head_node
            ny += 1
        for bi in range(back_cnt - 1, -1, -1):
            v = cl_xs[bi]  # stashed value (safe: emission index >= stash index)
            sid = ds[v] // layers
            if stab_kind_x[sid] == 1:
                cl_xv[nx] = 0
                cl_xs[back_cnt + nx] = node_of_sid_x[sid]
                nx += 1
            else:
                cl_yv[ny] = 0
                cl_ys[ny] = node_of_sid_y[sid]
                ny += 1
        sid = ds[start] // layers
        if stab_kind_x[sid] == 1:
            cl_xv[nx] = 0
            cl_xs[back_cnt + nx] = node_of_sid_x[sid]
            nx += 1
        else:
            cl_yv[ny] = 0
            cl_ys[ny] = node_of_sid_y[sid]
            ny += 1
        cur = start
        use_v = True
        tail_kx = -1
        tail_node = -1
        while True:
            nxt = mate_v[cur] if use_v else mate_h[cur]
            if nxt < 0:
                if use_v:
                    tail_kx = exit_kx_v[ds[cur]]
                    tail_node = exit_node_v[ds[cur]]
                else:
                    tail_kx = exit_kx_h[ds[cur]]
                    tail_node = exit_node_h[ds[cur]]
                break
            if visited[nxt] == 1:
                break
            visited[nxt] = 1
            sid = ds[nxt] // layers
            if stab_kind_x[sid] == 1:
                cl_xv[nx] = 0
                cl_xs[back_cnt + nx] = node_of_sid_x[sid]
                nx += 1
            else:
                cl_yv[ny] = 0
                cl_ys[ny] = node_of_sid_y[sid]
                ny += 1
            cur = nxt
            use_v = not use_v
        if tail_kx == 1:
            cl_xv[nx] = 1
            cl_xs[back_cnt + nx] = tail_node
            nx += 1
        elif tail_kx == 0:
            cl_yv[ny] = 1
            cl_ys[ny] = tail_node
            ny += 1
        # pair consecutive entries; real leftovers of a single type exit at
        # the nearest free node, mixed leftovers defer to the second stage
        for kk in range(0, nx - 1, 2):
            a = cl_xs[back_cnt + kk]
            b = cl_xs[back_cnt + kk + 1]
            while a != b:
                q = nxtqx[a, b]
                corr_x[q] ^= 1
                corr_z[q] ^= 1
                a = nxtx[a, b]
        for kk in range(0, ny - 1, 2):
            a = cl_ys[kk]
            b = cl_ys[kk + 1]
            while a != b:
                q = nxtqy[a, b]
                corr_x[q] ^= 1
                a = nxty[a, b]
        left_x = -1
        left_y = -1
        if nx % 2 == 1 and cl_xv[nx - 1] == 0:
            left_x = cl_xs[back_cnt + nx - 1]
        if ny % 2 == 1 and cl_yv[ny - 1] == 0:
            left_y = cl_ys[ny - 1]
        if left_x >= 0 and left_y >= 0:
            def_x[ndef] = left_x
            def_y[ndef] = left_y
            ndef += 1
        else:
            if left_x >= 0:
                a = left_x
                b = nfreex[a]
                while a != b:
                    q = nxtqx[a, b]
                    corr_x[q] ^= 1
                    corr_z[q] ^= 1
                    a = nxtx[a, b]
            if left_y >= 0:
                a = left_y
                b = nfreey[a]
                while a != b:
                    q = nxtqy[a, b]
                    corr_x[q] ^= 1
                    a = nxty[a, b]

    # second stage: pair defective clusters with phase-flip connectors
    if ndef > 0:
        s2mate = def_mate[:ndef]
        for i in range(ndef):
            s2mate[i] = -1
        if ndef > 1:
            maxe = ndef * (ndef - 1) // 2
            e0 = np.empty(maxe, dtype=np.int32)
            e1 = np.empty(maxe, dtype=np.int32)
            gq = np.empty(maxe, dtype=np.int64)
            ne = 0
            for i in range(ndef):
                bi = hopx[def_x[i], nfreex[def_x[i]]] + hopy[def_y[i], nfreey[def_y[i]]]
                for j in range(i + 1, ndef):
                    bj = hopx[def_x[j], nfreex[def_x[j]]] + hopy[def_y[j], nfreey[def_y[j]]]
                    dij = hopx[def_x[i], def_x[j]] + hopy[def_y[i], def_y[j]]
                    g = bi + bj - dij
                    if g >= 0:
                        e0[ne] = i
                        e1[ne] = j
                        gq[ne] = 2 * g + 1
                        ne += 1
            if ne > 0:
                res = _match_core(ndef, ne, e0[:ne], e1[:ne], gq[:ne], False, False)
                for i in range(ndef):
                    s2mate[i] = res[i]
        for i in range(ndef):
            j = s2mate[i]
            if j >= 0:
                if j < i:
                    continue
                a = def_x[i]
                b = def_x[j]
                while a != b:
                    q = nxtqx[a, b]
                    corr_x[q] ^= 1
                    corr_z[q] ^= 1
                    a = nxtx[a, b]
                a = def_y[i]
                b = def_y[j]
                while a != b:
                    q = nxtqy[a, b]
                    corr_x[q] ^= 1
                    a = nxty[a, b]
            else:
                a = def_x[i]
                b = nfreex[a]
                while a != b:
                    q = nxtqx[a, b]
                    corr_x[q] ^= 1
                    corr_z[q] ^= 1
                    a = nxtx[a, b]
                a = def_y[i]
                b = nfreey[a]
                while a != b:
                    q = nxtqy[a, b]
                    corr_x[q] ^= 1
                    a = nxty[a, b]

    # syndrome of the correction
    for s in range(ns):
        syn_c[s] = 0
    for q in range(n):
        xq = corr_x[q]
        zq = corr_z[q]
        if xq == 0 and zq == 0:
            continue
        for ptr in range(q2s_off[q], q2s_off[q + 1]):
            s = q2s_list[ptr]
            if q2s_kindx[ptr] == 1:
                if zq == 1:
                    syn_c[s] ^= 1
            else:
                if xq ^ zq == 1:
                    syn_c[s] ^= 1
    # repair mismatched fixed stabilizers with boundary strings
    for s in range(ns):
        if fixed_mask[s] == 1 and syn_c[s] != target[s]:
            if stab_kind_x[s] == 1:
                a = node_of_sid_x[s]
                b = nfreex[a]
                while a != b:
                    q = nxtqx[a, b]
                    corr_x[q] ^= 1
                    corr_z[q] ^= 1
                    a = nxtx[a, b]
            else:
                a = node_of_sid_y[s]
                b = nfreey[a]
                while a != b:
                    q = nxtqy[a, b]
                    corr_x[q] ^= 1
                    a = nxty[a, b]

    # recompute the correction syndrome independently after repairs
    for s in range(ns):
        syn_c[s] = 0
    for q in range(n):
        xq = corr_x[q]
        zq = corr_z[q]
        if xq == 0 and zq == 0:
            continue
        for ptr in range(q2s_off[q], q2s_off[q + 1]):
            s = q2s_list[ptr]
            if q2s_kindx[ptr] == 1:
                if zq == 1:
                    syn_c[s] ^= 1
            else:
                if xq ^ zq == 1:
                    syn_c[s] ^= 1

    # adjudicate the residual
    failure = 0
    for ii in range(logical_support.shape[0]):
        q = logical_support[ii]
        rx = frame_x[q] ^ corr_x[q]
        rz = frame_z[q] ^ corr_z[q]
        if logical_is_x == 1:
            failure ^= rz
        else:
            failure ^= rx ^ rz
    valid = 1
    for s in range(ns):
        if fixed_mask[s] == 1 and syn_c[s] != target[s]:
            valid = 0
    return failure, valid
