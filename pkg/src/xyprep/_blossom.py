"""Exact maximum-weight general-graph matching on flat arrays.

Primal-dual blossom algorithm (Galil's O(V^3) formulation) written against
preallocated integer arrays so that numba can compile it.  Weights are
int64; callers that have float weights scale and round them first, which
keeps every slack computation exact and the result deterministic.

With ``maxcardinality`` the matching has maximum cardinality first and
maximum weight among those, which is how minimum-weight perfect matching is
obtained (negate the weights; see :func:`min_weight_perfect_matching`).
"""

from __future__ import annotations

import numpy as np
from numba import njit

NO_NODE = np.int32(-1)


@njit(cache=True, inline="always")
def _slack(k, ep0, ep1, wt, dualvar):
    return dualvar[ep0[k]] + dualvar[ep1[k]] - 2 * wt[k]


@njit(cache=True)
def _blossom_leaves(b, nvertex, childs_flat, childs_len, cap, buf, stack):
    """Collect the leaf vertices of blossom b into buf; returns count."""
    ns = 0
    stack[ns] = b
    ns += 1
    cnt = 0
    while ns > 0:
        ns -= 1
        x = stack[ns]
        if x < nvertex:
            buf[cnt] = x
            cnt += 1
        else:
            for i in range(childs_len[x]):
                stack[ns] = childs_flat[x * cap + i]
                ns += 1
    return cnt


@njit(cache=True)
def _assign_label(
    w, t, p,
    nvertex, endpoint, mate,
    label, labelend, inblossom, blossombase, bestedge,
    childs_flat, childs_len, cap,
    queue, qn, leaf_buf, leaf_stack,
):
    """Label vertex w (and its top blossom) with t reached through endpoint p.

    A T label immediately propagates an S label to the mate of the blossom
    base, which is the only recursion in the original formulation.
    """
    while True:
        b = inblossom[w]
        label[w] = t
        label[b] = t
        labelend[w] = p
        labelend[b] = p
        bestedge[w] = -1
        bestedge[b] = -1
        if t == 1:
            cnt = _blossom_leaves(b, nvertex, childs_flat, childs_len, cap, leaf_buf, leaf_stack)
            for i in range(cnt):
                queue[qn[0]] = leaf_buf[i]
                qn[0] += 1
            return
        # t == 2: relabel the base mate as S and continue the chain
        base = blossombase[b]
        w = endpoint[mate[base]]
        t = 1
        p = mate[base] ^ 1


@njit(cache=True)
def _scan_blossom(
    v, w,
    endpoint, label, labelend, inblossom, blossombase,
    path_buf,
):
    """Trace back from v and w to find a common ancestor base (or -1)."""
    np_ = 0
    base = NO_NODE
    while v != NO_NODE or w != NO_NODE:
        b = inblossom[v]
        if label[b] & 4:
            base = blossombase[b]
            break
        path_buf[np_] = b
        np_ += 1
        label[b] = 5
        if labelend[b] == -1:
            v = NO_NODE
        else:
            v = endpoint[labelend[b]]
            b = inblossom[v]
            v = endpoint[labelend[b]]
        if w != NO_NODE:
            v, w = w, v
    for i in range(np_):
        label[path_buf[i]] = 1
    return base


@njit(cache=True)
def _add_blossom(
    base, k,
    nvertex, endpoint, ep0, ep1, wt, mate,
    label, labelend, inblossom, blossomparent, blossombase, bestedge, dualvar,
    childs_flat, childs_len, endps_flat, endps_len, cap,
    bbe_flat, bbe_len, bbe_cap,
    nb_off, nb_list,
    queue, qn, leaf_buf, leaf_stack,
    unused, un, bet_to, bet_touch,
):
    """Shrink the circuit through edge k and base into a new S-blossom."""
    v = ep0[k]
    w = ep1[k]
    bb = inblossom[base]
    bv = inblossom[v]
    bw = inblossom[w]
    un[0] -= 1
    b = unused[un[0]]
    blossombase[b] = base
    blossomparent[b] = -1
    blossomparent[bb] = b
    # trace from v back to base
    row = b * cap
    npath = 0
    while bv != bb:
        blossomparent[bv] = b
        childs_flat[row + npath] = bv
        endps_flat[row + npath] = labelend[bv]
        npath += 1
        v = endpoint[labelend[bv]]
        bv = inblossom[v]
    childs_flat[row + npath] = bb
    npath += 1
    # reverse and append the connecting endpoint
    for i in range(npath // 2):
        t1 = childs_flat[row + i]
        childs_flat[row + i] = childs_flat[row + npath - 1 - i]
        childs_flat[row + npath - 1 - i] = t1
    for i in range((npath - 1) // 2):
        t2 = endps_flat[row + i]
        endps_flat[row + i] = endps_flat[row + npath - 2 - i]
        endps_flat[row + npath - 2 - i] = t2
    endps_flat[row + npath - 1] = 2 * k
    # trace from w back to base
    while bw != bb:
        blossomparent[bw] = b
        childs_flat[row + npath] = bw
        endps_flat[row + npath] = labelend[bw] ^ 1
        npath += 1
        w = endpoint[labelend[bw]]
        bw = inblossom[w]
    childs_len[b] = npath
    endps_len[b] = npath
    label[b] = 1
    labelend[b] = labelend[bb]
    dualvar[b] = 0
    # relabel leaves; T-labelled vertices go back on the queue
    cnt = _blossom_leaves(b, nvertex, childs_flat, childs_len, cap, leaf_buf, leaf_stack)
    for i in range(cnt):
        lv = leaf_buf[i]
        if label[inblossom[lv]] == 2:
            queue[qn[0]] = lv
            qn[0] += 1
        inblossom[lv] = b
    # merge the children's best-edge lists
    ntouch = 0
    for ci in range(childs_len[b]):
        bv2 = childs_flat[row + ci]
        if bbe_len[bv2] < 0:
            # no cached list: scan all edges of the child's leaves
            cnt2 = _blossom_leaves(bv2, nvertex, childs_flat, childs_len, cap, leaf_buf, leaf_stack)
            for li in range(cnt2):
                lv2 = leaf_buf[li]
                for pi in range(nb_off[lv2], nb_off[lv2 + 1]):
                    p = nb_list[pi]
                    kk = p // 2
                    j = endpoint[p]
                    bj = inblossom[j]
                    if bj != b and label[bj] == 1:
                        if bet_to[bj] == -1 or _slack(kk, ep0, ep1, wt, dualvar) < _slack(bet_to[bj], ep0, ep1, wt, dualvar):
                            if bet_to[bj] == -1:
                                bet_touch[ntouch] = bj
                                ntouch += 1
                            bet_to[bj] = kk
        else:
            for li in range(bbe_len[bv2]):
                kk = bbe_flat[bv2 * bbe_cap + li]
                i0 = ep0[kk]
                j0 = ep1[kk]
                bj = inblossom[j0]
                if bj == b:
                    bj = inblossom[i0]
                if bj != b and label[bj] == 1:
                    if bet_to[bj] == -1 or _slack(kk, ep0, ep1, wt, dualvar) < _slack(bet_to[bj], ep0, ep1, wt, dualvar):
                        if bet_to[bj] == -1:
                            bet_touch[ntouch] = bj
                            ntouch += 1
                        bet_to[bj] = kk
        bbe_len[bv2] = -1
        bestedge[bv2] = -1
    nbe = 0
    be = np.int32(-1)
    best = np.int64(0)
    for ti in range(ntouch):
        bj = bet_touch[ti]
        kk = bet_to[bj]
        bbe_flat[b * bbe_cap + nbe] = kk
        nbe += 1
        sl = _slack(kk, ep0, ep1, wt, dualvar)
        if be == -1 or sl < best:
            best = sl
            be = np.int32(kk)
        bet_to[bj] = -1
    bbe_len[b] = nbe
    bestedge[b] = be
    return b


@njit(cache=True)
def _expand_blossom(
    b_in, endstage,
    nvertex, endpoint, mate,
    label, labelend, inblossom, blossomparent, blossombase, bestedge, dualvar,
    childs_flat, childs_len, endps_flat, endps_len, cap,
    bbe_len, allowedge,
    queue, qn, leaf_buf, leaf_stack,
    unused, un, work_stack,
):
    nw = 0
    work_stack[nw] = b_in
    nw += 1
    while nw > 0:
        nw -= 1
        b = work_stack[nw]
        row = b * cap
        nch = childs_len[b]
        for ci in range(nch):
            s = childs_flat[row + ci]
            blossomparent[s] = -1
            if s < nvertex:
                inblossom[s] = s
            elif endstage and dualvar[s] == 0:
                work_stack[nw] = s
                nw += 1
            else:
                cnt = _blossom_leaves(s, nvertex, childs_flat, childs_len, cap, leaf_buf, leaf_stack)
                for li in range(cnt):
                    inblossom[leaf_buf[li]] = s
        if (not endstage) and label[b] == 2:
            entrychild = inblossom[endpoint[labelend[b] ^ 1]]
            j = 0
            for ci in range(nch):
                if childs_flat[row + ci] == entrychild:
                    j = ci
                    break
            if j & 1:
                j -= nch
                jstep = 1
                endptrick = 0
            else:
                jstep = -1
                endptrick = 1
            p = labelend[b]
            while j != 0:
                label[endpoint[p ^ 1]] = 0
                q_idx = (j - endptrick) % nch
                label[endpoint[endps_flat[row + q_idx] ^ endptrick ^ 1]] = 0
                _assign_label(
                    endpoint[p ^ 1], 2, p,
                    nvertex, endpoint, mate,
                    label, labelend, inblossom, blossombase, bestedge,
                    childs_flat, childs_len, cap,
                    queue, qn, leaf_buf, leaf_stack,
                )
                allowedge[endps_flat[row + q_idx] // 2] = True
                j += jstep
                q_idx = (j - endptrick) % nch
                p = endps_flat[row + q_idx] ^ endptrick
                allowedge[p // 2] = True
                j += jstep
            bv = childs_flat[row + (j % nch)]
            label[endpoint[p ^ 1]] = 2
            label[bv] = 2
            labelend[endpoint[p ^ 1]] = p
            labelend[bv] = p
            bestedge[bv] = -1
            j += jstep
            while childs_flat[row + (j % nch)] != entrychild:
                bv = childs_flat[row + (j % nch)]
                if label[bv] == 1:
                    j += jstep
                    continue
                cnt = _blossom_leaves(bv, nvertex, childs_flat, childs_len, cap, leaf_buf, leaf_stack)
                vfound = NO_NODE
                for li in range(cnt):
                    if label[leaf_buf[li]] != 0:
                        vfound = leaf_buf[li]
                        break
                if vfound != NO_NODE:
                    label[vfound] = 0
                    label[endpoint[mate[blossombase[bv]]]] = 0
                    _assign_label(
                        vfound, 2, labelend[vfound],
                        nvertex, endpoint, mate,
                        label, labelend, inblossom, blossombase, bestedge,
                        childs_flat, childs_len, cap,
                        queue, qn, leaf_buf, leaf_stack,
                    )
                j += jstep
        label[b] = -1
        labelend[b] = -1
        blossombase[b] = -1
        bestedge[b] = -1
        childs_len[b] = 0
        endps_len[b] = 0
        bbe_len[b] = -1
        unused[un[0]] = b
        un[0] += 1


@njit(cache=True)
def _augment_blossom(
    b_in, v_in,
    nvertex, endpoint, mate,
    blossomparent, blossombase,
    childs_flat, childs_len, endps_flat, endps_len, cap,
    task_b, task_v, rot_buf,
):
    nt = 0
    task_b[nt] = b_in
    task_v[nt] = v_in
    nt += 1
    while nt > 0:
        nt -= 1
        b = task_b[nt]
        v = task_v[nt]
        row = b * cap
        nch = childs_len[b]
        # immediate child of b containing v
        t = v
        while blossomparent[t] != b:
            t = blossomparent[t]
        if t >= nvertex:
            task_b[nt] = t
            task_v[nt] = v
            nt += 1
        i = 0
        for ci in range(nch):
            if childs_flat[row + ci] == t:
                i = ci
                break
        j = i
        if i & 1:
            j -= nch
            jstep = 1
            endptrick = 0
        else:
            jstep = -1
            endptrick = 1
        while j != 0:
            j += jstep
            t2 = childs_flat[row + (j % nch)]
            q_idx = (j - endptrick) % nch
            p = endps_flat[row + q_idx] ^ endptrick
            if t2 >= nvertex:
                task_b[nt] = t2
                task_v[nt] = endpoint[p]
                nt += 1
            j += jstep
            t3 = childs_flat[row + (j % nch)]
            if t3 >= nvertex:
                task_b[nt] = t3
                task_v[nt] = endpoint[p ^ 1]
                nt += 1
            mate[endpoint[p]] = p ^ 1
            mate[endpoint[p ^ 1]] = p
        # rotate childs/endps so that the child containing v comes first
        if i > 0:
            for ci in range(nch):
                rot_buf[ci] = childs_flat[row + (i + ci) % nch]
            for ci in range(nch):
                childs_flat[row + ci] = rot_buf[ci]
            for ci in range(nch):
                rot_buf[ci] = endps_flat[row + (i + ci) % nch]
            for ci in range(nch):
                endps_flat[row + ci] = rot_buf[ci]
        # the new base is v itself (inductively true at every nesting level;
        # child tasks may still be pending on the stack, so the child's own
        # blossombase cannot be read here)
        blossombase[b] = v


@njit(cache=True)
def _augment_matching(
    k,
    nvertex, endpoint, ep0, ep1, mate,
    label, labelend, inblossom, blossomparent, blossombase,
    childs_flat, childs_len, endps_flat, endps_len, cap,
    task_b, task_v, rot_buf,
):
    for side in range(2):
        if side == 0:
            s = ep0[k]
            p = 2 * k + 1
        else:
            s = ep1[k]
            p = 2 * k
        while True:
            bs = inblossom[s]
            if bs >= nvertex:
                _augment_blossom(
                    bs, s, nvertex, endpoint, mate,
                    blossomparent, blossombase,
                    childs_flat, childs_len, endps_flat, endps_len, cap,
                    task_b, task_v, rot_buf,
                )
            mate[s] = p
            if labelend[bs] == -1:
                break
            t = endpoint[labelend[bs]]
            bt = inblossom[t]
            s = endpoint[labelend[bt]]
            j = endpoint[labelend[bt] ^ 1]
            if bt >= nvertex:
                _augment_blossom(
                    bt, j, nvertex, endpoint, mate,
                    blossomparent, blossombase,
                    childs_flat, childs_len, endps_flat, endps_len, cap,
                    task_b, task_v, rot_buf,
                )
            mate[j] = labelend[bt]
            p = labelend[bt] ^ 1


@njit(cache=True)
def _match_core(nvertex, nedge, ep0, ep1, wt, maxcardinality, greedy_init):  # noqa: C901
    """Returns mate array (vertex -> matched vertex, or -1)."""
    nb = 2 * nvertex
    cap = nvertex + 1
    endpoint = np.empty(2 * nedge, dtype=np.int32)
    for e in range(nedge):
        endpoint[2 * e] = ep0[e]
        endpoint[2 * e + 1] = ep1[e]
    # CSR neighbour lists of endpoint indices
    deg = np.zeros(nvertex + 1, dtype=np.int64)
    for e in range(nedge):
        deg[ep1[e] + 1] += 1
        deg[ep0[e] + 1] += 1
    nb_off = np.cumsum(deg)
    fill = nb_off.copy()
    nb_list = np.empty(2 * nedge, dtype=np.int32)
    for e in range(nedge):
        nb_list[fill[ep1[e]]] = 2 * e
        fill[ep1[e]] += 1
        nb_list[fill[ep0[e]]] = 2 * e + 1
        fill[ep0[e]] += 1

    maxweight = np.int64(0)
    for e in range(nedge):
        if wt[e] > maxweight:
            maxweight = wt[e]

    mate = np.full(nvertex, -1, dtype=np.int32)
    label = np.zeros(nb, dtype=np.int8)
    labelend = np.full(nb, -1, dtype=np.int32)
    inblossom = np.arange(nvertex, dtype=np.int32)
    blossomparent = np.full(nb, -1, dtype=np.int32)
    blossombase = np.full(nb, -1, dtype=np.int32)
    for v in range(nvertex):
        blossombase[v] = v
    bestedge = np.full(nb, -1, dtype=np.int32)
    dualvar = np.zeros(nb, dtype=np.int64)
    if greedy_init:
        # feasible per-vertex duals (u_v = max incident weight keeps every
        # slack non-negative) followed by greedy matching of tight edges.
        # Sound only when the caller wants a perfect matching: weight
        # optimality among perfect matchings needs no free-vertex dual
        # conditions.  Requires all weights even so that tree parities stay
        # uniform and the half-slack dual step remains integral.
        for e in range(nedge):
            if wt[e] > dualvar[ep0[e]]:
                dualvar[ep0[e]] = wt[e]
            if wt[e] > dualvar[ep1[e]]:
                dualvar[ep1[e]] = wt[e]
        for e in range(nedge):
            i0 = ep0[e]
            j0 = ep1[e]
            if mate[i0] == -1 and mate[j0] == -1 and dualvar[i0] + dualvar[j0] == 2 * wt[e]:
                mate[i0] = 2 * e + 1
                mate[j0] = 2 * e
    else:
        for v in range(nvertex):
            dualvar[v] = maxweight
    allowedge = np.zeros(nedge, dtype=np.bool_)
    childs_flat = np.empty(nb * cap, dtype=np.int32)
    childs_len = np.zeros(nb, dtype=np.int32)
    endps_flat = np.empty(nb * cap, dtype=np.int32)
    endps_len = np.zeros(nb, dtype=np.int32)
    bbe_cap = nb
    bbe_flat = np.empty(nb * bbe_cap, dtype=np.int32)
    bbe_len = np.full(nb, -1, dtype=np.int32)
    queue = np.empty(nvertex * nvertex // 2 + 8 * nvertex + 64, dtype=np.int32)
    qn = np.zeros(1, dtype=np.int64)
    leaf_buf = np.empty(nvertex, dtype=np.int32)
    leaf_stack = np.empty(nb, dtype=np.int32)
    path_buf = np.empty(nb, dtype=np.int32)
    unused = np.empty(nvertex, dtype=np.int32)
    for i in range(nvertex):
        unused[i] = nvertex + i
    un = np.zeros(1, dtype=np.int64)
    un[0] = nvertex
    bet_to = np.full(nb, -1, dtype=np.int32)
    bet_touch = np.empty(nb, dtype=np.int32)
    task_b = np.empty(4 * nvertex + 8, dtype=np.int32)
    task_v = np.empty(4 * nvertex + 8, dtype=np.int32)
    rot_buf = np.empty(cap, dtype=np.int32)
    work_stack = np.empty(nb, dtype=np.int32)

    for _stage in range(nvertex):
        for i in range(nb):
            label[i] = 0
            bestedge[i] = -1
        for i in range(nvertex, nb):
            bbe_len[i] = -1
        for e in range(nedge):
            allowedge[e] = False
        qn[0] = 0
        for v in range(nvertex):
            if mate[v] == -1 and label[inblossom[v]] == 0:
                _assign_label(
                    v, 1, -1,
                    nvertex, endpoint, mate,
                    label, labelend, inblossom, blossombase, bestedge,
                    childs_flat, childs_len, cap,
                    queue, qn, leaf_buf, leaf_stack,
                )
        augmented = False
        while True:
            while qn[0] > 0 and not augmented:
                qn[0] -= 1
                v = queue[qn[0]]
                for pi in range(nb_off[v], nb_off[v + 1]):
                    p = nb_list[pi]
                    k = p // 2
                    w = endpoint[p]
                    if inblossom[v] == inblossom[w]:
                        continue
                    kslack = np.int64(0)
                    if not allowedge[k]:
                        kslack = _slack(k, ep0, ep1, wt, dualvar)
                        if kslack <= 0:
                            allowedge[k] = True
                    if allowedge[k]:
                        if label[inblossom[w]] == 0:
                            _assign_label(
                                w, 2, p ^ 1,
                                nvertex, endpoint, mate,
                                label, labelend, inblossom, blossombase, bestedge,
                                childs_flat, childs_len, cap,
                                queue, qn, leaf_buf, leaf_stack,
                            )
                        elif label[inblossom[w]] == 1:
                            base = _scan_blossom(
                                v, w, endpoint, label, labelend, inblossom,
                                blossombase, path_buf,
                            )
                            if base >= 0:
                                _add_blossom(
                                    base, k,
                                    nvertex, endpoint, ep0, ep1, wt, mate,
                                    label, labelend, inblossom, blossomparent,
                                    blossombase, bestedge, dualvar,
                                    childs_flat, childs_len, endps_flat, endps_len, cap,
                                    bbe_flat, bbe_len, bbe_cap,
                                    nb_off, nb_list,
                                    queue, qn, leaf_buf, leaf_stack,
                                    unused, un, bet_to, bet_touch,
                                )
                            else:
                                _augment_matching(
                                    k, nvertex, endpoint, ep0, ep1, mate,
                                    label, labelend, inblossom, blossomparent,
                                    blossombase,
                                    childs_flat, childs_len, endps_flat, endps_len, cap,
                                    task_b, task_v, rot_buf,
                                )
                                augmented = True
                                break
                        elif label[w] == 0:
                            label[w] = 2
                            labelend[w] = p ^ 1
                    elif label[inblossom[w]] == 1:
                        b = inblossom[v]
                        if bestedge[b] == -1 or kslack < _slack(bestedge[b], ep0, ep1, wt, dualvar):
                            bestedge[b] = k
                    elif label[w] == 0:
                        if bestedge[w] == -1 or kslack < _slack(bestedge[w], ep0, ep1, wt, dualvar):
                            bestedge[w] = k
            if augmented:
                break
            # dual update
            deltatype = -1
            delta = np.int64(0)
            deltaedge = np.int32(-1)
            deltablossom = np.int32(-1)
            if not maxcardinality:
                deltatype = 1
                delta = dualvar[0]
                for v in range(nvertex):
                    if dualvar[v] < delta:
                        delta = dualvar[v]
            for v in range(nvertex):
                if label[inblossom[v]] == 0 and bestedge[v] != -1:
                    d = _slack(bestedge[v], ep0, ep1, wt, dualvar)
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 2
                        deltaedge = bestedge[v]
            for b in range(nb):
                if blossomparent[b] == -1 and label[b] == 1 and bestedge[b] != -1:
                    kslack = _slack(bestedge[b], ep0, ep1, wt, dualvar)
                    d = kslack // 2
                    if deltatype == -1 or d < delta:
                        delta = d
                        deltatype = 3
                        deltaedge = bestedge[b]
            for b in range(nvertex, nb):
                if (
                    blossombase[b] >= 0
                    and blossomparent[b] == -1
                    and label[b] == 2
                    and (deltatype == -1 or dualvar[b] < delta)
                ):
                    delta = dualvar[b]
                    deltatype = 4
                    deltablossom = np.int32(b)
            if deltatype == -1:
                # maxcardinality: no more useful dual updates are possible
                deltatype = 1
                dmin = dualvar[0]
                for v in range(nvertex):
                    if dualvar[v] < dmin:
                        dmin = dualvar[v]
                delta = max(np.int64(0), dmin)
            for v in range(nvertex):
                lb = label[inblossom[v]]
                if lb == 1:
                    dualvar[v] -= delta
                elif lb == 2:
                    dualvar[v] += delta
            for b in range(nvertex, nb):
                if blossombase[b] >= 0 and blossomparent[b] == -1:
                    if label[b] == 1:
                        dualvar[b] += delta
                    elif label[b] == 2:
                        dualvar[b] -= delta
            if deltatype == 1:
                break
            elif deltatype == 2:
                allowedge[deltaedge] = True
                i0 = ep0[deltaedge]
                if label[inblossom[i0]] == 0:
                    i0 = ep1[deltaedge]
                queue[qn[0]] = i0
                qn[0] += 1
            elif deltatype == 3:
                allowedge[deltaedge] = True
                queue[qn[0]] = ep0[deltaedge]
                qn[0] += 1
            elif deltatype == 4:
                _expand_blossom(
                    deltablossom, False,
                    nvertex, endpoint, mate,
                    label, labelend, inblossom, blossomparent, blossombase,
                    bestedge, dualvar,
                    childs_flat, childs_len, endps_flat, endps_len, cap,
                    bbe_len, allowedge,
                    queue, qn, leaf_buf, leaf_stack,
                    unused, un, work_stack,
                )
        if not augmented:
            break
        # end of stage: expand all zero-dual S-blossoms
        for b in range(nvertex, nb):
            if (
                blossomparent[b] == -1
                and blossombase[b] >= 0
                and label[b] == 1
                and dualvar[b] == 0
            ):
                _expand_blossom(
                    b, True,
                    nvertex, endpoint, mate,
                    label, labelend, inblossom, blossomparent, blossombase,
                    bestedge, dualvar,
                    childs_flat, childs_len, endps_flat, endps_len, cap,
                    bbe_len, allowedge,
                    queue, qn, leaf_buf, leaf_stack,
                    unused, un, work_stack,
                )

    out = np.full(nvertex, -1, dtype=np.int32)
    for v in range(nvertex):
        if mate[v] >= 0:
            out[v] = endpoint[mate[v]]
    return out


def max_weight_matching_arrays(
    n: int,
    ep0: np.ndarray,
    ep1: np.ndarray,
    wt: np.ndarray,
    maxcardinality: bool = True,
    greedy_init: bool = False,
) -> np.ndarray:
    """Maximum-weight matching; returns vertex -> partner (-1 unmatched).

    greedy_init requires all weights even and is only valid when the caller
    needs optimality among perfect matchings (see _match_core).
    """
    ep0 = np.ascontiguousarray(ep0, dtype=np.int32)
    ep1 = np.ascontiguousarray(ep1, dtype=np.int32)
    wt = np.ascontiguousarray(wt, dtype=np.int64)
    if n == 0 or ep0.shape[0] == 0:
        return np.full(n, -1, dtype=np.int32)
    return _match_core(n, ep0.shape[0], ep0, ep1, wt, maxcardinality, greedy_init)


WEIGHT_SCALE_BITS = 40


def quantize_weights(wt: np.ndarray) -> np.ndarray:
    """Scale float weights to even int64 so slack arithmetic is exact."""
    wt = np.asarray(wt, dtype=np.float64)
    if wt.size == 0:
        return np.zeros(0, dtype=np.int64)
    wmax = float(np.max(np.abs(wt)))
    if wmax == 0.0:
        return np.zeros(wt.shape, dtype=np.int64)
    scale = float(1 << WEIGHT_SCALE_BITS) / wmax
    return 2 * np.round(wt * scale).astype(np.int64)


def min_weight_perfect_matching(
    n: int, ep0: np.ndarray, ep1: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """Exact minimum-weight perfect matching (vertex -> partner array).

    Raises ValueError when no perfect matching exists.
    """
    wt = -quantize_weights(np.asarray(weights, dtype=np.float64))
    mate = max_weight_matching_arrays(n, ep0, ep1, wt, maxcardinality=True, greedy_init=True)
    if n % 2 == 1 or np.any(mate < 0):
        raise ValueError("graph admits no perfect matching")
    return mate
