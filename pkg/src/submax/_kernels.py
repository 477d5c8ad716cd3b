"""Numeric kernels behind the public modules.

Every function here is wrapped by :func:`submax._backend.jit`: with numba
present they compile to machine code on first call, otherwise the same
bodies run as interpreted NumPy. Inputs are flat ndarrays and scalars so
the two paths stay interchangeable.

In-kernel randomness uses a splitmix64 counter generator. Callers pass a
64-bit seed; every sample derives its own stream from (seed, sample index),
so results do not depend on batching or evaluation order.
"""

import numpy as np

from submax._backend import jit

# splitmix64 constants (Steele, Lea & Flood mixing function).
_SM_GOLD = np.uint64(0x9E3779B97F4A7C15)
_SM_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_SM_MIX2 = np.uint64(0x94D049BB133111EB)
_U01_SCALE = 1.0 / 9007199254740992.0  # 2**-53


@jit
def _sm_mix(z):
    z = (z ^ (z >> np.uint64(30))) * _SM_MIX1
    z = (z ^ (z >> np.uint64(27))) * _SM_MIX2
    return z ^ (z >> np.uint64(31))


@jit
def _sm_init(seed, index):
    # independent stream for the index-th sample drawn under one seed
    return _sm_mix(np.uint64(seed) + np.uint64(index) * _SM_GOLD)


@jit
def _sm_next(state):
    state = state + _SM_GOLD
    return state, _sm_mix(state)


@jit
def _sm_u01(z):
    # uniform in [0, 1) from the top 53 bits
    return (z >> np.uint64(11)) * _U01_SCALE


@jit
def sm_u01_sequence(seed, count):
    """count uniforms from the stream at (seed, 0); exercised by tests."""
    out = np.empty(count)
    st = _sm_init(seed, 0)
    for i in range(count):
        st, z = _sm_next(st)
        out[i] = _sm_u01(z)
    return out


# ---------------------------------------------------------------------------
# weighted coverage: universe elements in CSR form (indptr/indices over the
# ground set), one weight per universe element


@jit
def wcf_eval_set(indptr, indices, weights, member):
    total = 0.0
    for u in range(weights.shape[0]):
        for p in range(indptr[u], indptr[u + 1]):
            if member[indices[p]] != 0:
                total += weights[u]
                break
    return total


@jit
def wcf_multilinear(indptr, indices, weights, x):
    total = 0.0
    for u in range(weights.shape[0]):
        miss = 1.0
        for p in range(indptr[u], indptr[u + 1]):
            miss *= 1.0 - x[indices[p]]
        total += weights[u] * (1.0 - miss)
    return total


@jit
def wcf_concave(indptr, indices, weights, x):
    total = 0.0
    for u in range(weights.shape[0]):
        s = 0.0
        for p in range(indptr[u], indptr[u + 1]):
            s += x[indices[p]]
        if s > 1.0:
            s = 1.0
        total += weights[u] * s
    return total


@jit
def wcf_subgrad(indptr, indices, weights, x):
    g = np.zeros(x.shape[0])
    for u in range(weights.shape[0]):
        s = 0.0
        for p in range(indptr[u], indptr[u + 1]):
            s += x[indices[p]]
        if s < 1.0:
            for p in range(indptr[u], indptr[u + 1]):
                g[indices[p]] += weights[u]
    return g


@jit
def wcf_mlgrad(indptr, indices, weights, x):
    # gradient of the product form, via leave-one-out prefix/suffix products
    g = np.zeros(x.shape[0])
    n_univ = weights.shape[0]
    max_deg = 0
    for u in range(n_univ):
        d = indptr[u + 1] - indptr[u]
        if d > max_deg:
            max_deg = d
    pre = np.empty(max_deg + 1)
    suf = np.empty(max_deg + 1)
    for u in range(n_univ):
        a = indptr[u]
        d = indptr[u + 1] - a
        pre[0] = 1.0
        for t in range(d):
            pre[t + 1] = pre[t] * (1.0 - x[indices[a + t]])
        suf[d] = 1.0
        for t in range(d - 1, -1, -1):
            suf[t] = suf[t + 1] * (1.0 - x[indices[a + t]])
        for t in range(d):
            g[indices[a + t]] += weights[u] * pre[t] * suf[t + 1]
    return g


# transpose CSR (ground element -> universe elements it covers), used by the
# greedy oracle


@jit
def coverage_gain(tindptr, tindices, weights, covered, i):
    total = 0.0
    for p in range(tindptr[i], tindptr[i + 1]):
        u = tindices[p]
        if covered[u] == 0:
            total += weights[u]
    return total


@jit
def coverage_commit(tindptr, tindices, covered, i):
    for p in range(tindptr[i], tindptr[i + 1]):
        covered[tindices[p]] = 1


# ---------------------------------------------------------------------------
# projection onto {x in [0,1]^n : sum x = k}, minimizing sum_i g_i (x_i-p_i)^2
# for strictly positive diagonal weights g


@jit
def project_box_simplex(p, g, k):
    n = p.shape[0]
    bp = np.empty(2 * n)
    dl = np.empty(2 * n)
    for i in range(n):
        # alpha where x_i(alpha) = clip(p_i - alpha/g_i, 0, 1) leaves the
        # upper cap, then where it hits zero
        bp[i] = (p[i] - 1.0) * g[i]
        dl[i] = -1.0 / g[i]
        bp[n + i] = p[i] * g[i]
        dl[n + i] = 1.0 / g[i]
    order = np.argsort(bp)
    # sweep the piecewise-linear h(alpha) = sum_i x_i(alpha) from h = n down
    # to 0, checking each segment before applying its endpoint's slope change
    h = float(n)
    slope = 0.0
    a_prev = bp[order[0]]
    alpha = a_prev
    for t in range(2 * n):
        e = order[t]
        a_e = bp[e]
        if slope != 0.0:
            h_e = h + slope * (a_e - a_prev)
        else:
            h_e = h
        if h_e <= k:
            if slope < 0.0:
                alpha = a_prev + (h - k) / (-slope)
            else:
                # flat segment at level k: the minimizer is the same across
                # it, take the left endpoint
                alpha = a_prev
            break
        slope += dl[e]
        h = h_e
        a_prev = a_e
        alpha = a_e
    x = np.empty(n)
    for i in range(n):
        v = p[i] - alpha / g[i]
        if v < 0.0:
            v = 0.0
        elif v > 1.0:
            v = 1.0
        x[i] = v
    return x


# ---------------------------------------------------------------------------
# randomized pairwise rounding of a point with integer coordinate sum


@jit
def pipage_round_inplace(y, uniforms, tol):
    """Round y in place to a 0/1 vector, preserving each marginal.

    Repeatedly merges the top two fractional coordinates; each merge keeps
    both expectations and the coordinate sum exact, and one of the pair
    becomes integral. Consumes at most one uniform per merge. Returns the
    number of merges.
    """
    n = y.shape[0]
    stack = np.empty(n, np.int64)
    top = 0
    for i in range(n):
        if tol < y[i] < 1.0 - tol:
            stack[top] = i
            top += 1
    used = 0
    while top >= 2:
        i = stack[top - 1]
        j = stack[top - 2]
        top -= 2
        yi = y[i]
        yj = y[j]
        s = yi + yj
        u = uniforms[used]
        used += 1
        if s < 1.0:
            if u < yj / s:
                y[i] = 0.0
                y[j] = s
            else:
                y[i] = s
                y[j] = 0.0
        else:
            if u < (1.0 - yi) / (2.0 - s):
                y[i] = s - 1.0
                y[j] = 1.0
            else:
                y[i] = 1.0
                y[j] = s - 1.0
        if tol < y[j] < 1.0 - tol:
            stack[top] = j
            top += 1
        if tol < y[i] < 1.0 - tol:
            stack[top] = i
            top += 1
    for i in range(n):
        if y[i] <= tol:
            y[i] = 0.0
        elif y[i] >= 1.0 - tol:
            y[i] = 1.0
    return used


# ---------------------------------------------------------------------------
# independent-cascade sampling over a directed graph in CSR form


@jit(nogil=True)
def ic_subgrad_batch(in_indptr, in_indices, in_prob, x, n_samples, seed):
    """Sum of per-sample ascent directions for the capped-sum bound.

    Each sample picks a uniform target node, grows the set of nodes with a
    live path to it by reverse BFS (each edge flipped at most once), and
    accumulates x over the visited nodes. If the running sum reaches 1 the
    sample contributes nothing; otherwise it contributes the indicator of
    the visited set. Divide by n_samples for an unbiased estimate.
    """
    n = x.shape[0]
    g = np.zeros(n)
    visited = np.zeros(n, np.int64)
    queue = np.empty(n, np.int64)
    for smp in range(n_samples):
        st = _sm_init(seed, smp)
        st, z = _sm_next(st)
        root = np.int64(z % np.uint64(n))
        stamp = np.int64(smp + 1)
        visited[root] = stamp
        queue[0] = root
        head = 0
        tail = 1
        tot = x[root]
        live = tot < 1.0
        while live and head < tail:
            v = queue[head]
            head += 1
            for e in range(in_indptr[v], in_indptr[v + 1]):
                w = in_indices[e]
                if visited[w] == stamp:
                    continue
                st, z = _sm_next(st)
                if _sm_u01(z) < in_prob[e]:
                    visited[w] = stamp
                    queue[tail] = w
                    tail += 1
                    tot += x[w]
                    if tot >= 1.0:
                        live = False
                        break
        if live:
            for q in range(tail):
                g[queue[q]] += 1.0
    return g


@jit
def reverse_reachable(in_indptr, in_indices, in_prob, root, seed):
    """One reverse-percolation set: nodes with a live path to root."""
    n = in_indptr.shape[0] - 1
    visited = np.zeros(n, np.uint8)
    queue = np.empty(n, np.int64)
    st = _sm_init(seed, 0)
    visited[root] = 1
    queue[0] = root
    head = 0
    tail = 1
    while head < tail:
        v = queue[head]
        head += 1
        for e in range(in_indptr[v], in_indptr[v + 1]):
            w = in_indices[e]
            if visited[w] != 0:
                continue
            st, z = _sm_next(st)
            if _sm_u01(z) < in_prob[e]:
                visited[w] = 1
                queue[tail] = w
                tail += 1
    return queue[:tail]


@jit(nogil=True)
def ic_reach_batch(out_indptr, out_indices, out_prob, seed_nodes, n_samples, seed):
    """Total nodes reached from seed_nodes over n_samples live-edge draws."""
    n = out_indptr.shape[0] - 1
    visited = np.zeros(n, np.int64)
    queue = np.empty(n, np.int64)
    total = 0
    for smp in range(n_samples):
        st = _sm_init(seed, smp)
        stamp = np.int64(smp + 1)
        tail = 0
        for q in range(seed_nodes.shape[0]):
            v = seed_nodes[q]
            if visited[v] != stamp:
                visited[v] = stamp
                queue[tail] = v
                tail += 1
        head = 0
        while head < tail:
            v = queue[head]
            head += 1
            for e in range(out_indptr[v], out_indptr[v + 1]):
                w = out_indices[e]
                if visited[w] == stamp:
                    continue
                st, z = _sm_next(st)
                if _sm_u01(z) < out_prob[e]:
                    visited[w] = stamp
                    queue[tail] = w
                    tail += 1
        total += tail
    return total


@jit(nogil=True)
def forward_reach_mask(out_indptr, out_indices, seed_nodes):
    """Deterministic multi-source reachability mask (all edges kept)."""
    n = out_indptr.shape[0] - 1
    visited = np.zeros(n, np.uint8)
    queue = np.empty(n, np.int64)
    tail = 0
    for q in range(seed_nodes.shape[0]):
        v = seed_nodes[q]
        if visited[v] == 0:
            visited[v] = 1
            queue[tail] = v
            tail += 1
    head = 0
    while head < tail:
        v = queue[head]
        head += 1
        for e in range(out_indptr[v], out_indptr[v + 1]):
            w = out_indices[e]
            if visited[w] == 0:
                visited[w] = 1
                queue[tail] = w
                tail += 1
    return visited


@jit(nogil=True)
def live_edge_counts(out_indptr, out_indices, out_prob, n_samples, seed, counts):
    """First pass of frozen-sample construction: live out-degree per node."""
    n = out_indptr.shape[0] - 1
    for smp in range(n_samples):
        st = _sm_init(seed, smp)
        for v in range(n):
            c = 0
            for e in range(out_indptr[v], out_indptr[v + 1]):
                st, z = _sm_next(st)
                if _sm_u01(z) < out_prob[e]:
                    c += 1
            counts[smp, v] = c


@jit(nogil=True)
def live_edge_fill(out_indptr, out_indices, out_prob, n_samples, seed,
                   indptr2d, indices_flat):
    """Second pass: replay the same draws and store the live edges."""
    n = out_indptr.shape[0] - 1
    for smp in range(n_samples):
        st = _sm_init(seed, smp)
        for v in range(n):
            pos = indptr2d[smp, v]
            for e in range(out_indptr[v], out_indptr[v + 1]):
                st, z = _sm_next(st)
                if _sm_u01(z) < out_prob[e]:
                    indices_flat[pos] = out_indices[e]
                    pos += 1


@jit(nogil=True)
def sampled_gain(indptr2d, indices_flat, reached, cand, commit):
    """Newly reachable node count across frozen sampled graphs.

    reached marks, per sample, the closure of everything committed so far,
    so the BFS may skip any already-reached node. With commit the new nodes
    are folded into reached.
    """
    n_samples = indptr2d.shape[0]
    n = reached.shape[1]
    queue = np.empty(n, np.int64)
    visited = np.zeros(n, np.int64)
    total = 0
    for smp in range(n_samples):
        if reached[smp, cand] != 0:
            continue
        stamp = np.int64(smp + 1)
        visited[cand] = stamp
        queue[0] = cand
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            for e in range(indptr2d[smp, v], indptr2d[smp, v + 1]):
                w = indices_flat[e]
                if reached[smp, w] == 0 and visited[w] != stamp:
                    visited[w] = stamp
                    queue[tail] = w
                    tail += 1
        total += tail
        if commit:
            for q in range(tail):
                reached[smp, queue[q]] = 1
    return total


# ---------------------------------------------------------------------------
# facility location: per-customer weights sorted descending, with the sorted
# order's original indices alongside


@jit
def facility_value(m, member):
    # empty selection serves nobody: each customer's best defaults to 0
    total = 0.0
    for y in range(m.shape[0]):
        best = 0.0
        for j in range(m.shape[1]):
            if member[j] != 0 and m[y, j] > best:
                best = m[y, j]
        total += best
    return total


@jit
def facility_concave(sorted_m, sorted_idx, x):
    ny, nf = sorted_m.shape
    total = 0.0
    for y in range(ny):
        cum = 0.0
        for i in range(nf):
            cum += x[sorted_idx[y, i]]
            if cum >= 1.0:
                # every later term is capped; the rest telescopes
                total += sorted_m[y, i]
                break
            nxt = sorted_m[y, i + 1] if i + 1 < nf else 0.0
            total += (sorted_m[y, i] - nxt) * cum
    return total


@jit
def facility_subgrad_row(sorted_m, sorted_idx, x, y, g):
    """Add customer y's ascent direction into g; returns nothing."""
    nf = sorted_m.shape[1]
    cum = 0.0
    h = nf
    for i in range(nf):
        cum += x[sorted_idx[y, i]]
        if cum >= 1.0:
            h = i
            break
    mh = sorted_m[y, h] if h < nf else 0.0
    for i in range(h):
        g[sorted_idx[y, i]] += sorted_m[y, i] - mh


@jit
def facility_subgrad_full(sorted_m, sorted_idx, x):
    g = np.zeros(x.shape[0])
    for y in range(sorted_m.shape[0]):
        facility_subgrad_row(sorted_m, sorted_idx, x, y, g)
    return g


@jit
def facility_multilinear(sorted_m, sorted_idx, x):
    ny, nf = sorted_m.shape
    total = 0.0
    for y in range(ny):
        prod = 1.0
        for i in range(nf):
            nxt = sorted_m[y, i + 1] if i + 1 < nf else 0.0
            prod *= 1.0 - x[sorted_idx[y, i]]
            total += (sorted_m[y, i] - nxt) * (1.0 - prod)
    return total


@jit
def facility_mlgrad_row(sorted_m, sorted_idx, x, y, g, tail_sum):
    """Add customer y's product-form gradient into g.

    tail_sum is scratch of length >= nf. Backward pass builds
    T_i = (m_i - m_{i+1}) + (1 - x_{i+1}) T_{i+1}; the gradient at sorted
    position i is T_i times the prefix product of (1 - x_j) for j < i.
    """
    nf = sorted_m.shape[1]
    tail_sum[nf - 1] = sorted_m[y, nf - 1]
    for i in range(nf - 2, -1, -1):
        step = sorted_m[y, i] - sorted_m[y, i + 1]
        tail_sum[i] = step + (1.0 - x[sorted_idx[y, i + 1]]) * tail_sum[i + 1]
    prefix = 1.0
    for i in range(nf):
        g[sorted_idx[y, i]] += prefix * tail_sum[i]
        prefix *= 1.0 - x[sorted_idx[y, i]]
