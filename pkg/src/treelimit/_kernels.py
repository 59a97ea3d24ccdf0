"""Compiled inner loops.

Everything here works on flat integer/float arrays only so that the public
classes can stay plain Python wrappers.  Kernels that need randomness take an
integer ``seed`` and seed numba's internal generator; callers derive that seed
from a :class:`numpy.random.Generator`, which keeps runs reproducible.
"""

import numpy as np
from numba import njit


# ---------------------------------------------------------------------------
# tree structure
# ---------------------------------------------------------------------------


@njit(cache=True)
def bfs_order(n, child_ptr, child_idx):
    """Breadth-first order from vertex 0 and the depth of every vertex.

    Returns ``(order, depth, count)``; ``count < n`` means some vertices are
    unreachable from the root (the parent array contains a cycle).
    """
    order = np.empty(n, np.int64)
    depth = np.full(n, -1, np.int64)
    order[0] = 0
    depth[0] = 0
    head = 0
    tail = 1
    while head < tail:
        v = order[head]
        head += 1
        for j in range(child_ptr[v], child_ptr[v + 1]):
            c = child_idx[j]
            if depth[c] >= 0:
                continue
            depth[c] = depth[v] + 1
            order[tail] = c
            tail += 1
    return order, depth, tail


@njit(cache=True)
def preorder(n, child_ptr, child_idx):
    """Depth-first preorder with children visited in stored order."""
    out = np.empty(n, np.int64)
    stack = np.empty(n, np.int64)
    top = 0
    stack[0] = 0
    top = 1
    k = 0
    while top > 0:
        top -= 1
        v = stack[top]
        out[k] = v
        k += 1
        for j in range(child_ptr[v + 1] - 1, child_ptr[v] - 1, -1):
            stack[top] = child_idx[j]
            top += 1
    return out


@njit(cache=True)
def subtree_sizes(parent, bfs):
    n = parent.shape[0]
    size = np.ones(n, np.int64)
    for i in range(n - 1, 0, -1):
        v = bfs[i]
        size[parent[v]] += size[v]
    return size


@njit(cache=True)
def decode_preorder(degrees):
    """Parent array of the ordered tree with preorder outdegrees ``degrees``.

    The caller has already validated the Lukasiewicz path.
    """
    n = degrees.shape[0]
    parent = np.empty(n, np.int64)
    parent[0] = -1
    stack = np.empty(n, np.int64)
    remaining = np.empty(n, np.int64)
    top = 0
    if degrees[0] > 0:
        stack[0] = 0
        remaining[0] = degrees[0]
        top = 1
    for i in range(1, n):
        p = stack[top - 1]
        parent[i] = p
        remaining[top - 1] -= 1
        if remaining[top - 1] == 0:
            top -= 1
        if degrees[i] > 0:
            stack[top] = i
            remaining[top] = degrees[i]
            top += 1
    return parent


@njit(cache=True)
def cycle_lemma_start(degrees):
    """Index at which the unique valid rotation of ``degrees`` starts."""
    n = degrees.shape[0]
    s = 0
    best = 1
    best_k = 0
    for k in range(n):
        s += degrees[k] - 1
        if s < best:
            best = s
            best_k = k + 1
    return best_k % n


# ---------------------------------------------------------------------------
# distances
# ---------------------------------------------------------------------------


@njit(cache=True)
def euler_tour(n, child_ptr, child_idx, depth):
    m = 2 * n - 1
    tour = np.empty(m, np.int64)
    first = np.empty(n, np.int64)
    # explicit stack of (vertex, next child slot)
    stack_v = np.empty(n, np.int64)
    stack_j = np.empty(n, np.int64)
    top = 1
    stack_v[0] = 0
    stack_j[0] = child_ptr[0]
    k = 0
    tour[0] = 0
    first[0] = 0
    k = 1
    while top > 0:
        v = stack_v[top - 1]
        j = stack_j[top - 1]
        if j < child_ptr[v + 1]:
            stack_j[top - 1] = j + 1
            c = child_idx[j]
            first[c] = k
            tour[k] = c
            k += 1
            stack_v[top] = c
            stack_j[top] = child_ptr[c]
            top += 1
        else:
            top -= 1
            if top > 0:
                tour[k] = stack_v[top - 1]
                k += 1
    return tour, first


@njit(cache=True)
def sparse_table(values):
    """Argmin sparse table over ``values``; row k covers windows of 2**k."""
    m = values.shape[0]
    levels = 1
    while (1 << levels) <= m:
        levels += 1
    table = np.empty((levels, m), np.int32)
    for i in range(m):
        table[0, i] = i
    for k in range(1, levels):
        half = 1 << (k - 1)
        for i in range(m - (1 << k) + 1):
            a = table[k - 1, i]
            b = table[k - 1, i + half]
            table[k, i] = a if values[a] <= values[b] else b
    return table


@njit(cache=True)
def range_argmin(table, values, lo, hi):
    """Position of the minimum of ``values[lo..hi]`` (inclusive, lo <= hi)."""
    length = hi - lo + 1
    k = 0
    while (1 << (k + 1)) <= length:
        k += 1
    a = table[k, lo]
    b = table[k, hi - (1 << k) + 1]
    return a if values[a] <= values[b] else b


@njit(cache=True)
def lca_batch(table, tour, tour_depth, first, us, vs):
    out = np.empty(us.shape[0], np.int64)
    for i in range(us.shape[0]):
        a = first[us[i]]
        b = first[vs[i]]
        if a > b:
            a, b = b, a
        out[i] = tour[range_argmin(table, tour_depth, a, b)]
    return out


@njit(cache=True)
def walk_lca_batch(parent, depth, us, vs):
    out = np.empty(us.shape[0], np.int64)
    for i in range(us.shape[0]):
        u = us[i]
        v = vs[i]
        while depth[u] > depth[v]:
            u = parent[u]
        while depth[v] > depth[u]:
            v = parent[v]
        while u != v:
            u = parent[u]
            v = parent[v]
        out[i] = u
    return out


@njit(cache=True)
def all_pairs_distance_counts(n, child_ptr, child_idx, parent):
    """counts[d] = number of ordered pairs (u, v) at distance d, via BFS."""
    counts = np.zeros(n, np.int64)
    dist = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    for s in range(n):
        for i in range(n):
            dist[i] = -1
        dist[s] = 0
        queue[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            counts[dist[v]] += 1
            p = parent[v]
            if p >= 0 and dist[p] < 0:
                dist[p] = dist[v] + 1
                queue[tail] = p
                tail += 1
            for j in range(child_ptr[v], child_ptr[v + 1]):
                c = child_idx[j]
                if dist[c] < 0:
                    dist[c] = dist[v] + 1
                    queue[tail] = c
                    tail += 1
    return counts


@njit(cache=True)
def bfs_from(source, child_ptr, child_idx, parent):
    n = parent.shape[0]
    dist = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    dist[source] = 0
    queue[0] = source
    head = 0
    tail = 1
    while head < tail:
        v = queue[head]
        head += 1
        p = parent[v]
        if p >= 0 and dist[p] < 0:
            dist[p] = dist[v] + 1
            queue[tail] = p
            tail += 1
        for j in range(child_ptr[v], child_ptr[v + 1]):
            c = child_idx[j]
            if dist[c] < 0:
                dist[c] = dist[v] + 1
                queue[tail] = c
                tail += 1
    return dist


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


@njit(cache=True)
def _fenwick_add(tree, i, delta):
    m = tree.shape[0]
    i += 1
    while i < m:
        tree[i] += delta
        i += i & (-i)


@njit(cache=True)
def _fenwick_find(tree, target, top_bit):
    """Smallest 0-based index whose prefix sum exceeds ``target``."""
    pos = 0
    bit = top_bit
    m = tree.shape[0]
    while bit > 0:
        nxt = pos + bit
        if nxt < m and tree[nxt] <= target:
            pos = nxt
            target -= tree[nxt]
        bit >>= 1
    return pos


@njit(cache=True)
def linear_attachment(n, chi, rho, seed):
    """Preferential attachment with rate chi*outdeg + rho.

    Returns the parent array, or an array whose first entry is -2 when a
    negative rate was reached.
    """
    np.random.seed(seed)
    parent = np.empty(n, np.int64)
    parent[0] = -1
    if n == 1:
        return parent
    outdeg = np.zeros(n, np.int64)
    tree = np.zeros(n + 1, np.float64)
    top_bit = 1
    while top_bit * 2 <= n:
        top_bit *= 2
    total = rho
    _fenwick_add(tree, 0, rho)
    for i in range(1, n):
        while True:
            u = np.random.random() * total
            v = _fenwick_find(tree, u, top_bit)
            if v < i and chi * outdeg[v] + rho > 0.0:
                break
        parent[i] = v
        outdeg[v] += 1
        new_rate = chi * outdeg[v] + rho
        if new_rate < -1e-9:
            parent[0] = -2
            return parent
        if new_rate < 0.0:
            new_rate = 0.0
        old_rate = chi * (outdeg[v] - 1) + rho
        _fenwick_add(tree, v, new_rate - old_rate)
        _fenwick_add(tree, i, rho)
        total += new_rate - old_rate + rho
    return parent


@njit(cache=True)
def permutation_bst(n, seed):
    """Binary search tree built by inserting a uniform random permutation.

    Vertices are numbered by insertion order.
    """
    np.random.seed(seed)
    keys = np.random.permutation(n)
    parent = np.empty(n, np.int64)
    side = np.zeros(n, np.int8)
    left = np.full(n, -1, np.int64)
    right = np.full(n, -1, np.int64)
    parent[0] = -1
    for i in range(1, n):
        k = keys[i]
        v = 0
        while True:
            if k < keys[v]:
                if left[v] < 0:
                    left[v] = i
                    side[i] = 0
                    break
                v = left[v]
            else:
                if right[v] < 0:
                    right[v] = i
                    side[i] = 1
                    break
                v = right[v]
        parent[i] = v
    return parent, side


@njit(cache=True)
def _draw_split(kind, params, b):
    out = np.empty(b, np.float64)
    if kind == 0:  # dirichlet(params)
        s = 0.0
        for i in range(b):
            out[i] = np.random.gamma(params[i], 1.0)
            s += out[i]
        for i in range(b):
            out[i] /= s
    else:  # fixed vector
        for i in range(b):
            out[i] = params[i]
    return out


@njit(cache=True)
def _route(split_row, b):
    u = np.random.random()
    acc = 0.0
    for i in range(b):
        acc += split_row[i]
        if u < acc:
            return i
    # rounding: fall back to the last child with positive mass
    for i in range(b - 1, -1, -1):
        if split_row[i] > 0.0:
            return i
    return b - 1


@njit(cache=True)
def split_tree(n_balls, b, s, s0, s1, kind, params, seed):
    """Devroye split tree.

    Returns ``(parent, slot, balls, n_vertices)`` with arrays sized to a
    capacity bound; only the first ``n_vertices`` entries are meaningful.
    """
    np.random.seed(seed)
    cap = 16
    parent = np.empty(cap, np.int64)
    slot = np.zeros(cap, np.int64)
    balls = np.zeros(cap, np.int64)
    internal = np.zeros(cap, np.bool_)
    children = np.full((cap, b), -1, np.int64)
    splits = np.zeros((cap, b), np.float64)
    parent[0] = -1
    nv = 1
    pending = np.empty(64, np.int64)
    for _ in range(n_balls):
        top = 0
        pending[0] = 0
        top = 1
        while top > 0:
            top -= 1
            v = pending[top]
            if internal[v]:
                # pass the ball down
                i = _route(splits[v], b)
                c = children[v, i]
                if c < 0:
                    if nv == cap:
                        cap *= 2
                        parent = _grow1(parent, cap)
                        slot = _grow1(slot, cap)
                        balls = _grow1(balls, cap)
                        internal = _grow_b(internal, cap)
                        children = _grow2(children, cap, -1)
                        splits = _grow2f(splits, cap)
                    c = nv
                    nv += 1
                    parent[c] = v
                    slot[c] = i
                    children[v, i] = c
                if top + 1 >= pending.shape[0]:
                    pending = _grow1(pending, 2 * pending.shape[0])
                pending[top] = c
                top += 1
                continue
            balls[v] += 1
            if balls[v] <= s:
                continue
            # overflow: keep s0, s1 to every child, rest routed by the split vector
            internal[v] = True
            splits[v] = _draw_split(kind, params, b)
            moving = balls[v] - s0
            balls[v] = s0
            need = moving + 1
            if top + need >= pending.shape[0]:
                pending = _grow1(pending, 2 * (top + need))
            for i in range(b):
                for _k in range(s1):
                    c = children[v, i]
                    if c < 0:
                        if nv == cap:
                            cap *= 2
                            parent = _grow1(parent, cap)
                            slot = _grow1(slot, cap)
                            balls = _grow1(balls, cap)
                            internal = _grow_b(internal, cap)
                            children = _grow2(children, cap, -1)
                            splits = _grow2f(splits, cap)
                        c = nv
                        nv += 1
                        parent[c] = v
                        slot[c] = i
                        children[v, i] = c
                    pending[top] = c
                    top += 1
                    moving -= 1
            for _k in range(moving):
                pending[top] = v
                top += 1
    return parent, slot, balls, nv


@njit(cache=True)
def _grow1(a, cap):
    out = np.zeros(cap, a.dtype)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def _grow_b(a, cap):
    out = np.zeros(cap, np.bool_)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def _grow2(a, cap, fill):
    out = np.full((cap, a.shape[1]), fill, a.dtype)
    out[: a.shape[0]] = a
    return out


@njit(cache=True)
def _grow2f(a, cap):
    out = np.zeros((cap, a.shape[1]), np.float64)
    out[: a.shape[0]] = a
    return out


# ---------------------------------------------------------------------------
# O(n) constructions
# ---------------------------------------------------------------------------


@njit(cache=True)
def csr_children(parent):
    """Children lists (sorted by index) by counting sort; also reports whether
    every parent precedes its child."""
    n = parent.shape[0]
    ptr = np.zeros(n + 1, np.int64)
    monotone = True
    for v in range(1, n):
        p = parent[v]
        ptr[p + 1] += 1
        if p >= v:
            monotone = False
    for v in range(n):
        ptr[v + 1] += ptr[v]
    fill = ptr[:-1].copy()
    idx = np.empty(max(n - 1, 0), np.int64)
    for v in range(1, n):
        p = parent[v]
        idx[fill[p]] = v
        fill[p] += 1
    return ptr, idx, monotone


@njit(cache=True)
def monotone_depth(parent):
    n = parent.shape[0]
    depth = np.zeros(n, np.int64)
    for v in range(1, n):
        depth[v] = depth[parent[v]] + 1
    return depth


@njit(cache=True)
def urn_attachment(n, chi, rho, seed):
    """Linear attachment for chi >= 0 in O(1) per vertex.

    Total rate before vertex i arrives is chi*(i-1) + rho*i: with probability
    chi*(i-1)/total the parent is the parent of a uniform non-root vertex
    (i.e. chosen proportionally to outdegree), otherwise a uniform vertex.
    """
    np.random.seed(seed)
    parent = np.empty(n, np.int64)
    parent[0] = -1
    for i in range(1, n):
        edge_mass = chi * (i - 1)
        total = edge_mass + rho * i
        if np.random.random() * total < edge_mass:
            parent[i] = parent[1 + np.random.randint(0, i - 1)]
        else:
            parent[i] = np.random.randint(0, i)
    return parent


@njit(cache=True)
def slot_attachment(n, b, seed):
    """Attachment with rate proportional to b - outdeg: uniform free slot."""
    np.random.seed(seed)
    parent = np.empty(n, np.int64)
    parent[0] = -1
    slots = np.empty(b * n, np.int64)
    free = 0
    for j in range(b):
        slots[free] = 0
        free += 1
    for i in range(1, n):
        k = np.random.randint(0, free)
        v = slots[k]
        free -= 1
        slots[k] = slots[free]
        parent[i] = v
        for j in range(b):
            slots[free] = i
            free += 1
    return parent


@njit(cache=True)
def cartesian_bst(n, seed):
    """BST of a uniform random permutation via its Cartesian tree.

    Keys 0..n-1 in order, priority = insertion time; the min-priority
    Cartesian tree equals the insertion BST.  Vertices are relabelled by
    insertion time, so the root is vertex 0 and parents precede children.
    """
    np.random.seed(seed)
    order = np.random.permutation(n)  # order[t] = key inserted at time t
    prio = np.empty(n, np.int64)
    for t in range(n):
        prio[order[t]] = t
    par_key = np.full(n, -1, np.int64)
    stack = np.empty(n, np.int64)
    top = 0
    for key in range(n):
        last = -1
        while top > 0 and prio[stack[top - 1]] > prio[key]:
            last = stack[top - 1]
            top -= 1
        if last >= 0:
            par_key[last] = key
        if top > 0:
            par_key[key] = stack[top - 1]
        stack[top] = key
        top += 1
    parent = np.empty(n, np.int64)
    for key in range(n):
        pk = par_key[key]
        parent[prio[key]] = -1 if pk < 0 else prio[pk]
    return parent


@njit(cache=True)
def split_tree_counts(n_balls, b, s, s0, s1, kind, params, seed):
    """Split tree by recursive splitting of ball counts.

    A vertex receiving m > s balls keeps s0, gives s1 to each child and sends
    the remaining m - s0 - b*s1 multinomially by its split vector; since
    routed balls choose children independently this is the same law as
    inserting the balls one at a time.  Vertices are numbered in BFS order.
    """
    np.random.seed(seed)
    cap = 2 * n_balls + 16
    parent = np.empty(cap, np.int64)
    slot = np.zeros(cap, np.int64)
    load = np.empty(cap, np.int64)  # balls entering the subtree
    balls = np.zeros(cap, np.int64)
    parent[0] = -1
    load[0] = n_balls
    nv = 1
    head = 0
    while head < nv:
        v = head
        head += 1
        m = load[v]
        if m <= s:
            balls[v] = m
            continue
        balls[v] = s0
        rest = m - s0 - b * s1
        vec = _draw_split(kind, params, b)
        left = 1.0
        for i in range(b):
            if i == b - 1:
                k = rest
            elif left <= 0.0:
                k = 0
            else:
                q = vec[i] / left
                if q > 1.0:
                    q = 1.0
                k = np.random.binomial(rest, q) if rest > 0 else 0
            rest -= k
            left -= vec[i]
            k += s1
            if k > 0:
                if nv == cap:
                    cap *= 2
                    parent = _grow1(parent, cap)
                    slot = _grow1(slot, cap)
                    load = _grow1(load, cap)
                    balls = _grow1(balls, cap)
                parent[nv] = v
                slot[nv] = i
                load[nv] = k
                nv += 1
    return parent, slot, balls, nv


@njit(cache=True)
def excursion_distances(table, g, s_idx, t_idx):
    """g[s] + g[t] - 2 min g over [s, t] for each pair of grid indices."""
    out = np.empty(s_idx.shape[0])
    for i in range(s_idx.shape[0]):
        a = s_idx[i]
        b = t_idx[i]
        if a > b:
            a, b = b, a
        k = range_argmin(table, g, a, b)
        out[i] = g[a] + g[b] - 2.0 * g[k]
    return out
