"""Numeric inner loops.

Each kernel exists as a loop implementation written in the numba-compatible
subset of Python (suffix ``_loops``) and, where the computation vectorizes, a
numpy implementation (suffix ``_numpy``). The public names bind to the jitted
loops when numba is enabled and to the numpy/pure path otherwise.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

# Gray-code enumeration recomputes row activities from scratch this often to
# keep incremental float drift bounded.
_RESYNC_PERIOD = 4096
_CHUNK_BITS = 16


# ---------------------------------------------------------------- shortest paths

def floyd_warshall_loops(dist):
    n = dist.shape[0]
    for k in range(n):
        for i in range(n):
            dik = dist[i, k]
            if dik == np.inf:
                continue
            for j in range(n):
                alt = dik + dist[k, j]
                if alt < dist[i, j]:
                    dist[i, j] = alt
    return dist


def floyd_warshall_numpy(dist):
    # Row k and column k are fixed points of iteration k, so the vectorized
    # update matches the in-place loop exactly.
    for k in range(dist.shape[0]):
        np.minimum(dist, dist[:, k, None] + dist[None, k, :], out=dist)
    return dist


# ------------------------------------------------------------- exclusion maxima

def exclusion_max_loops(pred, indptr, indices, weights):
    """``out[i, j]`` = longest edge from j to a neighbour off the route j -> i.

    ``pred[s, t]`` is the predecessor of t on the canonical path from s
    (``-1`` when ``t == s``).
    """
    n = pred.shape[0]
    out = np.zeros((n, n))
    mark = np.full(n, -1, dtype=np.int64)
    stamp = 0
    for j in range(n):
        for i in range(n):
            stamp += 1
            t = i
            while t != j:
                mark[t] = stamp
                t = pred[j, t]
            mark[j] = stamp
            best = 0.0
            for e in range(indptr[j], indptr[j + 1]):
                h = indices[e]
                if mark[h] != stamp and weights[e] > best:
                    best = weights[e]
            out[i, j] = best
    return out


def exclusion_max_numpy(pred, indptr, indices, weights):
    n = pred.shape[0]
    out = np.zeros((n, n))
    targets = np.arange(n)
    for j in range(n):
        nbrs = indices[indptr[j]:indptr[j + 1]]
        if nbrs.size == 0:
            continue
        w = weights[indptr[j]:indptr[j + 1]]
        on_route = np.zeros((n, nbrs.size), dtype=bool)
        pos = targets.copy()
        # Walk every route j -> i backwards simultaneously.
        while True:
            on_route |= pos[:, None] == nbrs[None, :]
            moving = pos != j
            if not moving.any():
                break
            pos = np.where(moving, pred[j, pos], j)
        masked = np.where(on_route, 0.0, w[None, :])
        out[:, j] = masked.max(axis=1)
    return out


# --------------------------------------------------------------- branch & bound

def bnb_search_loops(opt_ptr, opt_depot, opt_value, opt_weight, capacity,
                     open_cost, forced, use_bound, tol):
    """Depth-first maximization over one option per station.

    Stations are processed in index order and their options in the order
    given (ascending depot id), so the first incumbent reaching the optimum
    is the lexicographically smallest optimal assignment. Opening costs are
    charged the first time a non-forced depot is used.

    Returns ``(found, best_choice, best_value, nodes, fail_station)`` where
    ``best_choice[s]`` indexes into the option arrays and ``fail_station`` is
    the deepest station that ran out of options (``-1`` if none did).
    """
    n = opt_ptr.shape[0] - 1
    n_depots = capacity.shape[0]
    residual = capacity.copy()
    use_count = np.zeros(n_depots, dtype=np.int64)
    choice = np.full(n, -1, dtype=np.int64)
    saved_residual = np.zeros(n)
    value_at = np.zeros(n + 1)
    best_choice = np.full(n, -1, dtype=np.int64)
    excess = np.zeros(n_depots)

    base = 0.0
    for d in range(n_depots):
        if forced[d]:
            base -= open_cost[d]
    value_at[0] = base

    found = False
    best_value = -np.inf
    nodes = 1
    fail_station = -1
    fail_depth = -1

    if n == 0:
        return True, best_choice, base, nodes, fail_station

    depth = 0
    while depth >= 0:
        if depth == n:
            if value_at[n] > best_value + tol:
                best_value = value_at[n]
                found = True
                for s in range(n):
                    best_choice[s] = choice[s]
            depth -= 1
            continue

        # Undo the previous option tried at this depth.
        k = choice[depth]
        if k >= 0:
            d = opt_depot[k]
            residual[d] = saved_residual[depth]
            use_count[d] -= 1
            start = k + 1
        else:
            start = opt_ptr[depth]

        nxt = -1
        for kk in range(start, opt_ptr[depth + 1]):
            if opt_weight[kk] <= residual[opt_depot[kk]] + tol:
                nxt = kk
                break
        if nxt < 0:
            if choice[depth] < 0 and depth > fail_depth:
                fail_depth = depth
                fail_station = depth
            choice[depth] = -1
            depth -= 1
            continue

        d = opt_depot[nxt]
        choice[depth] = nxt
        saved_residual[depth] = residual[d]
        residual[d] -= opt_weight[nxt]
        value = value_at[depth] + opt_value[nxt]
        if use_count[d] == 0 and not forced[d]:
            value -= open_cost[d]
        use_count[d] += 1
        value_at[depth + 1] = value
        nodes += 1

        if use_bound and depth + 1 < n:
            # Two admissible bounds on the remaining stations: the plain
            # best-option sum, and best open option plus the net gain any
            # still-closed depot could add after paying its opening cost.
            plain = 0.0
            open_part = 0.0
            dead = False
            for d2 in range(n_depots):
                excess[d2] = 0.0
            for s in range(depth + 1, n):
                best_any = -np.inf
                best_open = -np.inf
                for kk in range(opt_ptr[s], opt_ptr[s + 1]):
                    d2 = opt_depot[kk]
                    if opt_weight[kk] > residual[d2] + tol:
                        continue
                    v = opt_value[kk]
                    if v > best_any:
                        best_any = v
                    if (use_count[d2] > 0 or forced[d2]) and v > best_open:
                        best_open = v
                if best_any == -np.inf:
                    dead = True
                    if s > fail_depth:
                        fail_depth = s
                        fail_station = s
                    break
                plain += best_any
                if best_open == -np.inf:
                    open_part += best_any
                else:
                    open_part += best_open
                    for kk in range(opt_ptr[s], opt_ptr[s + 1]):
                        d2 = opt_depot[kk]
                        if use_count[d2] > 0 or forced[d2]:
                            continue
                        if opt_weight[kk] > residual[d2] + tol:
                            continue
                        if opt_value[kk] > best_open:
                            excess[d2] += opt_value[kk] - best_open
            if dead:
                continue
            for d2 in range(n_depots):
                gain = excess[d2] - open_cost[d2]
                if gain > 0.0:
                    open_part += gain
            bound = plain if plain < open_part else open_part
            if value + bound <= best_value + tol:
                continue

        depth += 1
        if depth < n:
            choice[depth] = -1

    return found, best_choice, best_value, nodes, fail_station


# ------------------------------------------------------------------ brute force
#
# The oracle maximizes c @ x over binary x subject to the rows. The optimum
# is the largest feasible value; the returned vector is the one with the
# smallest tie-break key among feasible vectors within ``tol`` of it. Values
# of feasible vectors are summed sequentially in variable order so both
# backends report bit-identical objectives.

def _row_ok(act, rhs, is_eq, tol):
    scale = tol * (1.0 + abs(rhs))
    if is_eq:
        return abs(act - rhs) <= scale
    return act <= rhs + scale


def _mask_key(mask, prefer_one, n):
    key = 0
    for k in range(n):
        bit = (mask >> k) & 1
        if bit != prefer_one[k]:
            key |= 1 << (n - 1 - k)
    return key


def _gray_scan(n, col_ptr, col_rows, col_vals, c, rhs, is_eq, prefer_one, tol,
               threshold, pick_key):
    m = rhs.shape[0]
    act = np.zeros(m)
    violated = 0
    for r in range(m):
        if not _row_ok(0.0, rhs[r], is_eq[r], tol):
            violated += 1
    found = False
    best_value = -np.inf
    best_mask = 0
    best_key = 0
    mask = 0
    for t in range(1 << n):
        if t > 0:
            bit = 0
            tt = t
            while (tt & 1) == 0:
                tt >>= 1
                bit += 1
            mask ^= 1 << bit
            sign = 1.0 if (mask >> bit) & 1 else -1.0
            for e in range(col_ptr[bit], col_ptr[bit + 1]):
                r = col_rows[e]
                before = _row_ok(act[r], rhs[r], is_eq[r], tol)
                act[r] += sign * col_vals[e]
                after = _row_ok(act[r], rhs[r], is_eq[r], tol)
                if before and not after:
                    violated += 1
                elif after and not before:
                    violated -= 1
            if t % _RESYNC_PERIOD == 0:
                for r in range(m):
                    act[r] = 0.0
                for k in range(n):
                    if (mask >> k) & 1:
                        for e in range(col_ptr[k], col_ptr[k + 1]):
                            act[col_rows[e]] += col_vals[e]
                violated = 0
                for r in range(m):
                    if not _row_ok(act[r], rhs[r], is_eq[r], tol):
                        violated += 1
        if violated != 0:
            continue
        value = 0.0
        for k in range(n):
            if (mask >> k) & 1:
                value += c[k]
        if not pick_key:
            if value > best_value:
                best_value = value
                found = True
        elif value >= threshold:
            key = _mask_key(mask, prefer_one, n)
            if not found or key < best_key:
                found = True
                best_key = key
                best_mask = mask
                best_value = value
    return found, best_mask, best_value


def bruteforce_loops(n, col_ptr, col_rows, col_vals, c, rhs, is_eq, prefer_one, tol):
    """Enumerate all ``2**n`` binary vectors (Gray-code order), twice.

    Returns ``(found, best_mask, best_value)``.
    """
    found, _, top = _gray_scan(n, col_ptr, col_rows, col_vals, c, rhs, is_eq,
                               prefer_one, tol, 0.0, False)
    if not found:
        return False, 0, -np.inf
    return _gray_scan(n, col_ptr, col_rows, col_vals, c, rhs, is_eq,
                      prefer_one, tol, top - tol, True)


def _feasible_chunks(n, col_ptr, col_rows, col_vals, c, rhs, is_eq, tol):
    m = rhs.shape[0]
    a = np.zeros((m, n))
    for k in range(n):
        lo, hi = col_ptr[k], col_ptr[k + 1]
        np.add.at(a, (col_rows[lo:hi], k), col_vals[lo:hi])
    shifts = np.arange(n, dtype=np.int64)
    scale = tol * (1.0 + np.abs(rhs))
    is_eq = is_eq.astype(bool)
    total = 1 << n
    step = 1 << _CHUNK_BITS
    for start in range(0, total, step):
        masks = np.arange(start, min(start + step, total), dtype=np.int64)
        bits = (masks[:, None] >> shifts[None, :]) & 1
        x = bits.astype(float)
        act = x @ a.T
        ok = np.where(is_eq[None, :], np.abs(act - rhs) <= scale, act <= rhs + scale)
        feas = ok.all(axis=1)
        if not feas.any():
            continue
        bits = bits[feas]
        # cumsum is strictly sequential, matching the loop backend.
        values = np.cumsum(bits * c[None, :], axis=1)[:, -1] if n else np.zeros(len(bits))
        yield masks[feas], bits, values


def bruteforce_numpy(n, col_ptr, col_rows, col_vals, c, rhs, is_eq, prefer_one, tol):
    top = -np.inf
    found = False
    for _, _, values in _feasible_chunks(n, col_ptr, col_rows, col_vals, c, rhs, is_eq, tol):
        found = True
        top = max(top, float(values.max()))
    if not found:
        return False, 0, -np.inf
    key_weights = np.left_shift(np.int64(1), np.arange(n - 1, -1, -1, dtype=np.int64))
    best_key, best_mask, best_value = None, 0, -np.inf
    for masks, bits, values in _feasible_chunks(n, col_ptr, col_rows, col_vals, c, rhs, is_eq, tol):
        near = values >= top - tol
        if not near.any():
            continue
        keys = ((bits[near] != prefer_one[None, :]).astype(np.int64) * key_weights).sum(axis=1)
        pick = int(np.argmin(keys))
        if best_key is None or keys[pick] < best_key:
            best_key = int(keys[pick])
            best_mask = int(masks[near][pick])
            best_value = float(values[near][pick])
    return True, best_mask, best_value


if USE_NUMBA:
    _row_ok = njit(_row_ok)
    _mask_key = njit(_mask_key)
    _gray_scan = njit(_gray_scan)
    floyd_warshall = njit(floyd_warshall_loops)
    exclusion_max = njit(exclusion_max_loops)
    bnb_search = njit(bnb_search_loops)
    bruteforce = njit(bruteforce_loops)
else:
    floyd_warshall = floyd_warshall_numpy
    exclusion_max = exclusion_max_numpy
    bnb_search = bnb_search_loops
    bruteforce = bruteforce_numpy
