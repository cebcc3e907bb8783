"""Pure-Python / numpy implementations of the hot kernels.

Mirrors the compiled module in `_native.pyx` operation for operation: the
max-flow follows the identical arc ordering and traversal so both backends
return the same cut, and the CG / stretch kernels evaluate the same
recurrences (summation order may differ at float rounding level).
"""

import numpy as np
from scipy.sparse import csr_matrix

NAME = "python"


def max_flow(cap_source, cap_sink, first, arc_head, arc_rev, arc_cap):
    """Dinic max-flow between implicit terminals.

    cap_source[i] / cap_sink[i] are the s->i / i->t capacities; node arcs
    are CSR-grouped by tail with arc_rev mapping each arc to its reverse.
    Capacity arrays are consumed (residuals on return).  Returns
    (flow value, source_side bool array).
    """
    n = len(cap_source)
    level = np.empty(n, dtype=np.int64)
    ptr = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    path_nodes = np.empty(n + 2, dtype=np.int64)
    path_arcs = np.empty(n + 2, dtype=np.int64)
    total = 0.0

    while True:
        # Breadth-first level graph from the source.
        level[:] = -1
        qt = 0
        t_level = -1
        for i in range(n):
            if cap_source[i] > 0.0:
                level[i] = 0
                queue[qt] = i
                qt += 1
                if t_level < 0 and cap_sink[i] > 0.0:
                    t_level = 1
        qh = 0
        while qh < qt:
            v = queue[qh]
            qh += 1
            if t_level >= 0 and level[v] >= t_level - 1:
                continue
            for k in range(first[v], first[v + 1]):
                h = arc_head[k]
                if arc_cap[k] > 0.0 and level[h] < 0:
                    level[h] = level[v] + 1
                    queue[qt] = h
                    qt += 1
                    if t_level < 0 and cap_sink[h] > 0.0:
                        t_level = level[h] + 1
        if t_level < 0:
            break

        # Blocking flow via pointer-based depth-first walks.
        ptr[:] = first[:n]
        for si in range(n):
            if level[si] != 0 or cap_source[si] <= 0.0:
                continue
            while cap_source[si] > 0.0:
                path_nodes[0] = si
                depth = 0
                v = si
                found = False
                while True:
                    if cap_sink[v] > 0.0 and level[v] == t_level - 1:
                        found = True
                        break
                    advanced = False
                    while ptr[v] < first[v + 1]:
                        k = ptr[v]
                        h = arc_head[k]
                        if arc_cap[k] > 0.0 and level[h] == level[v] + 1 and level[h] < t_level:
                            path_arcs[depth] = k
                            depth += 1
                            path_nodes[depth] = h
                            v = h
                            advanced = True
                            break
                        ptr[v] += 1
                    if advanced:
                        continue
                    if depth == 0:
                        break
                    depth -= 1
                    v = path_nodes[depth]
                    ptr[v] += 1
                if not found:
                    break
                delta = cap_source[si]
                if cap_sink[v] < delta:
                    delta = cap_sink[v]
                for d in range(depth):
                    if arc_cap[path_arcs[d]] < delta:
                        delta = arc_cap[path_arcs[d]]
                cap_source[si] -= delta
                cap_sink[v] -= delta
                for d in range(depth):
                    k = path_arcs[d]
                    arc_cap[k] -= delta
                    arc_cap[arc_rev[k]] += delta
                total += delta

    return total, level >= 0


def cg_solve(indptr, indices, data, diag, rhs, x0, const_term, rel_tol, max_iter):
    """Jacobi-preconditioned conjugate gradients on L x = rhs.

    Monitors the gradient of f(x) = x'Lx - 2 x'rhs + const_term (that is,
    2*(Lx - rhs)); stops when its norm is <= rel_tol * (1 + f).  Returns
    (x, f, grad_norm, iterations, converged).
    """
    nf = len(rhs)
    x = x0.astype(np.float64, copy=True)
    if nf == 0:
        return x, float(const_term), 0.0, 0, True
    mat = csr_matrix((data, indices, indptr), shape=(nf, nf))
    inv_diag = 1.0 / np.where(diag > 0.0, diag, 1.0)

    r = rhs - mat.dot(x)
    z = r * inv_diag
    p = z.copy()
    rz = float(r.dot(z))
    iters = 0
    while True:
        f = float(const_term - x.dot(rhs) - x.dot(r))
        grad_norm = 2.0 * float(np.sqrt(r.dot(r)))
        if grad_norm <= rel_tol * (1.0 + f):
            return x, f, grad_norm, iters, True
        if iters >= max_iter:
            return x, f, grad_norm, iters, False
        q = mat.dot(p)
        pq = float(p.dot(q))
        if pq <= 0.0:
            return x, f, grad_norm, iters, False
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        z = r * inv_diag
        rz_new = float(r.dot(z))
        p = z + (rz_new / rz) * p
        rz = rz_new
        iters += 1


def smooth_sweep(labels, neighbors):
    """One sequential boundary-smoothing sweep over triangles, in place.

    A triangle whose neighbors across two chart-boundary edges share a
    label different from its own takes that label immediately (ascending
    triangle order), so later triangles see earlier updates.  Returns the
    number of relabeled triangles.
    """
    changed = 0
    n = len(labels)
    for t in range(n):
        own = labels[t]
        n0 = labels[neighbors[t, 0]]
        n1 = labels[neighbors[t, 1]]
        n2 = labels[neighbors[t, 2]]
        if n0 != own and n1 != own and n0 == n1:
            new = n0
        elif n0 != own and n2 != own and n0 == n2:
            new = n0
        elif n1 != own and n2 != own and n1 == n2:
            new = n1
        else:
            continue
        labels[t] = new
        changed += 1
    return changed


def stretch_metrics(shape_inv, deformed, clamp):
    """Per-triangle stretch and area-scale terms from 2x2 Jacobians.

    J = deformed @ shape_inv per triangle.  Returns (ew, da) where ew is
    s1 + s2 + 1/(s1 s2) + s1/s2 + s2/s1 - 4 over the singular values,
    clamped to `clamp` for flipped (det < 0), near-degenerate (s2 < 1e-9)
    or overflowing triangles, and da = (s1 s2 + 1/(s1 s2)) / 2 with the
    same degeneracy clamp.
    """
    jac = np.einsum("tij,tjk->tik", deformed, shape_inv)
    a = jac[:, 0, 0]
    b = jac[:, 0, 1]
    c = jac[:, 1, 0]
    d = jac[:, 1, 1]
    e = 0.5 * (a + d)
    f = 0.5 * (a - d)
    g = 0.5 * (c + b)
    h = 0.5 * (c - b)
    q = np.hypot(e, h)
    r = np.hypot(f, g)
    s1 = q + r
    s2 = q - r  # negative iff det(J) < 0

    ok = s2 >= 1e-9
    s1s = np.where(ok, s1, 1.0)
    s2s = np.where(ok, s2, 1.0)
    ew = s1s + s2s + 1.0 / (s1s * s2s) + s1s / s2s + s2s / s1s - 4.0
    ew = np.where(ok & (ew <= clamp), ew, clamp)

    prod = s1 * np.abs(s2)
    ok_area = prod >= 1e-18
    prod_s = np.where(ok_area, prod, 1.0)
    da = 0.5 * (prod_s + 1.0 / prod_s)
    da = np.where(ok_area & (da <= clamp), da, clamp)
    return ew, da
