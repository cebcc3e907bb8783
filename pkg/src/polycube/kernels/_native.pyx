# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Dinic max-flow, preconditioned CG, stretch metrics.

Twin of `_fallback.py`; the max-flow follows the identical arc ordering and
traversal so both backends return the same cut.
"""

from libc.math cimport hypot, sqrt

import numpy as np

NAME = "compiled"


def max_flow(double[::1] cap_source, double[::1] cap_sink,
             const long long[::1] first, const long long[::1] arc_head,
             const long long[::1] arc_rev, double[::1] arc_cap):
    """Dinic max-flow between implicit terminals; see the fallback docstring."""
    cdef Py_ssize_t n = cap_source.shape[0]
    level_arr = np.empty(n, dtype=np.int64)
    ptr_arr = np.empty(n, dtype=np.int64)
    queue_arr = np.empty(n, dtype=np.int64)
    pn_arr = np.empty(n + 2, dtype=np.int64)
    pa_arr = np.empty(n + 2, dtype=np.int64)
    cdef long long[::1] level = level_arr
    cdef long long[::1] ptr = ptr_arr
    cdef long long[::1] queue = queue_arr
    cdef long long[::1] path_nodes = pn_arr
    cdef long long[::1] path_arcs = pa_arr

    cdef double total = 0.0, delta
    cdef Py_ssize_t qh, qt, i, si, d
    cdef long long v, h, k, depth, t_level
    cdef bint advanced, found

    with nogil:
        while True:
            for i in range(n):
                level[i] = -1
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

            for i in range(n):
                ptr[i] = first[i]
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

    return float(total), level_arr >= 0


def cg_solve(const long long[::1] indptr, const long long[::1] indices,
             const double[::1] data, const double[::1] diag,
             const double[::1] rhs, const double[::1] x0,
             double const_term, double rel_tol, long long max_iter):
    """Jacobi-preconditioned CG on L x = rhs; see the fallback docstring."""
    cdef Py_ssize_t nf = rhs.shape[0]
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    if nf == 0:
        return x_arr, float(const_term), 0.0, 0, True
    r_arr = np.empty(nf, dtype=np.float64)
    z_arr = np.empty(nf, dtype=np.float64)
    p_arr = np.empty(nf, dtype=np.float64)
    q_arr = np.empty(nf, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] r = r_arr
    cdef double[::1] z = z_arr
    cdef double[::1] p = p_arr
    cdef double[::1] q = q_arr

    cdef Py_ssize_t i, j
    cdef double acc, rz, rz_new, pq, alpha, beta, f, grad_norm, xr, xb, rr, dval
    cdef long long iters = 0
    cdef bint converged = False

    with nogil:
        for i in range(nf):
            acc = 0.0
            for j in range(indptr[i], indptr[i + 1]):
                acc += data[j] * x[indices[j]]
            r[i] = rhs[i] - acc
        rz = 0.0
        for i in range(nf):
            dval = diag[i] if diag[i] > 0.0 else 1.0
            z[i] = r[i] / dval
            p[i] = z[i]
            rz += r[i] * z[i]

        while True:
            xr = 0.0
            xb = 0.0
            rr = 0.0
            for i in range(nf):
                xr += x[i] * r[i]
                xb += x[i] * rhs[i]
                rr += r[i] * r[i]
            f = const_term - xb - xr
            grad_norm = 2.0 * sqrt(rr)
            if grad_norm <= rel_tol * (1.0 + f):
                converged = True
                break
            if iters >= max_iter:
                break
            pq = 0.0
            for i in range(nf):
                acc = 0.0
                for j in range(indptr[i], indptr[i + 1]):
                    acc += data[j] * p[indices[j]]
                q[i] = acc
                pq += p[i] * acc
            if pq <= 0.0:
                break
            alpha = rz / pq
            rz_new = 0.0
            for i in range(nf):
                x[i] += alpha * p[i]
                r[i] -= alpha * q[i]
                dval = diag[i] if diag[i] > 0.0 else 1.0
                z[i] = r[i] / dval
                rz_new += r[i] * z[i]
            beta = rz_new / rz
            rz = rz_new
            for i in range(nf):
                p[i] = z[i] + beta * p[i]
            iters += 1

    return x_arr, float(f), float(grad_norm), int(iters), bool(converged)


def smooth_sweep(long long[::1] labels, const long long[:, ::1] neighbors):
    """One sequential boundary-smoothing sweep; see the fallback docstring."""
    cdef Py_ssize_t t, n = labels.shape[0]
    cdef long long own, n0, n1, n2, new
    cdef long long changed = 0
    with nogil:
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
    return int(changed)


def stretch_metrics(const double[:, :, ::1] shape_inv, const double[:, :, ::1] deformed,
                    double clamp):
    """Per-triangle stretch / area-scale terms; see the fallback docstring."""
    cdef Py_ssize_t t, n = shape_inv.shape[0]
    ew_arr = np.empty(n, dtype=np.float64)
    da_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] ew = ew_arr
    cdef double[::1] da = da_arr
    cdef double a, b, c, d, e, f, g, h, q, r, s1, s2, val, prod

    with nogil:
        for t in range(n):
            a = deformed[t, 0, 0] * shape_inv[t, 0, 0] + deformed[t, 0, 1] * shape_inv[t, 1, 0]
            b = deformed[t, 0, 0] * shape_inv[t, 0, 1] + deformed[t, 0, 1] * shape_inv[t, 1, 1]
            c = deformed[t, 1, 0] * shape_inv[t, 0, 0] + deformed[t, 1, 1] * shape_inv[t, 1, 0]
            d = deformed[t, 1, 0] * shape_inv[t, 0, 1] + deformed[t, 1, 1] * shape_inv[t, 1, 1]
            e = 0.5 * (a + d)
            f = 0.5 * (a - d)
            g = 0.5 * (c + b)
            h = 0.5 * (c - b)
            q = hypot(e, h)
            r = hypot(f, g)
            s1 = q + r
            s2 = q - r
            if s2 < 1e-9:
                ew[t] = clamp
            else:
                val = s1 + s2 + 1.0 / (s1 * s2) + s1 / s2 + s2 / s1 - 4.0
                ew[t] = val if val <= clamp else clamp
            prod = s1 * (s2 if s2 >= 0.0 else -s2)
            if prod < 1e-18:
                da[t] = clamp
            else:
                val = 0.5 * (prod + 1.0 / prod)
                da[t] = val if val <= clamp else clamp
    return ew_arr, da_arr
