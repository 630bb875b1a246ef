"""Compiled inner loops: convex hulls, conjugate scans, log-domain
polynomial evaluation, and the simultaneous root-correction sweep.

Everything here is deterministic: sweeps read the previous iterate
snapshot (Jacobi style) and inner sums run in a fixed order, so results
are bit-reproducible across runs regardless of scheduling.

Coefficients arrive as (log magnitude, phase) pairs; log magnitude
-inf marks a structurally zero coefficient.  Evaluation at a point z
rescales every term by the maximum log term at |z|, which keeps all
partial sums O(degree) in magnitude no matter how wild the coefficient
range is.
"""

import numpy as np
from numba import njit

NEG_INF = -np.inf
# terms this far (in log) below the running max contribute < 4e-18 each
LOG_CUTOFF = 40.0


@njit(cache=True)
def lower_hull_indices(x, v, rel_tol):
    """Indices of the lower convex hull of the graph {(x_i, v_i)}.

    Points on a chord within rel_tol (relative cross-product test) are
    merged away, so a run of collinear nodes collapses to its endpoints.
    """
    n = x.shape[0]
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for i in range(n):
        while top >= 2:
            a = stack[top - 2]
            b = stack[top - 1]
            t1 = (v[b] - v[a]) * (x[i] - x[a])
            t2 = (v[i] - v[a]) * (x[b] - x[a])
            scale = abs(t1) + abs(t2) + 1e-300
            # cr >= 0 means b lies on or above chord a--i: not a vertex
            cr = t1 - t2
            if cr >= -rel_tol * scale:
                top -= 1
            else:
                break
        stack[top] = i
        top += 1
    return stack[:top].copy()


@njit(cache=True)
def conjugate_scan(hx, hv, q):
    """sup_j (q * hx_j - hv_j) for sorted queries q over hull vertices.

    Returns (values, argmax indices).  The maximizing vertex index is
    nondecreasing in q, so one forward pointer suffices.
    """
    m = q.shape[0]
    nv = hx.shape[0]
    out = np.empty(m)
    arg = np.empty(m, dtype=np.int64)
    j = 0
    for i in range(m):
        qi = q[i]
        while j + 1 < nv and qi * hx[j + 1] - hv[j + 1] >= qi * hx[j] - hv[j]:
            j += 1
        out[i] = qi * hx[j] - hv[j]
        arg[i] = j
    return out, arg


@njit(cache=True, fastmath=False)
def eval_many(la, ph, zs):
    """log|p(z)| and arg p(z) at each z, via max-rescaled Horner.

    Returns (logabs, args) where logabs[i] = -inf for an exact zero of
    the rescaled sum.  logabs[i] - scale_at(|z_i|) is the relative
    residual exponent, with scale_at the max log term.
    """
    deg1 = la.shape[0]
    m = zs.shape[0]
    logabs = np.empty(m)
    args = np.empty(m)
    for i in range(m):
        z = zs[i]
        az = abs(z)
        if az == 0.0:
            logabs[i] = la[0]
            args[i] = ph[0] if la[0] > NEG_INF else 0.0
            continue
        s = np.log(az)
        mx = NEG_INF
        for k in range(deg1):
            if la[k] > NEG_INF:
                t = la[k] + k * s
                if t > mx:
                    mx = t
        w = z / az
        acc = 0.0 + 0.0j
        for k in range(deg1 - 1, -1, -1):
            acc = acc * w
            if la[k] > NEG_INF:
                e = la[k] + k * s - mx
                if e > -LOG_CUTOFF:
                    acc += np.exp(e) * complex(np.cos(ph[k]), np.sin(ph[k]))
        aa = abs(acc)
        if aa == 0.0:
            logabs[i] = NEG_INF
            args[i] = 0.0
        else:
            logabs[i] = mx + np.log(aa)
            args[i] = np.arctan2(acc.imag, acc.real)
    return logabs, args


@njit(cache=True, fastmath=False)
def scale_at(la, zmod):
    """Max log term max_k (log|a_k| + k log|z|): the local coefficient scale."""
    m = zmod.shape[0]
    deg1 = la.shape[0]
    out = np.empty(m)
    for i in range(m):
        az = zmod[i]
        if az == 0.0:
            out[i] = la[0]
            continue
        s = np.log(az)
        mx = NEG_INF
        for k in range(deg1):
            if la[k] > NEG_INF:
                t = la[k] + k * s
                if t > mx:
                    mx = t
        out[i] = mx
    return out


@njit(cache=True, fastmath=False)
def _q_dq(la, ph, z):
    """Rescaled value/derivative pair at one point.

    q  = p(z)  * exp(-M)
    dq = p'(z) * exp(-M) * |z|
    with M the max log term at |z|.  Returns (q, dq, M).
    """
    deg1 = la.shape[0]
    az = abs(z)
    if az < 1e-280:
        z = complex(1e-280, 0.0)
        az = 1e-280
    s = np.log(az)
    mx = NEG_INF
    for k in range(deg1):
        if la[k] > NEG_INF:
            t = la[k] + k * s
            if t > mx:
                mx = t
    w = z / az
    q = 0.0 + 0.0j
    dq = 0.0 + 0.0j
    for k in range(deg1 - 1, -1, -1):
        dq = dq * w + q
        q = q * w
        if la[k] > NEG_INF:
            e = la[k] + k * s - mx
            if e > -LOG_CUTOFF:
                q += np.exp(e) * complex(np.cos(ph[k]), np.sin(ph[k]))
    return q, dq, mx


@njit(cache=True, fastmath=False)
def aberth_sweep(la, ph, z, active, new_z, corr, resid):
    """One Jacobi sweep of simultaneous Newton corrections with repulsion.

    Every active root i gets z_i - N_i / (1 - N_i * S_i), where N is the
    Newton ratio and S the pairwise repulsion sum over the snapshot z.
    corr[i] receives |step| and resid[i] the relative residual exponent
    log(|p(z_i)| / scale); inactive slots are copied through untouched.
    """
    n = z.shape[0]
    for i in range(n):
        if not active[i]:
            new_z[i] = z[i]
            continue
        zi = z[i]
        q, dq, _ = _q_dq(la, ph, zi)
        aq = abs(q)
        resid[i] = np.log(aq) if aq > 0.0 else NEG_INF
        az = abs(zi)
        if az < 1e-280:
            az = 1e-280
        s = 0.0 + 0.0j
        for j in range(n):
            if j != i:
                d = zi - z[j]
                if d == 0.0:
                    d = complex(1e-300, 0.0)
                s += 1.0 / d
        if aq == 0.0:
            new_z[i] = zi
            corr[i] = 0.0
            continue
        if abs(dq) == 0.0:
            # saddle: nudge by a fixed relative amount, repulsion decides later
            step = complex(1e-3 * (1.0 + az), 0.0)
        else:
            nr = q * az / dq
            den = 1.0 - nr * s
            if abs(den) < 1e-300:
                step = nr
            else:
                step = nr / den
        cap = 0.5 * (1.0 + az)
        astep = abs(step)
        if astep > cap:
            step = step * (cap / astep)
            astep = cap
        new_z[i] = zi - step
        corr[i] = astep
    return 0


def warmup():
    """Force-compile every kernel (cache persists across processes)."""
    x = np.array([0.0, 0.5, 1.0])
    v = np.array([0.0, -0.1, 0.3])
    idx = lower_hull_indices(x, v, 1e-12)
    conjugate_scan(x[idx], v[idx], np.array([-1.0, 0.0, 1.0]))
    la = np.array([0.0, 0.0, 0.0])
    ph = np.zeros(3)
    zs = np.array([0.5 + 0.2j, -1.0 + 0.0j])
    eval_many(la, ph, zs)
    scale_at(la, np.abs(zs))
    z = np.array([1.0 + 1j, -1.0 + 1j, 0.5 - 0.3j])
    act = np.ones(3, dtype=np.bool_)
    nz = np.empty_like(z)
    corr = np.empty(3)
    resid = np.empty(3)
    aberth_sweep(la, ph, z, act, nz, corr, resid)
