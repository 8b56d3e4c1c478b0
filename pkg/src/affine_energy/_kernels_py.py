"""NumPy implementations of the hot kernels.

These are the fallback used when the compiled extension is unavailable; the
compiled module in ``_kernels.pyx`` mirrors the same signatures.  Work is
chunked over directions to bound the size of the (points x directions)
temporaries.
"""

from __future__ import annotations

import numpy as np

# cap on the points-by-directions temporary, in doubles
_CHUNK_BUDGET = 4_000_000


def one_sided_power_sums(dirs, pts, p, wts=None):
    """Per-direction one-sided p-th moment sums of a point cloud.

    For each row u of ``dirs`` (m, n) returns::

        pos[i] = sum_j w_j * max(<u, pts[j]>, 0)**p
        neg[i] = sum_j w_j * max(-<u, pts[j]>, 0)**p

    with w_j = 1 when ``wts`` is None.  ``pts`` has shape (N, n).
    """
    dirs = np.ascontiguousarray(dirs, dtype=float)
    pts = np.ascontiguousarray(pts, dtype=float)
    m = dirs.shape[0]
    npts = pts.shape[0]
    pos = np.empty(m)
    neg = np.empty(m)
    if npts == 0:
        pos.fill(0.0)
        neg.fill(0.0)
        return pos, neg
    chunk = max(1, _CHUNK_BUDGET // npts)
    wcol = None if wts is None else np.asarray(wts, dtype=float)[:, None]
    for a in range(0, m, chunk):
        b = min(a + chunk, m)
        t = pts @ dirs[a:b].T  # (N, b-a)
        tp = np.maximum(t, 0.0)
        tn = np.maximum(-t, 0.0)
        if p == 1.0:
            pass
        elif p == 2.0:
            tp *= tp
            tn *= tn
        else:
            np.power(tp, p, out=tp)
            np.power(tn, p, out=tn)
        if wcol is not None:
            tp *= wcol
            tn *= wcol
        pos[a:b] = tp.sum(axis=0)
        neg[a:b] = tn.sum(axis=0)
    return pos, neg


def radial_from_support(query_dirs, body_dirs, support_vals, pos_tol=1e-12):
    """Radial function of the wedge body cut out by support samples.

    rho(u) = min over j with <u, v_j> > pos_tol of h_j / <u, v_j>, i.e. the
    radial function of the outer polyhedral body intersecting the halfspaces
    {<v_j, x> <= h_j}.  Returns +inf where no constraint is active.
    """
    query_dirs = np.ascontiguousarray(query_dirs, dtype=float)
    body_dirs = np.ascontiguousarray(body_dirs, dtype=float)
    h = np.asarray(support_vals, dtype=float)
    m = query_dirs.shape[0]
    nb = body_dirs.shape[0]
    out = np.full(m, np.inf)
    chunk = max(1, _CHUNK_BUDGET // nb)
    for a in range(0, m, chunk):
        b = min(a + chunk, m)
        t = query_dirs[a:b] @ body_dirs.T  # (b-a, nb)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(t > pos_tol, h[None, :] / t, np.inf)
        out[a:b] = ratios.min(axis=1)
    return out
