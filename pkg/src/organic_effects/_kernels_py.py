"""Pure-Python (numpy) implementations of the hot kernels.

Each function mirrors one in ``_ckernels.pyx`` with the same signature.
``tabulate_cells`` and ``weighted_cell_sum`` accumulate in the same order as
the compiled versions, so both backends agree bitwise on them.
"""

import numpy as np


def qr_project(x, y):
    """Thin QR of ``x``; returns ``(R, Q^T y)``."""
    q, r = np.linalg.qr(np.asarray(x, dtype=np.float64), mode="reduced")
    return r, q.T @ np.asarray(y, dtype=np.float64)


def tabulate_cells(ic, il, im, a, y, w, nc, nl, nm):
    """Weighted cell counts for the discrete identification engine.

    Returns ``(n_c, n_lc_treated, n_mlc_control, n_mlc_treated, ysum_mlc_treated)``
    shaped ``(nc,)``, ``(nc, nl)`` and ``(nc, nl, nm)`` (three times).
    """
    ic = np.asarray(ic, dtype=np.int64)
    il = np.asarray(il, dtype=np.int64)
    im = np.asarray(im, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    treated = np.asarray(a) == 1
    control = ~treated
    lc = ic * nl + il
    mlc = lc * nm + im
    n_c = np.bincount(ic, weights=w, minlength=nc).astype(np.float64)
    n_lc1 = np.bincount(lc[treated], weights=w[treated], minlength=nc * nl)
    n_mlc0 = np.bincount(mlc[control], weights=w[control], minlength=nc * nl * nm)
    n_mlc1 = np.bincount(mlc[treated], weights=w[treated], minlength=nc * nl * nm)
    ysum1 = np.bincount(mlc[treated], weights=w[treated] * np.asarray(y)[treated],
                        minlength=nc * nl * nm)
    return (n_c, n_lc1.reshape(nc, nl), n_mlc0.reshape(nc, nl, nm),
            n_mlc1.reshape(nc, nl, nm), ysum1.reshape(nc, nl, nm))


def weighted_cell_sum(f_c, f_lc, f_mlc, y_mean):
    """sum over (c, l, m) of f_c * f_lc * f_mlc * y_mean, skipping zero-weight cells.

    Accumulated sequentially in c-major, then l, then m order.
    """
    w = (np.asarray(f_c)[:, None] * np.asarray(f_lc))[:, :, None] * np.asarray(f_mlc)
    mask = w > 0
    total = 0.0
    for v in (w[mask] * np.asarray(y_mean)[mask]).tolist():
        total += v
    return total
