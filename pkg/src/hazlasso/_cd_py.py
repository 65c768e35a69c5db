"""Pure-Python coordinate-descent sweep, fallback for the compiled kernel.

Same update order and arithmetic as _cd_fast.pyx so the two kernels agree
to machine precision.
"""

from __future__ import annotations

import numpy as np


def cd_sweep(H, hn, w, kappa, beta, g, dead, nonneg):
    """One cyclic sweep; mutates beta and g = H @ beta in place.

    Returns the largest absolute coordinate change. Dead coordinates are
    skipped (their beta stays 0).
    """
    M = beta.shape[0]
    move = 0.0
    for j in range(M):
        if dead[j]:
            continue
        old = beta[j]
        c = hn[j] - (g[j] - H[j, j] * old)
        thr = 0.5 * kappa * w[j]
        if nonneg:
            new = (c - thr) / H[j, j]
            if new < 0.0:
                new = 0.0
        elif c > thr:
            new = (c - thr) / H[j, j]
        elif c < -thr:
            new = (c + thr) / H[j, j]
        else:
            new = 0.0
        delta = new - old
        if delta != 0.0:
            beta[j] = new
            g += delta * H[j]
        if abs(delta) > move:
            move = abs(delta)
    return move


KERNEL_NAME = "python"


def is_compiled() -> bool:
    return False
