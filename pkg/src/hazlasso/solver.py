"""Weighted-Lasso solver for the risk-set-centered least-squares contrast.

Minimizes b' H b - 2 b' hn + kappa * sum_j w_j |b_j| over R^M or the
nonnegative orthant by cyclic coordinate descent. Each coordinate update
is the exact 1-d minimizer (soft threshold scaled by H_jj), so the
objective never increases; convergence is certified by the KKT residual,
never assumed from coordinate stability alone.

The sweep kernel is compiled (Cython) when available and falls back to a
pure-Python twin with identical arithmetic; `active_kernel()` reports
which one is in use.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gram import GramSystem
from .weights import WeightVector

try:
    from . import _cd_fast as _kernel
except ImportError:
    from . import _cd_py as _kernel


def active_kernel() -> str:
    """Name of the sweep kernel selected at import ("compiled" or "python")."""
    return _kernel.KERNEL_NAME


CONSTRAINTS = ("unconstrained", "nonnegative")


@dataclass
class LassoFit:
    """Solution plus certificates: trace, KKT residual, pinned coordinates."""

    beta: np.ndarray
    converged: bool
    sweeps: int
    kkt_max_violation: float
    objective_trace: np.ndarray
    kappa: float
    constraint: str
    weight_scale: float = 1.0
    pinned: np.ndarray = field(default_factory=lambda: np.array([], dtype=np.int64))
    pinned_violation: float = 0.0

    @property
    def active_set(self) -> np.ndarray:
        return np.flatnonzero(self.beta)


def _dead_mask(system: GramSystem, weights: WeightVector) -> np.ndarray:
    # H_jj = 0 makes the coordinate unidentifiable; allow for roundoff at the
    # scale of the column sup norm when deciding (an all-zero or constant
    # column lands at |H_jj| <= 1e-13 sup^2, a live column is far above).
    diag = np.diag(system.matrix)
    return (diag <= 0.0) | (diag <= 1e-13 * weights.sup**2)


def kkt_violations(
    system: GramSystem,
    weights: WeightVector,
    beta: np.ndarray,
    kappa: float = 1.0,
    constraint: str = "unconstrained",
    weight_scale: float = 1.0,
) -> np.ndarray:
    """Per-coordinate first-order-condition residuals at beta.

    Zero coordinates must have the (signed or absolute) gradient inside the
    subdifferential slab; active coordinates must have an exactly balancing
    subgradient. Nonnegative fits only require one-sided stationarity at 0.
    """
    b = np.asarray(beta, dtype=float)
    grad = 2.0 * (system.matrix @ b - system.vector)
    wk = kappa * weight_scale * weights.w
    out = np.empty(len(b))
    on = b != 0
    if constraint == "nonnegative":
        out[on] = np.abs(grad[on] + wk[on])
        out[~on] = np.maximum(0.0, -(grad[~on] + wk[~on]))
    else:
        out[on] = np.abs(grad[on] + wk[on] * np.sign(b[on]))
        out[~on] = np.maximum(0.0, np.abs(grad[~on]) - wk[~on])
    return out


def kkt_check(
    system: GramSystem,
    weights: WeightVector,
    fit_or_beta,
    kappa: float | None = None,
    constraint: str | None = None,
    weight_scale: float | None = None,
) -> float:
    """Max KKT violation of a fit (or raw coefficient vector)."""
    if isinstance(fit_or_beta, LassoFit):
        f = fit_or_beta
        beta = f.beta
        kappa = f.kappa if kappa is None else kappa
        constraint = f.constraint if constraint is None else constraint
        weight_scale = f.weight_scale if weight_scale is None else weight_scale
    else:
        beta = fit_or_beta
        kappa = 1.0 if kappa is None else kappa
        constraint = "unconstrained" if constraint is None else constraint
        weight_scale = 1.0 if weight_scale is None else weight_scale
    return float(kkt_violations(system, weights, beta, kappa, constraint, weight_scale).max())


def fit(
    system: GramSystem,
    weights: WeightVector,
    kappa: float = 1.0,
    constraint: str = "unconstrained",
    tol: float = 1e-8,
    max_sweeps: int = 10000,
    start: np.ndarray | None = None,
    weight_scale: float = 1.0,
) -> LassoFit:
    """Coordinate descent until coordinates stall AND the KKT residual <= tol.

    Non-convergence within max_sweeps is reported through the converged
    flag, never silently. Coordinates with H_jj = 0 are pinned at 0; their
    (unfixable) KKT residual is reported separately as pinned_violation.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if constraint not in CONSTRAINTS:
        raise ValueError(f"constraint must be one of {CONSTRAINTS}")
    if weight_scale <= 0:
        raise ValueError("weight_scale must be positive")

    H = np.ascontiguousarray(system.matrix, dtype=float)
    hn = np.ascontiguousarray(system.vector, dtype=float)
    w_eff = np.ascontiguousarray(weight_scale * weights.w, dtype=float)
    M = len(hn)
    dead = _dead_mask(system, weights)
    dead_u8 = np.ascontiguousarray(dead, dtype=np.uint8)
    nonneg = int(constraint == "nonnegative")

    beta = np.zeros(M) if start is None else np.array(start, dtype=float)
    beta[dead] = 0.0
    if nonneg:
        np.maximum(beta, 0.0, out=beta)
    g = H @ beta

    def penalized(b, gb):
        return float(b @ gb - 2.0 * (b @ hn) + kappa * (w_eff @ np.abs(b)))

    trace = [penalized(beta, g)]
    converged = False
    sweeps = 0
    for sweep in range(1, max_sweeps + 1):
        sweeps = sweep
        move = _kernel.cd_sweep(H, hn, w_eff, kappa, beta, g, dead_u8, nonneg)
        if sweep % 50 == 0:
            g = H @ beta  # shed incremental-update drift
        trace.append(penalized(beta, g))
        if move < tol * (1.0 + float(np.abs(beta).max(initial=0.0))):
            g = H @ beta
            viol = kkt_violations(system, weights, beta, kappa, constraint, weight_scale)
            live_max = float(viol[~dead].max(initial=0.0))
            if live_max <= tol:
                converged = True
                break
            if move == 0.0:
                break  # stalled exactly; more sweeps cannot help

    g = H @ beta
    viol = kkt_violations(system, weights, beta, kappa, constraint, weight_scale)
    return LassoFit(
        beta=beta,
        converged=converged,
        sweeps=sweeps,
        kkt_max_violation=float(viol[~dead].max(initial=0.0)),
        objective_trace=np.asarray(trace),
        kappa=float(kappa),
        constraint=constraint,
        weight_scale=float(weight_scale),
        pinned=np.flatnonzero(dead),
        pinned_violation=float(viol[dead].max(initial=0.0)),
    )


def fit_path(
    system: GramSystem,
    weights: WeightVector,
    scale_grid,
    kappa: float = 1.0,
    constraint: str = "unconstrained",
    tol: float = 1e-8,
    max_sweeps: int = 10000,
) -> list[LassoFit]:
    """Warm-started fits over a descending grid of global weight scales."""
    grid = [float(s) for s in scale_grid]
    if not grid or any(s <= 0 for s in grid):
        raise ValueError("scale grid must be positive")
    if any(later >= earlier for later, earlier in zip(grid[1:], grid)):
        raise ValueError("scale grid must be sorted descending")
    fits: list[LassoFit] = []
    start = None
    for scale in grid:
        f = fit(
            system,
            weights,
            kappa=kappa,
            constraint=constraint,
            tol=tol,
            max_sweeps=max_sweeps,
            start=start,
            weight_scale=scale,
        )
        fits.append(f)
        start = f.beta
    return fits
