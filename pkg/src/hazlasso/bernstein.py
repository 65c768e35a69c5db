"""Data-driven Bernstein bound for the martingale noise, with a Monte
Carlo harness that measures how often the bound is violated.

The deviation bound for the terminal noise Z = Z_1(h) of a column h is

    c1 sqrt((x + l) / n * Vhat) + c2 (x + 1 + l) / n * sup|h|,

where Vhat is the optional variation of Z (computable from data), sup|h|
is the empirical sup norm, and l is a log-log correction that prices the
data-driven variance. The constants (c1, c2, c3) derive from three free
parameters (c_ell, epsilon, c0); the violation probability is at most
c3 e^{-x}. The harness simulates the truth, evaluates Z exactly, and
reports violation frequencies with Wilson intervals per x, alongside the
classical predictable-variation bound sqrt(2Vx/n) + x/(3n) evaluated in
oracle mode (it needs the unobservable V).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._parallel import parallel_map
from .errors import ConfigError
from .simulate import (
    SimulatedTruth,
    SimulationConfig,
    baseline_interval_integrals,
    predictable_variation,
    simulate,
)
from .survival import RiskSetTimeline, build_timeline

WILSON_Z = 1.959963984540054  # two-sided 95%


@lru_cache(maxsize=None)
def zeta(s: float) -> float:
    """Riemann zeta for s > 1: exact at 2, else summed with an
    Euler-Maclaurin tail (error far below 1e-10)."""
    if s <= 1:
        raise ValueError("zeta(s) needs s > 1")
    if s == 2.0:
        return math.pi**2 / 6.0
    cutoff = 1_000_000
    j = np.arange(1, cutoff + 1, dtype=float)
    head = float(np.sum(j**-s))
    tail = cutoff ** (1.0 - s) / (s - 1.0) - 0.5 * cutoff**-s + s / 12.0 * cutoff ** (-s - 1.0)
    return head + tail


@dataclass(frozen=True)
class BernsteinConstants:
    """Parameter triple (c_ell, epsilon, c0) and the constants it implies.

    ``stated_c3`` optionally overrides the tail constant used for pass/fail
    bounds (the published ceiling rather than the exact series value); the
    exact value is always reported next to it.
    """

    c_ell: float = 2.0
    epsilon: float = 1.0
    c0: float = 56.0 / (3.0 * math.e)
    stated_c3: float | None = None

    def __post_init__(self):
        if self.c_ell <= 1:
            raise ConfigError("c_ell must exceed 1 (the c3 series diverges otherwise)")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if self.c0 <= 0:
            raise ConfigError("c0 must be positive")
        if math.e * self.c0 <= 2.0 * (4.0 / 3.0 + self.epsilon) * self.c_ell:
            raise ConfigError("need e*c0 > 2*(4/3 + epsilon)*c_ell")

    @property
    def c1(self) -> float:
        return 2.0 * math.sqrt(1.0 + self.epsilon)

    @property
    def c2(self) -> float:
        inner = max(self.c0, 2.0 * (1.0 + self.epsilon) * (4.0 / 3.0 + self.epsilon))
        return 2.0 * math.sqrt(2.0 * inner) + 2.0 / 3.0

    @property
    def c3(self) -> float:
        return 8.0 + 6.0 * math.log(1.0 + self.epsilon) ** -self.c_ell * zeta(self.c_ell)

    @property
    def mc_c3(self) -> float:
        """Tail constant the harness compares frequencies against."""
        return self.c3 if self.stated_c3 is None else self.stated_c3

    def tail_probability(self, x: float) -> float:
        return self.mc_c3 * math.exp(-x)

    def describe(self) -> dict:
        out = {
            "c_ell": self.c_ell,
            "epsilon": self.epsilon,
            "c0": self.c0,
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "c3_used_for_bounds": self.mc_c3,
        }
        if self == PAPER_NUMERIC:
            out["c3_printed_variant"] = PAPER_NUMERIC_PRINTED_C3
        return out


# The published numeric instantiation: c_ell=2, epsilon=1, c0=56/(3e),
# quoted with the ceilings c2 <= 9.31 and c3 <= 28.55. The also-printed
# expression "8 + (log 2)^-2 pi^2 + 4" exceeds that ceiling; it is carried
# in reports but never used for bounds.
PAPER_NUMERIC = BernsteinConstants(stated_c3=28.55)
PAPER_NUMERIC_PRINTED_C3 = 8.0 + math.log(2.0) ** -2 * math.pi**2 + 4.0
PRESETS = {"paper-numeric": PAPER_NUMERIC}


def _as_pair(vhat, sup):
    a, b = np.broadcast_arrays(np.atleast_1d(np.asarray(vhat, dtype=float)),
                               np.atleast_1d(np.asarray(sup, dtype=float)))
    return a, b


def loglog_correction(vhat, sup, x: float, n: int, constants: BernsteinConstants):
    """General-form log-log term; clamps at e, and a zero sup norm means
    the whole correction (and bound) degenerates to zero."""
    if x <= 0:
        raise ValueError("confidence level x must be positive")
    if n < 1:
        raise ValueError("n must be at least 1")
    scalar = np.isscalar(vhat) and np.isscalar(sup)
    v, s = _as_pair(vhat, sup)
    if np.any(v < 0) or np.any(s < 0):
        raise ValueError("variance and sup norm must be nonnegative")
    a = 4.0 / 3.0 + constants.epsilon
    sup2 = s * s
    num = 2.0 * math.e * n * v + 8.0 * math.e * a * x * sup2
    den = 4.0 * (math.e * constants.c0 - 2.0 * a * constants.c_ell) * sup2
    ratio = np.divide(num, den, out=np.ones_like(num), where=den > 0)
    out = constants.c_ell * np.log(np.log(np.maximum(ratio, math.e)))
    return float(out[0]) if scalar else out


def bound_empirical(vhat, sup, x: float, n: int, constants: BernsteinConstants = PAPER_NUMERIC):
    """Deviation bound on |Z| from observable quantities only."""
    scalar = np.isscalar(vhat) and np.isscalar(sup)
    v, s = _as_pair(vhat, sup)
    ell = loglog_correction(v, s, x, n, constants)
    out = np.where(
        s > 0,
        constants.c1 * np.sqrt((x + ell) / n * v) + constants.c2 * (x + 1.0 + ell) / n * s,
        0.0,
    )
    return float(out[0]) if scalar else out


def classical_bound(v: float, x: float, n: int) -> float:
    """Predictable-variation Bernstein bound, valid on the event V <= v."""
    if x <= 0:
        raise ValueError("confidence level x must be positive")
    if v < 0:
        raise ValueError("variation must be nonnegative")
    return math.sqrt(2.0 * v * x / n) + x / (3.0 * n)


def wilson_interval(successes: int, total: int, z: float = WILSON_Z) -> tuple[float, float]:
    """95% score interval for a binomial proportion."""
    if total < 1:
        raise ValueError("need at least one trial")
    if not 0 <= successes <= total:
        raise ValueError("successes must lie in [0, total]")
    p = successes / total
    shift = z * z / (2.0 * total)
    half = z * math.sqrt(p * (1.0 - p) / total + z * z / (4.0 * total * total))
    low = (p + shift - half) / (1.0 + 2.0 * shift)
    high = (p + shift + half) / (1.0 + 2.0 * shift)
    return max(0.0, low), min(1.0, high)


def noise_process_terminal(
    truth: SimulatedTruth, column_values, timeline: RiskSetTimeline
) -> tuple[float, float, float]:
    """Terminal noise Z, its optional variation Vhat, and the predictable
    variation V for one column, all exact under the simulated truth."""
    v = np.asarray(column_values, dtype=float)
    tl = timeline
    counts = tl.at_risk.astype(float)
    s_v = tl.prefix_sums(v)
    mean = np.divide(s_v, counts, out=np.zeros_like(s_v), where=counts > 0)

    resid = v[tl.event_rows] - mean[tl.event_interval]
    vhat = float(resid @ resid) / tl.n

    s_h = tl.prefix_sums(truth.h0)
    s_vh = tl.prefix_sums(v * truth.h0)
    centered_sum = s_v - counts * mean
    cross_centered = s_vh - mean * s_h
    lam_int = baseline_interval_integrals(tl, truth.baseline)
    compensator = float(np.sum(lam_int * centered_sum + tl.lengths * cross_centered)) / tl.n
    z = float(resid.sum()) / tl.n - compensator

    return z, vhat, predictable_variation(truth, v, timeline)


@dataclass
class BernsteinReport:
    x_grid: tuple[float, ...]
    replications: int
    column: int
    constants: BernsteinConstants
    rows: list[dict]
    excluded: int

    @property
    def passed(self) -> bool:
        return all(row["passed"] for row in self.rows)

    def to_dict(self) -> dict:
        return {
            "x_grid": list(self.x_grid),
            "replications": self.replications,
            "column": self.column,
            "constants": self.constants.describe(),
            "excluded_degenerate": self.excluded,
            "rows": self.rows,
            "passed": self.passed,
        }


def _mc_worker(args):
    config, column, seed, rep = args
    truth = simulate(config, seed=[seed, rep])
    timeline = build_timeline(truth.dataset)
    v = truth.dataset.covariates[:, column]
    z, vhat, var = noise_process_terminal(truth, v, timeline)
    return abs(z), vhat, var, float(np.abs(v).max())


def run_mc(
    config: SimulationConfig,
    column: int,
    x_grid,
    replications: int,
    constants: BernsteinConstants = PAPER_NUMERIC,
    seed: int | None = None,
    threads: int = 1,
) -> BernsteinReport:
    """Violation frequencies of the data-driven bound over fresh datasets.

    Frequencies are meant to be read at >= 1,000 replications; smaller runs
    are fine for smoke tests but the Wilson interval will be wide. Within
    one run the violation sets are nested across x (the bound increases in
    x on each fixed dataset), so reported frequencies are exactly
    nonincreasing in x.
    """
    x_grid = tuple(float(x) for x in x_grid)
    if not x_grid or any(x <= 0 for x in x_grid):
        raise ConfigError("x grid must be nonempty and positive")
    if replications < 1:
        raise ConfigError("need at least one replication")
    if not 0 <= column < config.d:
        raise ConfigError(f"column {column} out of range for d={config.d}")
    base_seed = config.seed if seed is None else int(seed)

    tasks = [(config, column, base_seed, rep) for rep in range(replications)]
    results = parallel_map(_mc_worker, tasks, threads)
    abs_z = np.array([r[0] for r in results])
    vhat = np.array([r[1] for r in results])
    var = np.array([r[2] for r in results])
    sup = np.array([r[3] for r in results])

    # sup == 0 makes the bound degenerate (Z = 0 almost surely); drop those
    good = sup > 0
    kept = int(good.sum())
    if kept == 0:
        raise ConfigError("every replication had a degenerate (all-zero) column")
    abs_z, vhat, var, sup = abs_z[good], vhat[good], var[good], sup[good]

    n = config.n
    rows = []
    for x in x_grid:
        bounds = bound_empirical(vhat, sup, x, n, constants)
        violations = int(np.sum(abs_z >= bounds))
        low, high = wilson_interval(violations, kept)
        tail = constants.tail_probability(x)
        ratio = np.divide(bounds, abs_z, out=np.full(kept, np.inf), where=abs_z > 0)
        classical = np.sqrt(2.0 * var * x / n) + x / (3.0 * n)
        rows.append(
            {
                "x": x,
                "tail_bound": tail,
                "violations": violations,
                "frequency": violations / kept,
                "wilson_low": low,
                "wilson_high": high,
                "passed": bool(high <= tail) if tail <= 1.0 else True,
                "margin_min": float(ratio.min()),
                "margin_q10": float(np.quantile(ratio, 0.10)),
                "margin_median": float(np.quantile(ratio, 0.50)),
                "margin_q90": float(np.quantile(ratio, 0.90)),
                "classical_violations": int(np.sum(abs_z >= classical)),
                "classical_frequency": float(np.mean(abs_z >= classical)),
                "classical_tail": 2.0 * math.exp(-x),
            }
        )
    return BernsteinReport(
        x_grid=x_grid,
        replications=replications,
        column=column,
        constants=constants,
        rows=rows,
        excluded=replications - kept,
    )
