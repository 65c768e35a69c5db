"""Right-censored survival data on the unit follow-up window.

Counting-process backbone for the whole package. A dataset holds one row
per subject: follow-up time Z = min(T, C, 1) in (0, 1] and event flag
delta = 1 if the failure was observed. A RiskSetTimeline turns the
observed times into the breakpoint grid on which every integrand used
downstream (risk-set means, Gram entries, compensators) is piecewise
constant, so all time integrals are exact finite sums rather than
quadrature.

Conventions, fixed once here and relied on everywhere:

* the at-risk indicator is closed on the left, Y_i(t) = 1{Z_i >= t}, so a
  subject is still at risk at its own follow-up time;
* on the open interval between consecutive breakpoints the at-risk set is
  constant and equals {i : Z_i >= right endpoint}, which is the a.e. value
  used for Lebesgue integrals;
* step functions evaluate left-continuously, so the value read off at an
  event time is the value of the interval ending there (the predictable
  version, the one that multiplies event counts).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DataValidationError


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function on [0, 1].

    ``values[k]`` is the value on ``[breakpoints[k], breakpoints[k+1])``.
    Evaluation is left-continuous: at an interior breakpoint the value of
    the interval ending there is returned, and ``f(0)`` is the first value.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or vals.ndim != 1 or len(vals) != len(bp) - 1:
            raise ValueError("need K+1 breakpoints and K values")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(vals)):
            raise ValueError("step values must be finite")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value: float) -> "StepFunction":
        return cls(np.array([0.0, 1.0]), np.array([float(value)]))

    def __call__(self, t):
        idx = np.searchsorted(self.breakpoints, t, side="left") - 1
        idx = np.clip(idx, 0, len(self.values) - 1)
        return self.values[idx]


def _refined_grid(*fns: StepFunction) -> np.ndarray:
    """Common refinement of the breakpoint grids of several step functions."""
    pts = np.concatenate([f.breakpoints for f in fns])
    return np.unique(pts)


def integrate_product(f: StepFunction, g: StepFunction, weight: StepFunction | None = None) -> float:
    """Exact integral over [0, 1] of f * g (* weight) for step functions.

    The integrand is piecewise constant on the common refinement of the
    breakpoint grids, so the integral is a finite sum of value * length
    terms. Values on each refined piece are read at the midpoint, an
    interior point of every parent interval.
    """
    fns = (f, g) if weight is None else (f, g, weight)
    grid = _refined_grid(*fns)
    mids = 0.5 * (grid[:-1] + grid[1:])
    piece = f(mids) * g(mids)
    if weight is not None:
        piece = piece * weight(mids)
    return float(np.sum(piece * np.diff(grid)))


@dataclass(frozen=True)
class SurvivalRecord:
    """One subject: follow-up time, event flag, covariate row."""

    time: float
    status: int
    covariates: np.ndarray


@dataclass
class SurvivalDataset:
    """Right-censored sample with follow-up times normalized into (0, 1].

    ``time_scale`` records the factor raw times were divided by when a file
    carried follow-up beyond the unit window (1.0 when no rescaling
    happened); reports quote it so results can be mapped back.
    """

    times: np.ndarray
    status: np.ndarray
    covariates: np.ndarray
    labels: list[str] = field(default_factory=list)
    time_scale: float = 1.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.status = np.asarray(self.status, dtype=bool)
        self.covariates = np.asarray(self.covariates, dtype=float)
        if self.covariates.ndim != 2:
            raise DataValidationError("covariates must be a 2-d array")
        n = len(self.times)
        if len(self.status) != n or self.covariates.shape[0] != n:
            raise DataValidationError("times, status and covariates disagree on n")
        if n == 0:
            raise DataValidationError("empty dataset")
        if np.any(self.times <= 0) or np.any(self.times > 1):
            bad = int(np.flatnonzero((self.times <= 0) | (self.times > 1))[0])
            raise DataValidationError(f"record {bad}: time {self.times[bad]} outside (0, 1]")
        if not np.all(np.isfinite(self.covariates)):
            bad = int(np.flatnonzero(~np.isfinite(self.covariates).all(axis=1))[0])
            raise DataValidationError(f"record {bad}: non-finite covariate")
        if not self.labels:
            self.labels = [f"x{j + 1}" for j in range(self.covariates.shape[1])]

    @property
    def n(self) -> int:
        return len(self.times)

    @property
    def d(self) -> int:
        return self.covariates.shape[1]

    def record(self, i: int) -> SurvivalRecord:
        return SurvivalRecord(float(self.times[i]), int(self.status[i]), self.covariates[i])


def load_dataset(path) -> SurvivalDataset:
    """Read a ``time,status,x1,...,xd`` CSV into a SurvivalDataset.

    Validation reports the first offending file line (the header is line
    1). Raw times may exceed 1; they are divided by the maximum follow-up
    time in that case and the scale factor is recorded on the dataset.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataValidationError(f"{path}: empty file") from None
        header = [c.strip() for c in header]
        if len(header) < 3 or header[0] != "time" or header[1] != "status":
            raise DataValidationError(
                f"{path}: header must be time,status,x1,...,xd (got {','.join(header)})"
            )
        labels = header[2:]
        if len(set(labels)) != len(labels):
            raise DataValidationError(f"{path}: duplicate covariate labels in header")
        width = len(header)
        times, status, rows = [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise DataValidationError(
                    f"{path}: line {lineno}: expected {width} fields, got {len(row)}"
                )
            try:
                t = float(row[0])
            except ValueError:
                raise DataValidationError(f"{path}: line {lineno}: bad time {row[0]!r}") from None
            if not np.isfinite(t) or t <= 0:
                raise DataValidationError(f"{path}: line {lineno}: time must be finite and > 0")
            if row[1].strip() not in ("0", "1"):
                raise DataValidationError(f"{path}: line {lineno}: status must be 0 or 1")
            try:
                x = [float(c) for c in row[2:]]
            except ValueError:
                raise DataValidationError(f"{path}: line {lineno}: bad covariate value") from None
            for j, v in enumerate(x):
                if not np.isfinite(v):
                    raise DataValidationError(
                        f"{path}: line {lineno}: non-finite value in column {labels[j]}"
                    )
            times.append(t)
            status.append(int(row[1]))
            rows.append(x)
    if not times:
        raise DataValidationError(f"{path}: no data rows")
    times = np.asarray(times, dtype=float)
    scale = float(times.max()) if times.max() > 1.0 else 1.0
    return SurvivalDataset(
        times=times / scale,
        status=np.asarray(status, dtype=bool),
        covariates=np.asarray(rows, dtype=float),
        labels=labels,
        time_scale=scale,
    )


def write_dataset(dataset: SurvivalDataset, path) -> None:
    """Inverse of load_dataset (times are written as stored, already in (0, 1])."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "status"] + list(dataset.labels))
        for i in range(dataset.n):
            writer.writerow(
                [repr(float(dataset.times[i])), int(dataset.status[i])]
                + [repr(float(v)) for v in dataset.covariates[i]]
            )


@dataclass(frozen=True)
class RiskSetTimeline:
    """Breakpoint grid of a dataset with at-risk bookkeeping.

    Interval k spans ``[breakpoints[k], breakpoints[k+1])``. The at-risk
    set on interval k is the first ``at_risk[k]`` entries of
    ``desc_order`` (records sorted by decreasing follow-up time), so sums
    over risk sets are prefix sums in that ordering. ``event_interval``
    maps each event record to the interval ending at its time, which is
    where left-continuous integrands are read when the event fires.
    """

    breakpoints: np.ndarray
    lengths: np.ndarray
    at_risk: np.ndarray
    n: int
    desc_order: np.ndarray
    event_rows: np.ndarray
    event_times: np.ndarray
    event_interval: np.ndarray

    def prefix_sums(self, values: np.ndarray) -> np.ndarray:
        """Per-interval sums of per-record values over the at-risk set.

        ``values`` has shape (n,) or (n, M); the result has shape (K,) or
        (K, M) with row k equal to sum over {i : Z_i >= breakpoints[k+1]}.
        """
        v = np.asarray(values, dtype=float)[self.desc_order]
        zero = np.zeros((1,) + v.shape[1:])
        cs = np.concatenate([zero, np.cumsum(v, axis=0)])
        return cs[self.at_risk]

    def at_risk_step(self) -> StepFunction:
        return StepFunction(self.breakpoints, self.at_risk.astype(float))


def build_timeline(dataset: SurvivalDataset) -> RiskSetTimeline:
    """Breakpoints {0} + {distinct follow-up times} + {1}, with risk sets.

    Tied times (event or censoring alike) share one breakpoint. The first
    interval always has all n subjects at risk; intervals beyond the last
    follow-up time have an empty risk set.
    """
    z = dataset.times
    bp = np.unique(np.concatenate([np.array([0.0, 1.0]), z]))
    zasc = np.sort(z)
    # a.e. at-risk count on interval k is #{Z_i >= right endpoint}
    at_risk = dataset.n - np.searchsorted(zasc, bp[1:], side="left")
    event_rows = np.flatnonzero(dataset.status)
    event_times = z[event_rows]
    # Z_i is breakpoint m >= 1; the closed at-risk value at Z_i lives on interval m-1
    event_interval = np.searchsorted(bp, event_times, side="left") - 1
    return RiskSetTimeline(
        breakpoints=bp,
        lengths=np.diff(bp),
        at_risk=at_risk.astype(np.int64),
        n=dataset.n,
        desc_order=np.argsort(-z, kind="stable"),
        event_rows=event_rows,
        event_times=event_times,
        event_interval=event_interval.astype(np.int64),
    )


def risk_set_mean(timeline: RiskSetTimeline, values: np.ndarray) -> StepFunction:
    """At-risk average of per-record values, as a step function of time.

    Empty risk sets average to 0 by convention; those intervals never
    contribute to integrals against at-risk indicators anyway.
    """
    v = np.asarray(values, dtype=float)
    if v.shape != (timeline.n,):
        raise ValueError("values must be one number per record")
    sums = timeline.prefix_sums(v)
    means = np.divide(sums, timeline.at_risk, out=np.zeros_like(sums), where=timeline.at_risk > 0)
    return StepFunction(timeline.breakpoints, means)


def check_orthogonality(timeline: RiskSetTimeline, values: np.ndarray, phi: StepFunction) -> float:
    """Residual of the risk-set centering identity, computed honestly.

    Returns sum_i of the integral of phi(t) * (v_i - vbar_Y(t)) * Y_i(t) dt,
    which is 0 in exact arithmetic for any deterministic step function phi
    because the centered at-risk sum vanishes on every interval. The value
    returned is the floating-point residual of evaluating that sum on the
    refined grid, not a hard-coded zero.
    """
    v = np.asarray(values, dtype=float)
    sums = timeline.prefix_sums(v)
    counts = timeline.at_risk.astype(float)
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    resid = sums - counts * means
    grid = np.unique(np.concatenate([timeline.breakpoints, phi.breakpoints]))
    mids = 0.5 * (grid[:-1] + grid[1:])
    parent = np.searchsorted(timeline.breakpoints, mids, side="left") - 1
    return float(np.sum(np.diff(grid) * phi(mids) * resid[parent]))
