"""Risk-set-centered least-squares system for additive hazard fits.

The partial least-squares contrast for a coefficient vector b is

    R_n(b) = b' H b - 2 b' hn,

where H is the Gram matrix of the dictionary columns under the empirical
inner product <f, g>_n = (1/n) sum_i int (f_i - fbar_Y)(g_i - gbar_Y) Y_i dt
and hn collects the centered dictionary values read at the observed event
times. Every integrand is a step function on the risk-set timeline, so H
and hn are exact finite sums: interval by interval, centered second
moments of the at-risk rows, accumulated backwards in time so the risk
set only ever grows.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .dictionary import DictionaryMatrix
from .survival import RiskSetTimeline, StepFunction, SurvivalDataset, build_timeline


@dataclass(frozen=True)
class GramSystem:
    """Gram matrix, event vector and the per-interval risk-set means.

    ``means[k, j]`` is the at-risk average of dictionary column j on
    timeline interval k (0 on empty risk sets); the left-continuous value
    at an event time is ``means[timeline.event_interval]``.
    """

    matrix: np.ndarray
    vector: np.ndarray
    means: np.ndarray
    timeline: RiskSetTimeline
    labels: list[str]

    @property
    def M(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.timeline.n

    def mean_step(self, j: int) -> StepFunction:
        """Risk-set mean of column j as a step function of time."""
        return StepFunction(self.timeline.breakpoints, self.means[:, j])

    def event_centered(self, values: np.ndarray) -> np.ndarray:
        """values[i] - at-risk mean at Z_i, over event records (delta = 1)."""
        v = np.asarray(values, dtype=float)
        tl = self.timeline
        sums = tl.prefix_sums(v)
        counts = tl.at_risk.astype(float)
        means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
        return v[tl.event_rows] - means[tl.event_interval]


def build_gram(
    dataset: SurvivalDataset,
    dictionary: DictionaryMatrix,
    timeline: RiskSetTimeline | None = None,
) -> GramSystem:
    """Assemble H and hn exactly in one backward sweep over the timeline.

    On each interval the centered second moment of the at-risk rows is
    Q - S S' / R with Q the raw second moment, S the column sums and R the
    at-risk count; Q and S are prefix sums in decreasing-time order, so
    the sweep costs O(n M^2) total. hn averages the centered dictionary
    rows at the event times (left-continuous means, empty risk sets are
    skipped).
    """
    tl = timeline if timeline is not None else build_timeline(dataset)
    phi = dictionary.values
    if phi.shape[0] != tl.n:
        raise ValueError("dictionary rows do not match the dataset")
    n, M = phi.shape
    desc = phi[tl.desc_order]
    lengths = tl.lengths
    counts = tl.at_risk
    sums = tl.prefix_sums(phi)
    means = np.divide(
        sums, counts[:, None].astype(float), out=np.zeros_like(sums), where=counts[:, None] > 0
    )

    acc = np.zeros((M, M))
    second = np.zeros((M, M))
    filled = 0
    for k in range(len(counts) - 1, -1, -1):
        p = int(counts[k])
        if p > filled:
            chunk = desc[filled:p]
            second += chunk.T @ chunk
            filled = p
        if p > 0:
            acc += lengths[k] * (second - np.outer(sums[k], sums[k]) / p)
    matrix = acc / n
    matrix = 0.5 * (matrix + matrix.T)  # accumulation is symmetric up to BLAS rounding

    ev_phi = phi[tl.event_rows]
    ev_means = means[tl.event_interval]
    vector = (ev_phi - ev_means).sum(axis=0) / n

    return GramSystem(
        matrix=matrix, vector=vector, means=means, timeline=tl, labels=list(dictionary.labels)
    )


def empirical_norm_sq(system: GramSystem, beta: np.ndarray) -> float:
    """Squared empirical norm of the dictionary combination, b' H b."""
    b = np.asarray(beta, dtype=float)
    return float(b @ system.matrix @ b)


def empirical_norm_sq_fn(timeline: RiskSetTimeline, values: np.ndarray) -> float:
    """Direct-integration squared norm of arbitrary per-record values.

    Cross-checks the quadratic path: for values = dictionary @ beta the two
    agree up to roundoff.
    """
    v = np.asarray(values, dtype=float)
    sums = timeline.prefix_sums(v)
    squares = timeline.prefix_sums(v * v)
    counts = timeline.at_risk
    live = counts > 0
    centered = squares[live] - sums[live] ** 2 / counts[live]
    return float(np.sum(timeline.lengths[live] * centered) / timeline.n)


def cross_products(timeline: RiskSetTimeline, phi: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Empirical inner products <h_j, v>_n of every column with one function."""
    v = np.asarray(values, dtype=float)
    S_cols = timeline.prefix_sums(phi)
    S_v = timeline.prefix_sums(v)
    S_cross = timeline.prefix_sums(phi * v[:, None])
    counts = timeline.at_risk
    live = counts > 0
    term = S_cross[live] - S_cols[live] * (S_v[live] / counts[live])[:, None]
    return (timeline.lengths[live, None] * term).sum(axis=0) / timeline.n


def empirical_inner_fn(timeline: RiskSetTimeline, left: np.ndarray, right: np.ndarray) -> float:
    """Empirical inner product <u, v>_n of two per-record value vectors."""
    u = np.asarray(left, dtype=float)
    return float(cross_products(timeline, u[:, None], right)[0])


def objective(
    system: GramSystem,
    beta: np.ndarray,
    weights: np.ndarray | None = None,
    kappa: float = 1.0,
) -> float:
    """Penalized contrast R_n(b) + kappa * sum_j w_j |b_j| (penalty optional)."""
    b = np.asarray(beta, dtype=float)
    value = float(b @ system.matrix @ b - 2.0 * b @ system.vector)
    if weights is not None:
        value += kappa * float(np.abs(b) @ np.asarray(weights, dtype=float))
    return value


def dump_gram(system: GramSystem, path) -> None:
    """Write H and hn as one CSV (row j: label, H[j, :], hn[j])."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + list(system.labels) + ["hn"])
        for j, label in enumerate(system.labels):
            row = [repr(float(v)) for v in system.matrix[j]]
            writer.writerow([label] + row + [repr(float(system.vector[j]))])
