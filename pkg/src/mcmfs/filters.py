"""Filter-style feature scoring baselines: ReliefF and FCBF.

ReliefF scores features by contrasting each sample against its nearest
neighbors of the same and opposite class; a cumulative-mass rule turns the
ranking into a selection.  FCBF scores features by symmetrical uncertainty
against the class over equal-frequency discretized values and prunes
redundant features by predominant correlation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataError, Dataset


@dataclass(frozen=True)
class FeatureRanking:
    """Descending-ordered (feature index, score) pairs from a filter method."""

    entries: tuple[tuple[int, float], ...]
    method: str
    cutoff_rule: str = "none"

    def __post_init__(self):
        entries = tuple((int(j), float(s)) for j, s in self.entries)
        if not entries:
            raise DataError("ranking must not be empty")
        scores = [s for _, s in entries]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise DataError("ranking scores must be non-increasing")
        if len({j for j, _ in entries}) != len(entries):
            raise DataError("ranking features must be unique")
        object.__setattr__(self, "entries", entries)


@dataclass(frozen=True)
class DiscreteDataset:
    """Per-feature bin identifiers (0..bins-1 each) plus the original labels."""

    samples: np.ndarray
    bins_per_feature: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.int64, ndmin=2)
        bins = np.array(self.bins_per_feature, dtype=np.int64)
        labels = np.array(self.labels, dtype=np.int64)
        m, n = samples.shape
        if bins.shape != (n,) or labels.shape != (m,):
            raise DataError("inconsistent discrete dataset shapes")
        if np.any(samples < 0) or np.any(samples >= bins[None, :]):
            raise DataError("bin identifiers out of range")
        for arr in (samples, bins, labels):
            arr.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "bins_per_feature", bins)
        object.__setattr__(self, "labels", labels)


def relieff_rank(d: Dataset, k_neighbors: int = 10, seed: int = 42) -> FeatureRanking:
    """ReliefF feature weights over all samples as anchors.

    For each anchor, the k nearest same-class and k nearest opposite-class
    neighbors by Manhattan distance adjust every feature weight by the
    range-normalized coordinate difference: hits subtract, misses add, each
    scaled by 1/(M*k).  The seed only breaks exact distance ties, so weights
    land in [-1, 1] regardless of it.
    """
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be at least 1")
    X = d.samples
    y = d.labels
    M, n = X.shape
    for value, count in d.class_counts().items():
        if count == 0:
            raise DataError("single-class dataset")
        if count <= k_neighbors:
            raise DataError(
                f"class {value:+d} has {count} samples; k_neighbors={k_neighbors} needs more")

    ranges = X.max(axis=0) - X.min(axis=0)
    ranges = np.where(ranges > 0.0, ranges, 1.0)
    tie_rank = np.random.default_rng(seed).permutation(M)

    weights = np.zeros(n)
    scale = 1.0 / (M * k_neighbors)
    for i in range(M):
        diffs = np.abs(X - X[i])
        dists = diffs.sum(axis=1)
        order = np.lexsort((tie_rank, dists))
        same = y[order] == y[i]
        hit_order = order[same & (order != i)][:k_neighbors]
        miss_order = order[~same][:k_neighbors]
        weights -= diffs[hit_order].sum(axis=0) / ranges * scale
        weights += diffs[miss_order].sum(axis=0) / ranges * scale

    ranked = np.lexsort((np.arange(n), -weights))
    entries = tuple((int(j), float(weights[j])) for j in ranked)
    return FeatureRanking(entries, method="relieff")


def cumulative_fraction_select(r: FeatureRanking, fraction: float) -> tuple[int, ...]:
    """Smallest ranking prefix whose clamped scores reach `fraction` of the total.

    Negative scores count as zero.  If every clamped score is zero the single
    top-ranked feature is returned.  Indices come back in ascending order.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    clamped = [max(score, 0.0) for _, score in r.entries]
    total = sum(clamped)
    if total <= 0.0:
        return (r.entries[0][0],)
    target = fraction * total
    chosen = []
    cum = 0.0
    for (j, _), mass in zip(r.entries, clamped):
        chosen.append(j)
        cum += mass
        if cum >= target - 1e-12 * total:
            break
    return tuple(sorted(chosen))


def discretize_equal_frequency(d: Dataset, bins: int = 10) -> DiscreteDataset:
    """Quantile-boundary discretization, fitted and applied on `d` itself.

    Duplicate quantile boundaries collapse, so skewed or constant features
    yield fewer than `bins` bins (a constant feature yields one).
    """
    if bins < 2:
        raise ValueError("bins must be at least 2")
    M, n = d.samples.shape
    ids = np.empty((M, n), dtype=np.int64)
    counts = np.empty(n, dtype=np.int64)
    qs = np.arange(1, bins) / bins
    for j in range(n):
        col = d.samples[:, j]
        boundaries = np.unique(np.quantile(col, qs))
        raw = np.searchsorted(boundaries, col, side="right")
        _, ids[:, j] = np.unique(raw, return_inverse=True)
        counts[j] = ids[:, j].max() + 1
    return DiscreteDataset(ids, counts, d.labels)


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log2(p)).sum())


def _su_codes(x: np.ndarray, y: np.ndarray) -> float:
    """Symmetrical uncertainty of two integer-coded columns (base-2 logs)."""
    nx = int(x.max()) + 1
    ny = int(y.max()) + 1
    joint = np.bincount(x * ny + y, minlength=nx * ny).reshape(nx, ny)
    hx = _entropy(joint.sum(axis=1))
    hy = _entropy(joint.sum(axis=0))
    denom = hx + hy
    if denom <= 0.0:
        return 0.0
    hxy = _entropy(joint.reshape(-1))
    su = 2.0 * (hx + hy - hxy) / denom
    return min(1.0, max(0.0, su))


def symmetrical_uncertainty(x, y) -> float:
    """SU(X, Y) = 2*I(X;Y) / (H(X) + H(Y)) for two discrete columns.

    Logarithms are base 2 and 0*log(0) counts as 0; degenerate columns with
    H(X) + H(Y) = 0 score 0.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise ValueError("x and y must be nonempty 1-D arrays of equal length")
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    return _su_codes(xi, yi)


def fcbf_select(dd: DiscreteDataset, delta: float = 0.0) -> tuple[int, ...]:
    """Fast correlation-based filter over a discretized dataset.

    Features with SU against the class above `delta` are walked in descending
    relevance (ties by ascending index); each survivor removes any later
    feature it predominates, i.e. any f' with SU(f, f') >= SU(f', class).
    Survivors come back in ascending index order.
    """
    X = dd.samples
    n = X.shape[1]
    _, yi = np.unique(dd.labels, return_inverse=True)
    su_class = np.array([_su_codes(X[:, j], yi) for j in range(n)])
    order = np.lexsort((np.arange(n), -su_class))
    queue = [int(j) for j in order if su_class[j] > delta]
    survivors = []
    while queue:
        f = queue.pop(0)
        survivors.append(f)
        queue = [g for g in queue if _su_codes(X[:, f], X[:, g]) < su_class[g]]
    return tuple(sorted(survivors))


def su_rank(dd: DiscreteDataset) -> FeatureRanking:
    """Ranking of all features by SU against the class (descending)."""
    X = dd.samples
    n = X.shape[1]
    _, yi = np.unique(dd.labels, return_inverse=True)
    su_class = np.array([_su_codes(X[:, j], yi) for j in range(n)])
    order = np.lexsort((np.arange(n), -su_class))
    entries = tuple((int(j), float(su_class[j])) for j in order)
    return FeatureRanking(entries, method="fcbf")


def ranking_to_text(r: FeatureRanking, feature_names=None) -> str:
    """Two-column plain-text table: feature name (or index), score."""
    lines = [f"# ranking method={r.method} cutoff={r.cutoff_rule}"]
    for j, score in r.entries:
        name = feature_names[j] if feature_names is not None else str(j + 1)
        lines.append(f"{name}\t{score:.17g}")
    return "\n".join(lines) + "\n"
