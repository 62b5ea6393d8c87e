"""Randomized pivot clustering of metrics at a correlation threshold.

A pivot is drawn uniformly at random from the unclustered metrics; every
unclustered metric correlated with it at least tau joins its cluster; repeat
until nothing is left.  The uniform pivot choice is realized by drawing one
random permutation up front and always pivoting on its first unclustered
element (the standard equivalent formulation), which keeps a restart's
candidate pivot order independent of tau — that stabilizes cluster counts
across threshold sweeps.

Masked (undefined) correlation entries never attach, and metrics without a
defined self-correlation are left out of the clustering entirely.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fairmetrics import METRIC_LABELS, METRIC_NAMES


@dataclass
class Cluster:
    pivot: int
    members: list  # sorted, includes the pivot


@dataclass
class Clustering:
    clusters: list
    tau: float
    restarts_used: int = 1

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def pivots(self) -> list:
        return [c.pivot for c in self.clusters]

    def covered(self) -> list:
        out = []
        for c in self.clusters:
            out.extend(c.members)
        return sorted(out)

    def validate(self, corr, mask=None) -> None:
        """Partition + threshold property: every member sits with a pivot it
        correlates with at least tau (trivially true for the pivot itself)."""
        corr = np.asarray(corr, dtype=float)
        if mask is None:
            mask = np.isfinite(corr)
        seen = self.covered()
        if len(seen) != len(set(seen)):
            raise AssertionError("clusters overlap")
        for c in self.clusters:
            if c.pivot not in c.members:
                raise AssertionError("pivot missing from its own cluster")
            for j in c.members:
                if j == c.pivot:
                    continue
                if not mask[c.pivot, j] or corr[c.pivot, j] < self.tau:
                    raise AssertionError(
                        f"member {j} violates the threshold against pivot {c.pivot}")


def _eligible(corr, mask):
    corr = np.asarray(corr, dtype=float)
    if corr.ndim != 2 or corr.shape[0] != corr.shape[1]:
        raise ValueError("correlation matrix must be square")
    if mask is None:
        mask = np.isfinite(corr)
    else:
        mask = np.asarray(mask, dtype=bool)
    return corr, mask, np.flatnonzero(mask.diagonal())


def pivot_cluster(corr, tau, rng, mask=None) -> Clustering:
    """One randomized pivot pass over the eligible metrics."""
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie strictly between 0 and 1")
    corr, mask, eligible = _eligible(corr, mask)
    if len(eligible) == 0:
        raise ValueError("no metric has a defined correlation entry")
    order = rng.permutation(corr.shape[0])
    unclustered = set(int(i) for i in eligible)
    clusters = []
    for pivot in order:
        pivot = int(pivot)
        if pivot not in unclustered:
            continue
        members = [
            j for j in unclustered
            if j == pivot or (mask[pivot, j] and corr[pivot, j] >= tau)
        ]
        unclustered.difference_update(members)
        clusters.append(Cluster(pivot, sorted(members)))
    clustering = Clustering(clusters, float(tau))
    clustering.validate(corr, mask)
    return clustering


def _quality(clustering, corr) -> float:
    """Mean pivot-member correlation over non-pivot members (1.0 if none)."""
    values = [
        corr[c.pivot, j]
        for c in clustering.clusters
        for j in c.members
        if j != c.pivot
    ]
    return float(np.mean(values)) if values else 1.0


def best_clustering(corr, tau, restarts: int = 100, rng=None, mask=None) -> Clustering:
    """Fewest clusters over ``restarts`` randomized passes; ties go to the
    larger mean pivot-member correlation.  Deterministic given the rng seed."""
    if restarts < 1:
        raise ValueError("restarts must be positive")
    if rng is None:
        rng = np.random.default_rng(0)
    # draw per-restart child seeds up front so restart r's pivot order does
    # not depend on tau or on earlier restarts' cluster counts
    child_seeds = rng.integers(0, 2**63 - 1, size=restarts)
    best = None
    best_key = None
    for seed in child_seeds:
        candidate = pivot_cluster(corr, tau, np.random.default_rng(seed), mask)
        key = (candidate.n_clusters, -_quality(candidate, np.asarray(corr, dtype=float)))
        if best is None or key < best_key:
            best, best_key = candidate, key
    best.restarts_used = restarts
    return best


def cluster_count_curve(corr, taus, restarts: int = 100, seed: int = 0, mask=None):
    """Cluster counts along a tau grid, each probe with the same fixed seed."""
    return [
        best_clustering(corr, float(t), restarts, np.random.default_rng(seed), mask).n_clusters
        for t in taus
    ]


def find_tau_for_k(corr, k: int, tol: float = 1e-3, restarts: int = 100,
                   seed: int = 0, mask=None):
    """Binary-search tau for a clustering with exactly ``k`` representatives.

    The probed count function is deterministic (fixed seed per probe) and
    non-decreasing in tau for near-optimal restarts, so bisection applies; if
    no probed tau hits k exactly a 0.05-grid scan picks the closest count
    (ties resolved toward the smaller count, then the smaller tau).
    """
    corr = np.asarray(corr, dtype=float)
    _, _, eligible = _eligible(corr, mask)
    if not 1 <= k <= len(eligible):
        raise ValueError(f"k must lie in [1, {len(eligible)}]")

    probed = {}

    def probe(tau):
        tau = float(tau)
        if tau not in probed:
            clustering = best_clustering(corr, tau, restarts,
                                         np.random.default_rng(seed), mask)
            probed[tau] = clustering
        return probed[tau]

    lo, hi = tol, 1.0 - tol
    for tau in (lo, hi):
        if probe(tau).n_clusters == k:
            return tau, probed[tau]
    if probe(lo).n_clusters < k < probe(hi).n_clusters:
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            count = probe(mid).n_clusters
            if count == k:
                return mid, probed[mid]
            if count > k:
                hi = mid
            else:
                lo = mid
    # fallback: coarse grid, closest count wins
    for tau in np.round(np.arange(0.05, 0.951, 0.05), 2):
        probe(float(tau))
    tau, clustering = min(
        probed.items(),
        key=lambda item: (abs(item[1].n_clusters - k), item[1].n_clusters, item[0]),
    )
    return tau, clustering


def clustering_to_dot(clustering: Clustering, corr, names=None) -> str:
    """DOT graph: pivots filled orange, member-pivot edges labeled with the
    mean correlation."""
    corr = np.asarray(corr, dtype=float)
    if names is None:
        names = [f"{label}:{name}" for label, name in zip(METRIC_LABELS, METRIC_NAMES)]
    lines = ["graph fairness_clusters {"]
    lines.append(f'  label="pivot clustering at tau={clustering.tau:.3f}";')
    lines.append("  node [shape=ellipse, style=filled, fillcolor=white];")
    for c in clustering.clusters:
        for j in c.members:
            fill = ', fillcolor=orange' if j == c.pivot else ""
            lines.append(f'  m{j} [label="{names[j]}"{fill}];')
    for c in clustering.clusters:
        for j in c.members:
            if j != c.pivot:
                lines.append(f'  m{j} -- m{c.pivot} [label="{corr[c.pivot, j]:.2f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
