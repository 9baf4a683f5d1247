"""Lloyd's k-means with k-means++ (D^2) seeding and best-of-n restarts.

The functional API (``lloyd``, ``seed_plusplus``, ``kmeans_restarts``) is what
the K-tree uses for node splits; ``KMeansPlusPlus`` wraps it as a scikit-learn
estimator for codebook reclustering and standalone use.
"""
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._utils import DistanceTally, check_rng, child_rng


@dataclass
class KMeansResult:
    centroids: np.ndarray
    assignment: np.ndarray
    distortion: float
    iterations: int
    history: list = field(default_factory=list)

    @property
    def k(self):
        return len(self.centroids)


def _sq_dists(X, C, block=1 << 22):
    # The ||x||^2 - 2x.c + ||c||^2 expansion loses precision for near-identical
    # points and breaks exact ties, so differences are formed explicitly in
    # row blocks to bound memory.
    n, k = len(X), len(C)
    step = max(1, block // max(1, k * X.shape[1]))
    if step >= n:
        d = X[:, None, :] - C[None, :, :]
        return np.einsum("ijk,ijk->ij", d, d)
    out = np.empty((n, k))
    for s in range(0, n, step):
        d = X[s:s + step, None, :] - C[None, :, :]
        out[s:s + step] = np.einsum("ijk,ijk->ij", d, d)
    return out


def _weighted_means(X, w, assignment, k):
    onehot = (assignment[None, :] == np.arange(k)[:, None]) * w
    return (onehot @ X) / onehot.sum(axis=1)[:, None]


def _draw(rng, mass):
    # same inverse-CDF draw as Generator.choice(n, p=mass/sum), minus its checks
    cdf = np.cumsum(mass / mass.sum())
    cdf /= cdf[-1]
    return int(np.searchsorted(cdf, rng.random(), side="right"))


def distortion(X, centroids, assignment, weights=None):
    X = np.asarray(X, dtype=np.float64)
    d = X - np.asarray(centroids)[assignment]
    per_point = np.einsum("ij,ij->i", d, d)
    if weights is not None:
        per_point = per_point * np.asarray(weights, dtype=np.float64)
    return float(per_point.sum())


def _repair_empty(assignment, D2, k):
    """Move the worst-fitting point into each empty cluster.

    Only points from clusters with more than one member are eligible, so a
    repair never empties another cluster.
    """
    counts = np.bincount(assignment, minlength=k)
    if counts.all():
        return assignment
    for j in np.flatnonzero(counts == 0):
        own = D2[np.arange(len(assignment)), assignment]
        eligible = counts[assignment] > 1
        own = np.where(eligible, own, -1.0)
        p = int(np.argmax(own))
        counts[assignment[p]] -= 1
        assignment[p] = j
        counts[j] = 1
    return assignment


def lloyd(points, initial_centroids, max_iters=100, tol=1e-6, weights=None, tally=None):
    """Run Lloyd iterations from the given centroids.

    Stops when the assignment no longer changes, when the relative distortion
    improvement drops below ``tol``, or after ``max_iters`` iterations.
    Assignment ties go to the lower centroid index. Empty clusters are
    reseeded with the point farthest from its own centroid, so the result
    always has exactly ``k`` non-empty clusters.

    ``weights`` turns this into weighted k-means (used when splitting
    internal K-tree nodes whose keys stand for many vectors).
    """
    X = np.asarray(points, dtype=np.float64)
    C = np.array(initial_centroids, dtype=np.float64, copy=True)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("points must be a non-empty 2-d array")
    if C.ndim != 2 or C.shape[1] != X.shape[1]:
        raise ValueError("centroid dimension does not match points")
    n, k = len(X), len(C)
    if k < 1 or k > n:
        raise ValueError("need 1 <= k <= n_points, got k=%d, n=%d" % (k, n))
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    return _lloyd_core(X, C, w, max_iters, tol, tally)


def _lloyd_core(X, C, w, max_iters, tol, tally):
    n, k = len(X), len(C)
    history = []
    prev_assignment = None
    prev = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        D2 = _sq_dists(X, C)
        if tally is not None:
            tally.count += n * k
        assignment = D2.argmin(axis=1)
        if k > 1:
            assignment = _repair_empty(assignment, D2, k)
        C = _weighted_means(X, w, assignment, k)
        d = X - C[assignment]
        cur = float(np.einsum("ij,ij->i", d, d) @ w)
        history.append(cur)
        if prev_assignment is not None and np.array_equal(assignment, prev_assignment):
            break
        if cur == 0.0 or (prev < np.inf and prev - cur < tol * prev):
            break
        prev_assignment, prev = assignment, cur
    return KMeansResult(C, assignment, history[-1], it, history)


def seed_plusplus(points, k, rng=None, weights=None, tally=None):
    """k-means++ seeding: returns copies of ``k`` input points.

    The first seed is uniform (or proportional to ``weights``); each further
    seed is drawn with probability proportional to the squared distance to the
    nearest seed chosen so far. When that mass is zero, i.e. only duplicates
    remain, the next seed is uniform over the points not chosen yet.
    """
    X = np.asarray(points, dtype=np.float64)
    n = len(X)
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n_points, got k=%d, n=%d" % (k, n))
    rng = check_rng(rng)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)

    chosen = [_draw(rng, w)]
    closest = np.full(n, np.inf)
    for _ in range(1, k):
        d = X - X[chosen[-1]]
        closest = np.minimum(closest, np.einsum("ij,ij->i", d, d))
        if tally is not None:
            tally.add(n)
        mass = w * closest
        total = mass.sum()
        if total > 0:
            nxt = _draw(rng, mass)
        else:
            rest = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(rest))
        chosen.append(nxt)
    return X[chosen].copy()


def _py_draw(rng, mass):
    total = 0.0
    cdf = []
    for m in mass:
        total += m
        cdf.append(total)
    u = rng.random() * 1.0
    last = cdf[-1]
    for i, c in enumerate(cdf):
        if c / last > u:
            return i
    return len(cdf) - 1


def two_means_small(points, rng, weights=None, max_iters=100, tol=1e-6, tally=None):
    """``seed_plusplus`` plus ``lloyd`` for k = 2 with scalar control flow.

    Same algorithm, ties and stopping rules as the general functions; it only
    exists because per-call overhead dominates on the handful of vectors a
    low-order K-tree node splits.
    """
    X = np.asarray(points, dtype=np.float64)
    n = len(X)
    if n < 2:
        raise ValueError("need at least 2 points, got %d" % n)
    w = [1.0] * n if weights is None else [float(x) for x in weights]
    wsum = sum(w)
    first = _py_draw(rng, [x / wsum for x in w])
    d = X - X[first]
    closest = np.add.reduce(d * d, axis=1).tolist()
    if tally is not None:
        tally.count += n
    mass = [a * b for a, b in zip(w, closest)]
    total = sum(mass)
    if total > 0:
        second = _py_draw(rng, [m / total for m in mass])
    else:
        second = int(rng.choice(np.setdiff1d(np.arange(n), [first])))
    C = X[[first, second]]
    W = np.asarray(w)

    history = []
    prev_assignment = None
    prev = np.inf
    it = 0
    for it in range(1, max_iters + 1):
        if tally is not None:
            tally.count += 2 * n
        diff = X[:, None, :] - C[None, :, :]
        D = np.add.reduce(diff * diff, axis=2).tolist()
        a = [0 if p <= q else 1 for p, q in D]
        ones = sum(a)
        if ones == 0 or ones == n:
            # one cluster holds every point, so all of them may move
            empty = 1 if ones == 0 else 0
            own = [row[1 - empty] for row in D]
            a[max(range(n), key=lambda i: (own[i], -i))] = empty
        A = np.array(a)
        m1 = A * W
        m0 = W - m1
        C = np.array([m0 @ X / sum(m0.tolist()), m1 @ X / sum(m1.tolist())])
        r = X - C[A]
        cur = float(np.add.reduce(r * r, axis=1) @ W)
        history.append(cur)
        if prev_assignment is not None and a == prev_assignment:
            break
        if cur == 0.0 or (prev < np.inf and prev - cur < tol * prev):
            break
        prev_assignment, prev = a, cur
    return KMeansResult(C, A, history[-1], it, history)


def kmeans_restarts(points, k, runs=20, rng=None, max_iters=100, tol=1e-6,
                    weights=None, tally=None):
    """Best (lowest distortion) of ``runs`` k-means++ seeded Lloyd runs."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    rng = check_rng(rng)
    best = None
    for _ in range(runs):
        sub = child_rng(rng)
        seeds = seed_plusplus(points, k, sub, weights=weights, tally=tally)
        res = lloyd(points, seeds, max_iters=max_iters, tol=tol, weights=weights, tally=tally)
        if best is None or res.distortion < best.distortion:
            best = res
    return best


class KMeansPlusPlus(ClusterMixin, BaseEstimator):
    """k-means with D^2 seeding, keeping the lowest-distortion of ``n_init`` runs.

    Parameters
    ----------
    n_clusters : int
    n_init : int, default 20
        Number of seeded restarts.
    max_iter : int, default 100
    tol : float, default 1e-6
        Relative distortion improvement below which Lloyd stops.
    random_state : None, int or numpy Generator

    Attributes
    ----------
    cluster_centers_, labels_, inertia_, n_iter_
    """

    def __init__(self, n_clusters=8, n_init=20, max_iter=100, tol=1e-6, random_state=None):
        self.n_clusters = n_clusters
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None, sample_weight=None):
        X = check_array(X, dtype=np.float64)
        self.n_features_in_ = X.shape[1]
        res = kmeans_restarts(X, self.n_clusters, runs=self.n_init,
                              rng=check_rng(self.random_state), max_iters=self.max_iter,
                              tol=self.tol, weights=sample_weight)
        self.cluster_centers_ = res.centroids
        self.labels_ = res.assignment
        self.inertia_ = res.distortion
        self.n_iter_ = res.iterations
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError("X has %d features, expected %d" % (X.shape[1], self.n_features_in_))
        return np.argmin(_sq_dists(X, self.cluster_centers_), axis=1)
