"""K-tree: a height-balanced cluster tree built online with 2-means splits.

Leaves hold data vectors; internal nodes hold one key (a centroid) per child,
and each key is the mean of every data vector beneath it. Insertion follows
the nearest key at every level, folds the new vector into each key on the way
down, and splits any node that overflows ``order`` entries with 2-means. Root
splits add a level on top, so all leaves stay at the same depth.

Levels are numbered from the root (level 1) down to the leaves (level
``depth_``); the keys at level ``depth_ - 1`` are the codebook.
"""
import copy

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._utils import DistanceTally, check_rng
from .evaluation import Clustering
from .kmeans import lloyd, seed_plusplus, two_means_small

METHODS = ("leftasis", "rearranged", "cosine")


class _Node:
    __slots__ = ("is_leaf", "keys", "counts", "children", "members")

    def __init__(self, is_leaf, keys=None, counts=None, children=None, members=None):
        self.is_leaf = is_leaf
        self.keys = keys                # (n, dim) array, internal only
        self.counts = counts            # (n,) int array, internal only
        self.children = children        # list of _Node, internal only
        self.members = members          # list of row indices, leaf only

    def __len__(self):
        return len(self.members) if self.is_leaf else len(self.children)


def assign_by_cosine(centroids, X, ids=None):
    """Assign each row of ``X`` to the centroid with the highest cosine.

    Ties go to the lower centroid index. Zero-norm rows cannot be compared,
    so they land in cluster 0 and are counted in ``Clustering.warnings``.
    """
    C = np.asarray(centroids, dtype=np.float64)
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if C.ndim != 2 or len(C) == 0:
        raise ValueError("need at least one centroid")
    if C.shape[1] != X.shape[1]:
        raise ValueError("centroid dim %d != vector dim %d" % (C.shape[1], X.shape[1]))
    cn = np.linalg.norm(C, axis=1)
    if np.any(cn == 0):
        raise ValueError("zero-norm centroid at index %d" % int(np.flatnonzero(cn == 0)[0]))
    xn = np.linalg.norm(X, axis=1)
    zero = xn == 0
    sims = (X @ C.T) / (np.where(zero, 1.0, xn)[:, None] * cn[None, :])
    labels = np.argmax(sims, axis=1)
    labels[zero] = 0
    if ids is None:
        ids = list(range(len(X)))
    return Clustering.from_labels(ids, labels, n_clusters=len(C), warnings=int(zero.sum()))


class KTree(ClusterMixin, BaseEstimator):
    """Online K-tree clusterer.

    Parameters
    ----------
    order : int, default 50
        Maximum number of entries (keys or data vectors) in a node.
    max_iter, tol : k-means settings used for node splits.
    n_init : int, default 1
        Seeded 2-means runs per split; the lowest-distortion run is kept.
    random_state : None, int or numpy Generator
        Drives the k-means++ seeding of every split.

    Attributes
    ----------
    labels_ : codebook cluster of each fitted row (all zeros while the tree
        is a single leaf).
    depth_, size_ : number of levels and number of stored vectors.
    tally_ : ``DistanceTally`` counting distance evaluations (search + splits).
    """

    def __init__(self, order=50, max_iter=100, tol=1e-6, n_init=1, random_state=None):
        self.order = order
        self.max_iter = max_iter
        self.tol = tol
        self.n_init = n_init
        self.random_state = random_state

    # construction -------------------------------------------------------

    def _reset(self):
        if int(self.order) < 2:
            raise ValueError("order must be >= 2, got %r" % (self.order,))
        self.root_ = _Node(True, members=[])
        self.depth_ = 1
        self.size_ = 0
        self.ids_ = []
        self.n_features_in_ = None
        self.tally_ = DistanceTally()
        self._data = []
        self._rng = check_rng(self.random_state)

    def fit(self, X, y=None, ids=None):
        X = check_array(X, dtype=np.float64)
        if ids is not None and len(ids) != len(X):
            raise ValueError("got %d ids for %d rows" % (len(ids), len(X)))
        self._reset()
        for i, v in enumerate(X):
            self.insert(v, i if ids is None else ids[i])
        self.labels_ = self._leaf_labels()
        return self

    def insert(self, v, id=None):
        """Insert one vector; ``id`` defaults to its insertion index."""
        if not hasattr(self, "root_"):
            self._reset()
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ValueError("expected a finite 1-d vector")
        if self.n_features_in_ is None:
            self.n_features_in_ = v.size
        elif v.size != self.n_features_in_:
            raise ValueError("dimension mismatch: %d != %d" % (v.size, self.n_features_in_))
        row = len(self._data)
        self._data.append(v)
        self.ids_.append(row if id is None else id)
        split = self._insert(self.root_, row, v)
        if split is not None:
            (left, kl, cl), (right, kr, cr) = split
            self.root_ = _Node(False, keys=np.vstack([kl, kr]),
                               counts=np.array([cl, cr]), children=[left, right])
            self.depth_ += 1
        self.size_ += 1
        return self

    def _nearest(self, node, v):
        d = node.keys - v
        self.tally_.count += len(d)
        return int(np.add.reduce(d * d, axis=1).argmin())

    def _insert(self, node, row, v):
        if node.is_leaf:
            node.members.append(row)
            if len(node.members) > self.order:
                return self._split_leaf(node)
            return None
        d = node.keys - v
        self.tally_.count += len(d)
        j = int(np.add.reduce(d * d, axis=1).argmin())
        c = int(node.counts[j])
        # key updated before descending, with the pre-insert count
        node.keys[j] -= d[j] / (c + 1)
        node.counts[j] = c + 1
        split = self._insert(node.children[j], row, v)
        if split is None:
            return None
        (left, kl, cl), (right, kr, cr) = split
        node.children[j:j + 1] = [left, right]
        keys = np.empty((len(node.keys) + 1, node.keys.shape[1]))
        keys[:j] = node.keys[:j]
        keys[j] = kl
        keys[j + 1] = kr
        keys[j + 2:] = node.keys[j + 1:]
        node.keys = keys
        node.counts = np.insert(node.counts, j, cl)
        node.counts[j + 1] = cr
        if len(node.children) > self.order:
            return self._split_internal(node)
        return None

    def _two_means(self, points, weights=None):
        # per-call overhead dominates the general routines on small splits
        small = len(points) <= 16
        best = None
        for _ in range(self.n_init):
            if small:
                res = two_means_small(points, self._rng, weights, self.max_iter, self.tol,
                                      self.tally_)
            else:
                seeds = seed_plusplus(points, 2, self._rng, weights=weights, tally=self.tally_)
                res = lloyd(points, seeds, max_iters=self.max_iter, tol=self.tol,
                            weights=weights, tally=self.tally_)
            if best is None or res.distortion < best.distortion:
                best = res
        return best

    def _split_leaf(self, node):
        rows = node.members
        res = self._two_means(np.vstack([self._data[r] for r in rows]))
        out = []
        for side in (0, 1):
            mine = [r for r, a in zip(rows, res.assignment) if a == side]
            out.append((_Node(True, members=mine), res.centroids[side], len(mine)))
        return out

    def _split_internal(self, node):
        # weighted by subtree counts so each new key is the exact mean of its data
        res = self._two_means(node.keys, weights=node.counts)
        out = []
        labels = res.assignment.tolist()
        for side in (0, 1):
            idx = [i for i, a in enumerate(labels) if a == side]
            counts = node.counts[idx]
            child = _Node(False, keys=node.keys[idx], counts=counts,
                          children=[node.children[i] for i in idx])
            out.append((child, res.centroids[side], int(counts.sum())))
        return out

    # traversal ----------------------------------------------------------

    def _nodes_at_level(self, level):
        nodes = [self.root_]
        for _ in range(level - 1):
            nodes = [c for n in nodes for c in n.children]
        return nodes

    def _subtree_rows(self, node):
        if node.is_leaf:
            return list(node.members)
        return [r for c in node.children for r in self._subtree_rows(c)]

    def level_sizes(self):
        """Number of nodes at each level, root first."""
        check_is_fitted(self, "root_")
        return [len(self._nodes_at_level(lv)) for lv in range(1, self.depth_ + 1)]

    def _check_level(self, level):
        if not 1 <= level <= self.depth_ - 1:
            raise ValueError("level must be in [1, %d] for a tree of depth %d, got %r"
                             % (self.depth_ - 1, self.depth_, level))

    def keys_at_level(self, level):
        """Keys of all nodes at ``level``, left to right."""
        check_is_fitted(self, "root_")
        self._check_level(level)
        return np.vstack([n.keys for n in self._nodes_at_level(level)])

    def counts_at_level(self, level):
        """Number of data vectors under each key returned by ``keys_at_level``."""
        check_is_fitted(self, "root_")
        self._check_level(level)
        return np.concatenate([n.counts for n in self._nodes_at_level(level)])

    def codebook(self):
        check_is_fitted(self, "root_")
        if self.depth_ < 2:
            raise ValueError("tree has a single level; no codebook yet")
        return self.keys_at_level(self.depth_ - 1)

    def _level_labels(self, level):
        labels = np.empty(len(self._data), dtype=np.int64)
        c = 0
        for node in self._nodes_at_level(level):
            for child in node.children:
                labels[self._subtree_rows(child)] = c
                c += 1
        return labels, c

    def _leaf_labels(self):
        if self.depth_ < 2:
            return np.zeros(len(self._data), dtype=np.int64)
        return self._level_labels(self.depth_ - 1)[0]

    def clusters_at_level(self, level=None, method="leftasis"):
        """Cluster all stored vectors using the keys at ``level``.

        ``leftasis`` uses subtree membership as built; ``rearranged`` does the
        same on a rearranged copy of the tree; ``cosine`` assigns every vector
        to the level's key with the highest cosine similarity. ``level``
        defaults to the codebook level.
        """
        check_is_fitted(self, "root_")
        if level is None:
            level = self.depth_ - 1
        self._check_level(level)
        if method == "leftasis":
            labels, k = self._level_labels(level)
            return Clustering.from_labels(self.ids_, labels, n_clusters=k)
        if method == "rearranged":
            return copy.deepcopy(self).rearrange().clusters_at_level(level, "leftasis")
        if method == "cosine":
            return assign_by_cosine(self.keys_at_level(level), np.vstack(self._data), self.ids_)
        raise ValueError("unknown method %r, expected one of %s" % (method, METHODS))

    def _route(self, v):
        """Greedy nearest-key descent; returns the leaf and the path taken."""
        node, path = self.root_, []
        while not node.is_leaf:
            j = self._nearest(node, v)
            path.append((node, j))
            node = node.children[j]
        return node, path

    def rearrange(self):
        """Re-route every vector through the frozen keys and prune empty nodes.

        Keys are left untouched; counts are recomputed. Leaves may exceed
        ``order`` afterwards since no splits are performed.
        """
        check_is_fitted(self, "root_")
        if self.depth_ < 2:
            raise ValueError("rearrange needs a tree with at least two levels")
        targets = [self._route(v)[0] for v in self._data]
        for leaf in self._nodes_at_level(self.depth_):
            leaf.members = []
        for row, leaf in enumerate(targets):
            leaf.members.append(row)
        self._prune(self.root_)
        self.labels_ = self._leaf_labels()
        return self

    def _prune(self, node):
        if node.is_leaf:
            return len(node.members)
        sizes = np.array([self._prune(c) for c in node.children], dtype=np.int64)
        keep = np.flatnonzero(sizes > 0)
        node.children = [node.children[i] for i in keep]
        node.keys = node.keys[keep]
        node.counts = sizes[keep]
        return int(sizes.sum())

    # estimator API ------------------------------------------------------

    def predict(self, X):
        """Codebook cluster reached by greedy descent for each row of ``X``."""
        check_is_fitted(self, "root_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError("X has %d features, expected %d" % (X.shape[1], self.n_features_in_))
        if self.depth_ < 2:
            return np.zeros(len(X), dtype=np.int64)
        index = {id(leaf): i for i, leaf in enumerate(self._nodes_at_level(self.depth_))}
        return np.array([index[id(self._route(v)[0])] for v in X], dtype=np.int64)

    def data(self):
        check_is_fitted(self, "root_")
        return np.vstack(self._data) if self._data else np.empty((0, 0))

    def dump(self):
        """Depth-first text dump, one line per node.

        ``<level> <key_index> <count> <centroid...>``; leaf lines add a TAB and
        the member ids. The root's centroid is the mean of all data.
        """
        check_is_fitted(self, "root_")
        lines = []

        def fmt(v):
            return " ".join("%.9g" % x for x in v)

        def walk(node, level, index, count, key):
            line = "%d %d %d %s" % (level, index, count, fmt(key))
            if node.is_leaf:
                lines.append(line + "\t" + " ".join(str(self.ids_[r]) for r in node.members))
                return
            lines.append(line)
            for i, child in enumerate(node.children):
                walk(child, level + 1, i, int(node.counts[i]), node.keys[i])

        mean = self.data().mean(axis=0) if self._data else np.empty(0)
        walk(self.root_, 1, 0, self.size_, mean)
        return "\n".join(lines) + "\n"
