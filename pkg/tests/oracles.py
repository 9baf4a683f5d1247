"""Independent reference computations used by several test modules."""
import itertools

import numpy as np


def brute_force_kmeans(X, k):
    """Minimum distortion over every assignment of points to ``k`` labels."""
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    labelings = np.array(list(itertools.product(range(k), repeat=n)), dtype=np.int64)
    sq = (X ** 2).sum(axis=1)
    total = np.zeros(len(labelings))
    for j in range(k):
        onehot = (labelings == j).astype(np.float64)
        counts = onehot.sum(axis=1)
        sums = onehot @ X
        within = onehot @ sq - np.where(counts > 0, (sums ** 2).sum(axis=1) / np.maximum(counts, 1), 0)
        total += within
    return float(total.min())


def subtree_rows(node):
    if node.is_leaf:
        return list(node.members)
    out = []
    for child in node.children:
        out.extend(subtree_rows(child))
    return out


def walk(node, depth=1):
    """Yield ``(node, depth)`` for every node, depth-first."""
    yield node, depth
    if not node.is_leaf:
        for child in node.children:
            yield from walk(child, depth + 1)


def dump_level_counts(dump_text):
    """Count nodes per level from the textual tree dump."""
    counts = {}
    for line in dump_text.splitlines():
        level = int(line.split()[0])
        counts[level] = counts.get(level, 0) + 1
    return [counts[k] for k in sorted(counts)]
