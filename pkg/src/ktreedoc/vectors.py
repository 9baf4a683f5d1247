"""Dense vector helpers shared by k-means, the K-tree and the corpus code.

Vectors are plain 1-d ``numpy`` float arrays. Every function validates its
inputs and raises ``ValueError`` on dimension mismatches or degenerate
(zero-norm) arguments.
"""
import numpy as np


def as_vector(a):
    v = np.asarray(a, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a non-empty 1-d vector, got shape %s" % (v.shape,))
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains NaN or Inf")
    return v


def _pair(a, b):
    a, b = as_vector(a), as_vector(b)
    if a.shape != b.shape:
        raise ValueError("dimension mismatch: %d != %d" % (a.size, b.size))
    return a, b


def euclidean(a, b):
    a, b = _pair(a, b)
    d = a - b
    return float(np.sqrt(np.dot(d, d)))


def sq_euclidean(a, b):
    a, b = _pair(a, b)
    d = a - b
    return float(np.dot(d, d))


def cosine(a, b):
    """Cosine similarity; raises on zero-norm input instead of returning NaN."""
    a, b = _pair(a, b)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("cosine similarity undefined for a zero-norm vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def weighted_mean(vectors, weights):
    if len(vectors) == 0:
        raise ValueError("weighted_mean of an empty set")
    if len(vectors) != len(weights):
        raise ValueError("got %d vectors but %d weights" % (len(vectors), len(weights)))
    X = np.vstack([as_vector(v) for v in vectors]).astype(np.longdouble)
    w = np.asarray(weights, dtype=np.longdouble)
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    total = w.sum()
    return np.asarray((w[:, None] * X).sum(axis=0) / total, dtype=np.float64)


def incremental_mean(mean, count, v):
    """Fold one vector into a running mean of ``count`` vectors."""
    mean, v = _pair(mean, v)
    return mean + (v - mean) / (count + 1)


def unit_normalize(a):
    a = as_vector(a)
    n = np.linalg.norm(a)
    if n == 0:
        raise ValueError("cannot normalize a zero vector")
    return a / n


def row_sq_distances(X, v):
    """Squared Euclidean distance from each row of ``X`` to ``v``."""
    d = X - v
    return np.einsum("ij,ij->i", d, d)


def nearest_index(X, v):
    # argmin returns the first minimum, which is the lower-index tie-break
    return int(np.argmin(row_sq_distances(X, v)))
