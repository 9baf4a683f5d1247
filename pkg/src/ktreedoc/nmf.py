"""Non-negative matrix factorization by alternating projected gradient.

``nmf_pg`` follows the term-by-document orientation: ``V`` (n x m) is
approximated by ``W @ H`` with ``W`` (n x r) and ``H`` (r x m), so each
column of ``H`` describes one document. ``ProjectedGradientNMF`` exposes the
same solver with scikit-learn's samples-by-features orientation.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._utils import check_rng
from .evaluation import Clustering

BETA = 0.1
SIGMA = 0.01


@dataclass
class NMFResult:
    W: np.ndarray
    H: np.ndarray
    objective_trace: list = field(default_factory=list)
    iterations: int = 0
    initial_objective: float = 0.0
    converged: bool = False


def objective(V, W, H):
    """Half the squared Frobenius norm of ``V - W @ H``."""
    if sp.issparse(V):
        # expanded form avoids densifying V
        WtV = (V.T @ W).T
        val = (V.multiply(V).sum() - 2.0 * np.sum(WtV * H)
               + np.sum((W.T @ W) * (H @ H.T)))
        return 0.5 * max(float(val), 0.0)
    R = V - W @ H
    return 0.5 * float(np.sum(R * R))


def _projected_norm(grad, X):
    return np.linalg.norm(grad[(grad < 0) | (X > 0)])


def nls_subproblem(V, W, H, tol, max_iter=1000):
    """Solve min_{H>=0} 0.5||V - W H||^2 from a start ``H`` by projected gradient.

    Step sizes follow the Armijo rule: start from the previous step, shrink by
    ``BETA`` until sufficient decrease holds, or grow while it still holds.
    Returns ``(H, grad, iterations)``.
    """
    WtV = np.asarray(W.T @ V) if not sp.issparse(V) else np.asarray((V.T @ W).T)
    WtW = W.T @ W
    alpha = 1.0
    it = 0
    grad = WtW @ H - WtV
    for it in range(1, max_iter + 1):
        grad = WtW @ H - WtV
        if _projected_norm(grad, H) < tol:
            break
        Hp = H
        decreasing = None
        for _ in range(20):
            Hn = np.maximum(H - alpha * grad, 0.0)
            d = Hn - H
            gradd = np.sum(grad * d)
            dQd = np.sum((WtW @ d) * d)
            suff_decr = (1 - SIGMA) * gradd + 0.5 * dQd < 0
            if decreasing is None:
                decreasing = not suff_decr
                Hp = H
            if decreasing:
                if suff_decr:
                    H = Hn
                    break
                alpha *= BETA
            else:
                if not suff_decr or np.array_equal(Hp, Hn):
                    H = Hp
                    break
                alpha /= BETA
                Hp = Hn
    return H, grad, it


def nmf_pg(V, r, max_iters=70, tol=1e-4, rng=None, W0=None, H0=None, inner_tol=None,
           callback=None):
    """Factor a non-negative ``V`` into ``W @ H`` with ``r`` components.

    Runs at most ``max_iters`` outer iterations, each one W-subproblem and
    one H-subproblem. Stops early once the projected gradient norm falls to
    ``tol`` times its initial value. Unless given, ``W`` and ``H`` start
    uniform on (0, 1]. ``callback(it, W, H)``, if given, sees the factors
    after every outer iteration.
    """
    if not sp.issparse(V):
        V = np.asarray(V, dtype=np.float64)
        if V.ndim != 2:
            raise ValueError("V must be 2-d")
        if np.any(V < 0):
            raise ValueError("V has negative entries")
    else:
        V = sp.csr_matrix(V, dtype=np.float64)
        if V.nnz and V.data.min() < 0:
            raise ValueError("V has negative entries")
    n, m = V.shape
    if not (isinstance(r, (int, np.integer)) and 1 <= r < min(n, m)):
        raise ValueError("r must be an integer with 1 <= r < min(n, m) = %d, got %r" % (min(n, m), r))
    rng = check_rng(rng)
    # 1 - U[0,1) lies in (0, 1]
    W = 1.0 - rng.random((n, r)) if W0 is None else np.array(W0, dtype=np.float64)
    H = 1.0 - rng.random((r, m)) if H0 is None else np.array(H0, dtype=np.float64)

    VHt = np.asarray(V @ H.T)
    WtV = np.asarray((V.T @ W).T) if sp.issparse(V) else W.T @ V
    gradW = W @ (H @ H.T) - VHt
    gradH = (W.T @ W) @ H - WtV
    init_grad = np.sqrt(np.sum(gradW ** 2) + np.sum(gradH ** 2))
    tolW = tolH = (max(0.001, tol) if inner_tol is None else inner_tol) * init_grad

    result = NMFResult(W, H, [], 0, objective(V, W, H))
    Vt = V.T.tocsr() if sp.issparse(V) else V.T
    for it in range(1, max_iters + 1):
        proj = np.sqrt(_projected_norm(gradW, W) ** 2 + _projected_norm(gradH, H) ** 2)
        if proj <= tol * init_grad:
            result.converged = True
            break
        Wt, gradWt, iterW = nls_subproblem(Vt, H.T, W.T, tolW)
        W, gradW = Wt.T, gradWt.T
        if iterW == 1:
            tolW *= 0.1
        H, gradH, iterH = nls_subproblem(V, W, H, tolH)
        if iterH == 1:
            tolH *= 0.1
        result.objective_trace.append(objective(V, W, H))
        result.iterations = it
        if callback is not None:
            callback(it, W, H)
    result.W, result.H = W, H
    return result


def assign_by_max_h(H, ids=None):
    """Cluster of document ``j`` is the row holding the largest ``H[:, j]``.

    Ties go to the lower row. All-zero columns go to cluster 0 and are counted
    in ``Clustering.warnings``.
    """
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.size == 0:
        raise ValueError("H must be a non-empty 2-d array")
    labels = np.argmax(H, axis=0)
    zero = ~np.any(H != 0, axis=0)
    labels[zero] = 0
    if ids is None:
        ids = list(range(H.shape[1]))
    return Clustering.from_labels(ids, labels, n_clusters=H.shape[0], warnings=int(zero.sum()))


class ProjectedGradientNMF(ClusterMixin, TransformerMixin, BaseEstimator):
    """NMF of a documents-by-features matrix ``X ~ transform(X) @ components_``.

    Internally ``V = X.T`` so the per-document factor is ``H``; ``labels_``
    is the max-``H`` cluster of each fitted document.
    """

    def __init__(self, n_components=15, max_iter=70, tol=1e-4, random_state=None):
        self.n_components = n_components
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        self.fit_transform(X)
        return self

    def fit_transform(self, X, y=None):
        X = check_array(X, accept_sparse="csr", dtype=np.float64)
        res = nmf_pg(X.T, self.n_components, max_iters=self.max_iter, tol=self.tol,
                     rng=check_rng(self.random_state))
        self.n_features_in_ = X.shape[1]
        self.components_ = res.W.T
        self.objective_trace_ = res.objective_trace
        self.n_iter_ = res.iterations
        self.labels_ = np.argmax(res.H, axis=0)
        return res.H.T

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X, accept_sparse="csr", dtype=np.float64)
        W = self.components_.T
        H0 = np.full((self.n_components, X.shape[0]), 0.5)
        H, _, _ = nls_subproblem(X.T if not sp.issparse(X) else X.T.tocsr(), W, H0, 1e-8)
        return H.T

    def predict(self, X):
        return np.argmax(self.transform(X), axis=1)
