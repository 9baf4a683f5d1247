"""One-vs-rest linear SVM trained with Pegasos, plus score fusion and splits.

This is a small stand-in for an external multi-class SVM: good enough to
compare text, link and combined representations by recall (accuracy on the
test documents).
"""
import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._utils import check_rng


class PegasosSVM(ClassifierMixin, BaseEstimator):
    """Linear one-vs-rest SVM fitted by stochastic sub-gradient descent.

    Each class gets a binary hinge-loss problem with L2 penalty ``lam``;
    all classes are updated from the same sample stream with step size
    ``1 / (lam * t)``. The bias is learned as the weight of a constant
    feature of value ``bias_scale``.

    Parameters
    ----------
    lam : float, default 1e-4
    epochs : int, default 10
    bias_scale : float, default 1.0
    random_state : None, int or numpy Generator
        Controls the per-epoch sample order.
    """

    def __init__(self, lam=1e-4, epochs=10, bias_scale=1.0, random_state=None):
        self.lam = lam
        self.epochs = epochs
        self.bias_scale = bias_scale
        self.random_state = random_state

    def fit(self, X, y):
        X = check_array(X, accept_sparse="csr", dtype=np.float64)
        y = np.asarray(y)
        if len(y) != X.shape[0]:
            raise ValueError("X has %d rows but y has %d labels" % (X.shape[0], len(y)))
        # sorted classes make argmax ties resolve to the lexicographically first
        self.classes_ = np.array(sorted(set(y.tolist())))
        if len(self.classes_) < 2:
            raise ValueError("need at least two classes, got %d" % len(self.classes_))
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        n, d = X.shape
        k = len(self.classes_)
        Y = np.where(y[:, None] == self.classes_[None, :], 1.0, -1.0)
        rng = check_rng(self.random_state)
        sparse = sp.issparse(X)
        if sparse:
            X = sp.csr_matrix(X)
            X.sort_indices()

        # W = scale * V avoids touching every weight on the shrink step
        V = np.zeros((k, d + 1))
        scale = 1.0
        t = 0
        for _ in range(self.epochs):
            for i in rng.permutation(n):
                t += 1
                eta = 1.0 / (self.lam * t)
                if sparse:
                    lo, hi = X.indptr[i], X.indptr[i + 1]
                    idx = np.append(X.indices[lo:hi], d)
                    val = np.append(X.data[lo:hi], self.bias_scale)
                else:
                    idx = np.append(np.flatnonzero(X[i]), d)
                    val = np.append(X[i, idx[:-1]], self.bias_scale)
                margins = Y[i] * (scale * (V[:, idx] @ val))
                shrink = 1.0 - eta * self.lam
                if shrink <= 0.0:
                    V[:] = 0.0
                    scale = 1.0
                else:
                    scale *= shrink
                viol = margins < 1.0
                if viol.any():
                    V[np.ix_(viol, idx)] += (eta / scale) * Y[i, viol][:, None] * val[None, :]
                if scale < 1e-9:
                    V *= scale
                    scale = 1.0
        W = scale * V
        self.coef_ = W[:, :d]
        self.intercept_ = W[:, d] * self.bias_scale
        self.n_features_in_ = d
        self.n_iter_ = t
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, accept_sparse="csr", dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError("X has %d features, expected %d" % (X.shape[1], self.n_features_in_))
        return np.asarray(X @ self.coef_.T) + self.intercept_

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]


def predict_scores(model, X):
    """Per-document, per-class scores ``w_c . x + b_c``."""
    return model.decision_function(X)


def _standardize(scores):
    s = np.asarray(scores, dtype=np.float64)
    sd = s.std()
    if sd == 0:
        return None
    return (s - s.mean()) / sd


def committee(scores_text, scores_link, classes, classes_link=None):
    """Fuse two score matrices for the same documents into one label each.

    Each model's scores are z-scored over the whole batch; per document the
    model with the larger top score decides, the text model winning ties. A
    model whose scores are constant carries no ranking and is ignored.
    """
    if classes_link is not None and list(classes_link) != list(classes):
        raise ValueError("the two models were trained on different class lists")
    classes = np.asarray(classes)
    st, sl = _standardize(scores_text), _standardize(scores_link)
    if np.shape(scores_text) != np.shape(scores_link):
        raise ValueError("score matrices have different shapes")
    if st is None and sl is None:
        return classes[np.zeros(len(np.asarray(scores_text)), dtype=int)]
    if sl is None:
        return classes[np.argmax(st, axis=1)]
    if st is None:
        return classes[np.argmax(sl, axis=1)]
    use_link = sl.max(axis=1) > st.max(axis=1)
    pick = np.where(use_link, np.argmax(sl, axis=1), np.argmax(st, axis=1))
    return classes[pick]


def recall(predicted, truth):
    """Fraction of documents whose predicted label is correct."""
    predicted, truth = np.asarray(predicted), np.asarray(truth)
    if len(predicted) != len(truth) or len(truth) == 0:
        raise ValueError("need equal-length, non-empty prediction and truth")
    return float(np.mean(predicted == truth))


def train_test_split(ids, train_fraction=0.1, rng=None):
    """Random split; returns ``{doc_id: 'train' | 'test'}`` in input order."""
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    ids = list(ids)
    rng = check_rng(rng)
    n_train = max(1, int(round(train_fraction * len(ids))))
    train = set(rng.permutation(len(ids))[:n_train].tolist())
    return {d: ("train" if i in train else "test") for i, d in enumerate(ids)}


def kfold_splits(ids, n_folds=10, rng=None, inverted=False):
    """Yield ``(train_ids, test_ids)`` for each of ``n_folds`` random folds.

    Each document is in exactly one fold. Normally that fold is the test set
    once; with ``inverted`` the single fold is the training set and the rest
    is tested, i.e. a 1/n train to (n-1)/n test split.
    """
    ids = list(ids)
    if not 2 <= n_folds <= len(ids):
        raise ValueError("n_folds must be in [2, n_documents]")
    rng = check_rng(rng)
    folds = np.array_split(rng.permutation(len(ids)), n_folds)
    for f in folds:
        inside = [ids[i] for i in sorted(f)]
        rest = sorted(set(range(len(ids))) - set(f.tolist()))
        outside = [ids[i] for i in rest]
        yield (inside, outside) if inverted else (outside, inside)


def read_split(path):
    split = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or parts[1] not in ("train", "test"):
                raise ValueError("%s:%d: expected '<doc_id>\\ttrain|test'" % (path, lineno))
            split[parts[0]] = parts[1]
    return split


def write_split(path, split):
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id, part in split.items():
            fh.write("%s\t%s\n" % (doc_id, part))
