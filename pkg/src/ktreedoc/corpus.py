"""Document, label and link ingestion plus the weighted representations.

Every representation is a ``SparseMatrix``: a CSR matrix whose rows are
documents (``row_ids``) and whose columns are terms or linked documents
(``features``). Weights use the natural log throughout.
"""
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

DEFAULT_MAX_DENSE_COLS = 20000


@dataclass
class SparseMatrix:
    matrix: sp.csr_matrix
    row_ids: list
    features: list = None

    def __post_init__(self):
        self.matrix = sp.csr_matrix(self.matrix, dtype=np.float64)
        self.matrix.sum_duplicates()
        self.row_ids = list(self.row_ids)
        if self.matrix.shape[0] != len(self.row_ids):
            raise ValueError("%d rows but %d row ids" % (self.matrix.shape[0], len(self.row_ids)))
        if self.features is not None:
            self.features = list(self.features)
            if len(self.features) != self.matrix.shape[1]:
                raise ValueError("%d columns but %d feature names"
                                 % (self.matrix.shape[1], len(self.features)))
        if self.matrix.nnz and not np.all(np.isfinite(self.matrix.data)):
            raise ValueError("matrix contains NaN or Inf")

    @property
    def rows(self):
        return self.matrix.shape[0]

    @property
    def cols(self):
        return self.matrix.shape[1]

    @property
    def shape(self):
        return self.matrix.shape

    def entries(self):
        """Iterate ``(row, col, weight)`` triplets in row-major order."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for i in order:
            yield int(coo.row[i]), int(coo.col[i]), float(coo.data[i])

    def write(self, path):
        m = self.matrix.tocsr()
        m.sort_indices()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("%d %d\n" % m.shape)
            for i, doc_id in enumerate(self.row_ids):
                lo, hi = m.indptr[i], m.indptr[i + 1]
                cells = " ".join("%d:%.9g" % (c, w) for c, w in zip(m.indices[lo:hi], m.data[lo:hi]))
                fh.write("%s\t%s\n" % (doc_id, cells))

    @classmethod
    def read(cls, path):
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().split()
            try:
                rows, cols = int(header[0]), int(header[1])
            except (IndexError, ValueError):
                raise ValueError("%s:1: expected header '<rows> <cols>'" % path)
            ids, r, c, w = [], [], [], []
            for lineno, line in enumerate(fh, 2):
                line = line.rstrip("\n")
                if "\t" not in line:
                    raise ValueError("%s:%d: expected '<doc_id>\\t<col>:<weight> ...'" % (path, lineno))
                doc_id, cells = line.split("\t", 1)
                for cell in cells.split():
                    try:
                        col, weight = cell.split(":")
                        c.append(int(col))
                        w.append(float(weight))
                    except ValueError:
                        raise ValueError("%s:%d: bad cell %r" % (path, lineno, cell))
                    r.append(len(ids))
                ids.append(doc_id)
        if len(ids) != rows:
            raise ValueError("%s: header says %d rows, found %d" % (path, rows, len(ids)))
        if c and (min(c) < 0 or max(c) >= cols):
            raise ValueError("%s: column index out of range [0, %d)" % (path, cols))
        m = sp.coo_matrix((w, (r, c)), shape=(rows, cols))
        if len(set(zip(r, c))) != len(r):
            raise ValueError("%s: duplicate (row, col) entry" % path)
        return cls(m.tocsr(), ids)


@dataclass
class LinkGraph:
    """Directed multigraph of document links.

    ``universe`` lists every endpoint in order of first appearance and fixes
    the column order of link matrices.
    """

    edges: list
    universe: list = field(default=None)

    def __post_init__(self):
        self.edges = [(str(a), str(b)) for a, b in self.edges]
        if self.universe is None:
            self.universe = list(dict.fromkeys(x for e in self.edges for x in e))
        missing = {x for e in self.edges for x in e} - set(self.universe)
        if missing:
            raise ValueError("edge endpoints missing from universe: %s" % sorted(missing)[:5])

    @classmethod
    def read(cls, path):
        edges = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                parts = line.split()
                if not parts:
                    continue
                if len(parts) != 2:
                    raise ValueError("%s:%d: expected '<source_id> <dest_id>'" % (path, lineno))
                edges.append((parts[0], parts[1]))
        return cls(edges)

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for a, b in self.edges:
                fh.write("%s %s\n" % (a, b))


@dataclass
class BM25Params:
    k1: float = 2.0
    b: float = 0.75

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError("k1 must be >= 0")
        if not 0 <= self.b <= 1:
            raise ValueError("b must be in [0, 1]")


def load_documents(path):
    """Read ``<doc_id>\\t<token> <token> ...`` lines; returns ``(ids, tokens)``."""
    ids, docs, seen = [], [], set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if "\t" not in line:
                raise ValueError("%s:%d: expected '<doc_id>\\t<tokens>'" % (path, lineno))
            doc_id, text = line.split("\t", 1)
            if not doc_id:
                raise ValueError("%s:%d: empty document id" % (path, lineno))
            if doc_id in seen:
                raise ValueError("%s:%d: duplicate document id %r" % (path, lineno, doc_id))
            seen.add(doc_id)
            ids.append(doc_id)
            docs.append(text.split())
    return ids, docs


def write_documents(path, ids, docs):
    with open(path, "w", encoding="utf-8") as fh:
        for doc_id, toks in zip(ids, docs):
            fh.write("%s\t%s\n" % (doc_id, " ".join(toks)))


def load_stopwords(path):
    with open(path, encoding="utf-8") as fh:
        return {line.strip() for line in fh if line.strip()}


def remove_stopwords(docs, stoplist):
    # emptied documents stay as empty lists so rows keep lining up with ids
    return [[t for t in doc if t not in stoplist] for doc in docs]


def _term_counts(docs):
    vocab = {}
    rows, cols, tfs = [], [], []
    for i, doc in enumerate(docs):
        for term, tf in Counter(doc).items():
            j = vocab.setdefault(term, len(vocab))
            rows.append(i)
            cols.append(j)
            tfs.append(tf)
    if not vocab:
        raise ValueError("need at least one document with at least one token")
    # Counter preserves insertion order, so first appearance fixes column order
    return (np.asarray(rows), np.asarray(cols), np.asarray(tfs, dtype=np.float64),
            list(vocab))


def _build(rows, cols, weights, shape, ids, features):
    m = sp.csr_matrix((weights, (rows, cols)), shape=shape)
    m.eliminate_zeros()
    return SparseMatrix(m, ids, features)


def _default_ids(n, ids):
    return [str(i) for i in range(n)] if ids is None else list(ids)


def tfidf(docs, ids=None):
    """Length-normalised term frequency times ``ln(N / df)``."""
    rows, cols, tfs, vocab = _term_counts(docs)
    n = len(docs)
    lengths = np.array([len(d) for d in docs], dtype=np.float64)
    df = np.bincount(cols, minlength=len(vocab))
    idf = np.log(n / df)
    w = tfs / lengths[rows] * idf[cols]
    return _build(rows, cols, w, (n, len(vocab)), _default_ids(n, ids), vocab)


def bm25(docs, params=None, ids=None):
    """Okapi BM25 weights with the ``ln((N - df + .5) / (df + .5))`` idf.

    Negative idf values (terms in more than half the documents) are clamped
    to zero so every weight is non-negative.
    """
    params = params or BM25Params()
    rows, cols, tfs, vocab = _term_counts(docs)
    n = len(docs)
    lengths = np.array([len(d) for d in docs], dtype=np.float64)
    avglen = lengths.mean()
    df = np.bincount(cols, minlength=len(vocab))
    idf = np.maximum(np.log((n - df + 0.5) / (df + 0.5)), 0.0)
    k1, b = params.k1, params.b
    norm = k1 * (1 - b + b * lengths[rows] / avglen)
    w = idf[cols] * tfs * (k1 + 1) / (tfs + norm)
    return _build(rows, cols, w, (n, len(vocab)), _default_ids(n, ids), vocab)


def lfidf(graph, subset, include_inbound=False, normalize=False):
    """Link-frequency x inverse-document-frequency over the rows ``subset``.

    Columns are ``graph.universe``. An edge ``a -> b`` adds one to
    ``(a, b)`` and, when ``include_inbound``, one to ``(b, a)`` as well.
    With ``normalize`` each row is first divided by its total link count.
    Document frequency counts subset rows with a non-zero entry.
    """
    subset = list(subset)
    if not subset:
        raise ValueError("subset must not be empty")
    row_of = {d: i for i, d in enumerate(subset)}
    col_of = {d: j for j, d in enumerate(graph.universe)}
    rows, cols = [], []
    for a, b in graph.edges:
        if a in row_of:
            rows.append(row_of[a])
            cols.append(col_of[b])
        if include_inbound and b in row_of:
            rows.append(row_of[b])
            cols.append(col_of[a])
    n = len(subset)
    raw = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, len(col_of)))
    raw.sum_duplicates()
    if normalize:
        totals = np.asarray(raw.sum(axis=1)).ravel()
        raw = sp.diags(1.0 / np.where(totals > 0, totals, 1.0)) @ raw
    df = np.bincount(raw.tocoo().col, minlength=raw.shape[1])
    idf = np.log(n / np.where(df > 0, df, n))
    weighted = raw @ sp.diags(idf)
    weighted = sp.csr_matrix(weighted)
    weighted.eliminate_zeros()
    return SparseMatrix(weighted, subset, list(graph.universe))


def column_sums(m):
    return np.asarray(m.matrix.sum(axis=0)).ravel()


def cull(m, top_n):
    """Keep the ``top_n`` columns with the largest sums, highest first.

    Ties go to the lower original column index.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    sums = column_sums(m)
    order = np.lexsort((np.arange(len(sums)), -sums))[:top_n]
    features = None if m.features is None else [m.features[j] for j in order]
    return SparseMatrix(m.matrix[:, order], m.row_ids, features)


def _unit_rows(m):
    norms = np.sqrt(np.asarray(m.multiply(m).sum(axis=1)).ravel())
    return sp.diags(1.0 / np.where(norms > 0, norms, 1.0)) @ m


def concatenate(a, b, unit_first=True):
    """Stack two representations of the same documents side by side.

    With ``unit_first`` every row of each half is scaled to unit length
    first; all-zero rows are left as they are.
    """
    if list(a.row_ids) != list(b.row_ids):
        raise ValueError("row ids of the two matrices differ")
    ma, mb = a.matrix, b.matrix
    if unit_first:
        ma, mb = _unit_rows(ma), _unit_rows(mb)
    features = None
    if a.features is not None and b.features is not None:
        features = list(a.features) + list(b.features)
    return SparseMatrix(sp.hstack([ma, mb], format="csr"), a.row_ids, features)


def to_dense(m, max_cols=DEFAULT_MAX_DENSE_COLS):
    if m.cols > max_cols:
        raise ValueError("matrix has %d columns, more than the dense limit of %d; cull it first"
                         % (m.cols, max_cols))
    return m.matrix.toarray()


def from_dense(X, row_ids=None, features=None):
    X = np.asarray(X, dtype=np.float64)
    return SparseMatrix(sp.csr_matrix(X), _default_ids(len(X), row_ids), features)

