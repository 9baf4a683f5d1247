"""Command line for the clustering pipeline: one subcommand per stage.

Every stage reads and writes plain files (documents, links, labels, splits,
matrices, clusterings), so stages can be chained from a shell script. Random
subcommands print their effective seed on stderr.
"""
import argparse
import copy
import sys

import numpy as np

from . import corpus, evaluation
from ._utils import check_rng, child_rng
from .classify import PegasosSVM, committee, read_split, recall
from .corpus import BM25Params, LinkGraph, SparseMatrix
from .evaluation import Clustering, LabelSet
from .kmeans import kmeans_restarts
from .ktree import KTree, assign_by_cosine
from .nmf import assign_by_max_h, nmf_pg
from .synth import make_corpus

DEFAULT_SEED = 0
SWEEP_ORDERS = "800,400,200,100,50,25"


def _log(msg):
    print(msg, file=sys.stderr)


def _config(args):
    items = sorted((k, v) for k, v in vars(args).items() if k != "func")
    _log("ktreedoc " + " ".join("%s=%s" % kv for kv in items))


def _read_ids(path):
    """First tab-separated field of each non-blank line."""
    with open(path, encoding="utf-8") as fh:
        return [line.split("\t")[0].split()[0] for line in fh if line.strip()]


def _dense(m, unit_rows=False):
    X = corpus.to_dense(m)
    if unit_rows:
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        X = X / np.where(norms > 0, norms, 1.0)
    return X


def _write_centroids(path, C):
    corpus.from_dense(C, ["c%d" % i for i in range(len(C))]).write(path)


def cmd_gen_synth(args):
    sc = make_corpus(n_docs=args.n_docs, n_classes=args.classes, vocab_size=args.vocab,
                     train_fraction=args.train_fraction, random_state=args.seed)
    out = sc.write(args.out_dir)
    _log("wrote %d documents, %d links to %s" % (len(sc.ids), len(sc.graph.edges), out))


def cmd_represent(args):
    if args.scheme in ("tfidf", "bm25"):
        if not args.docs:
            raise ValueError("--docs is required for scheme %s" % args.scheme)
        ids, docs = corpus.load_documents(args.docs)
        if args.stopwords:
            docs = corpus.remove_stopwords(docs, corpus.load_stopwords(args.stopwords))
        if args.scheme == "tfidf":
            m = corpus.tfidf(docs, ids=ids)
        else:
            m = corpus.bm25(docs, BM25Params(args.k1, args.b), ids=ids)
    else:
        if not args.links:
            raise ValueError("--links is required for scheme lfidf")
        graph = LinkGraph.read(args.links)
        subset = _read_ids(args.subset) if args.subset else _read_ids(args.docs) if args.docs else None
        if subset is None:
            raise ValueError("lfidf needs --subset (or --docs) to choose the rows")
        m = corpus.lfidf(graph, subset, include_inbound=args.inbound, normalize=args.normalize)
    if args.top:
        m = corpus.cull(m, args.top)
    m.write(args.output)
    _log("%s matrix %d x %d" % (args.scheme, m.rows, m.cols))


def cmd_cull(args):
    m = corpus.cull(SparseMatrix.read(args.matrix), args.top)
    m.write(args.output)


def cmd_concat(args):
    m = corpus.concatenate(SparseMatrix.read(args.a), SparseMatrix.read(args.b),
                           unit_first=args.unit_first)
    m.write(args.output)


def cmd_ktree(args):
    m = SparseMatrix.read(args.matrix)
    X = _dense(m, args.unit_rows)
    rng = check_rng(args.seed)
    tree = KTree(order=args.order, random_state=child_rng(rng)).fit(X, ids=m.row_ids)
    _log("K-tree depth %d, level sizes %s" % (tree.depth_, tree.level_sizes()))
    if args.dump:
        with open(args.dump, "w", encoding="utf-8") as fh:
            fh.write(tree.dump())
    if args.codebook_k:
        book = tree.codebook()
        if args.codebook_k > len(book):
            raise ValueError("codebook has %d vectors, fewer than k=%d" % (len(book), args.codebook_k))
        weights = tree.counts_at_level(tree.depth_ - 1) if args.weighted else None
        res = kmeans_restarts(book, args.codebook_k, runs=args.runs, rng=rng, weights=weights)
        centroids = res.centroids
        clustering = assign_by_cosine(centroids, X, m.row_ids)
    else:
        if tree.depth_ < 2:
            raise ValueError("tree has a single level; lower --order to get clusters")
        clustering = tree.clusters_at_level(args.level, method=args.method)
        centroids = tree.keys_at_level(args.level or tree.depth_ - 1)
    if args.centroids_out:
        _write_centroids(args.centroids_out, centroids)
    clustering.write(args.output)
    _log("%d clusters" % clustering.n_clusters)


def cmd_kmeans(args):
    m = SparseMatrix.read(args.matrix)
    X = _dense(m, args.unit_rows)
    res = kmeans_restarts(X, args.k, runs=args.runs, rng=check_rng(args.seed),
                          max_iters=args.max_iters, tol=args.tol)
    Clustering.from_labels(m.row_ids, res.assignment, n_clusters=args.k).write(args.output)
    if args.centroids_out:
        _write_centroids(args.centroids_out, res.centroids)
    _log("distortion %.9g after %d iterations" % (res.distortion, res.iterations))


def cmd_nmf(args):
    m = SparseMatrix.read(args.matrix)
    # documents are rows on disk; the factorization wants terms x documents
    V = m.matrix.T.tocsr()
    res = nmf_pg(V, args.r, max_iters=args.max_iters, tol=args.tol, rng=check_rng(args.seed))
    clustering = assign_by_max_h(res.H, m.row_ids)
    clustering.write(args.output)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write("iter,objective\n")
            fh.write("0,%.9g\n" % res.initial_objective)
            for i, v in enumerate(res.objective_trace, 1):
                fh.write("%d,%.9g\n" % (i, v))
    if clustering.warnings:
        _log("%d documents had an all-zero H column" % clustering.warnings)


def cmd_assign(args):
    m = SparseMatrix.read(args.matrix)
    C = corpus.to_dense(SparseMatrix.read(args.centroids))
    clustering = assign_by_cosine(C, _dense(m, False), m.row_ids)
    clustering.write(args.output)
    if clustering.warnings:
        _log("%d zero-norm documents placed in cluster 0" % clustering.warnings)


def cmd_eval(args):
    report = evaluation.evaluate(Clustering.read(args.clustering), LabelSet.read(args.labels))
    text = report.to_tsv()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _train_predict(m, labels, train, test, args, rng):
    rows = {d: i for i, d in enumerate(m.row_ids)}
    tr = [rows[d] for d in train]
    te = [rows[d] for d in test]
    y = np.array([labels[d] for d in train])
    model = PegasosSVM(lam=args.lam, epochs=args.epochs, random_state=rng).fit(m.matrix[tr], y)
    return model, model.decision_function(m.matrix[te])


def cmd_classify(args):
    m = SparseMatrix.read(args.matrix)
    labels = LabelSet.read(args.labels)
    split = read_split(args.split)
    train = [d for d in m.row_ids if split.get(d) == "train" and d in labels]
    test = [d for d in m.row_ids if split.get(d) == "test"]
    if not train or not test:
        raise ValueError("split must name at least one train and one test document")
    rng = check_rng(args.seed)
    model, scores = _train_predict(m, labels, train, test, args, child_rng(rng))
    if args.committee:
        other = SparseMatrix.read(args.committee)
        if other.row_ids != m.row_ids:
            raise ValueError("committee matrix has different documents")
        model2, scores2 = _train_predict(other, labels, train, test, args, child_rng(rng))
        predicted = committee(scores, scores2, model.classes_, model2.classes_)
    else:
        predicted = model.classes_[np.argmax(scores, axis=1)]
    with open(args.output, "w", encoding="utf-8") as fh:
        for d, p in zip(test, predicted):
            fh.write("%s\t%s\n" % (d, p))
    scored = [(p, labels[d]) for d, p in zip(test, predicted) if d in labels]
    if scored:
        r = recall([p for p, _ in scored], [t for _, t in scored])
        print("recall\t%.6f\t%d" % (r, len(scored)))


def sweep_order(X, ids, labels, orders, seed, weighted=False):
    """Rows of ``(order, method, clusters, negentropy, micro purity)``.

    One tree per order, evaluated at the codebook (leaf cluster) level as
    built and after rearrangement.
    """
    rows = []
    for order in orders:
        tree = KTree(order=order, random_state=seed).fit(X, ids=ids)
        if tree.depth_ < 2:
            raise ValueError("order %d leaves the tree a single leaf" % order)
        variants = (("leftasis", tree), ("rearranged", copy.deepcopy(tree).rearrange()))
        for method, t in variants:
            cl = t.clusters_at_level(t.depth_ - 1)
            neg = evaluation.mean_negentropy(cl, labels, weighted=weighted)
            micro = evaluation.purity(cl, labels)[0]
            rows.append((order, method, cl.n_clusters, neg, micro))
    return rows


def cmd_sweep_order(args):
    m = SparseMatrix.read(args.matrix)
    labels = LabelSet.read(args.labels)
    orders = [int(o) for o in args.orders.split(",")]
    rows = sweep_order(_dense(m, args.unit_rows), m.row_ids, labels, orders, args.seed,
                       weighted=args.weighted)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write("order\tmethod\tclusters\tnegentropy\tmicro_purity\n")
        for r in rows:
            fh.write("%d\t%s\t%d\t%.9g\t%.9g\n" % r)


def build_parser():
    p = argparse.ArgumentParser(prog="ktreedoc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(func=func)
        return sp

    def seeded(sp):
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)

    s = add("gen-synth", cmd_gen_synth, "write a seeded synthetic labelled corpus")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--n-docs", type=int, default=5000)
    s.add_argument("--classes", type=int, default=10)
    s.add_argument("--vocab", type=int, default=2000)
    s.add_argument("--train-fraction", type=float, default=0.1)
    seeded(s)

    s = add("represent", cmd_represent, "build a TF-IDF, BM25 or LF-IDF matrix")
    s.add_argument("--scheme", choices=("tfidf", "bm25", "lfidf"), required=True)
    s.add_argument("--docs")
    s.add_argument("--links")
    s.add_argument("--subset", help="file whose first column lists the row documents (lfidf)")
    s.add_argument("--stopwords")
    s.add_argument("--k1", type=float, default=2.0)
    s.add_argument("--b", type=float, default=0.75)
    s.add_argument("--inbound", action=argparse.BooleanOptionalAction, default=False)
    s.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=False)
    s.add_argument("--top", type=int, help="cull to the top N columns")
    s.add_argument("-o", "--output", required=True)

    s = add("cull", cmd_cull, "keep the N columns with the largest sums")
    s.add_argument("matrix")
    s.add_argument("--top", type=int, required=True)
    s.add_argument("-o", "--output", required=True)

    s = add("concat", cmd_concat, "concatenate two matrices over the same documents")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--unit-first", action=argparse.BooleanOptionalAction, default=True)
    s.add_argument("-o", "--output", required=True)

    s = add("ktree", cmd_ktree, "cluster with a K-tree")
    s.add_argument("matrix")
    s.add_argument("--order", type=int, default=50)
    s.add_argument("--method", choices=("leftasis", "rearranged", "cosine"), default="cosine")
    s.add_argument("--level", type=int, help="level counted from the root (default: codebook)")
    s.add_argument("--codebook-k", type=int, help="recluster the codebook into k clusters")
    s.add_argument("--runs", type=int, default=20)
    s.add_argument("--weighted", action="store_true",
                   help="weight codebook vectors by the documents beneath them")
    s.add_argument("--unit-rows", action="store_true")
    s.add_argument("--dump")
    s.add_argument("--centroids-out")
    s.add_argument("-o", "--output", required=True)
    seeded(s)

    s = add("kmeans", cmd_kmeans, "k-means++ with restarts")
    s.add_argument("matrix")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--runs", type=int, default=20)
    s.add_argument("--max-iters", type=int, default=100)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--unit-rows", action="store_true")
    s.add_argument("--centroids-out")
    s.add_argument("-o", "--output", required=True)
    seeded(s)

    s = add("nmf", cmd_nmf, "projected-gradient NMF clustering")
    s.add_argument("matrix")
    s.add_argument("--r", type=int, default=15, help="number of clusters (15, 42, 147 in the "
                                                     "original experiments)")
    s.add_argument("--max-iters", type=int, default=70)
    s.add_argument("--tol", type=float, default=1e-4)
    s.add_argument("--trace", help="write the objective trace as CSV")
    s.add_argument("-o", "--output", required=True)
    seeded(s)

    s = add("assign", cmd_assign, "assign documents to centroids by cosine similarity")
    s.add_argument("matrix")
    s.add_argument("--centroids", required=True)
    s.add_argument("-o", "--output", required=True)

    s = add("eval", cmd_eval, "purity and negentropy of a clustering")
    s.add_argument("--clustering", required=True)
    s.add_argument("--labels", required=True)
    s.add_argument("-o", "--output")

    s = add("classify", cmd_classify, "train/test a linear SVM and report recall")
    s.add_argument("matrix")
    s.add_argument("--labels", required=True)
    s.add_argument("--split", required=True)
    s.add_argument("--committee", help="second matrix; fuse both models by committee")
    s.add_argument("--lam", type=float, default=1e-3)
    s.add_argument("--epochs", type=int, default=10)
    s.add_argument("-o", "--output", required=True)
    seeded(s)

    s = add("sweep-order", cmd_sweep_order, "leaf negentropy across halving tree orders")
    s.add_argument("matrix")
    s.add_argument("--labels", required=True)
    s.add_argument("--orders", default=SWEEP_ORDERS)
    s.add_argument("--weighted", action="store_true")
    s.add_argument("--unit-rows", action="store_true")
    s.add_argument("-o", "--output", required=True)
    seeded(s)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    _config(args)
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        _log("ktreedoc %s: error: %s" % (args.command, exc))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
