"""Cluster quality against ground-truth labels: purity, entropy, negentropy.

Only labelled documents take part in a metric. Documents in a clustering that
have no label are dropped first, and clusters left empty by that are skipped.
The label universe ``X`` is the set of distinct labels in the ``LabelSet``,
not the labels that happen to appear in the clustering.
"""
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field


@dataclass
class LabelSet:
    labels: dict

    @property
    def universe(self):
        return sorted(set(self.labels.values()))

    def __len__(self):
        return len(self.labels)

    def __contains__(self, doc_id):
        return doc_id in self.labels

    def __getitem__(self, doc_id):
        return self.labels[doc_id]

    @classmethod
    def read(cls, path):
        labels = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) != 2 or not parts[0] or not parts[1]:
                    raise ValueError("%s:%d: expected '<doc_id>\\t<label>'" % (path, lineno))
                if parts[0] in labels:
                    raise ValueError("%s:%d: duplicate doc id %r" % (path, lineno, parts[0]))
                labels[parts[0]] = parts[1]
        return cls(labels)

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for doc_id, label in self.labels.items():
                fh.write("%s\t%s\n" % (doc_id, label))


@dataclass
class Clustering:
    """Document id -> cluster id, plus the number of clusters produced.

    ``warnings`` counts documents that had to be placed by a fallback rule
    (zero-norm vectors, all-zero NMF columns).
    """

    assignment: dict
    n_clusters: int
    warnings: int = 0

    @classmethod
    def from_labels(cls, ids, labels, n_clusters=None, warnings=0):
        labels = [int(c) for c in labels]
        if n_clusters is None:
            n_clusters = max(labels) + 1 if labels else 0
        return cls(dict(zip(ids, labels)), n_clusters, warnings)

    def members(self):
        out = defaultdict(list)
        for doc_id, c in self.assignment.items():
            out[c].append(doc_id)
        return dict(sorted(out.items()))

    def __len__(self):
        return len(self.assignment)

    @classmethod
    def read(cls, path):
        assignment = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                try:
                    doc_id, cluster = parts[0], int(parts[1])
                except (IndexError, ValueError):
                    raise ValueError("%s:%d: expected '<doc_id>\\t<cluster_id>'" % (path, lineno))
                if doc_id in assignment:
                    raise ValueError("%s:%d: duplicate doc id %r" % (path, lineno, doc_id))
                assignment[doc_id] = cluster
        n = len(set(assignment.values()))
        return cls(assignment, n)

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for doc_id, c in self.assignment.items():
                fh.write("%s\t%d\n" % (doc_id, c))


def _label_counts(docs, labels):
    counts = Counter()
    for d in docs:
        if d not in labels:
            raise ValueError("document %r has no label" % (d,))
        counts[labels[d]] += 1
    if not counts:
        raise ValueError("cluster is empty")
    return counts


def label_distribution(docs, labels):
    """Probability of each label in the universe among ``docs``."""
    counts = _label_counts(docs, labels)
    n = sum(counts.values())
    return {x: counts.get(x, 0) / n for x in labels.universe}


def entropy(docs, labels):
    """Shannon entropy (bits) of the label distribution of a cluster."""
    counts = _label_counts(docs, labels)
    n = sum(counts.values())
    return -sum((c / n) * math.log2(c / n) for c in counts.values() if c)


def negentropy(docs, labels):
    """1 plus the label-entropy sum scaled by 1/log2|X|; 1 is pure, 0 uniform."""
    k = len(labels.universe)
    if k < 2:
        raise ValueError("negentropy needs at least two distinct labels, got %d" % k)
    counts = _label_counts(docs, labels)
    n = sum(counts.values())
    s = sum((c / n) * math.log2(c / n) for c in counts.values() if c)
    return 1.0 + s / math.log2(k)


def _labelled_clusters(clustering, labels):
    out = {}
    for c, docs in clustering.members().items():
        kept = [d for d in docs if d in labels]
        if kept:
            out[c] = kept
    if not out:
        raise ValueError("no labelled documents in any cluster")
    return out


def purity(clustering, labels):
    """Return ``(micro, macro, per_cluster)``.

    ``per_cluster`` is a list of ``(cluster_id, size, purity)`` over the
    clusters that still hold labelled documents.
    """
    if not clustering.assignment:
        raise ValueError("empty clustering")
    per_cluster = []
    for c, docs in _labelled_clusters(clustering, labels).items():
        counts = _label_counts(docs, labels)
        per_cluster.append((c, len(docs), max(counts.values()) / len(docs)))
    total = sum(size for _, size, _ in per_cluster)
    micro = sum(size * p for _, size, p in per_cluster) / total
    macro = sum(p for _, _, p in per_cluster) / len(per_cluster)
    return micro, macro, per_cluster


def mean_negentropy(clustering, labels, weighted=False):
    clusters = _labelled_clusters(clustering, labels)
    vals = [(len(docs), negentropy(docs, labels)) for docs in clusters.values()]
    if weighted:
        return sum(n * h for n, h in vals) / sum(n for n, _ in vals)
    return sum(h for _, h in vals) / len(vals)


@dataclass
class MetricsReport:
    metrics: dict
    clusters: list = field(default_factory=list)

    def to_tsv(self):
        lines = ["%s\t%.9g" % (k, v) for k, v in self.metrics.items()]
        lines += ["cluster\t%s\t%d\t%.9g\t%.9g" % row for row in self.clusters]
        return "\n".join(lines) + "\n"


def evaluate(clustering, labels):
    """All metrics used by the CLI ``eval`` subcommand."""
    micro, macro, per_cluster = purity(clustering, labels)
    clusters = _labelled_clusters(clustering, labels)
    rows = [(str(c), size, p, negentropy(clusters[c], labels)) for c, size, p in per_cluster]
    metrics = {
        "clusters": clustering.n_clusters,
        "labelled_documents": sum(size for _, size, _ in per_cluster),
        "micro_purity": micro,
        "macro_purity": macro,
        "mean_negentropy": mean_negentropy(clustering, labels),
        "weighted_negentropy": mean_negentropy(clustering, labels, weighted=True),
    }
    return MetricsReport(metrics, rows)
