"""Seeded synthetic corpus: labelled documents, a planted link graph, a split.

Text model. Every class has a term distribution ``softmax(g_c / temp)`` over
a shared vocabulary, where ``g_c`` is standard Gaussian noise per term. A
document of class ``c`` draws each token from its class distribution with
probability ``topic_weight`` and from a Zipfian background otherwise.

Link model. The universe is the corpus plus ``n_external`` outside pages,
each with a class. Every corpus document links out ``Poisson(out_degree)``
times: to a same-class page with probability ``link_affinity``, to one of a
few hub pages (stop-links) with probability ``hub_rate``, else uniformly.
External pages also link into the corpus the same way, which only shows up
when inbound links are used.
"""
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._utils import check_rng
from .classify import train_test_split, write_split
from .corpus import LinkGraph, write_documents
from .evaluation import LabelSet


@dataclass
class SyntheticCorpus:
    ids: list
    docs: list
    labels: LabelSet
    graph: LinkGraph
    split: dict

    def write(self, out_dir):
        """Write docs.txt, links.txt, labels.txt and split.txt into ``out_dir``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_documents(out / "docs.txt", self.ids, self.docs)
        self.graph.write(out / "links.txt")
        self.labels.write(out / "labels.txt")
        write_split(out / "split.txt", self.split)
        return out


def make_corpus(n_docs=5000, n_classes=10, vocab_size=2000, doc_length=80,
                topic_weight=0.15, temp=0.6, n_external=500, out_degree=6.0,
                link_affinity=0.5, hub_rate=0.15, n_hubs=20, train_fraction=0.1,
                random_state=0):
    rng = check_rng(random_state)
    vocab = np.array(["t%04d" % i for i in range(vocab_size)])
    classes = ["c%02d" % i for i in range(n_classes)]

    logits = rng.standard_normal((n_classes, vocab_size)) / temp
    topic = np.exp(logits - logits.max(axis=1, keepdims=True))
    topic /= topic.sum(axis=1, keepdims=True)
    background = 1.0 / np.arange(1, vocab_size + 1)
    background = rng.permutation(background / background.sum())

    y = rng.integers(0, n_classes, n_docs)
    ids = ["d%05d" % i for i in range(n_docs)]
    docs = []
    for c in y:
        length = max(1, rng.poisson(doc_length))
        from_topic = rng.random(length) < topic_weight
        toks = np.where(from_topic,
                        rng.choice(vocab_size, size=length, p=topic[c]),
                        rng.choice(vocab_size, size=length, p=background))
        docs.append(vocab[toks].tolist())

    ext_ids = ["x%05d" % i for i in range(n_external)]
    ext_y = rng.integers(0, n_classes, n_external)
    pages = np.array(ids + ext_ids)
    page_y = np.concatenate([y, ext_y])
    by_class = [np.flatnonzero(page_y == c) for c in range(n_classes)]
    hubs = rng.choice(len(pages), size=n_hubs, replace=False)

    def targets(c, k):
        out = []
        for _ in range(k):
            u = rng.random()
            if u < link_affinity:
                out.append(rng.choice(by_class[c]))
            elif u < link_affinity + hub_rate:
                out.append(rng.choice(hubs))
            else:
                out.append(rng.integers(len(pages)))
        return out

    edges = []
    for i, c in enumerate(y):
        for j in targets(c, rng.poisson(out_degree)):
            edges.append((ids[i], pages[j]))
    corpus_by_class = [np.flatnonzero(y == c) for c in range(n_classes)]
    for e, c in enumerate(ext_y):
        for _ in range(rng.poisson(out_degree)):
            if rng.random() < link_affinity and len(corpus_by_class[c]):
                j = rng.choice(corpus_by_class[c])
            else:
                j = rng.integers(n_docs)
            edges.append((ext_ids[e], ids[j]))

    labels = LabelSet({d: classes[c] for d, c in zip(ids, y)})
    split = train_test_split(ids, train_fraction, rng)
    graph = LinkGraph(edges, universe=list(pages))
    return SyntheticCorpus(ids, docs, labels, graph, split)
