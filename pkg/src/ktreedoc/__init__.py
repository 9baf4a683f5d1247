"""Document clustering with K-trees, k-means++, NMF and purity/negentropy."""
from .classify import PegasosSVM, committee
from .corpus import BM25Params, LinkGraph, SparseMatrix, bm25, concatenate, cull, lfidf, tfidf
from .evaluation import Clustering, LabelSet, entropy, mean_negentropy, negentropy, purity
from .kmeans import KMeansPlusPlus, kmeans_restarts, lloyd, seed_plusplus
from .ktree import KTree, assign_by_cosine
from .nmf import ProjectedGradientNMF, assign_by_max_h, nmf_pg

__all__ = [
    "BM25Params", "Clustering", "KMeansPlusPlus", "KTree", "LabelSet", "LinkGraph",
    "PegasosSVM", "ProjectedGradientNMF", "SparseMatrix", "assign_by_cosine",
    "assign_by_max_h", "bm25", "committee", "concatenate", "cull", "entropy",
    "kmeans_restarts", "lfidf", "lloyd", "mean_negentropy", "negentropy", "nmf_pg",
    "purity", "seed_plusplus", "tfidf",
]
__version__ = "0.1.0"
