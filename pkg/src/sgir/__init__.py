"""Unsupervised scene-graph retrieval toolkit: a graph autoencoder for
permutation-invariant graph embeddings, graph edit distance ground truth with
a semantic cost model, and ranked-retrieval evaluation over file corpora."""

__version__ = "0.1.0"
