"""Node embedding: random walks, skip-gram training, attributed and GNN
encoders, and dimensionality reduction."""

from .config import TrainConfig, EmbeddingMatrix, EDGE_ONLY_DEFAULTS, EDGE_ATTR_DEFAULTS
from .walks import WalkCorpus, generate_walks
from .skipgram import train_skipgram, build_negative_table
from .attributed import embed_attributed, worker_attribute_matrix
from .gnn import GnnParams, init_gnn_params, gnn_forward, gnn_loss_and_grads, gnn_encode
from .reduce import reduce_dim, pca_project, tsne_embed

__all__ = [
    "TrainConfig", "EmbeddingMatrix", "EDGE_ONLY_DEFAULTS", "EDGE_ATTR_DEFAULTS",
    "WalkCorpus", "generate_walks", "train_skipgram", "build_negative_table",
    "embed_attributed", "worker_attribute_matrix",
    "GnnParams", "init_gnn_params", "gnn_forward", "gnn_loss_and_grads", "gnn_encode",
    "reduce_dim", "pca_project", "tsne_embed",
]
