"""Sparse MLP training, pruning and compressed inference.

Thin wrapper over the C++ core. Arrays cross the boundary as float64 numpy
arrays (copied, never shared).
"""

from ._sparsenet import (
    Activation,
    ArithmeticError,
    CompressionStats,
    ConfigError,
    Dataset,
    EpochRecord,
    Error,
    FormatError,
    InputError,
    LayerRegParams,
    Network,
    PruneMask,
    PruneStrategy,
    RegKind,
    RegStrategy,
    RegularizerSpec,
    ShapeError,
    SparseModel,
    Split,
    SweepRecord,
    TrainConfig,
    apply_mask,
    compression_rate,
    compression_stats,
    densify,
    evaluate,
    fine_tune,
    forward,
    keep_count,
    load_mnist,
    load_model,
    penalization_curve,
    penalty_gradient,
    penalty_value,
    prune,
    run_cli,
    save_dense,
    save_sparse,
    sparse_forward,
    sweep,
    synth_blobs,
    to_sparse,
    train,
)

__version__ = "0.1.0"
