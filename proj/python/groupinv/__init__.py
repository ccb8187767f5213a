"""Group-invariant representation learning.

Thin Python surface over the C++ core: synthetic content/style data
generation, the invariance losses, identifiability metrics, and a
single-call training entry point.
"""

from ._core import (
    ConfigError,
    ContractError,
    MetricError,
    NumericError,
    auroc,
    bce_with_logits,
    generate,
    group_probe,
    kde,
    mcc_strong,
    mcc_weak,
    pca_pc1,
    separation_delta,
    similarity_loss,
    train_run,
    uniformity_loss,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "MetricError",
    "NumericError",
    "auroc",
    "bce_with_logits",
    "generate",
    "group_probe",
    "kde",
    "mcc_strong",
    "mcc_weak",
    "pca_pc1",
    "separation_delta",
    "similarity_loss",
    "train_run",
    "uniformity_loss",
]
