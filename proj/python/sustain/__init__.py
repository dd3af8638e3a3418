"""Integer-constrained sparse matrix and tensor factorization."""

from ._core import (
    Model,
    Tensor,
    dissimilarity,
    factorize,
    fit,
    generate_planted,
    load_model,
    load_tensor,
    save_model,
    save_tensor,
    stability_select,
)

__all__ = [
    "Model",
    "Tensor",
    "dissimilarity",
    "factorize",
    "fit",
    "generate_planted",
    "load_model",
    "load_tensor",
    "save_model",
    "save_tensor",
    "stability_select",
]
