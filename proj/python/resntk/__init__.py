"""Finite-width neural tangent kernels of vanilla, residual and densely
connected ReLU networks, their infinite-width limits, and kernel regression
over random gradient features."""

from ._core import (
    ArchitectureSpec,
    WeightIndex,
    WeightSet,
    arch_from_json,
    avg_ntk_gram,
    check_moment_equality,
    densenet,
    estimate_normalized_variance,
    fit_predict,
    forward,
    gen_inputs,
    gen_synthetic,
    limit_gram,
    ntk_entry,
    ntk_gram,
    ntk_limit,
    ntk_limit_vanilla,
    reduce,
    relu_cov_map,
    relu_dot_map,
    resnet,
    sample_weights,
    set_max_threads,
    vanilla,
    __version__,
)

__all__ = [
    "ArchitectureSpec",
    "WeightIndex",
    "WeightSet",
    "arch_from_json",
    "avg_ntk_gram",
    "check_moment_equality",
    "densenet",
    "estimate_normalized_variance",
    "fit_predict",
    "forward",
    "gen_inputs",
    "gen_synthetic",
    "limit_gram",
    "ntk_entry",
    "ntk_gram",
    "ntk_limit",
    "ntk_limit_vanilla",
    "reduce",
    "relu_cov_map",
    "relu_dot_map",
    "resnet",
    "sample_weights",
    "set_max_threads",
    "vanilla",
    "__version__",
]
