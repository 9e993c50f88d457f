"""Synthetic series-symbol pairs: sampled symbolic systems, curated input
series, the outputs they produce, and the statistics used to audit them."""

from ._core import (
    BudgetExhausted,
    Expr,
    Pair,
    ParseError,
    ShardError,
    __version__,
    adf_test,
    bench_scaling,
    characterize,
    default_config,
    fft_mean,
    forecastability,
    generate_dataset,
    generate_pair,
    load_dataset,
    mann_kendall,
    permutation_entropy,
    read_manifest,
    read_shard,
    sample_system,
    simulate_arma,
    stl_seasonality,
    validate_config,
    write_shard,
)


def parse(text):
    return Expr.parse(text)


__all__ = [name for name in dir() if not name.startswith("_")]
