from .exppoly_utils import (
    ExpPolyMix,
    add,
    as_function,
    convolve,
    density_from_tail,
    erlang_density,
    erlang_tail,
    evaluate,
    expect_shifted,
    integrate_tail,
    invert_tail,
    laplace,
    mean,
    quantile,
    rescale,
    scale,
    simplify,
    stop_loss,
)
from .inversion_service import difference_mean, difference_stop_loss

__all__ = [
    "ExpPolyMix",
    "add",
    "as_function",
    "convolve",
    "density_from_tail",
    "difference_mean",
    "difference_stop_loss",
    "erlang_density",
    "erlang_tail",
    "evaluate",
    "expect_shifted",
    "integrate_tail",
    "invert_tail",
    "laplace",
    "mean",
    "quantile",
    "rescale",
    "scale",
    "simplify",
    "stop_loss",
]
