"""Python bindings for the jcl core library."""

import json as _json

from ._core import (
    NumericError,
    compute_covariance,
    dot,
    gaussian_mgf_expectation,
    jcl_loss,
    jcl_scalar_form,
    l2_normalize,
    log_sum_exp,
    monte_carlo_inf_loss,
    pair_loss,
    quadratic_form,
    verify_bound,
)
from ._core import train as _train


def train(config=None, method="jcl"):
    """Train on the synthetic task. `config` maps TrainConfig field names to values."""
    return _train(_json.dumps(config or {}), method)


__all__ = [
    "NumericError",
    "compute_covariance",
    "dot",
    "gaussian_mgf_expectation",
    "jcl_loss",
    "jcl_scalar_form",
    "l2_normalize",
    "log_sum_exp",
    "monte_carlo_inf_loss",
    "pair_loss",
    "quadratic_form",
    "train",
    "verify_bound",
]
