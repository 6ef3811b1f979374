"""Python access to the collaborative Bayesian optimization engine."""

import json

from . import _core
from ._core import (
    DomainError,
    InputError,
    NumericalError,
    StateError,
    benchmark_bounds,
    benchmark_eval,
    benchmark_names,
    bo_muse_beta,
    confidence_chi,
    generalized_mean,
    srinivas_beta,
    zeta_lower_bound,
)

__all__ = [
    "DomainError",
    "InputError",
    "NumericalError",
    "StateError",
    "benchmark_bounds",
    "benchmark_eval",
    "benchmark_names",
    "bo_muse_beta",
    "confidence_chi",
    "default_config",
    "generalized_mean",
    "gp_predict",
    "run_session",
    "srinivas_beta",
    "verify_theory",
    "zeta_lower_bound",
]


def gp_predict(kernel, X, y, noise_variance, queries):
    """Posterior (mean, variance) lists; `kernel` is a dict such as
    {"family": "squared_exponential", "lengthscale": 0.5}."""
    return _core.gp_predict(json.dumps(kernel), [list(map(float, r)) for r in X],
                            [float(v) for v in y], float(noise_variance),
                            [list(map(float, q)) for q in queries])


def default_config(benchmark, mode="bo_muse", seed=0, num_init=3, evaluations=20):
    return json.loads(_core.default_config_json(benchmark, mode, seed, num_init, evaluations))


def run_session(config):
    """Run a machine-only session; returns observations, records, regret and CSV text."""
    return json.loads(_core.run_session_json(json.dumps(config)))


def verify_theory(trials=10000, seed=0):
    return json.loads(_core.verify_theory_json(trials, seed))
