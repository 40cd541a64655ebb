"""Latent position filtering from message streams.

Configs are plain dicts with the same fields as the CLI's config.json.
"""

import json

import numpy as np

from . import _core
from ._core import (NumericalError, ValidationError, ari, cmds, double_center,
                    kmeans, procrustes_select)

__all__ = ["exp1_config", "exp2_config", "validate", "config_hash", "run",
           "coefficients", "dissimilarity", "cmds", "double_center",
           "procrustes_select", "kmeans", "ari", "ValidationError", "NumericalError"]


def exp1_config(variant="cI", seed=1):
    return json.loads(_core.exp1_config(variant, seed))


def exp2_config(L, n=10, seed=1):
    return json.loads(_core.exp2_config(L, n, seed))


def validate(config):
    _core.validate_config(json.dumps(config))


def config_hash(config):
    return _core.config_hash(json.dumps(config))


def run(config):
    """Runs the coupled experiment; arrays are stacked over time."""
    out = _core.run_experiment(json.dumps(config))
    out["config"] = json.loads(out["config"])
    for key in ("positions", "means", "weights", "embedding"):
        out[key] = np.stack(out[key]) if out[key] else np.empty((0, 0, 0))
    out["times"] = np.asarray(out["times"])
    out["events"] = np.array(out["events"], dtype=[("t", "f8"), ("i", "i4"), ("j", "i4")])
    return out


def coefficients(x, omega, sigma, weights=(1.0,), centers=((0.0,),), scales=(1.0,)):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    centers = [np.atleast_1d(np.asarray(c, dtype=float)) for c in centers]
    return _core.coefficients(x, omega, sigma, list(weights), centers, list(scales))


def dissimilarity(W, G, g="arccos"):
    return _core.dissimilarity(np.asarray(W, float), np.asarray(G, float), g)
