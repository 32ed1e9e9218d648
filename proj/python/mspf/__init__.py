"""Multiscale switching state-space models: simulation and nested particle filtering."""

import json

from ._core import (
    Config,
    ConfigError,
    DegenerateWeights,
    NotPositiveDefinite,
    ShapeMismatch,
    evaluate,
    gaussian_logpdf,
    normalize_log_weights,
    reproduce,
    run_filter,
    sample_dirichlet,
    sample_gaussian,
    sim1_schedule,
    sim2_schedule,
    simulate,
    systematic_resample,
)
from ._core import sim1_document as _sim1_document
from ._core import sim2_document as _sim2_document


def sim1_document():
    """Sim-1 study config as a dict."""
    return json.loads(_sim1_document())


def sim2_document():
    """Sim-2 study config as a dict."""
    return json.loads(_sim2_document())


def load_config(doc, seed=None):
    """Config from a dict, a JSON string or a path to a config file."""
    if isinstance(doc, dict):
        text = json.dumps(doc)
    elif isinstance(doc, str) and doc.lstrip().startswith("{"):
        text = doc
    else:
        with open(doc) as fh:
            text = fh.read()
    return Config.from_json(text, seed)


__all__ = [
    "Config",
    "ConfigError",
    "DegenerateWeights",
    "NotPositiveDefinite",
    "ShapeMismatch",
    "evaluate",
    "gaussian_logpdf",
    "load_config",
    "normalize_log_weights",
    "reproduce",
    "run_filter",
    "sample_dirichlet",
    "sample_gaussian",
    "sim1_document",
    "sim1_schedule",
    "sim2_document",
    "sim2_schedule",
    "simulate",
    "systematic_resample",
]
