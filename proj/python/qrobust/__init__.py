"""Robustness analysis of noisy quantum while-programs.

The command functions return the same versioned report documents as the
``qrobust`` tool's ``--json`` option, decoded into dictionaries.
"""

import json

from . import _core
from ._core import (
    REPORT_SCHEMA_VERSION,
    Error,
    Infeasible,
    NumericalFailure,
    ValidationError,
    __version__,
    choi,
    matrix,
    q_lambda_diamond_norm,
)

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "Error",
    "Infeasible",
    "NumericalFailure",
    "ValidationError",
    "__version__",
    "analyze",
    "bounded",
    "choi",
    "diamond",
    "matrix",
    "q_lambda_diamond_norm",
    "result",
    "simulate",
]


def analyze(file, params=None, semantic=False, annotation=None, discover_annotation=True):
    return json.loads(_core.analyze(str(file), params or {}, semantic, annotation, discover_annotation))


def diamond(a, b, q="", lam=0.0, seed=20241014, trials=2000):
    return json.loads(_core.diamond(a, b, q, lam, seed, trials))


def bounded(file, params=None, n_max=10):
    return json.loads(_core.bounded(str(file), params or {}, n_max))


def simulate(file, input, mode="op", params=None):
    return json.loads(_core.simulate(str(file), input, mode, params or {}))


def result(report, name):
    """Value of the named quantity in a report."""
    for q in report["results"]:
        if q["name"] == name:
            return q["value"]
    raise KeyError(name)
