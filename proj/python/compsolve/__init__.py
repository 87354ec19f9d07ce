"""Python front end for the compsolve core."""

import json

import numpy as np

from ._compsolve import Decomposition, Error, duality_map, lp_norm
from . import _compsolve as _core

__all__ = ["Decomposition", "Error", "build_fixture", "certify", "duality_map", "lp_norm", "run", "solve"]


def build_fixture(desc):
    """Named fixture from a dict, e.g. {"problem": "sin-perturbed", "dim": 1, "radius": 4}."""
    return _core.build_fixture(json.dumps(desc))


def certify(decomposition, sampler=None, seed=0):
    return json.loads(_core.certify(decomposition, json.dumps(sampler or {}), seed))


def solve(decomposition, target, start=None, solver=None):
    target = np.atleast_1d(np.asarray(target, dtype=float))
    if start is not None:
        start = np.atleast_1d(np.asarray(start, dtype=float))
    result = json.loads(_core.solve(decomposition, target, start, json.dumps(solver or {})))
    result["x"] = np.asarray(result["x"])
    return result


def run(command, input, out=".", seed=0, overrides=()):
    """Runs a command-line command in process; returns (exit code, summary dict)."""
    code, summary = _core.run(command, str(input), str(out), seed, list(overrides))
    return code, json.loads(summary)
