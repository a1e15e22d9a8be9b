"""Distributed observer design for linear systems over directed graphs.

Scenarios and observer banks are plain dicts with the same layout as the JSON
files the ``distobs`` command line tool reads and writes.
"""

import json
from os import PathLike
from typing import Any, Optional, Union

from ._core import (
    FORMAT_VERSION,
    Error,
    Infeasible,
    InvalidMatrix,
    InvalidSignal,
    InvalidWeights,
    NotObservable,
    NotSpanning,
    NumericalError,
    SchemaError,
    ShapeError,
    decompose,
    eigen_classes,
    observable_split,
    pbh_detectable,
    place_observer_gain,
    rank,
    spectral_radius,
)
from . import _core

Scenario = Union[dict, str, PathLike]

__all__ = [
    "FORMAT_VERSION",
    "Error",
    "Infeasible",
    "InvalidMatrix",
    "InvalidSignal",
    "InvalidWeights",
    "NotObservable",
    "NotSpanning",
    "NumericalError",
    "SchemaError",
    "ShapeError",
    "check",
    "decompose",
    "design",
    "eigen_classes",
    "load_scenario",
    "observable_split",
    "pbh_detectable",
    "place_observer_gain",
    "rank",
    "simulate",
    "spectral_radius",
]


def load_scenario(path: Union[str, PathLike]) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _text(scenario: Scenario) -> str:
    if isinstance(scenario, dict):
        return json.dumps(scenario)
    return json.dumps(load_scenario(scenario))


def check(scenario: Scenario) -> dict:
    """Feasibility report for both existence conditions."""
    return json.loads(_core._check(_text(scenario)))


def design(scenario: Scenario, scheme: Optional[str] = None) -> dict:
    """Synthesize an observer bank. ``scheme`` is "auto", "c1" or "c2" and
    overrides the scenario's own choice."""
    return json.loads(_core._design(_text(scenario), scheme))


def simulate(scenario: Scenario, bank: dict, seed: Optional[int] = None) -> dict[str, Any]:
    """Run ``bank`` against the scenario's plant.

    Returns numpy arrays ``x`` (K+1, n), ``err`` and ``relerr`` (K+1, N),
    ``mode`` (K+1,), a list ``xhat`` of per-node (K+1, n) arrays, and the
    convergence ``summary`` dict.
    """
    out = _core._simulate(_text(scenario), json.dumps(bank), seed)
    out["summary"] = json.loads(out["summary"])
    return out
