"""
Scenario defaults and the JSON schema for scenario configuration files.
"""

import copy
from typing import Any, Dict

SCENARIO_NAMES = (
    "classical-ho",
    "classical-free",
    "classical-quartic",
    "quantum-ho",
    "quantum-free",
    "hybrid-obs",
    "hybrid-boost",
    "premeasure",
    "povm-extract",
    "kraus-extract",
    "algebra-check",
)

TOLERANCE_KEYS = (
    "norm",
    "mean_error",
    "hamilton_residual",
    "variance_error",
    "husimi_l1",
    "isolation",
    "rate_identity",
    "energy_conserved",
    "povm_completeness",
    "povm_positivity",
    "kraus_consistency",
    "born_rule",
    "phase_invariance",
)

DEFAULT_TOLERANCES = {
    "norm": 1e-9,
    "mean_error": 1e-6,
    "hamilton_residual": 1e-5,
    "variance_error": 1e-5,
    "husimi_l1": 1e-3,
    "isolation": 1e-9,
    "rate_identity": 1e-4,
    # Strang splitting makes <H> oscillate at O(dt^2 <q^2>/8), about 5e-7 at dt=1e-3
    "energy_conserved": 1e-6,
    "povm_completeness": 1e-8,
    "povm_positivity": 1e-8,
    "kraus_consistency": 1e-7,
    "born_rule": 1e-7,
    "phase_invariance": 1e-12,
}

_AXIS_SCHEMA = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 2},
        "origin": {"type": "number"},
        "length": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

_COEFFICIENTS_SCHEMA = {
    "type": "array",
    "items": {"type": "number"},
    "minItems": 1,
    "maxItems": 5,
}

_INTERVAL_SCHEMA = {
    "type": "array",
    "items": {"type": ["number", "null"]},
    "minItems": 2,
    "maxItems": 2,
}

CONFIG_SCHEMA: Dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["scenario"],
    "properties": {
        "scenario": {"type": "string"},
        "grids": {
            "type": "object",
            "properties": {label: _AXIS_SCHEMA for label in ("q", "x", "k")},
            "additionalProperties": False,
        },
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "T": {"type": "number", "minimum": 0},
        "save_every": {"type": "integer", "minimum": 1},
        "coupling": {
            "type": "object",
            "properties": {
                "c": {"type": "number"},
                "kind": {"enum": ["none", "observable", "boost"]},
            },
            "additionalProperties": False,
        },
        "initial": {
            "type": "object",
            "properties": {
                "q0": {"type": "number"},
                "p0": {"type": "number"},
                "x0": {"type": "number"},
                "k0": {"type": "number"},
                "width": {"type": "number", "exclusiveMinimum": 0},
                "amplitudes": {"type": "array", "items": {"type": "number"}, "minItems": 2},
            },
            "additionalProperties": False,
        },
        "hamiltonian": {
            "type": "object",
            "properties": {
                "kinetic": _COEFFICIENTS_SCHEMA,
                "potential": _COEFFICIENTS_SCHEMA,
            },
            "additionalProperties": False,
        },
        "partition": {
            "type": "object",
            "properties": {
                "cells": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["label"],
                        "properties": {
                            "label": {"type": "string"},
                            "x": _INTERVAL_SCHEMA,
                            "k": _INTERVAL_SCHEMA,
                        },
                        "additionalProperties": False,
                    },
                },
                "lump": {
                    "type": "object",
                    "additionalProperties": {"type": "array", "items": {"type": "string"}},
                },
            },
            "additionalProperties": False,
        },
        "pointer": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["sign-of-q", "basis"]},
                "shifts": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "packet_offset": {"type": "number", "exclusiveMinimum": 0},
                "width": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "basis": {
            "type": "object",
            "properties": {
                "family": {"enum": ["hermite", "packets"]},
                "size": {"type": "integer", "minimum": 1},
                "dimension": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "environment": {
            "type": ["object", "null"],
            "properties": {
                "dimension": {"type": "integer", "minimum": 1, "maximum": 8},
                "seed": {"type": "integer"},
                "initial": {"type": "array", "items": {"type": "number"}},
            },
            "additionalProperties": False,
        },
        "diagnostic": {
            "type": "object",
            "properties": {
                "n": {"type": "integer", "minimum": 2},
                "extent": {"type": "number", "exclusiveMinimum": 0},
                "s": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "tolerances": {
            "type": "object",
            "properties": {key: {"type": "number", "exclusiveMinimum": 0} for key in TOLERANCE_KEYS},
            "additionalProperties": False,
        },
        "output_dir": {"type": "string"},
        "seed": {"type": "integer"},
        "fft_workers": {"type": ["integer", "null"]},
        "samples": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}


def _grid(n: int, half_width: float) -> Dict[str, Any]:
    return {"n": n, "origin": -half_width, "length": 2.0 * half_width}


_COMMON = {
    "save_every": 1,
    "output_dir": "runs",
    "seed": 12345,
    "fft_workers": None,
    "tolerances": DEFAULT_TOLERANCES,
}

_MEASUREMENT = {
    "grids": {"q": _grid(64, 12.0), "x": _grid(64, 12.0), "k": _grid(32, 8.0)},
    "initial": {"x0": 0.0, "k0": 0.0, "width": 1.0, "amplitudes": [0.6, 0.8]},
    "partition": {
        "cells": [
            {"label": "L", "x": [None, 0.0], "k": [None, None]},
            {"label": "R", "x": [0.0, None], "k": [None, None]},
        ]
    },
    "pointer": {"kind": "sign-of-q", "shifts": [-5.0, 5.0], "packet_offset": 5.0, "width": 1.0},
    "basis": {"family": "packets", "size": 2, "dimension": 2},
    "environment": None,
    "samples": 20,
}

SCENARIO_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "classical-ho": {
        "grids": {"x": _grid(256, 8.0), "k": _grid(256, 8.0)},
        "dt": 1e-3,
        "T": 10.0,
        "initial": {"x0": 1.0, "k0": 0.0, "width": 1.0},
        "hamiltonian": {"kinetic": [0.0, 0.0, 0.5], "potential": [0.0, 0.0, 0.5]},
    },
    "classical-free": {
        "grids": {"x": _grid(256, 8.0), "k": _grid(256, 8.0)},
        "dt": 1e-3,
        "T": 2.0,
        "initial": {"x0": -1.0, "k0": 0.5, "width": 0.5},
        "hamiltonian": {"kinetic": [0.0, 0.0, 0.5], "potential": [0.0]},
    },
    "classical-quartic": {
        "grids": {"x": _grid(256, 8.0), "k": _grid(256, 8.0)},
        "dt": 1e-3,
        "T": 5.0,
        "initial": {"x0": 1.0, "k0": 0.0, "width": 0.5},
        "hamiltonian": {"kinetic": [0.0, 0.0, 0.5], "potential": [0.0, 0.0, 0.0, 0.0, 0.25]},
    },
    "quantum-ho": {
        "grids": {"q": _grid(256, 16.0)},
        "dt": 1e-3,
        "T": 10.0,
        "initial": {"q0": 2.0, "p0": 0.0, "width": 1.0},
        "hamiltonian": {"kinetic": [0.0, 0.0, 0.5], "potential": [0.0, 0.0, 0.5]},
        "diagnostic": {"n": 64, "extent": 8.0, "s": 1.0},
    },
    "quantum-free": {
        "grids": {"q": _grid(512, 32.0)},
        "dt": 1e-3,
        "T": 3.0,
        "initial": {"q0": 0.0, "p0": 0.0, "width": 1.0},
        "hamiltonian": {"kinetic": [0.0, 0.0, 0.5], "potential": [0.0]},
        "diagnostic": {"n": 64, "extent": 12.0, "s": 1.0},
    },
    "hybrid-obs": {
        "grids": {"q": _grid(64, 10.0), "x": _grid(64, 10.0), "k": _grid(64, 10.0)},
        "dt": 5e-3,
        "T": 10.0,
        "coupling": {"c": 0.2, "kind": "observable"},
        "initial": {"q0": 2.0, "p0": 0.0, "x0": -1.0, "k0": 0.0, "width": 1.0},
        "hamiltonian": {"kinetic": [0.0, 0.0, 0.5], "potential": [0.0, 0.0, 0.5]},
    },
    "hybrid-boost": {
        "grids": {"q": _grid(64, 12.0), "x": _grid(64, 12.0), "k": _grid(64, 12.0)},
        "dt": 5e-3,
        "T": 10.0,
        "coupling": {"c": 0.2, "kind": "boost"},
        "initial": {"q0": 2.0, "p0": 0.0, "x0": -1.0, "k0": 0.0, "width": 1.0},
        "hamiltonian": {"kinetic": [0.0, 0.0, 0.5], "potential": [0.0, 0.0, 0.5]},
    },
    "premeasure": copy.deepcopy(_MEASUREMENT),
    "povm-extract": copy.deepcopy(_MEASUREMENT),
    "kraus-extract": copy.deepcopy(_MEASUREMENT),
    "algebra-check": {"samples": 200},
}


def merge_config(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """
    Recursively merge override into a copy of base.

    Nested objects merge key by key; lists and scalars from override replace
    the base value. An explicit null replaces the base value too.
    """
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def defaults_for(scenario: str) -> Dict[str, Any]:
    """Return the fully resolved default configuration of a scenario."""
    resolved = merge_config(_COMMON, SCENARIO_DEFAULTS[scenario])
    resolved["scenario"] = scenario
    return resolved
