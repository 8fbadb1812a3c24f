"""Run configuration files: schema validation and resolution to run objects.

A config document has four required sections: where the data comes from
(synthesized benchmark or files on disk), which term dictionary to search,
the sampler hyperparameters, and the output directory; plus an optional
sparse truth map for error metrics. Validation happens before any
computation and unknown keys are rejected everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .dictionary import Dictionary, TermSpec, preset_dictionary
from .errors import ConfigError
from .sampler import SabcConfig
from .simulator import BENCHMARKS, Dataset, generate_benchmark, load_dataset
from .spike_slab import slab_bounds_for

__all__ = ["CONFIG_SCHEMA", "load_config", "validate_config", "resolve_config", "ResolvedRun"]

_NUM_POS = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["dataset", "dictionary", "sabc", "output"],
    "additionalProperties": False,
    "properties": {
        "dataset": {
            "oneOf": [
                {
                    "type": "object",
                    "required": ["benchmark"],
                    "additionalProperties": False,
                    "properties": {
                        "benchmark": {"enum": sorted(BENCHMARKS)},
                        "noise_pct": {"type": "number", "minimum": 0},
                        "seed": {"type": "integer", "minimum": 0},
                    },
                },
                {
                    "type": "object",
                    "required": ["path"],
                    "additionalProperties": False,
                    "properties": {"path": {"type": "string"}},
                },
            ]
        },
        "dictionary": {
            "oneOf": [
                {"enum": ["pendulum23", "oscillator21"]},
                {"type": "array", "minItems": 1, "items": {"type": "object"}},
            ]
        },
        "sabc": {
            "type": "object",
            "required": [
                "N_S", "alpha", "eta", "beta", "lambda", "K_max",
                "epsilon1", "epsilon_tol", "gamma", "seed", "slab",
            ],
            "additionalProperties": False,
            "properties": {
                "N_S": {"type": "integer", "minimum": 1},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "eta": {"type": "number", "minimum": 0, "maximum": 1},
                "beta": {"type": "number", "minimum": 0},
                "lambda": {
                    "oneOf": [
                        {"type": "number", "minimum": 0},
                        {"type": "array", "minItems": 1, "items": {"type": "number", "minimum": 0}},
                    ]
                },
                "K_max": {"type": "integer", "minimum": 1},
                "epsilon1": _NUM_POS,
                "epsilon_tol": _NUM_POS,
                "gamma": _NUM_POS,
                "seed": {"type": "integer", "minimum": 0},
                "max_draws": {"type": "integer", "minimum": 1},
                "rounds": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "additionalProperties": False,
                        "properties": {
                            "epsilon1": _NUM_POS,
                            "epsilon_tol": _NUM_POS,
                            "beta": {"type": "number", "minimum": 0},
                        },
                    },
                },
                "slab": {
                    "oneOf": [
                        {
                            "type": "object",
                            "required": ["scheme"],
                            "additionalProperties": False,
                            "properties": {
                                "scheme": {"const": "uniform"},
                                "a": _NUM_POS,
                            },
                        },
                        {
                            "type": "object",
                            "required": ["scheme"],
                            "additionalProperties": False,
                            "properties": {"scheme": {"const": "informed"}},
                        },
                    ]
                },
                "substeps": {"type": "integer", "minimum": 1},
                "blowup": _NUM_POS,
            },
        },
        "truth": {
            "type": "object",
            "minProperties": 1,
            "additionalProperties": {"type": "number"},
        },
        "output": {"type": "string"},
    },
}


@dataclass
class ResolvedRun:
    """A validated config turned into live objects."""

    dataset: Dataset
    dataset_meta: dict | None
    dictionary: Dictionary
    cfg: SabcConfig
    truth: dict | None  # term index -> coefficient
    output: Path
    doc: dict


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed config {path}: {e}") from None


def validate_config(doc: dict) -> None:
    """Schema-check a config document; raises ConfigError with the fault path."""
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {e.message}") from None


def resolve_config(doc: dict) -> ResolvedRun:
    """Validate and instantiate everything a run needs."""
    validate_config(doc)

    dic_spec = doc["dictionary"]
    if isinstance(dic_spec, str):
        dictionary = preset_dictionary(dic_spec)
    else:
        dictionary = Dictionary([TermSpec.from_dict(d) for d in dic_spec], name="custom")

    ds_spec = doc["dataset"]
    meta = None
    if "benchmark" in ds_spec:
        dataset = generate_benchmark(
            ds_spec["benchmark"],
            noise_pct=ds_spec.get("noise_pct", 0.02),
            seed=ds_spec.get("seed", 0),
        )
    else:
        dataset, meta = load_dataset(ds_spec["path"])

    sabc = doc["sabc"]
    slab_spec = sabc["slab"]
    if slab_spec["scheme"] == "uniform":
        slab = slab_bounds_for(dictionary, "uniform", a=slab_spec.get("a", 1.0))
    else:
        slab = slab_bounds_for(dictionary, "informed")

    lam_spec = sabc["lambda"]
    if isinstance(lam_spec, (int, float)):
        # a scalar lambda is a fraction of each slab half-width
        lam = float(lam_spec) * slab.half_width
    else:
        lam = np.asarray(lam_spec, dtype=float)
        if lam.shape[0] != len(dictionary):
            raise ConfigError(
                f"lambda list has {lam.shape[0]} entries, dictionary has {len(dictionary)} terms"
            )

    cfg = SabcConfig(
        N_S=sabc["N_S"],
        alpha=sabc["alpha"],
        eta=sabc["eta"],
        beta=sabc["beta"],
        lam=lam,
        K_max=sabc["K_max"],
        epsilon1=sabc["epsilon1"],
        epsilon_tol=sabc["epsilon_tol"],
        gamma=sabc["gamma"],
        slab=slab,
        seed=sabc["seed"],
        rounds=tuple(sabc.get("rounds", [{}])),
        max_draws=sabc.get("max_draws", 10_000_000),
        substeps=sabc.get("substeps", 1),
        blowup=sabc.get("blowup", 1e8),
    )

    truth = None
    if "truth" in doc:
        truth = {}
        for label, coeff in doc["truth"].items():
            if coeff == 0:
                raise ConfigError(f"truth coefficient for {label!r} is zero; delta_2 is undefined")
            truth[dictionary.index_of(label)] = float(coeff)

    return ResolvedRun(
        dataset=dataset,
        dataset_meta=meta,
        dictionary=dictionary,
        cfg=cfg,
        truth=truth,
        output=Path(doc["output"]),
        doc=doc,
    )
