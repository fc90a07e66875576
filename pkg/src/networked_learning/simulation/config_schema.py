"""JSON schemas and loading for experiment configuration files."""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict

import jsonschema
import yaml

from .models import SimulationError

logger = logging.getLogger(__name__)


class ConfigError(SimulationError):
    """Raised when an experiment configuration is unreadable or invalid."""
    pass


_NUMBER_LIST = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_PROBABILITIES = {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1}

HYPERGRAPH_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"path": {"type": "string", "minLength": 1}},
            "required": ["path"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "family": {"type": "string", "enum": ["disjoint", "star", "cycle", "random"]},
                "k": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 1},
                "n": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "density": {"type": "number", "minimum": 0, "maximum": 1},
            },
            "required": ["family", "k", "m"],
            "additionalProperties": False,
        },
    ]
}

NOISE_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"type": "string", "enum": ["none", "uniform", "discrete"]},
        "half_width": {"type": "number", "exclusiveMinimum": 0},
        "atoms": _NUMBER_LIST,
        "probabilities": _PROBABILITIES,
    },
    "required": ["kind"],
    "additionalProperties": False,
}

MODEL_SCHEMA = {
    "type": "object",
    "properties": {
        "partitions": {
            "type": "array",
            "minItems": 1,
            "items": {
                "oneOf": [
                    {
                        "type": "object",
                        "properties": {
                            "kind": {"const": "uniform"},
                            "dimension": {"type": "integer", "minimum": 1},
                        },
                        "required": ["kind", "dimension"],
                        "additionalProperties": False,
                    },
                    {
                        "type": "object",
                        "properties": {
                            "kind": {"const": "discrete"},
                            "atoms": {"type": "array", "items": _NUMBER_LIST, "minItems": 1},
                            "probabilities": _PROBABILITIES,
                        },
                        "required": ["kind", "atoms", "probabilities"],
                        "additionalProperties": False,
                    },
                ]
            },
        },
        "label": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {
                        "kind": {"const": "linear"},
                        "coefficients": _NUMBER_LIST,
                        "noise": NOISE_SCHEMA,
                    },
                    "required": ["kind", "coefficients"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "kind": {"const": "table"},
                        "table": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "object",
                                "properties": {
                                    "atoms": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                                    "values": _NUMBER_LIST,
                                    "probabilities": _PROBABILITIES,
                                },
                                "required": ["atoms", "values", "probabilities"],
                                "additionalProperties": False,
                            },
                        },
                    },
                    "required": ["kind", "table"],
                    "additionalProperties": False,
                },
            ]
        },
    },
    "required": ["partitions", "label"],
    "additionalProperties": False,
}

METHODS_SCHEMA = {
    "type": "array",
    "items": {"type": "string", "enum": ["eqw", "ind", "ind-exact", "opt"]},
    "minItems": 1,
    "uniqueItems": True,
}

CONCENTRATION_SCHEMA = {
    "type": "object",
    "properties": {
        "hypergraph": HYPERGRAPH_SCHEMA,
        "model": MODEL_SCHEMA,
        "statistic": {
            "type": "object",
            "properties": {
                "kind": {"type": "string", "enum": ["affine", "squared_loss"]},
                "coefficients": _NUMBER_LIST,
                "offset": {"type": "number"},
                "label_coefficient": {"type": "number"},
                "scale": {"type": "number"},
            },
            "required": ["kind", "coefficients"],
            "additionalProperties": False,
        },
        "methods": METHODS_SCHEMA,
        "epsilon": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
        "trials": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["hypergraph", "model", "statistic", "methods", "epsilon", "trials"],
    "additionalProperties": False,
}

ERM_SCHEMA = {
    "type": "object",
    "properties": {
        "hypergraph": HYPERGRAPH_SCHEMA,
        "model": MODEL_SCHEMA,
        "methods": METHODS_SCHEMA,
        "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "R": {"type": "number", "exclusiveMinimum": 0},
        "n_test": {"type": "integer", "minimum": 2},
        "covering": {"type": "string"},
    },
    "required": ["hypergraph", "model", "methods", "seeds", "R"],
    "additionalProperties": False,
}

SCHEMAS = {"concentration": CONCENTRATION_SCHEMA, "erm": ERM_SCHEMA, "model": MODEL_SCHEMA}


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment configuration and where it came from."""
    kind: str
    data: Dict[str, Any]
    signature: str
    base_dir: Path


def compute_config_signature(data: Dict[str, Any]) -> str:
    """SHA-256 hex digest of the canonical JSON form of a configuration."""
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def validate_config(data: Any, kind: str) -> None:
    """Validate a configuration dictionary against its schema.

    Raises:
        ConfigError: Naming the offending location on failure
    """
    try:
        schema = SCHEMAS[kind]
    except KeyError:
        raise ConfigError(f"unknown experiment kind '{kind}'")
    try:
        jsonschema.validate(instance=data, schema=schema)
    except jsonschema.ValidationError as e:
        location = ".".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"invalid {kind} config at {location}: {e.message}")


def load_experiment_config(path: Path, kind: str) -> ExperimentConfig:
    """Read, validate and fingerprint a JSON or YAML experiment configuration.

    Args:
        path: Configuration file (.yaml/.yml parsed as YAML, anything else as JSON)
        kind: "concentration" or "erm"

    Returns:
        ExperimentConfig; relative hypergraph paths resolve against the file's directory

    Raises:
        ConfigError: On I/O, syntax or schema errors
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot parse config {path}: {e}")
    validate_config(data, kind)
    signature = compute_config_signature(data)
    logger.info(f"loaded {kind} config {path} (signature {signature[:12]})")
    return ExperimentConfig(kind, data, signature, path.parent)
