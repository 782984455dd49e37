"""
Configuration handling for the Koopman–von Neumann laboratory.
"""

import json
import os
import tempfile
from typing import Any, Dict, Optional

import jsonschema
from dotenv import load_dotenv

from src.logger import setup_logger
from src.kvn.defaults import CONFIG_SCHEMA, SCENARIO_NAMES, defaults_for, merge_config
from src.kvn.errors import ConfigurationError, UnknownScenarioError

# Setup logger
logger = setup_logger(__name__)

OUTPUT_ROOT_VARIABLE = "KVN_OUTPUT_ROOT"


def load_json(file_path: str) -> Dict[str, Any]:
    """
    Load a JSON configuration file.

    Args:
        file_path: Path to the JSON file

    Returns:
        Loaded JSON data as dictionary

    Raises:
        ConfigurationError: If the file is missing or has invalid JSON format
    """
    try:
        with open(file_path, 'r', encoding='utf-8') as file:
            return json.load(file)
    except FileNotFoundError:
        logger.error(f"Configuration file not found: {file_path}")
        raise ConfigurationError(f"configuration file not found: {file_path}")
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in configuration file: {file_path}")
        raise ConfigurationError(f"invalid JSON in {file_path}: {e.msg} (line {e.lineno})")


def save_json(file_path: str, data: Dict[str, Any]) -> None:
    """
    Save dictionary to a JSON file atomically (write to a temp file, then rename).

    Args:
        file_path: Path to save the JSON file
        data: Dictionary to save
    """
    directory = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(directory, exist_ok=True)
    handle, temp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(handle, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=4, sort_keys=True)
            f.write("\n")
        os.replace(temp_path, file_path)
        logger.debug(f"Successfully saved data to {file_path}")
    except Exception as e:
        logger.error(f"Failed to save data to {file_path}: {str(e)}")
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise


def validate_config(document: Dict[str, Any]) -> None:
    """
    Validate a scenario configuration document against the schema.

    Raises:
        ConfigurationError: On the first schema violation, with its JSON path
        UnknownScenarioError: If the scenario name is not registered
    """
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(document), key=lambda error: list(error.path))
    if errors:
        first = errors[0]
        location = "/".join(str(part) for part in first.path) or "<root>"
        raise ConfigurationError(f"invalid configuration at {location}: {first.message}")
    if document["scenario"] not in SCENARIO_NAMES:
        raise UnknownScenarioError(document["scenario"], list(SCENARIO_NAMES))


def resolve_config(document: Dict[str, Any]) -> Dict[str, Any]:
    """
    Validate a configuration document and merge it over its scenario defaults.

    Args:
        document: Parsed configuration (must contain "scenario")

    Returns:
        Fully resolved configuration
    """
    validate_config(document)
    resolved = merge_config(defaults_for(document["scenario"]), document)
    for label, axis in resolved.get("grids", {}).items():
        missing = {"n", "origin", "length"} - set(axis)
        if missing:
            raise ConfigurationError(f"grid '{label}' is missing {sorted(missing)}")
    return resolved


def load_scenario_config(file_path: str) -> Dict[str, Any]:
    """
    Load, validate and resolve a scenario configuration file.

    Args:
        file_path: Path to the JSON configuration

    Returns:
        Resolved configuration dictionary
    """
    document = load_json(file_path)
    if not isinstance(document, dict):
        raise ConfigurationError(f"configuration root must be an object: {file_path}")
    resolved = resolve_config(document)
    logger.info(f"Loaded scenario '{resolved['scenario']}' from {file_path}")
    return resolved


def output_root(env_file: Optional[str] = None) -> str:
    """
    Return the root directory for relative output paths.

    Reads KVN_OUTPUT_ROOT from the environment, loading a .env file first
    when one is present. Falls back to the current directory.
    """
    load_dotenv(env_file)
    return os.environ.get(OUTPUT_ROOT_VARIABLE, os.getcwd())


def resolve_output_dir(config: Dict[str, Any]) -> str:
    """Absolute output directory for a resolved configuration."""
    directory = config.get("output_dir", "runs")
    if os.path.isabs(directory):
        return directory
    return os.path.join(output_root(), directory, config["scenario"])
