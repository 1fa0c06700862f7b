"""JSON experiment manifests whose keys mirror the CLI flags."""
import json
import logging
from pathlib import Path
from typing import Dict, Tuple

from .errors import DomainError

logger = logging.getLogger(__name__)


def normalize_keys(data: Dict) -> Dict:
    """Map flag-style keys (n-qubits) onto parameter names (n_qubits)."""
    return {str(key).replace("-", "_"): value for key, value in data.items()}


def load_config(path) -> Dict:
    """Read a JSON object from path.

    Raises:
        OSError: the file cannot be read
        DomainError: the file is not a JSON object
    """
    path = Path(path)
    with open(path, "r") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise DomainError(f"Config {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise DomainError(f"Config {path} must contain a JSON object")
    logger.info(f"Loaded {len(data)} settings from {path}")
    return normalize_keys(data)


def default_map_for(data: Dict, commands: Dict[str, Dict[str, Tuple[str, bool]]]) -> Dict[str, Dict]:
    """Split one flat config into per-subcommand click default maps.

    `commands` maps each subcommand name to {normalized long flag: (parameter
    name, takes multiple values)}, so `format` reaches the `fmt` parameter.
    Scalars given for multi-value parameters are wrapped in a list. Keys no
    subcommand accepts are reported and dropped.
    """
    known = set()
    default_map = {}
    for name, flags in commands.items():
        known |= set(flags)
        section = {}
        for key, value in data.items():
            if key not in flags:
                continue
            param, multiple = flags[key]
            if multiple and not isinstance(value, list):
                value = [value]
            section[param] = value
        default_map[name] = section
    for key in sorted(set(data) - known):
        logger.warning(f"Ignoring unknown config key '{key}'")
    return default_map
