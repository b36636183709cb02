"""
Plain-text run configuration files.

One ``key = value`` pair per line in dotenv syntax, read with python-dotenv;
blank lines and lines starting with ``#`` are ignored and later duplicates win.
Keys are RunConfig field names (``-`` and ``_`` are interchangeable) or dotted
section keys:

    column.<field>      header-name remapping (``column.views = View Count``)
    gbt.<param>         GbtParams override (``gbt.learning_rate = 0.05``)
    halving.<option>    HalvingConfig override
    space.<dimension>   ParamSpace override; comma-separated values
    synth.<option>      SynthConfig override

Example:
    # train.cfg
    input = data/songs.csv
    split = 0.8
    gbt.max_iter = 300
"""

import io
import logging
from pathlib import Path
from typing import Any

from dotenv import dotenv_values

from engagement.exceptions import InvalidConfigException
from engagement.schemas.run import RunConfig

logger = logging.getLogger(__name__)

SECTIONS: dict[str, str] = {
    "column": "columns",
    "gbt": "gbt",
    "halving": "halving",
    "space": "space",
    "synth": "synth",
}


def assign(values: dict[str, Any], key: str, value: Any, source: str) -> None:
    """
    Store one option into a nested RunConfig dict.

    Args:
        values: Destination dict (modified in place)
        key: Option name, either a field name or ``section.name``
        value: Raw value
        source: Where the option came from, for error messages

    Raises:
        InvalidConfigException: For unknown keys
    """
    if "." in key:
        section, name = key.split(".", 1)
        field = SECTIONS.get(section.strip().lower())
        if field is None or not name.strip():
            raise InvalidConfigException(key, f"unknown section ({source})")
        name = name.strip()
        if field != "columns":
            name = name.replace("-", "_")
        if field == "space" and isinstance(value, str):
            value = [part.strip() for part in value.split(",") if part.strip()]
        values.setdefault(field, {})[name] = value
        return

    field = key.strip().replace("-", "_")
    if field not in RunConfig.model_fields or field in SECTIONS.values():
        raise InvalidConfigException(key, f"unknown option ({source})")
    values[field] = value


def parse_config_text(text: str, source: str = "<config>") -> dict[str, Any]:
    """
    Parse config-file contents into a nested dict of raw values.

    Lines are read with python-dotenv, so quoting, ``export`` prefixes and trailing
    ``# comments`` follow dotenv rules. Values are taken literally (no ``${VAR}``
    expansion).

    Raises:
        InvalidConfigException: For keys without a value or unknown keys
    """
    values: dict[str, Any] = {}
    for key, value in dotenv_values(stream=io.StringIO(text), interpolate=False).items():
        if value is None:
            raise InvalidConfigException(f"{source}: {key}", "expected key = value")
        assign(values, key, value.strip(), source)
    return values


def load_config_file(path: Path | str) -> dict[str, Any]:
    """
    Read and parse a config file.

    Raises:
        InvalidConfigException: If the file cannot be read or a line is malformed
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        reason = f"cannot read {path}: {exc.strerror or exc}"
        raise InvalidConfigException("--config", reason) from exc
    values = parse_config_text(text, str(path))
    logger.debug("Loaded config file", extra={"path": str(path), "n_keys": len(values)})
    return values


def merge_layers(*layers: dict[str, Any]) -> dict[str, Any]:
    """Overlay option dicts left to right; section dicts merge key by key."""
    merged: dict[str, Any] = {}
    for layer in layers:
        for key, value in layer.items():
            if isinstance(value, dict):
                merged[key] = {**merged.get(key, {}), **value}
            else:
                merged[key] = value
    return merged
