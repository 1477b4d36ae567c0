"""
Configuration loading: TOML file, optional .env, BERNOULLI_* overrides.

Override names are `BERNOULLI_<SECTION>__<FIELD>` for section fields and
`BERNOULLI_<FIELD>` for top-level fields, e.g. `BERNOULLI_PROBLEM__GAMMA=-2`
or `BERNOULLI_SEED=7`. Values are parsed as TOML literals when possible
(`[0.5, 0.8, 2.0]`, `true`, `1e-3`) and kept as strings otherwise.
"""

import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import tomli_w
from dotenv import load_dotenv
from pydantic import ValidationError

from .types import ConfigError, RunConfig

logger = logging.getLogger(__name__)

ENV_PREFIX = "BERNOULLI_"


def _parse_env_value(raw: str) -> Any:
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return raw


def env_overrides(environ: Mapping[str, str]) -> Dict[str, Any]:
    """Nested dict of the BERNOULLI_* variables in `environ`."""
    overrides: Dict[str, Any] = {}
    for key, raw in environ.items():
        if not key.startswith(ENV_PREFIX):
            continue
        path = [part.lower() for part in key[len(ENV_PREFIX) :].split("__") if part]
        if not path:
            continue
        node = overrides
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError([f"{key}: conflicts with a scalar override"])
        node[path[-1]] = _parse_env_value(raw)
    return overrides


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _violations(error: ValidationError) -> list:
    out = []
    for item in error.errors():
        where = ".".join(str(p) for p in item["loc"]) or "config"
        out.append(f"{where}: {item['msg']}")
    return out


def validate_config(data: Mapping[str, Any], source: Optional[str] = None) -> RunConfig:
    """
    Build a RunConfig from a plain mapping.

    Raises:
        ConfigError: listing every violation.
    """
    try:
        return RunConfig.model_validate(dict(data))
    except ValidationError as e:
        raise ConfigError(_violations(e), source)


def load_config(
    path: Optional[Union[str, Path]] = None,
    environ: Optional[Mapping[str, str]] = None,
    dotenv: bool = True,
) -> RunConfig:
    """
    Load a run configuration.

    Args:
        path: TOML file; defaults only when None
        environ: variables to read overrides from (default: os.environ)
        dotenv: load a `.env` file from the working directory first

    Raises:
        ConfigError: unreadable file, TOML syntax error or invalid values.
    """
    data: Dict[str, Any] = {}
    source = str(path) if path is not None else None
    if path is not None:
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except OSError as e:
            raise ConfigError([f"cannot read file: {e}"], source)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError([f"TOML syntax: {e}"], source)

    if environ is None:
        if dotenv:
            load_dotenv(override=False)
        environ = os.environ
    overrides = env_overrides(environ)
    if overrides:
        logger.info(f"Environment overrides: {sorted(overrides)}")
        data = _merge(data, overrides)

    config = validate_config(data, source)
    logger.debug(f"Loaded configuration from {source or 'defaults'}")
    return config


def config_to_dict(config: RunConfig) -> Dict[str, Any]:
    """Plain TOML-compatible mapping (unset optional fields omitted)."""
    return config.model_dump(mode="json", exclude_none=True)


def dump_config(config: RunConfig, path: Optional[Union[str, Path]] = None) -> str:
    """Serialize to TOML; also write it to `path` when given."""
    text = tomli_w.dumps(config_to_dict(config))
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return text
