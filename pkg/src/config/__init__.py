"""
Config Module

Run configuration models and the TOML/.env/environment loader.
"""

from .loader import ENV_PREFIX, config_to_dict, dump_config, env_overrides, load_config, validate_config
from .types import (
    AcceptanceConfig,
    ConfigError,
    DesignConfig,
    GradCheckConfig,
    MeshConfig,
    OptimizerConfig,
    OutputConfig,
    ProblemConfig,
    RunConfig,
    ScheduleConfig,
    VerifyConfig,
)

__all__ = [
    "ENV_PREFIX",
    "config_to_dict",
    "dump_config",
    "env_overrides",
    "load_config",
    "validate_config",
    "AcceptanceConfig",
    "ConfigError",
    "DesignConfig",
    "GradCheckConfig",
    "MeshConfig",
    "OptimizerConfig",
    "OutputConfig",
    "ProblemConfig",
    "RunConfig",
    "ScheduleConfig",
    "VerifyConfig",
]
