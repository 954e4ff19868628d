"""
Engine configuration loaded from config/engine_config.yaml.
Missing sections or keys fall back to the defaults declared here.
"""

from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from monitoring.logging_config import get_logger

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config" / "engine_config.yaml"

logger = get_logger("EngineSettings")


@dataclass(frozen=True)
class CostModelConfig:
    """Per-slot byte costs used for modeled memory."""
    dense_slot_bytes: int = 8
    ordered_entry_bytes: int = 48
    hash_entry_bytes: int = 24


@dataclass(frozen=True)
class PreaccumulationConfig:
    validate_regions: bool = False
    reuse_map_stores: bool = False
    mode: str = "auto"


@dataclass(frozen=True)
class HarnessConfig:
    reference_strategy: str = "hash_map"
    input_low: float = 0.5
    input_high: float = 1.5
    value_bound: float = 100.0
    derivative_bound: float = 100.0


@dataclass(frozen=True)
class LoggingConfig:
    level: str = "INFO"
    file_path: str = "logs/preacc.log"


@dataclass(frozen=True)
class EngineConfig:
    """Complete engine configuration."""
    cost_model: CostModelConfig = field(default_factory=CostModelConfig)
    preaccumulation: PreaccumulationConfig = field(default_factory=PreaccumulationConfig)
    harness: HarnessConfig = field(default_factory=HarnessConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _section(cls, raw: Optional[Dict[str, Any]], name: str):
    raw = raw or {}
    known = set(cls.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"Unknown keys in config section '{name}': {sorted(unknown)}")
    return cls(**raw)


def engine_config_from_dict(data: Dict[str, Any]) -> EngineConfig:
    """Build an EngineConfig from a parsed YAML mapping."""
    data = data or {}
    unknown = set(data) - set(EngineConfig.__dataclass_fields__)
    if unknown:
        raise ValueError(f"Unknown config sections: {sorted(unknown)}")

    config = EngineConfig(
        cost_model=_section(CostModelConfig, data.get('cost_model'), 'cost_model'),
        preaccumulation=_section(PreaccumulationConfig, data.get('preaccumulation'), 'preaccumulation'),
        harness=_section(HarnessConfig, data.get('harness'), 'harness'),
        logging=_section(LoggingConfig, data.get('logging'), 'logging'),
    )
    if config.preaccumulation.mode not in ("auto", "forward", "reverse"):
        raise ValueError(f"Invalid preaccumulation mode: {config.preaccumulation.mode}")
    if config.harness.input_low >= config.harness.input_high:
        raise ValueError("harness.input_low must be below harness.input_high")
    if config.harness.value_bound <= 0 or config.harness.derivative_bound <= 0:
        raise ValueError("harness.value_bound and harness.derivative_bound must be positive")
    return config


def load_engine_config(path=None) -> EngineConfig:
    """Load engine configuration from a YAML file."""
    config_path = Path(path) if path else DEFAULT_CONFIG_PATH
    try:
        with open(config_path, 'r') as file:
            data = yaml.safe_load(file)
        logger.debug(f"Loaded engine configuration from {config_path}")
    except FileNotFoundError:
        logger.warning(f"Engine configuration {config_path} not found, using defaults")
        data = {}
    return engine_config_from_dict(data)


# Global configuration instance
_engine_config: Optional[EngineConfig] = None


def get_engine_config() -> EngineConfig:
    """Get or load the default engine configuration."""
    global _engine_config

    if _engine_config is None:
        _engine_config = load_engine_config()

    return _engine_config
