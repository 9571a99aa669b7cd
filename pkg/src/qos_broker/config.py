"""Broker configuration.

Values resolve as: explicit override > environment variable > default.
"""

import os
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field

# Default data directory
DEFAULT_DATA_DIR = Path.home() / ".qos-broker" / "data"

# Environment variable for each field
ENV_VARS = {
    "data_dir": "QOS_BROKER_DATA_DIR",
    "host": "QOS_BROKER_HOST",
    "port": "QOS_BROKER_PORT",
    "tiers_path": "QOS_BROKER_TIERS",
    "max_rounds": "QOS_BROKER_MAX_ROUNDS",
    "violation_threshold": "QOS_BROKER_VIOLATION_THRESHOLD",
    "credit_per_violation": "QOS_BROKER_CREDIT_PER_VIOLATION",
    "window_seconds": "QOS_BROKER_WINDOW_SECONDS",
    "credential_ttl_hours": "QOS_BROKER_CREDENTIAL_TTL_HOURS",
    "selection_source": "QOS_BROKER_SELECTION_SOURCE",
    "log_level": "QOS_BROKER_LOG_LEVEL",
    "log_json": "QOS_BROKER_LOG_JSON",
}

TRUE_VALUES = ("1", "true", "yes")


class BrokerConfig(BaseModel):
    """Runtime configuration of a broker instance."""

    data_dir: Path = DEFAULT_DATA_DIR
    host: str = "127.0.0.1"
    port: int = Field(default=8080, ge=0, le=65535)
    tiers_path: Path | None = None

    # Negotiation
    max_rounds: int = Field(default=3, ge=1)
    contract_validity_days: int = Field(default=30, ge=1)

    # Penalty clause defaults
    violation_threshold: int = Field(default=3, ge=1)
    credit_per_violation: float = Field(default=5.0, ge=0.0)

    # Monitoring
    window_seconds: int = Field(default=60, ge=1)

    # Credential gateway
    credential_ttl_hours: float = Field(default=24.0, gt=0.0)

    # Selection
    selection_source: Literal["advertised", "observed"] = "advertised"
    observation_windows: int = Field(default=10, ge=1)

    # Persistence
    snapshot_every: int = Field(default=100, ge=1)

    log_level: str = "INFO"
    log_json: bool = False

    @classmethod
    def from_env(cls, **overrides: Any) -> "BrokerConfig":
        """Build a config from the environment, applying non-None overrides.

        Args:
            **overrides: Field values that take precedence over the environment.

        Returns:
            BrokerConfig instance.
        """
        values: dict[str, Any] = {}
        for field_name, env_name in ENV_VARS.items():
            env_value = os.environ.get(env_name)
            if env_value:
                values[field_name] = env_value

        if values.get("log_json") is not None:
            values["log_json"] = str(values["log_json"]).lower() in TRUE_VALUES

        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(values)
