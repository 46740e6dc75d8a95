# Built-in imports
import os
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

# Own imports
from common.exceptions import SpecParseError


DEFAULT_CONFIG_PATH = Path(__file__).resolve().parents[2] / "ids.json"


@dataclass(frozen=True)
class AppConfig:
    """Profile values loaded from the "app_config" section of ids.json."""

    environment: str = "dev"
    log_level: str = "INFO"
    max_configs: int = 2**16
    max_vertices: int = 2**20
    dense_limit: int = 4096
    rank_tol: float = 1e-9
    threads: Optional[int] = None
    default_model: dict = field(
        default_factory=lambda: {
            "kind": "site-potential",
            "values": [2.0, 3.0],
            "probabilities": [0.5, 0.5],
            "d": 1,
        }
    )
    p_grid: tuple = (0.1, 0.5, 0.9)
    verify_trials: int = 200

    def resolved_threads(self) -> int:
        """Thread count with the IDS_THREADS environment override applied."""
        from_env = os.environ.get("IDS_THREADS")
        if from_env:
            return max(1, int(from_env))
        if self.threads:
            return max(1, int(self.threads))
        return os.cpu_count() or 1

    def with_overrides(self, **overrides) -> "AppConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_app_config(
    environment: Optional[str] = None, path: Optional[str] = None
) -> AppConfig:
    """
    Load one profile from the JSON context file.
    :param environment: profile name, defaults to $IDS_ENVIRONMENT or "dev".
    :param path: context file, defaults to $IDS_CONFIG_PATH or the repo ids.json.
    """
    environment = environment or os.environ.get("IDS_ENVIRONMENT", "dev")
    config_path = Path(path or os.environ.get("IDS_CONFIG_PATH", DEFAULT_CONFIG_PATH))

    if not config_path.exists():
        return AppConfig(environment=environment)

    try:
        context = json.loads(config_path.read_text())
        profile = context["app_config"][environment]
    except (json.JSONDecodeError, KeyError) as exc:
        raise SpecParseError(
            f"invalid config profile {environment!r} in {config_path}: {exc}"
        ) from exc

    known = {f for f in AppConfig.__dataclass_fields__ if f != "environment"}
    unknown = set(profile) - known
    if unknown:
        raise SpecParseError(f"unknown config keys {sorted(unknown)} in {config_path}")

    values = dict(profile)
    if "p_grid" in values:
        values["p_grid"] = tuple(values["p_grid"])
    return AppConfig(environment=environment, **values)
