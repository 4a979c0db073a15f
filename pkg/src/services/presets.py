"""Shipped experiment presets: detector configs and generator stream specs"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from lib.bocd_errors import ConfigError, StreamSpecError
from models.detector_config import DetectorConfig, load_config
from models.stream_spec import StreamSpec

logger = logging.getLogger(__name__)

CONFIG_SUFFIX = ".conf"
STREAM_SUFFIX = ".stream.json"


def preset_dir() -> Path:
    """Directory holding preset files; ROBUST_BOCD_PRESETS overrides the checkout default"""
    override = os.getenv("ROBUST_BOCD_PRESETS")
    if override:
        return Path(override)
    return Path(__file__).resolve().parents[2] / "presets"


def list_presets() -> List[str]:
    directory = preset_dir()
    if not directory.is_dir():
        return []
    return sorted(p.name[: -len(CONFIG_SUFFIX)] for p in directory.glob(f"*{CONFIG_SUFFIX}"))


def resolve_config_path(name_or_path: Union[str, Path]) -> Path:
    """A config file path, or the name of a shipped preset"""
    path = Path(name_or_path)
    if path.is_file():
        return path
    candidate = preset_dir() / f"{name_or_path}{CONFIG_SUFFIX}"
    if candidate.is_file():
        return candidate
    raise ConfigError(f"No config file or preset named '{name_or_path}' (presets: {', '.join(list_presets())})")


def load_preset_config(name_or_path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> DetectorConfig:
    path = resolve_config_path(name_or_path)
    config = load_config(path, overrides)
    logger.info("Loaded detector config from %s", path)
    return config


def load_stream_spec(name_or_path: Union[str, Path], seed: Optional[int] = None) -> StreamSpec:
    """A stream spec JSON file, or the name of a shipped stream preset"""
    path = Path(name_or_path)
    if not path.is_file():
        path = preset_dir() / f"{name_or_path}{STREAM_SUFFIX}"
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise StreamSpecError(f"No stream spec file or preset named '{name_or_path}'") from exc
    except json.JSONDecodeError as exc:
        raise StreamSpecError(f"'{path}' is not valid JSON: {exc}") from exc
    spec = StreamSpec.from_dict(payload)
    return spec if seed is None else spec.with_seed(seed)
