"""
Configuration management module for honeyguard
"""

import copy
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

from .errors import ConfigError

POLICIES = ("scm", "dum")
ALGORITHMS = ("knn", "dt", "rf", "gbdt")
HANDLING = ("record_and_pass", "filter_drop")

DEFAULTS: Dict[str, Any] = {
    'app': {
        'name': 'honeyguard',
        'version': '1.0.0',
    },
    'logging': {
        'level': 'INFO',
        'file': None,
        'max_size': 10485760,
        'backup_count': 5,
    },
    'network': {
        'local_nets': ['192.168.1.0/24'],
        'honeypots': ['192.168.1.100'],
        'devices': [f'192.168.1.{i}' for i in range(10, 20)],
    },
    'adapt': {
        'policy': 'dum',
        't_duration': 3600,
        't_update': 3600,
        'retain_on_single_class': True,
        'channel': 'memory',
        'channel_path': 'models/latest.sadm',
    },
    'learning': {
        'algorithm': 'dt',
        'seed': 0,
        'k': 5,
        'n_trees': 100,
        'max_features': 3,
        'bootstrap': True,
        'n_stages': 100,
        'learning_rate': 0.1,
        'gbdt_max_depth': 3,
        'dt_max_depth': None,
        'balance_ratio': None,
        'n_jobs': 1,
    },
    'gateway': {
        'eval_window': 3600,
        'handling': 'record_and_pass',
    },
    'replay': {
        'origin': None,
    },
    'report': {
        'top_ports': 10,
        'include_timings': True,
    },
    'database': {
        'enabled': False,
        'path': 'data/honeyguard.db',
        'echo': False,
    },
}


def parse_scalar(value: str) -> Any:
    """Type a textual override value (bool/int/float/None/str)"""
    text = value.strip()
    if text.lower() in ('inf', '+inf', 'infinity'):
        return float('inf')
    try:
        parsed = yaml.safe_load(text)
    except yaml.YAMLError:
        return text
    if isinstance(parsed, (dict, list)) and ',' not in text and not text.startswith(('[', '{')):
        return text
    if isinstance(parsed, str) and ',' in parsed:
        return [part.strip() for part in parsed.split(',') if part.strip()]
    return parsed


def load_override_file(path: str) -> Dict[str, Any]:
    """Read a key=value override file into {dotted.key: value}"""
    overrides: Dict[str, Any] = {}
    try:
        with open(path, 'r', encoding='utf-8') as fh:
            for number, raw in enumerate(fh, start=1):
                line = raw.split('#', 1)[0].strip()
                if not line:
                    continue
                if '=' not in line:
                    raise ConfigError(f"{path}:{number}: expected key=value")
                key, value = line.split('=', 1)
                key = key.strip()
                if not key:
                    raise ConfigError(f"{path}:{number}: empty key")
                overrides[key] = parse_scalar(value)
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    return overrides


class Config:
    """YAML configuration with .env/environment overrides and dotted access"""

    ENV_MAPPINGS = {
        'HONEYGUARD_LOG_LEVEL': ('logging', 'level'),
        'HONEYGUARD_DB_PATH': ('database', 'path'),
        'HONEYGUARD_POLICY': ('adapt', 'policy'),
        'HONEYGUARD_ALGO': ('learning', 'algorithm'),
        'HONEYGUARD_SEED': ('learning', 'seed'),
        'HONEYGUARD_EVAL_WINDOW': ('gateway', 'eval_window'),
    }

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path or self._get_default_config_path()
        self._config_data: Dict[str, Any] = {}
        self._load_config()

    def _get_default_config_path(self) -> str:
        """Repository-level config/default.yaml"""
        base_dir = Path(__file__).resolve().parents[3]
        return str(base_dir / "config" / "default.yaml")

    def _load_config(self) -> None:
        """Load YAML on top of the built-in defaults, then apply env overrides"""
        self._config_data = copy.deepcopy(DEFAULTS)
        try:
            with open(self.config_path, 'r', encoding='utf-8') as file:
                loaded = yaml.safe_load(file) or {}
            self._deep_merge(self._config_data, loaded)
        except FileNotFoundError:
            pass
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML configuration: {e}") from e

        load_dotenv(override=False)
        self._apply_environment_overrides()

    def _apply_environment_overrides(self) -> None:
        for env_var, config_path in self.ENV_MAPPINGS.items():
            env_value = os.getenv(env_var)
            if env_value:
                self._set_nested_value(config_path, parse_scalar(env_value))

    def _set_nested_value(self, path: tuple, value: Any) -> None:
        current = self._config_data
        for key in path[:-1]:
            if not isinstance(current.get(key), dict):
                current[key] = {}
            current = current[key]
        current[path[-1]] = value

    def get(self, path: str, default: Any = None) -> Any:
        """Get configuration value using dot notation (e.g., 'adapt.policy')"""
        current = self._config_data
        try:
            for key in path.split('.'):
                current = current[key]
            return current
        except (KeyError, TypeError):
            return default

    def set(self, path: str, value: Any) -> None:
        """Set configuration value using dot notation"""
        self._set_nested_value(tuple(path.split('.')), value)

    def apply_overrides(self, overrides: Dict[str, Any]) -> None:
        """Apply {dotted.key: value} pairs"""
        for key, value in overrides.items():
            self.set(key, value)

    def load_file(self, path: str) -> None:
        """Merge a YAML file or apply a key=value override file"""
        if path.endswith(('.yaml', '.yml')):
            try:
                with open(path, 'r', encoding='utf-8') as fh:
                    self.update(yaml.safe_load(fh) or {})
            except OSError as e:
                raise ConfigError(f"cannot read config file {path}: {e}") from e
            except yaml.YAMLError as e:
                raise ConfigError(f"Invalid YAML configuration: {e}") from e
        else:
            self.apply_overrides(load_override_file(path))

    def save(self, path: Optional[str] = None) -> None:
        save_path = path or self.config_path
        os.makedirs(os.path.dirname(save_path) or '.', exist_ok=True)
        with open(save_path, 'w', encoding='utf-8') as file:
            yaml.safe_dump(self._config_data, file, default_flow_style=False, indent=2)

    def reload(self) -> None:
        self._load_config()

    def validate(self) -> bool:
        """Validate configuration structure and values"""
        required_sections = ['app', 'logging', 'network', 'adapt', 'learning', 'gateway']
        for section in required_sections:
            if section not in self._config_data:
                return False

        if str(self.get('adapt.policy', '')).lower() not in POLICIES:
            return False
        if str(self.get('learning.algorithm', '')).lower() not in ALGORITHMS:
            return False
        if str(self.get('gateway.handling', '')).lower() not in HANDLING:
            return False

        try:
            if float(self.get('gateway.eval_window', 0)) <= 0:
                return False
            for key in ('learning.k', 'learning.n_trees', 'learning.n_stages'):
                if int(self.get(key, 0)) < 1:
                    return False
        except (TypeError, ValueError):
            return False

        return True

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self._config_data)

    def update(self, new_config: Dict[str, Any]) -> None:
        """Deep-merge a nested dictionary into the configuration"""
        self._deep_merge(self._config_data, new_config)

    def _deep_merge(self, base: Dict[str, Any], update: Dict[str, Any]) -> None:
        for key, value in update.items():
            if key in base and isinstance(base[key], dict) and isinstance(value, dict):
                self._deep_merge(base[key], value)
            else:
                base[key] = value


# Global configuration instance
config = Config()
