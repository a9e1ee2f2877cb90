try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from contextvars import ContextVar
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Type, TypeVar

from pydantic import ValidationError, field_validator
from pydantic.fields import FieldInfo
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict
from pydantic_settings import SettingsError

from sensing.errors import ConfigError


class Settings(BaseSettings):
    """Application settings loaded from environment variables"""

    app_title: str = "Sparse Sensing Designer"

    # Logging
    log_level: str = "INFO"
    log_file: Optional[str] = None  # SSD_LOG_FILE adds a DEBUG file handler

    # Worker threads for signal recovery in benchmarks
    threads: int = 1

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v):
        if v < 1:
            raise ValueError("threads must be at least 1")
        return v

    class Config:
        env_prefix = "SSD_"
        env_file = ".env"
        case_sensitive = False
        extra = "ignore"


settings = Settings()


# Values of the config-file section currently being loaded
_file_values: ContextVar[Dict[str, Any]] = ContextVar("_file_values", default={})

# Config-file / command-line spellings that differ from field names
KEY_ALIASES = {"lambda": "lam"}


class FileSectionSource(PydanticBaseSettingsSource):
    """Settings source backed by one section of a TOML run configuration"""

    def get_field_value(self, field: FieldInfo, field_name: str) -> Tuple[Any, str, bool]:
        return _file_values.get().get(field_name), field_name, False

    def __call__(self) -> Dict[str, Any]:
        return {
            name: value
            for name, value in _file_values.get().items()
            if name in self.settings_cls.model_fields
        }


class RunConfig(BaseSettings):
    """
    Base for run configurations.

    Precedence per field: keyword arguments (command-line overrides), then
    SSD_<FIELD> environment variables, then the config-file section, then the
    field default.
    """

    model_config = SettingsConfigDict(
        env_prefix="SSD_", case_sensitive=False, extra="ignore", ser_json_inf_nan="strings"
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings, env_settings, FileSectionSource(settings_cls))

    def defaults_applied(self) -> List[str]:
        """Fields that fell back to their declared default"""
        return sorted(set(type(self).model_fields) - self.model_fields_set)


ConfigT = TypeVar("ConfigT", bound=RunConfig)


def normalize_keys(values: Mapping[str, Any]) -> Dict[str, Any]:
    """Map config spellings (``lambda``, dashed keys) onto field names"""
    out = {}
    for key, value in values.items():
        name = key.replace("-", "_")
        out[KEY_ALIASES.get(name, name)] = value
    return out


def read_section(path: Optional[Path], section: str) -> Dict[str, Any]:
    """
    Read one ``[section]`` table of a TOML run configuration.

    A missing section yields an empty mapping; a missing or undecodable file
    raises ConfigError.
    """
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            document = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError([f"config: file not found: {path}"])
    except tomllib.TOMLDecodeError as e:
        raise ConfigError([f"config: {e}"])
    table = document.get(section, {})
    if not isinstance(table, dict):
        raise ConfigError([f"{section}: expected a table"])
    return normalize_keys(table)


def format_validation_errors(error: ValidationError) -> List[str]:
    """Field-level messages, one per validation failure"""
    messages = []
    for err in error.errors():
        field = ".".join(str(part) for part in err["loc"]) or "config"
        messages.append(f"{field}: {err['msg']}")
    return messages


def load_config(
    config_cls: Type[ConfigT],
    path: Optional[Path] = None,
    section: str = "",
    overrides: Optional[Mapping[str, Any]] = None,
) -> ConfigT:
    """
    Build a validated run configuration from a file section, the environment
    and command-line overrides.

    Raises:
        ConfigError: unknown keys, undecodable file, or failed validation
    """
    file_values = read_section(path, section or config_cls.section)
    cli_values = normalize_keys(overrides or {})

    unknown = sorted((set(file_values) | set(cli_values)) - set(config_cls.model_fields))
    if unknown:
        raise ConfigError([f"{key}: unknown setting" for key in unknown])

    token = _file_values.set(file_values)
    try:
        return config_cls(**cli_values)
    except ValidationError as e:
        raise ConfigError(format_validation_errors(e)) from e
    except SettingsError as e:
        # list-valued SSD_ variables must be JSON
        raise ConfigError([f"environment: {e}"]) from e
    finally:
        _file_values.reset(token)
