"""
Settings Module

Caps and defaults shared by every service. Values come from the environment
(prefix ``HITLAB_``) or a local ``.env`` file; an experiment config may override
them for the duration of a single run via :func:`use_settings`.
"""

from contextlib import contextmanager
from contextvars import ContextVar
from typing import Any, Dict, Iterator, Optional

from loguru import logger
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..utils.exceptions import ConfigurationError


class Settings(BaseSettings):
    """Computation caps and search defaults"""

    model_config = SettingsConfigDict(
        env_prefix="HITLAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        validate_assignment=True,
    )

    # Caps
    max_depth: int = 12
    max_horizon: int = 200_000
    max_cells: int = 4096
    max_tuples: int = 50_000
    max_pairs: int = 1_000_000
    max_window: int = 4096
    image_max_offset: int = 64
    denominator_limit: int = 2**4096
    prefix_limit: int = 2**25
    newprop_digit_budget: int = 10_000

    # Limit-set approximations
    burn_in_fraction: float = 0.5
    omega_min_horizon: int = 64

    # Witness searches
    prox_epsilon: float = 2.0**-10
    candidate_max_period: int = 3
    candidate_grid_extra_bits: int = 2
    candidate_gap_search: int = 4096
    ip_search_bound: int = 4096
    ip_node_budget: int = 200_000

    # Entropy
    greedy_grid_bits: int = 6

    # Serialization
    rle_threshold: int = 10_000

    # App
    log_level: str = "INFO"
    log_file: Optional[str] = None
    debug: bool = False

    def __init__(self, **kwargs: Any):
        try:
            super().__init__(**kwargs)
        except ValidationError as e:
            invalid_vars = {str(err["loc"][0]) if err["loc"] else "unknown": err["msg"] for err in e.errors()}
            raise ConfigurationError("Settings validation failed", invalid_vars=invalid_vars) from e
        self._post_init_validation()

    def _post_init_validation(self) -> None:
        """Reject values no computation can honour"""
        invalid: Dict[str, str] = {}
        for name in (
            "max_depth",
            "max_horizon",
            "max_cells",
            "max_tuples",
            "max_pairs",
            "max_window",
            "image_max_offset",
            "denominator_limit",
            "prefix_limit",
            "newprop_digit_budget",
            "omega_min_horizon",
            "candidate_gap_search",
            "ip_search_bound",
            "ip_node_budget",
            "rle_threshold",
        ):
            if getattr(self, name) < 1:
                invalid[name] = "must be positive"
        if not 0 < self.burn_in_fraction < 1:
            invalid["burn_in_fraction"] = "must lie strictly between 0 and 1"
        if not 0 < self.prox_epsilon < 1:
            invalid["prox_epsilon"] = "must lie strictly between 0 and 1"
        if self.candidate_max_period < 0:
            invalid["candidate_max_period"] = "must be nonnegative"
        if invalid:
            raise ConfigurationError("Settings validation failed", invalid_vars=invalid)

    def burn_in(self, horizon: int) -> int:
        """Start of the limsup window for a given horizon"""
        return int(horizon * self.burn_in_fraction)

    def with_overrides(self, overrides: Dict[str, Any]) -> "Settings":
        unknown = sorted(set(overrides) - set(type(self).model_fields))
        if unknown:
            raise ConfigurationError(
                f"Unknown settings keys: {', '.join(unknown)}",
                invalid_vars={key: "unknown key" for key in unknown},
            )
        return Settings(**{**self.model_dump(), **overrides})


settings = Settings()

_active: ContextVar[Optional[Settings]] = ContextVar("hitlab_settings", default=None)


def get_settings() -> Settings:
    """Settings in effect for the current context"""
    return _active.get() or settings


@contextmanager
def use_settings(override: Settings) -> Iterator[Settings]:
    token = _active.set(override)
    logger.debug("Settings override active")
    try:
        yield override
    finally:
        _active.reset(token)


__all__ = ["Settings", "settings", "get_settings", "use_settings"]
