"""
Pipeline configuration.

Resolution order, lowest to highest priority:

1. field defaults (the default seed comes from ``SKETCH_LEARNING_SEED``),
2. a ``key = value`` config file passed with ``--config``,
3. command-line flags.

Config-file values are parsed as JSON when possible (numbers, lists,
``null``) and kept as strings otherwise. ``#`` starts a comment.
"""

import json
import os
from pathlib import Path
from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from sketch_learning.core.errors import InvalidArgumentError
from sketch_learning.core.models import MapKind, OperatorKind, PrivacyMechanism, SolverOptions, Task

SEED_ENV_VAR = "SKETCH_LEARNING_SEED"


def default_seed() -> int:
    raw = os.getenv(SEED_ENV_VAR)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InvalidArgumentError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


class PipelineConfig(BaseModel):
    """Everything a pipeline run depends on; embedded in every artifact it writes."""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default_factory=default_seed, ge=0)

    # feature map
    map_kind: MapKind = MapKind.RFF_COMPLEX
    m: Optional[int] = Field(default=None, ge=1)
    sigma_w: Union[float, Literal["auto"]] = 1.0
    operator_kind: OperatorKind = OperatorKind.DENSE
    dither_seed: Optional[int] = Field(default=None, ge=0)

    # streaming
    block_rows: int = Field(default=4096, ge=1)
    workers: int = Field(default=1, ge=1)
    reservoir: int = Field(default=1000, ge=0)

    # learning
    task: Optional[Task] = None
    k: Optional[int] = Field(default=None, ge=1)
    restarts: int = Field(default=10, ge=1)
    tolerance: float = Field(default=1e-8, gt=0)
    max_refine_iterations: int = Field(default=300, ge=1)
    lower: Optional[tuple[float, ...]] = None
    upper: Optional[tuple[float, ...]] = None
    d1: Optional[int] = Field(default=None, ge=1)
    ridge: float = Field(default=0.0, ge=0)

    # privacy
    mechanism: Optional[PrivacyMechanism] = None
    epsilon: Optional[float] = Field(default=None, gt=0)
    delta: Optional[float] = Field(default=None, gt=0, lt=1)
    radius: Optional[float] = Field(default=None, gt=0)
    require_dp: bool = False

    # I/O
    input: Optional[str] = None
    output: Optional[str] = None

    @field_validator("sigma_w", mode="before")
    @classmethod
    def _sigma_w(cls, v: Any) -> Any:
        if isinstance(v, str) and v.strip().lower() == "auto":
            return "auto"
        value = float(v)
        if value <= 0:
            raise ValueError("sigma_w must be positive or 'auto'")
        return value

    @field_validator("lower", "upper", mode="before")
    @classmethod
    def _vector(cls, v: Any) -> Any:
        if isinstance(v, str):
            return tuple(float(x) for x in v.replace(",", " ").split())
        return v

    def resolved_m(self, d: int) -> int:
        """Sketch size; defaults to 10·k·d, and d² for outer products."""
        if self.map_kind is MapKind.OUTER_PRODUCT:
            return d * d
        if self.m is not None:
            return self.m
        if self.k is not None:
            return 10 * self.k * d
        raise InvalidArgumentError("pass --m, or --k to use the default m = 10·k·d")

    def solver_options(self) -> SolverOptions:
        try:
            return SolverOptions(
                restarts=self.restarts,
                tolerance=self.tolerance,
                max_refine_iterations=self.max_refine_iterations,
                lower=self.lower,
                upper=self.upper,
                seed=self.seed,
            )
        except ValidationError as exc:
            raise InvalidArgumentError(str(exc)) from exc

    def provenance(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


def parse_config_file(path: Union[str, Path]) -> dict[str, Any]:
    """Read ``key = value`` lines into a dict."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidArgumentError(f"can't read config file {path}: {exc}") from exc
    values: dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgumentError(f"{path}:{number}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        try:
            values[key] = json.loads(value)
        except json.JSONDecodeError:
            values[key] = value
    return values


def resolve_config(
    flags: dict[str, Any],
    config_path: Optional[Union[str, Path]] = None,
) -> PipelineConfig:
    """Merge defaults, the config file, and the flags that were actually given."""
    merged: dict[str, Any] = {}
    if config_path is not None:
        merged.update(parse_config_file(config_path))
    merged.update({k: v for k, v in flags.items() if v is not None and v is not False})
    try:
        return PipelineConfig(**merged)
    except ValidationError as exc:
        raise InvalidArgumentError(f"invalid configuration: {exc}") from exc
