"""Run configuration: strict JSON schema plus dotted-path overrides."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, model_validator

from .errors import ConfigError
from .flow import IntegratorConfig
from .surface import DefiningSurface, surface_from_config

FORMAT_VERSION = "1.0"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SurfaceBlock(_Strict):
    family: Literal["sphere", "ellipsoid", "revolution"] | None = None
    expression: str | None = None
    dimension: int | None = Field(None, ge=3, le=16, description="ambient dimension n + 1")
    radius: PositiveFloat | None = None
    semiaxes: list[PositiveFloat] | None = None
    profile: str | None = None
    sign_normalized: bool = False

    @model_validator(mode="after")
    def _consistent(self):
        if (self.family is None) == (self.expression is None):
            raise ValueError("give exactly one of 'family' or 'expression'")
        if self.expression is not None and self.dimension is None:
            raise ValueError("'dimension' is required with 'expression'")
        if self.family == "ellipsoid":
            if not self.semiaxes or len(self.semiaxes) < 3:
                raise ValueError("ellipsoid needs 'semiaxes' with at least 3 entries")
            if self.dimension is not None and self.dimension != len(self.semiaxes):
                raise ValueError("'dimension' disagrees with the number of semiaxes")
        if self.family == "revolution" and not self.profile:
            raise ValueError("revolution needs a 'profile' expression in phi")
        return self

    def build(self) -> DefiningSurface:
        return surface_from_config(self.model_dump(exclude_none=True))


class IntegratorBlock(_Strict):
    base_step: PositiveFloat = 2 * math.pi * 1e-3
    max_angle_per_step: float = Field(math.pi / 8, gt=0, lt=math.pi / 2)
    constraint_tolerance: PositiveFloat = 1e-10
    max_steps: PositiveInt = 10_000_000

    def build(self) -> IntegratorConfig:
        return IntegratorConfig(**self.model_dump())


class AuditBlock(_Strict):
    samples: PositiveInt = 4096
    strip_halfwidth: PositiveFloat | None = None
    seed: int = Field(0, ge=0)


class SweepBlock(_Strict):
    starts: PositiveInt = 10
    seed: int = Field(0, ge=0)
    min_y0: float = Field(1e-3, gt=0, lt=1)
    jobs: PositiveInt = 1


class FlowBlock(_Strict):
    time: float = 2 * math.pi
    x: list[float] | None = None
    y: list[float] | None = None
    seed: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _pair(self):
        if (self.x is None) != (self.y is None):
            raise ValueError("give both 'x' and 'y' or neither")
        return self


class CompareBlock(_Strict):
    starts: PositiveInt = 20
    seed: int = Field(0, ge=0)
    tolerance: PositiveFloat = 1e-6
    billiard: bool = False


class OutputBlock(_Strict):
    directory: str = "out"
    formats: list[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"], min_length=1)


class RunConfig(_Strict):
    surface: SurfaceBlock
    integrator: IntegratorBlock = Field(default_factory=IntegratorBlock)
    audit: AuditBlock = Field(default_factory=AuditBlock)
    sweep: SweepBlock = Field(default_factory=SweepBlock)
    flow: FlowBlock = Field(default_factory=FlowBlock)
    compare: CompareBlock = Field(default_factory=CompareBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)

    def resolved(self) -> dict:
        return self.model_dump(mode="json")


def _parse_scalar(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(data: dict, assignment: str) -> None:
    """Apply ``a.b.c=value`` in place; the value is read as JSON when possible."""
    path, sep, raw = assignment.partition("=")
    if not sep or not path:
        raise ConfigError(f"override {assignment!r} is not of the form key.path=value")
    keys = path.strip().split(".")
    node = data
    for key in keys[:-1]:
        child = node.setdefault(key, {})
        if not isinstance(child, dict):
            raise ConfigError(f"override {assignment!r}: {key!r} is not a block")
        node = child
    node[keys[-1]] = _parse_scalar(raw.strip())


def _format_validation(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"  {loc}: {err['msg']}")
    return "invalid configuration:\n" + "\n".join(lines)


def build_config(data: dict, overrides=()) -> RunConfig:
    data = json.loads(json.dumps(data))
    for item in overrides:
        apply_override(data, item)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from None


def load_config(path: str | Path | None, overrides=()) -> RunConfig:
    """Read a JSON config (or start empty when ``path`` is None) and apply overrides."""
    data: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    return build_config(data, overrides)
