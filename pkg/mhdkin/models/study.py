import json
from enum import StrEnum
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from mhdkin.core.config import settings
from mhdkin.core.exceptions import ConfigurationError
from mhdkin.mesh import MAX_LEVEL


class StudyKind(StrEnum):
    """Study kind enumeration."""
    CONVERGENCE = "convergence"
    BENCHMARK = "benchmark"
    SINGLE_SOLVE = "single-solve"


class InnerMode(StrEnum):
    """Inner solver selection for the preconditioner blocks."""
    DIRECT = "direct"
    KRYLOV = "krylov"


class OutputFormat(StrEnum):
    CSV = "csv"
    MARKDOWN = "markdown"


class CaseName(StrEnum):
    EXAMPLE1 = "example1"
    EXAMPLE2 = "example2"


def _unit_interval(value: float) -> float:
    if not 0.0 < value < 1.0:
        raise ValueError("must lie in (0, 1)")
    return value


class StudyConfig(BaseModel):
    """
    Configuration of one study run.

    Every field has a default, so an empty JSON document runs the
    convergence study of the manufactured case on levels 0..2.
    """

    kind: StudyKind = StudyKind.CONVERGENCE
    case: CaseName = CaseName.EXAMPLE1
    levels: list[int] = Field(default_factory=lambda: [0, 1, 2])
    rm_values: list[float] = Field(default_factory=lambda: [1.0])
    sigma: float = Field(default=1.0, gt=0)
    tol: float = Field(default_factory=lambda: settings.outer_tol)
    inner_tol: float = Field(default_factory=lambda: settings.inner_tol)
    inner: InnerMode = InnerMode.KRYLOV
    restart: int = Field(default_factory=lambda: settings.restart, ge=1)
    max_iterations: int = Field(default_factory=lambda: settings.outer_max_iterations, ge=1)
    output: Path | None = None
    format: OutputFormat = OutputFormat.CSV
    dump_system: Path | None = None
    workers: int = Field(default_factory=lambda: settings.workers, ge=1)
    allow_fine_levels: bool = False

    @field_validator("levels")
    @classmethod
    def check_levels(cls, levels: list[int]) -> list[int]:
        if not levels:
            raise ValueError("at least one mesh level is required")
        if any(b <= a for a, b in zip(levels, levels[1:], strict=False)):
            raise ValueError("levels must be strictly increasing")
        if levels[0] < 0 or levels[-1] > MAX_LEVEL:
            raise ValueError(f"levels must lie in 0..{MAX_LEVEL}")
        return levels

    @model_validator(mode="after")
    def check_fine_levels(self) -> "StudyConfig":
        if self.levels[-1] > settings.max_default_level and not self.allow_fine_levels:
            raise ValueError(
                f"levels above {settings.max_default_level} need allow_fine_levels"
            )
        return self

    @field_validator("rm_values")
    @classmethod
    def check_rm_values(cls, rm_values: list[float]) -> list[float]:
        if not rm_values:
            raise ValueError("at least one Rm value is required")
        if any(rm <= 0 for rm in rm_values):
            raise ValueError("Rm values must be positive")
        return rm_values

    @field_validator("tol", "inner_tol")
    @classmethod
    def check_tolerance(cls, value: float) -> float:
        return _unit_interval(value)

    @classmethod
    def load(
        cls,
        path: Path | None = None,
        defaults: dict | None = None,
        **overrides,
    ) -> "StudyConfig":
        """
        Build a configuration from defaults, an optional JSON file and overrides.

        File values replace the defaults and overrides replace both. Overrides
        that are None are ignored, so unset CLI flags keep the file value.

        Raises:
            ConfigurationError: If the file cannot be read or a value is invalid
        """
        data: dict = dict(defaults or {})
        if path is not None:
            try:
                loaded = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigurationError(f"cannot read {path}: {exc}") from exc
            if not isinstance(loaded, dict):
                raise ConfigurationError(f"{path} must hold a JSON object")
            data.update(loaded)
        data.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return cls.model_validate(data)
        except ValidationError as exc:
            problems = "; ".join(
                f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}"
                if error["loc"]
                else error["msg"]
                for error in exc.errors()
            )
            raise ConfigurationError(problems) from exc
