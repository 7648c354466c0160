"""
lrpids Experiment Configuration Schemas.

A run is described by one JSON file with three sections:

    {
      "model":  {... ModelParams ...},
      "run":    {... command parameters ...},
      "output": {"directory": "results", "formats": ["csv", "json", "svg"]}
    }

All models reject unknown keys. Seeds come from `run.seeds`, or from
`run.seed_count` expanded as [master_seed + i for i in range(seed_count)]
(master_seed defaults to model.seed), or default to [model.seed].
"""

import hashlib
import json
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ConfigError
from .kernels import ModelParams

COMMANDS = ("sample", "spectrum", "ids", "pastur-shubin", "atoms", "converge", "concentration", "lifshitz")

OutputFormat = Literal["csv", "json", "svg"]


class RunSection(BaseModel):
    """Command parameters; each command reads the subset it needs."""
    model_config = ConfigDict(extra="forbid")

    n: Optional[int] = Field(default=None, ge=0, description="Box radius: Lambda_n = [-n, n]^d")
    n_list: Optional[List[int]] = Field(default=None, description="Strictly ascending radii for `converge`")
    seeds: Optional[List[int]] = Field(default=None, description="Explicit master seeds, one realization each")
    seed_count: Optional[int] = Field(default=None, ge=1, description="Number of consecutive seeds to expand")
    master_seed: Optional[int] = Field(
        default=None, ge=0, description="First seed of the expansion (default: model.seed)"
    )
    trunc_tol: float = Field(
        default=1e-9, gt=0.0, le=1.0, description="Expected degree per vertex omitted by edge truncation"
    )
    E_grid: Optional[List[float]] = Field(default=None, description="Ascending positive energies for `lifshitz`")
    Q_radius: Optional[int] = Field(default=None, ge=0, description="Radius of the box Q for `concentration`")
    R: Optional[int] = Field(default=None, ge=1, description="Long-edge length for `concentration`")
    delta: Optional[Union[float, List[float]]] = Field(
        default=None, description="Deviation parameter(s) for `concentration`, each > 0"
    )
    mode: Literal["center", "trace"] = Field(default="center", description="Pastur-Shubin mode")
    buffer: Optional[int] = Field(
        default=None, ge=0, description="Trace-mode boundary buffer (default: ceil(sqrt(n)))"
    )
    min_mass: float = Field(default=0.0, ge=0.0, le=1.0, description="Smallest atom mass reported by `atoms`")
    exact_tail: bool = Field(
        default=True, description="Also compute the exact long-edge tail in `concentration`"
    )

    @field_validator("seeds")
    @classmethod
    def _seed_range(cls, value):
        if value is not None:
            if not value:
                raise ValueError("seeds must not be empty")
            if any(s < 0 or s >= 2 ** 64 for s in value):
                raise ValueError("seeds must lie in [0, 2**64)")
        return value

    @field_validator("delta")
    @classmethod
    def _positive_delta(cls, value):
        deltas = value if isinstance(value, list) else [value] if value is not None else []
        if isinstance(value, list) and not value:
            raise ValueError("delta list must not be empty")
        if any(d <= 0 for d in deltas):
            raise ValueError("delta must be > 0")
        return value

    @field_validator("E_grid")
    @classmethod
    def _ascending_grid(cls, value):
        if value is not None:
            if any(e <= 0 for e in value) or any(b <= a for a, b in zip(value, value[1:])):
                raise ValueError("E_grid must be strictly ascending and positive")
        return value

    @model_validator(mode="after")
    def _one_seed_source(self):
        if self.seeds is not None and self.seed_count is not None:
            raise ValueError("give either seeds or seed_count, not both")
        return self

    @property
    def deltas(self) -> List[float]:
        if self.delta is None:
            return []
        return list(self.delta) if isinstance(self.delta, list) else [self.delta]


class OutputSection(BaseModel):
    """Where and in which formats results are written."""
    model_config = ConfigDict(extra="forbid")

    directory: str = Field(default="results", description="Output directory (created if missing)")
    formats: List[OutputFormat] = Field(
        default_factory=lambda: ["csv", "json"], description="Subset of csv, json, svg"
    )

    @field_validator("formats")
    @classmethod
    def _distinct(cls, value):
        if len(set(value)) != len(value):
            raise ValueError("formats must not repeat")
        return value


class ExperimentConfig(BaseModel):
    """A complete experiment: model, command parameters and outputs."""
    model_config = ConfigDict(extra="forbid")

    model: ModelParams
    run: RunSection = Field(default_factory=RunSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def resolved_seeds(self) -> List[int]:
        if self.run.seeds is not None:
            return list(self.run.seeds)
        if self.run.seed_count is not None:
            start = self.model.seed if self.run.master_seed is None else self.run.master_seed
            return [(start + i) % 2 ** 64 for i in range(self.run.seed_count)]
        return [self.model.seed]

    def digest(self) -> str:
        """sha256 of the canonical JSON form; stamped into every output file."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def require(self, command: str, *fields: str) -> None:
        """Raises ConfigError naming the first run field the command needs but lacks."""
        for name in fields:
            if getattr(self.run, name) is None:
                raise ConfigError(f"command '{command}' requires run.{name}", field=f"run.{name}")


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Parses an experiment config file.

    Raises:
        OSError: If the file cannot be read.
        pydantic.ValidationError: On unknown keys or out-of-range values.
    """
    return ExperimentConfig.model_validate_json(Path(path).read_text())
