# noisygt/config.py
import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple, Union

import yaml  # Requires PyYAML

from .errors import FormatError, ParameterRangeError
from .gtcore import NoiseBudget
from .utils import parse_fraction

logger = logging.getLogger("noisygt")

ENUM_CAP_ENV = "GT_ENUM_CAP"
TABLE_BUDGET_ENV = "GT_TABLE_BUDGET"

DEFAULT_ENUM_CAP = 10**7
DEFAULT_TABLE_BUDGET = 2**24
PLAN_STYLES = ("extractor", "lossless")


def _int_from_env(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError as e:
        logger.error(f"Environment variable {name}={raw!r} is not an integer.")
        raise FormatError(f"{name} must be an integer, got {raw!r}") from e
    if value < 1:
        raise ParameterRangeError(f"{name} must be positive, got {value}")
    logger.debug(f"Using {name}={value} from the environment.")
    return value


@dataclass(frozen=True)
class Limits:
    enum_cap: int = DEFAULT_ENUM_CAP
    table_budget: int = DEFAULT_TABLE_BUDGET
    expansion_exhaustive_cap: int = 10**4
    seed_slack: int = 2
    noiseless_gamma: Fraction = Fraction(1, 4)

    @classmethod
    def from_env(cls) -> "Limits":
        return cls(
            enum_cap=_int_from_env(ENUM_CAP_ENV, DEFAULT_ENUM_CAP),
            table_budget=_int_from_env(TABLE_BUDGET_ENV, DEFAULT_TABLE_BUDGET),
        )


def enumeration_cap(override: Optional[int] = None) -> int:
    if override is not None:
        if override < 1:
            raise ParameterRangeError(f"Enumeration cap must be positive, got {override}")
        return override
    return Limits.from_env().enum_cap


def resolve_limits(limits: Optional[Limits]) -> Limits:
    return limits if limits is not None else Limits.from_env()


@dataclass(frozen=True)
class GridPoint:
    """One noise level of a sweep: absolute (e0, e1) budgets or (p, nu) fractions."""

    e0: Optional[int] = None
    e1: Optional[int] = None
    p: Optional[Fraction] = None
    nu: Optional[Fraction] = None

    def __post_init__(self):
        absolute = self.e0 is not None and self.e1 is not None
        fractional = self.p is not None and self.nu is not None
        if absolute == fractional:
            raise ParameterRangeError("A grid point needs exactly one of (e0, e1) or (p, nu)")
        if absolute and (self.e0 < 0 or self.e1 < 0):
            raise ParameterRangeError(f"Grid budgets must be non-negative, got ({self.e0}, {self.e1})")
        if fractional and (self.p < 0 or self.nu < 0):
            raise ParameterRangeError(f"Grid fractions must be non-negative, got p={self.p}, nu={self.nu}")

    def to_budget(self, rows: int, sparsity: int) -> NoiseBudget:
        # floor(p*M) false positives and floor(nu*M/D) false negatives
        if self.e0 is not None and self.e1 is not None:
            return NoiseBudget(self.e0, self.e1)
        return NoiseBudget(math.floor(self.p * rows), math.floor(self.nu * rows / sparsity))

    def label(self) -> str:
        if self.e0 is not None:
            return f"{self.e0},{self.e1}"
        return f"p={self.p},nu={self.nu}"


def parse_grid_point(text: str) -> GridPoint:
    """Reads '3,1' (budgets) or 'p=1/10,nu=0.001' (fractions)."""
    parts = [part.strip() for part in str(text).split(",")]
    if len(parts) != 2:
        raise FormatError(f"Grid point must have two comma-separated entries, got {text!r}")
    if all("=" in part for part in parts):
        values: Dict[str, Fraction] = {}
        for part in parts:
            key, _, raw = part.partition("=")
            values[key.strip().lower()] = parse_fraction(raw)
        if set(values) != {"p", "nu"}:
            raise FormatError(f"Fractional grid point needs keys p and nu, got {sorted(values)}")
        return GridPoint(p=values["p"], nu=values["nu"])
    try:
        return GridPoint(e0=int(parts[0]), e1=int(parts[1]))
    except ValueError as e:
        raise FormatError(f"Grid budgets must be integers, got {text!r}") from e


@dataclass(frozen=True)
class SweepConfig:
    sparsity: int
    trials: int
    seed: int
    grid: Tuple[GridPoint, ...]
    output: Optional[Path] = None
    # planner-built matrix source
    style: str = "extractor"
    universe: int = 256
    p: Fraction = Fraction(0)
    nu: Fraction = Fraction(0)
    delta: Fraction = Fraction(1)
    t_bits: Optional[int] = None
    # file-based matrix source; needs T and nu_over_gamma, K defaults to the column count
    matrix_path: Optional[Path] = None
    T: Optional[int] = None
    nu_over_gamma: Optional[Fraction] = None
    K: Optional[int] = None
    max_workers: int = 1
    limits: Limits = field(default_factory=Limits.from_env)

    def __post_init__(self):
        if not self.grid:
            raise ParameterRangeError("Sweep grid must not be empty")
        if self.trials < 1:
            raise ParameterRangeError(f"Sweep needs at least one trial, got {self.trials}")
        if self.sparsity < 1:
            raise ParameterRangeError(f"Sparsity must be positive, got {self.sparsity}")
        if self.max_workers < 1:
            raise ParameterRangeError(f"max_workers must be positive, got {self.max_workers}")
        if self.matrix_path is None and self.style not in PLAN_STYLES:
            raise ParameterRangeError(f"Unknown planner style {self.style!r}; use one of {PLAN_STYLES}")
        if self.matrix_path is not None and (self.T is None or self.nu_over_gamma is None):
            raise ParameterRangeError("A matrix file source needs T and nu_over_gamma")

    def with_output(self, output: Optional[Path]) -> "SweepConfig":
        return replace(self, output=output)


def load_config_file(config_path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(config_path)
    logger.info(f"Loading configuration from: {path}")
    if not path.exists():
        logger.error(f"Configuration file not found: {path}")
        raise FileNotFoundError(f"Configuration file not found: {path}")

    suffix = path.suffix.lower()
    with open(path, "r", encoding="utf-8") as f:
        if suffix == ".json":
            logger.debug(f"Parsing {path} as JSON")
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise FormatError(f"Invalid JSON in {path}: {e}") from e
        elif suffix in (".yaml", ".yml"):
            logger.debug(f"Parsing {path} as YAML")
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise FormatError(f"Invalid YAML in {path}: {e}") from e
        else:
            logger.error(f"Unsupported configuration format: {path.suffix}. Use JSON or YAML.")
            raise FormatError(f"Unsupported configuration format: {path.suffix}")

    if not isinstance(data, dict):
        logger.error(f"Configuration in {path} must be a mapping, got {type(data).__name__}")
        raise FormatError(f"Configuration in {path} must be a mapping")
    logger.debug(f"Configuration content: {data}")
    return data


def _grid_from_entries(entries: Iterable[Any]) -> Tuple[GridPoint, ...]:
    points = []
    for entry in entries:
        if isinstance(entry, Mapping):
            if "e0" in entry or "e1" in entry:
                points.append(GridPoint(e0=int(entry.get("e0", 0)), e1=int(entry.get("e1", 0))))
            else:
                points.append(GridPoint(p=parse_fraction(entry.get("p", 0)), nu=parse_fraction(entry.get("nu", 0))))
        elif isinstance(entry, (list, tuple)) and len(entry) == 2:
            points.append(GridPoint(e0=int(entry[0]), e1=int(entry[1])))
        else:
            points.append(parse_grid_point(str(entry)))
    return tuple(points)


def sweep_config_from_mapping(data: Mapping[str, Any], base_dir: Optional[Path] = None) -> SweepConfig:
    known = {
        "sparsity", "trials", "seed", "grid", "output", "style", "universe", "p", "nu", "delta",
        "t_bits", "matrix", "T", "nu_over_gamma", "K", "max_workers", "enum_cap", "table_budget",
    }
    unknown = sorted(set(data) - known)
    if unknown:
        logger.warning(f"Ignoring unknown sweep configuration keys: {unknown}")

    def _path(key: str) -> Optional[Path]:
        raw = data.get(key)
        if raw is None:
            return None
        candidate = Path(raw)
        return candidate if candidate.is_absolute() or base_dir is None else base_dir / candidate

    limits = Limits.from_env()
    if "enum_cap" in data or "table_budget" in data:
        limits = replace(
            limits,
            enum_cap=int(data.get("enum_cap", limits.enum_cap)),
            table_budget=int(data.get("table_budget", limits.table_budget)),
        )
    try:
        return SweepConfig(
            sparsity=int(data["sparsity"]),
            trials=int(data.get("trials", 1)),
            seed=int(data.get("seed", 0)),
            grid=_grid_from_entries(data.get("grid", [])),
            output=_path("output"),
            style=str(data.get("style", "extractor")),
            universe=int(data.get("universe", 256)),
            p=parse_fraction(data.get("p", 0)),
            nu=parse_fraction(data.get("nu", 0)),
            delta=parse_fraction(data.get("delta", 1)),
            t_bits=None if data.get("t_bits") is None else int(data["t_bits"]),
            matrix_path=_path("matrix"),
            T=None if data.get("T") is None else int(data["T"]),
            nu_over_gamma=None if data.get("nu_over_gamma") is None else parse_fraction(data["nu_over_gamma"]),
            K=None if data.get("K") is None else int(data["K"]),
            max_workers=int(data.get("max_workers", 1)),
            limits=limits,
        )
    except KeyError as e:
        raise FormatError(f"Sweep configuration is missing required key {e}") from e


def load_sweep_config(config_path: Union[str, Path]) -> SweepConfig:
    path = Path(config_path)
    config = sweep_config_from_mapping(load_config_file(path), base_dir=path.parent)
    logger.info(f"Sweep configuration loaded: D={config.sparsity}, trials={config.trials}, grid={[g.label() for g in config.grid]}")
    return config
