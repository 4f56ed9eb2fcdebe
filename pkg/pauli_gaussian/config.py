"""
Configuration management for the amplitude engine and its CLI.

Numerical guards and tolerances live in EngineConfig and can be overridden
from the environment (or a .env file):

  PAULI_GAUSSIAN_MAX_ENUM_SITES   Largest L for full 2^L enumeration
  PAULI_GAUSSIAN_WORKERS          Threads used by batch evaluation
  PAULI_GAUSSIAN_ALLOW_LARGE      "true" lifts the enumeration guard
"""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

try:
    from dotenv import load_dotenv

    load_dotenv()  # Load .env file if it exists
except ImportError:
    pass  # python-dotenv not installed, will use environment variables only

from .errors import UsageError


@dataclass
class EngineConfig:
    """Tolerances and size guards used across the engine."""

    # Linear algebra
    skew_tolerance: float = 1e-12
    pivot_tolerance: float = 1e-14
    eigenvalue_floor: float = 1e-14

    # Amplitude paths
    singular_band: float = 1e-6  # tan-form exclusion around theta in {0, pi, 2pi}

    # Enumeration guards
    max_enumeration_sites: int = 24
    max_oracle_sites: int = 14
    max_conditioned_sites: int = 16
    max_exact_model_sites: int = 12
    max_search_sites: int = 16
    allow_large_enumeration: bool = False

    # Batch evaluation
    workers: int = 1

    def __post_init__(self):
        """Apply environment overrides."""
        self.max_enumeration_sites = int(
            os.getenv("PAULI_GAUSSIAN_MAX_ENUM_SITES", self.max_enumeration_sites)
        )
        self.workers = int(os.getenv("PAULI_GAUSSIAN_WORKERS", self.workers))
        allow = os.getenv("PAULI_GAUSSIAN_ALLOW_LARGE")
        if allow is not None:
            self.allow_large_enumeration = allow.lower() == "true"

    def validate(self) -> list[str]:
        """Validate configuration and return list of issues."""
        issues = []
        if self.workers < 1:
            issues.append("workers must be at least 1")
        if self.max_enumeration_sites < 1:
            issues.append("max_enumeration_sites must be positive")
        if not 0 < self.singular_band < 1:
            issues.append("singular_band must lie in (0, 1)")
        return issues

    def enumeration_allowed(self, n_sites: int) -> bool:
        """Whether 2^n_sites enumeration is permitted."""
        return self.allow_large_enumeration or n_sites <= self.max_enumeration_sites


# Singleton instance
_config: Optional[EngineConfig] = None


def get_config() -> EngineConfig:
    """Get singleton engine configuration."""
    global _config
    if _config is None:
        _config = EngineConfig()
    return _config


def set_config(config: EngineConfig) -> None:
    """Replace the singleton (used by the CLI after parsing flags)."""
    global _config
    _config = config


@dataclass
class RunConfig:
    """Settings for one CLI invocation."""

    subcommand: str

    # State source: exactly one of these
    state_file: Optional[Path] = None
    model: Optional[str] = None
    random_seed: Optional[int] = None

    # Model / random-state parameters
    size: Optional[int] = None
    coupling: float = 1.0
    transverse_field: float = 1.0
    scale: float = 1.0
    model_route: str = "auto"

    # Measurement
    basis: Optional[str] = None
    degrees: bool = False
    configs: list[str] = field(default_factory=list)
    path: str = "auto"

    # Output
    output: Optional[Path] = None
    output_format: Optional[str] = None  # None: the subcommand default

    # Guards and overrides
    workers: Optional[int] = None
    allow_large: bool = False
    seed: int = 0

    # Subcommand-specific options, kept as parsed
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        """Check the invariants of a run."""
        if self.output is not None and not isinstance(self.output, Path):
            self.output = Path(self.output)
        if self.state_file is not None and not isinstance(self.state_file, Path):
            self.state_file = Path(self.state_file)
        if self.output_format not in (None, "json", "csv"):
            raise UsageError(f"Unknown output format: {self.output_format}")

    @property
    def state_sources(self) -> list[str]:
        """Names of the state sources given on the command line."""
        sources = []
        if self.state_file is not None:
            sources.append("--state-file")
        if self.model is not None:
            sources.append("--model")
        if self.random_seed is not None:
            sources.append("--random")
        return sources

    def require_state_source(self) -> None:
        """Raise unless exactly one state source was given."""
        sources = self.state_sources
        if len(sources) != 1:
            given = ", ".join(sources) if sources else "none"
            raise UsageError(
                "Exactly one state source is required "
                f"(--state-file, --model or --random); got {given}"
            )

    def format_or(self, default: str) -> str:
        return self.output_format or default

    def engine_config(self) -> EngineConfig:
        """Engine configuration with this run's overrides applied."""
        config = EngineConfig()
        if self.workers is not None:
            config.workers = self.workers
        if self.allow_large:
            config.allow_large_enumeration = True
        return config

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        """Create config from command-line arguments."""
        known = {
            "command",
            "state_file",
            "model",
            "random",
            "L",
            "J",
            "h",
            "scale",
            "route",
            "basis",
            "degrees",
            "config",
            "path",
            "output",
            "format",
            "workers",
            "allow_large",
            "seed",
            "debug",
        }
        options = {k: v for k, v in vars(args).items() if k not in known}
        return cls(
            subcommand=args.command,
            state_file=getattr(args, "state_file", None),
            model=getattr(args, "model", None),
            random_seed=getattr(args, "random", None),
            size=getattr(args, "L", None),
            coupling=getattr(args, "J", 1.0),
            transverse_field=getattr(args, "h", 1.0),
            scale=getattr(args, "scale", 1.0),
            model_route=getattr(args, "route", "auto"),
            basis=getattr(args, "basis", None),
            degrees=getattr(args, "degrees", False),
            configs=list(getattr(args, "config", None) or []),
            path=getattr(args, "path", "auto"),
            output=getattr(args, "output", None),
            output_format=getattr(args, "format", None),
            workers=getattr(args, "workers", None),
            allow_large=getattr(args, "allow_large", False),
            seed=getattr(args, "seed", 0),
            options=options,
        )
