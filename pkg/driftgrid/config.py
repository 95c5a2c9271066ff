"""Run configuration: flat key = value files, CLI overrides and built-in presets."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

from rich import box
from rich.table import Table

from .console import console
from .errors import ConfigError
from .scorers.cade import MAD_SCALE
from .simulation import DEFAULT_COVERAGE_GRID, DEFAULT_RHO_SWEEP, REJECTION_METHODS
from .stability import TAU_VARIANTS
from .synthetic import SYNTHETIC_SCORERS


REPORT_FORMATS = ("csv", "json", "svg")
DEFAULT_OUT = "driftgrid-out"


@dataclass
class SyntheticConfig:
    """Parameters of generated streams, used when no stream files are given."""
    scorers: Tuple[str, ...] = SYNTHETIC_SCORERS
    months: int = 24
    month_size: int = 200
    error_rate: float = 0.1
    malware_ratio: float = 0.9
    shift_month: Optional[int] = None
    shift: float = 0.0


@dataclass
class RunConfig:
    """Everything one evaluation run needs.

    Attributes:
        streams: Stream files (CSV or JSON-lines)
        embeddings: Embedding table for the margin and cade_ood scorers
        hyperplane: JSON {weights, bias} of the linear model behind margin
        train_labels: CSV sample_id,label of the training embeddings behind cade_ood
        scores: Score names or external:<column> specs to evaluate
        rhos: Monthly rejection quotas
        method: Rejection rule, "cutoff" or "band"
        coverage_grid: Coverages integrated by AURC[F1]*
        window: Calibration pool window in months, None = unbounded
        seeds: Seeds of generated streams
        out: Output directory
        formats: Report formats to write
        workers: Parallel (stream, score, rho) workers
        mad_scale: CADE MAD consistency factor
        tau_variant: Mann-Kendall variant, "a" or "b"
        orientations: Per-score "higher means more uncertain" overrides
        synthetic: Generated-stream parameters, None when streams are files
    """
    streams: List[str] = field(default_factory=list)
    embeddings: Optional[str] = None
    hyperplane: Optional[str] = None
    train_labels: Optional[str] = None
    scores: List[str] = field(default_factory=lambda: ["msp_u"])
    rhos: List[int] = field(default_factory=lambda: list(DEFAULT_RHO_SWEEP))
    method: str = "cutoff"
    coverage_grid: Tuple[float, ...] = DEFAULT_COVERAGE_GRID
    window: Optional[int] = None
    seeds: List[int] = field(default_factory=lambda: [0])
    out: str = DEFAULT_OUT
    formats: List[str] = field(default_factory=lambda: list(REPORT_FORMATS))
    workers: int = 1
    mad_scale: float = MAD_SCALE
    tau_variant: str = "a"
    orientations: Dict[str, bool] = field(default_factory=dict)
    synthetic: Optional[SyntheticConfig] = None

    def validate(self) -> "RunConfig":
        """Check values and referenced paths.

        Raises:
            ConfigError: On the first problem found
        """
        if not self.streams and self.synthetic is None:
            raise ConfigError("config names no streams and no synthetic.* settings")
        for path in self.streams + self.input_files:
            if not Path(path).is_file():
                raise ConfigError(f"file not found: {path}")
        if not self.rhos or any(rho < 1 for rho in self.rhos):
            raise ConfigError(f"rhos must be positive integers, got {self.rhos}")
        if not self.scores:
            raise ConfigError("at least one score is required")
        if self.method not in REJECTION_METHODS:
            raise ConfigError(f"method must be one of {REJECTION_METHODS}, got '{self.method}'")
        unknown = [f for f in self.formats if f not in REPORT_FORMATS]
        if unknown:
            raise ConfigError(f"unknown report format(s) {unknown}, expected {REPORT_FORMATS}")
        if self.tau_variant not in TAU_VARIANTS:
            raise ConfigError(f"tau_variant must be one of {TAU_VARIANTS}, got '{self.tau_variant}'")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        if self.window is not None and self.window < 1:
            raise ConfigError(f"window must be at least 1, got {self.window}")
        if self.mad_scale <= 0:
            raise ConfigError(f"mad_scale must be positive, got {self.mad_scale}")
        if self.synthetic is not None:
            unknown = [s for s in self.synthetic.scorers if s not in SYNTHETIC_SCORERS]
            if unknown:
                raise ConfigError(f"unknown synthetic scorer(s) {unknown}, expected {SYNTHETIC_SCORERS}")
        return self

    @property
    def input_files(self) -> List[str]:
        """Scorer inputs that are set (embeddings, hyperplane, training labels)."""
        return [p for p in (self.embeddings, self.hyperplane, self.train_labels) if p]


# Parsing

def _split(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def _int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"'{key}' must be an integer, got '{value}'") from None


def _float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"'{key}' must be a number, got '{value}'") from None


def _optional_int(key: str, value: str) -> Optional[int]:
    return None if value.lower() in ("", "none") else _int(key, value)


def _orientation(key: str, value: str) -> bool:
    if value in ("uncertain", "higher-uncertain"):
        return True
    if value in ("confident", "higher-confident"):
        return False
    raise ConfigError(f"'{key}' must be 'uncertain' or 'confident', got '{value}'")


def _apply_setting(config: RunConfig, key: str, value: str) -> None:
    if key.startswith("orientation."):
        config.orientations[key[len("orientation."):]] = _orientation(key, value)
        return
    if key.startswith("synthetic."):
        if config.synthetic is None:
            config.synthetic = SyntheticConfig()
        name = key[len("synthetic."):]
        synthetic = config.synthetic
        if name == "scorers":
            synthetic.scorers = tuple(_split(value))
        elif name in ("months", "month_size"):
            setattr(synthetic, name, _int(key, value))
        elif name in ("error_rate", "malware_ratio", "shift"):
            setattr(synthetic, name, _float(key, value))
        elif name == "shift_month":
            synthetic.shift_month = _optional_int(key, value)
        else:
            raise ConfigError(f"unknown config key '{key}'")
        return

    if key == "streams":
        config.streams = _split(value)
    elif key in ("embeddings", "hyperplane", "train_labels"):
        setattr(config, key, value or None)
    elif key == "scores":
        config.scores = _split(value)
    elif key == "rhos":
        config.rhos = [_int(key, v) for v in _split(value)]
    elif key == "method":
        config.method = value
    elif key == "coverage_grid":
        config.coverage_grid = tuple(_float(key, v) for v in _split(value))
    elif key == "window":
        config.window = _optional_int(key, value)
    elif key == "seeds":
        config.seeds = [_int(key, v) for v in _split(value)]
    elif key == "out":
        config.out = value
    elif key == "formats":
        config.formats = _split(value)
    elif key == "workers":
        config.workers = _int(key, value)
    elif key == "mad_scale":
        config.mad_scale = _float(key, value)
    elif key == "tau_variant":
        config.tau_variant = value
    else:
        raise ConfigError(f"unknown config key '{key}'")


def apply_settings(config: RunConfig, settings: Mapping[str, str]) -> RunConfig:
    """Apply key/value settings in order; later keys win."""
    for key, value in settings.items():
        _apply_setting(config, key, value)
    return config


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse a flat config: one ``key = value`` per line, ``#`` starts a comment."""
    config = RunConfig()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            _apply_setting(config, key, value)
        except ConfigError as e:
            raise ConfigError(f"{source}:{line_no}: {e}") from None
    return config


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read a config file; relative stream paths resolve against its directory."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    config = parse_config(text, str(path))
    base = path.parent
    config.streams = [str(base / s) if not Path(s).is_absolute() else s for s in config.streams]
    for key in ("embeddings", "hyperplane", "train_labels"):
        value = getattr(config, key)
        if value and not Path(value).is_absolute():
            setattr(config, key, str(base / value))
    return config


def apply_overrides(config: RunConfig, out: Optional[str] = None, seed: Optional[int] = None,
                    formats: Optional[List[str]] = None) -> RunConfig:
    """Apply global CLI flags on top of a config; flags win."""
    if out is not None:
        config.out = out
    if seed is not None:
        config.seeds = [seed]
    if formats is not None:
        config.formats = formats
    return config


# Presets

@dataclass(frozen=True)
class RunPreset:
    """A named set of config settings."""
    name: str
    description: str
    settings: Mapping[str, str]

    def to_config(self) -> RunConfig:
        return apply_settings(RunConfig(), self.settings)


BUILTIN_PRESETS = {
    "synthetic-drift": RunPreset(
        name="synthetic-drift",
        description="Oracle vs null scorer on 24 generated months, 5 seeds",
        settings={
            "synthetic.scorers": "oracle,null",
            "synthetic.months": "24",
            "synthetic.month_size": "200",
            "synthetic.error_rate": "0.1",
            "seeds": "0,1,2,3,4",
            "rhos": "20",
        },
    ),
    "synthetic-shift": RunPreset(
        name="synthetic-shift",
        description="Oracle scorer with an upward score shift from month 12",
        settings={
            "synthetic.scorers": "oracle",
            "synthetic.months": "24",
            "synthetic.month_size": "200",
            "synthetic.error_rate": "0.1",
            "synthetic.shift_month": "12",
            "synthetic.shift": "0.3",
            "seeds": "0",
            "rhos": "20",
        },
    ),
}


def get_preset(name: str) -> RunPreset:
    try:
        return BUILTIN_PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset '{name}', available: {', '.join(sorted(BUILTIN_PRESETS))}") from None


def list_presets_table() -> Table:
    """Built-in presets as a rich table."""
    table = Table(title="[bold]Built-in Presets[/]", box=box.ROUNDED)
    table.add_column("Name", style="cyan bold", no_wrap=True)
    table.add_column("Settings", style="green")
    table.add_column("Description", style="white")
    for name in sorted(BUILTIN_PRESETS):
        preset = BUILTIN_PRESETS[name]
        settings = ", ".join(f"{k}={v}" for k, v in preset.settings.items())
        table.add_row(name, settings, preset.description)
    return table


def print_presets() -> None:
    console.print(list_presets_table())
