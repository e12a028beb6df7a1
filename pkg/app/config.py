from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import List, Optional, Tuple
from datetime import date
from pathlib import Path
import hashlib
import json
import logging
import yaml

from app.errors import ConfigError
from app.models import InputFormat, PairConvention

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    # Run-only settings; never part of the config hash
    config_path: str = "config/pipeline.yaml"
    output_dir: str = "output"
    threads: int = 1
    log_level: str = "INFO"

    model_config = SettingsConfigDict(env_prefix="RECOMB_", env_file=".env", extra="ignore")


DEFAULT_SUFFIX_RULES: List[Tuple[str, str]] = [
    # identity rules protect endings the plural rules would otherwise strip
    ("ss", "ss"),
    ("us", "us"),
    ("is", "is"),
    ("sses", "ss"),
    ("ies", "y"),
    ("ied", "y"),
    ("ches", "ch"),
    ("shes", "sh"),
    ("xes", "x"),
    ("s", ""),
]


class IngestConfig(BaseModel):
    input_path: str = "data/patents.jsonl"
    format: InputFormat = InputFormat.JSONL
    stopwords_path: Optional[str] = "config/stopwords.txt"
    lemmas_path: Optional[str] = "config/lemmas.tsv"
    suffix_rules: List[Tuple[str, str]] = Field(default_factory=lambda: list(DEFAULT_SUFFIX_RULES))


class NoveltyConfig(BaseModel):
    burn_in_start: Optional[date] = None
    analysis_start: date = date(2009, 1, 1)
    exclude_focal: bool = False

    @model_validator(mode="after")
    def _check_window(self):
        if self.burn_in_start and self.analysis_start < self.burn_in_start:
            raise ValueError("analysis_start must not precede burn_in_start")
        return self


class MetricsConfig(BaseModel):
    pair_convention: PairConvention = PairConvention.ORDERED
    compute_citations: bool = True
    citation_window_years: int = Field(default=5, gt=0)


class RegressionConfig(BaseModel):
    max_order: int = Field(default=8, ge=1, le=8)
    firm_threshold: int = Field(default=500, gt=0)
    absorb_tol: float = Field(default=1e-10, gt=0)
    absorb_max_iter: int = Field(default=10_000, gt=0)
    grid_points: int = Field(default=50, ge=2)


class QuantileConfig(BaseModel):
    novelty_taus: List[float] = Field(default_factory=lambda: [0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.99])
    citation_taus: List[float] = Field(default_factory=lambda: [0.90, 0.95, 0.99])
    tol: float = Field(default=1e-8, gt=0)
    max_iter: int = Field(default=500, gt=0)

    @field_validator("novelty_taus", "citation_taus")
    @classmethod
    def _taus_in_unit_interval(cls, taus: List[float]) -> List[float]:
        if any(not 0.0 < t < 1.0 for t in taus):
            raise ValueError("quantile levels must lie in (0, 1)")
        return sorted(taus)


class SimConfig(BaseModel):
    n_categories: int = Field(default=200, ge=1)
    agents_per_category: int = Field(default=20, ge=2)
    knowledge_size: int = Field(default=100, ge=1)
    pareto_shape: float = Field(default=2.0, gt=0)
    pareto_scale: Optional[float] = None  # defaults to knowledge_size + 1
    v0: float = Field(default=3.5e7, gt=0)
    c0: float = Field(default=3.5e7, gt=0)
    # beta_1..beta_m of the value polynomial in s (synthetic quartic)
    value_coefficients: List[float] = Field(default_factory=lambda: [6.0e7, -8.0e7, 1.2e8, -8.0e7])
    noise_sd: float = Field(default=1.0, ge=0)
    seed: int = Field(default=20240101, ge=0, lt=2**64)
    include_inactive: bool = False
    verify_stability: bool = False
    # order A = 0 ties by the unfloored surplus before the pair id
    surplus_tie_break: bool = False
    value_taus: List[float] = Field(default_factory=lambda: [0.10, 0.50, 0.90])
    grid_points: int = Field(default=50, ge=2)

    @model_validator(mode="after")
    def _check_invariants(self):
        if self.agents_per_category % 2:
            raise ValueError("agents_per_category must be even")
        if self.pareto_scale is None:
            self.pareto_scale = float(self.knowledge_size + 1)
        if self.pareto_scale <= self.knowledge_size:
            raise ValueError("pareto_scale must exceed knowledge_size")
        return self


class ExportConfig(BaseModel):
    histogram_bins: int = Field(default=50, ge=1)


class PipelineConfig(BaseModel):
    seed: int = 7
    ingest: IngestConfig = Field(default_factory=IngestConfig)
    novelty: NoveltyConfig = Field(default_factory=NoveltyConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)
    regression: RegressionConfig = Field(default_factory=RegressionConfig)
    quantiles: QuantileConfig = Field(default_factory=QuantileConfig)
    simulation: SimConfig = Field(default_factory=SimConfig)
    export: ExportConfig = Field(default_factory=ExportConfig)


class ConfigManager:
    """Loads the pipeline configuration from YAML"""

    def __init__(self, config_path: str = "config/pipeline.yaml"):
        self.config_path = Path(config_path)
        self._config: Optional[PipelineConfig] = None
        self.load_config()

    def load_config(self):
        """Load the config file, falling back to defaults when it does not exist"""
        if not self.config_path.exists():
            logger.warning(f"⚠️ Config file {self.config_path} not found, using defaults")
            self._config = PipelineConfig()
            return
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                raw = yaml.safe_load(f) or {}
            self._config = PipelineConfig.model_validate(raw)
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse {self.config_path}: {e}") from e
        except ValidationError as e:
            raise ConfigError(f"invalid config {self.config_path}: {e}") from e

    @property
    def config(self) -> PipelineConfig:
        return self._config

    def override(self, **updates) -> PipelineConfig:
        """Apply dotted-path overrides, e.g. override(**{"simulation.seed": 3})"""
        data = self._config.model_dump()
        for dotted, value in updates.items():
            node = data
            *parents, leaf = dotted.split(".")
            for key in parents:
                node = node[key]
            node[leaf] = value
        try:
            self._config = PipelineConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"invalid override: {e}") from e
        return self._config

    def config_hash(self) -> str:
        return config_hash(self._config)


def config_hash(config: PipelineConfig) -> str:
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def dump_defaults() -> str:
    """YAML text of the full default configuration"""
    return yaml.safe_dump(PipelineConfig().model_dump(mode="json"), sort_keys=False)


def dump_config(config: PipelineConfig) -> str:
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)


# Global instance
settings = Settings()
