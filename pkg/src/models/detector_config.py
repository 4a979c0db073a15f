"""Detector configuration schema and flat key-value config files"""

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from lib.bocd_errors import ConfigError

_VECTOR_KEYS = (
    "prior.mean",
    "prior.cov_diag",
    "calibration.bracket",
    "baseline.hyperparams",
    "data.columns",
)


class DetectorConfig(BaseModel):
    """Validated detector settings; field aliases are the dotted config keys"""

    model_config = ConfigDict(populate_by_name=True, extra="forbid", frozen=True)

    model: str
    method: Literal["dsm", "standard"] = "dsm"
    prior_mean: Optional[List[float]] = Field(None, alias="prior.mean")
    prior_cov_diag: Optional[List[float]] = Field(None, alias="prior.cov_diag")
    diffusion_kind: Literal["identity", "robust", "robust_boundary"] = Field("robust", alias="diffusion.kind")
    anchor_policy: str = Field("prefix_mle", alias="diffusion.anchor_policy")
    omega: str = "auto:50"
    calibration_samples: int = Field(2048, alias="calibration.samples", gt=0)
    calibration_bracket: Tuple[float, float] = Field((1e-8, 1e2), alias="calibration.bracket")
    calibration_tolerance: float = Field(1e-3, alias="calibration.tolerance", gt=0.0)
    calibration_reference: Literal["baseline", "likelihood"] = Field("baseline", alias="calibration.reference")
    hazard: float = Field(0.01, gt=0.0, lt=1.0)
    prune_k: Optional[int] = Field(50, alias="prune_k")
    predictive: str = "monte_carlo:1000"
    seed: int = Field(0, ge=0)
    baseline_family: Optional[str] = Field(None, alias="baseline.family")
    baseline_hyperparams: Optional[List[float]] = Field(None, alias="baseline.hyperparams")
    data_columns: Optional[List[str]] = Field(None, alias="data.columns")
    data_header: bool = Field(True, alias="data.header")
    data_delimiter: str = Field(",", alias="data.delimiter", min_length=1, max_length=1)
    data_rescale: Literal["none", "zscore", "unit_mean"] = Field("none", alias="data.rescale")

    @field_validator("prune_k", mode="before")
    @classmethod
    def _parse_prune_k(cls, value):
        if isinstance(value, str) and value.strip().lower() in ("none", "inf", "all", ""):
            return None
        return value

    @field_validator("prune_k")
    @classmethod
    def _check_prune_k(cls, value):
        if value is not None and value < 1:
            raise ValueError("prune_k must be a positive integer or 'none'")
        return value

    @field_validator("omega")
    @classmethod
    def _check_omega(cls, value: str):
        kind, _, arg = value.partition(":")
        try:
            number = float(arg)
        except ValueError:
            raise ValueError(f"omega must be 'auto:<t*>' or 'fixed:<value>', got '{value}'")
        if kind == "auto" and (number != int(number) or number < 2):
            raise ValueError("auto calibration window t* must be an integer >= 2")
        if kind == "fixed" and number < 0.0:
            raise ValueError("fixed omega must be non-negative")
        if kind not in ("auto", "fixed"):
            raise ValueError(f"omega must be 'auto:<t*>' or 'fixed:<value>', got '{value}'")
        return value

    @field_validator("anchor_policy")
    @classmethod
    def _check_anchor(cls, value: str):
        kind, _, arg = value.partition(":")
        if kind in ("full_data_mle", "trimmed_mle") and not arg:
            return value
        if kind == "prefix_mle" and (not arg or arg.strip().isdigit()):
            return value
        if kind == "explicit" and arg:
            [float(v) for v in arg.split(",")]
            return value
        raise ValueError(f"Unknown anchor policy '{value}'")

    @field_validator("predictive")
    @classmethod
    def _check_predictive(cls, value: str):
        kind, _, arg = value.partition(":")
        if kind == "closed_form" and not arg:
            return value
        if kind == "monte_carlo" and (not arg or (arg.isdigit() and int(arg) > 0)):
            return value
        raise ValueError(f"predictive must be 'monte_carlo[:<S>]' or 'closed_form', got '{value}'")

    @field_validator("calibration_bracket")
    @classmethod
    def _check_bracket(cls, value):
        lo, hi = value
        if not 0.0 < lo <= hi:
            raise ValueError("calibration bracket needs 0 < lo <= hi")
        return value

    @model_validator(mode="after")
    def _check_method_requirements(self):
        if self.method == "dsm" and (self.prior_mean is None or self.prior_cov_diag is None):
            raise ValueError("method 'dsm' needs prior.mean and prior.cov_diag")
        needs_baseline = self.method == "standard" or (
            self.method == "dsm" and self.omega_policy[0] == "auto" and self.calibration_reference == "baseline"
        )
        if needs_baseline and (self.baseline_family is None or self.baseline_hyperparams is None):
            raise ValueError("baseline.family and baseline.hyperparams are required here")
        return self

    @property
    def omega_policy(self) -> Tuple[str, float]:
        kind, _, arg = self.omega.partition(":")
        return kind, float(arg)

    @property
    def calibration_window(self) -> int:
        kind, value = self.omega_policy
        return int(value) if kind == "auto" else 50

    @property
    def predictive_mode(self) -> str:
        return self.predictive.partition(":")[0]

    @property
    def mc_samples(self) -> int:
        arg = self.predictive.partition(":")[2]
        return int(arg) if arg else 1000


def parse_config_text(text: str) -> Dict[str, Any]:
    """Turn ``key = value`` lines into a dict; vector keys split on commas"""
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{raw.strip()}'")
        key, value = key.strip(), value.strip()
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        if key in _VECTOR_KEYS:
            values[key] = [v.strip() for v in value.split(",") if v.strip()]
        else:
            values[key] = value
    return values


def build_config(values: Dict[str, Any]) -> DetectorConfig:
    try:
        return DetectorConfig.model_validate(values)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in exc.errors()
        )
        raise ConfigError(f"Invalid detector config: {problems}") from exc


def load_config(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> DetectorConfig:
    """Read and validate a config file; ``overrides`` win over file values"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"Cannot read config '{path}': {exc}") from exc
    values = parse_config_text(text)
    values.update(overrides or {})
    return build_config(values)
