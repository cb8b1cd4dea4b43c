"""
Pydantic Models - Report Schemas
JSON layout of an evaluation report, versioned by SCHEMA_VERSION.
"""
import math
from typing import Any, Final, Literal

from pydantic import BaseModel, Field, model_validator

from safedepth.domain.entities import COMBINED_RTOL

SCHEMA_VERSION: Final[str] = "1.0"


def _check_combined(where: str, gamma: float, block: "ComponentBlock | SceneRow") -> None:
    expected = gamma * (block.e_class + block.e_feature + block.e_global)
    if not math.isclose(block.combined, expected, rel_tol=COMBINED_RTOL, abs_tol=0.0):
        raise ValueError(f"{where}: combined {block.combined} != gamma * sum {expected}")


class ComponentBlock(BaseModel):
    """Aggregated components over a set of samples."""
    e_class: float = Field(..., ge=0, description="Class-weighted error in meters")
    e_feature: float = Field(..., ge=0, description="Feature-restricted class error in meters")
    e_global: float = Field(..., ge=0, description="MAE over all valid non-sky pixels")
    combined: float = Field(..., ge=0, description="gamma * (e_class + e_feature + e_global)")
    sample_count: int = Field(..., ge=0)
    pixel_count: int = Field(..., ge=0)


class SuperClassRow(BaseModel):
    """Dataset-level contribution of one super-class."""
    name: str
    contribution: float = Field(..., ge=0, description="Mean w_class * sum(w_dist * MAE)")
    raw_mae: float | None = Field(None, description="Mean unweighted MAE where present")
    w_class: float = Field(..., ge=0, le=1)
    sample_count: int = Field(..., ge=0, description="Samples where the super-class appears")
    pixel_count: int = Field(..., ge=0)


class SceneRow(BaseModel):
    """Scores of one sample."""
    sample_id: str
    scene: str
    e_class: float = Field(..., ge=0)
    e_feature: float = Field(..., ge=0)
    e_global: float = Field(..., ge=0)
    combined: float = Field(..., ge=0)
    mae: float = Field(..., ge=0)
    divergence: float
    pixel_count: int = Field(..., ge=0)
    classical: dict[str, float | None] = Field(default_factory=dict)


class ExclusionBlock(BaseModel):
    """What was left out of the metrics."""
    unmapped_classes: list[str] = Field(default_factory=list)
    dropped_feature_pixels: int = 0
    clamped_pixels: int = 0
    classical_excluded: dict[str, int] = Field(default_factory=dict)
    failed_samples: int = 0


class ModelReport(BaseModel):
    """Everything reported for one model."""
    model: str
    aggregate: ComponentBlock | None = Field(
        None, description="Null when every sample of the model failed"
    )
    classical: dict[str, float | None] = Field(default_factory=dict)
    per_class: dict[str, SuperClassRow] = Field(default_factory=dict)
    per_class_feature: dict[str, SuperClassRow] = Field(default_factory=dict)
    by_scene: dict[str, ComponentBlock] = Field(default_factory=dict)
    scenes: list[SceneRow] = Field(default_factory=list)
    exclusions: ExclusionBlock = Field(default_factory=ExclusionBlock)


class SampleFailureRow(BaseModel):
    """A (sample, model) pair that could not be scored."""
    sample_id: str
    model: str
    error_type: str
    message: str


class EvaluationReport(BaseModel):
    """
    Machine-readable result of an `eval` run.
    Carries no timestamp so identical runs serialize to identical bytes.
    """
    schema_version: Literal["1.0"] = SCHEMA_VERSION
    tool_version: str
    divergence_rule: str
    gamma: float = Field(..., gt=0)
    aggregation: str
    sample_count: int = Field(..., ge=0)
    config: dict[str, Any] = Field(default_factory=dict)
    models: dict[str, ModelReport] = Field(default_factory=dict)
    failures: list[SampleFailureRow] = Field(default_factory=list)

    @model_validator(mode="after")
    def _combined_identity(self) -> "EvaluationReport":
        self.verify_combined()
        return self

    def verify_combined(self) -> None:
        """
        Re-check combined == gamma * (e_class + e_feature + e_global) on
        every aggregate, scene summary and row.

        Raises:
            ValueError: On the first row that breaks the identity
        """
        for name, model in self.models.items():
            if model.aggregate is not None:
                _check_combined(f"{name} aggregate", self.gamma, model.aggregate)
            for scene, block in model.by_scene.items():
                _check_combined(f"{name} scene {scene}", self.gamma, block)
            for row in model.scenes:
                _check_combined(f"{name} {row.sample_id}", self.gamma, row)

    @property
    def has_failures(self) -> bool:
        return bool(self.failures)
