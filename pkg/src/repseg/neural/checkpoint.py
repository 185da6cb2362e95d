"""Self-describing JSON checkpoints: config, parameters, pipeline state.

A checkpoint must be enough to reproduce inference exactly, so it
carries the feature pipeline (variant, angle spec, normalization,
standardization stats) alongside the 64-bit parameter tensors.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from ..features import AngleSpec, StandardizationStats, parse_angle_spec, serialize_angle_spec
from ..skeleton_io import NormalizationSpec
from .model import ModelConfig, SequenceModel, param_shapes

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class PipelineInfo:
    """Feature-pipeline state required to reproduce inference."""

    feature_variant: str  # raw | angles | concat
    angle_spec: AngleSpec | None
    normalization: NormalizationSpec
    standardization: StandardizationStats | None

    def to_json_dict(self) -> dict:
        return {
            "feature_variant": self.feature_variant,
            "angle_spec": (
                None if self.angle_spec is None else json.loads(serialize_angle_spec(self.angle_spec))
            ),
            "normalization": {
                "root_joint_index": self.normalization.root_joint_index,
                "scale_pair": list(self.normalization.scale_pair),
                "enabled": self.normalization.enabled,
            },
            "standardization": (
                None
                if self.standardization is None
                else {
                    "mean": self.standardization.mean.tolist(),
                    "std": self.standardization.std.tolist(),
                }
            ),
        }

    @staticmethod
    def from_json_dict(d: dict) -> "PipelineInfo":
        norm = d["normalization"]
        stats = d["standardization"]
        return PipelineInfo(
            feature_variant=d["feature_variant"],
            angle_spec=(
                None if d["angle_spec"] is None else parse_angle_spec(json.dumps(d["angle_spec"]))
            ),
            normalization=NormalizationSpec(
                root_joint_index=norm["root_joint_index"],
                scale_pair=tuple(norm["scale_pair"]),
                enabled=norm["enabled"],
            ),
            standardization=(
                None
                if stats is None
                else StandardizationStats(
                    mean=np.asarray(stats["mean"], dtype=np.float64),
                    std=np.asarray(stats["std"], dtype=np.float64),
                )
            ),
        )


def save_checkpoint(path: str | Path, model: SequenceModel, pipeline: PipelineInfo) -> None:
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "config": asdict(model.config),
        "params": {name: p.tolist() for name, p in model.params.items()},
        "pipeline": pipeline.to_json_dict(),
    }
    Path(path).write_text(json.dumps(payload))


def load_checkpoint(path: str | Path) -> tuple[SequenceModel, PipelineInfo]:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    version = payload.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint format_version {version!r}, expected {CHECKPOINT_VERSION}"
        )
    try:
        config = ModelConfig(**payload["config"])
        params = {
            name: np.asarray(values, dtype=np.float64)
            for name, values in payload["params"].items()
        }
        pipeline = PipelineInfo.from_json_dict(payload["pipeline"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"malformed checkpoint {path}: {exc}") from exc
    expected = param_shapes(config)
    if set(params) != set(expected):
        raise CheckpointError(
            f"checkpoint parameters {sorted(params)} do not match config, "
            f"expected {sorted(expected)}"
        )
    for name, shape in expected.items():
        if params[name].shape != shape:
            raise CheckpointError(
                f"parameter {name!r} has shape {params[name].shape}, expected {shape}"
            )
    return SequenceModel(config=config, params=params), pipeline
