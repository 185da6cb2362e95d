"""Cross-validation experiment runner and its on-disk artifacts.

Each run lives in a directory named by the config hash and contains
run.json (the exact config), report.json / report.csv (aggregate and
per-exercise metrics), segments/<id>.json (per-sample predictions),
counts_scatter.csv (plot-ready predicted vs true counts), and one
checkpoint per fold. Standardization statistics and model parameters
are functions of the training folds only.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from ..decode import (
    DecodeParams,
    SegmentPrediction,
    count_from_prediction,
    segments_from_binary,
    segments_from_density,
)
from ..errors import BadConfig, EmptyInput, LengthMismatch, MalformedRow
from ..features import (
    FEATURE_VARIANTS,
    AngleSpec,
    FeatureSequence,
    StandardizationStats,
    angle_features,
    apply_standardize,
    concat_features,
    default_angle_spec,
    fit_standardize,
    raw_features,
)
from ..labels import make_bundle
from ..metrics import MetricsReport, SampleMetrics, aggregate, evaluate_sample
from ..neural import (
    HEADS,
    LossConfig,
    ModelConfig,
    PipelineInfo,
    SequenceModel,
    TrainingLog,
    TrainSchedule,
    forward,
    init_model,
    save_checkpoint,
)
from ..neural.training import train as fit_model
from ..skeleton_io import (
    NormalizationSpec,
    RepetitionAnnotation,
    SkeletonSequence,
    normalize,
    parse_annotation,
    parse_skeleton,
    serialize_annotation,
    serialize_skeleton,
    skeleton_meta,
)
from .folds import make_folds

SCOPES = ("general", "exercise_specific")
RUN_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Sample:
    sample_id: str
    sequence: SkeletonSequence
    annotation: RepetitionAnnotation

    @property
    def exercise_id(self) -> str:
        return self.sequence.exercise_id

    @property
    def subject_id(self) -> str:
        return self.sequence.subject_id

    @property
    def population_tag(self) -> str:
        return self.sequence.population_tag


@dataclass(frozen=True)
class ExperimentConfig:
    feature_variant: str = "angles"
    head: str = "density"
    hidden_dim: int | None = None  # None: 2 x feature dim
    lstm_layers: int = 1
    conv_enabled: bool = True
    conv_kernel: int = 5
    conv_channels: int | None = None
    epochs: int = 12
    learning_rate: float = 1e-3
    kl_weight: float = 1.0
    l1_weight: float = 1.0
    sigma_fraction: float = 1.0 / 6.0
    binary_threshold: float = 0.5
    min_segment_frames: int = 5
    min_gap_frames: int = 1
    peak_min_prominence: float = 0.05
    peak_min_distance_frames: int = 10
    folds: int = 5
    scope: str = "general"
    subject_disjoint: bool = False
    normalization_enabled: bool = True
    seed: int = 0
    dataset_path: str | None = None

    def __post_init__(self) -> None:
        if self.feature_variant not in FEATURE_VARIANTS:
            raise BadConfig(f"feature_variant must be one of {FEATURE_VARIANTS}")
        if self.head not in HEADS:
            raise BadConfig(f"head must be one of {HEADS}")
        if self.scope not in SCOPES:
            raise BadConfig(f"scope must be one of {SCOPES}")
        if self.folds < 2:
            raise BadConfig(f"folds must be >= 2, got {self.folds}")
        if self.epochs < 0:
            raise BadConfig(f"epochs must be >= 0, got {self.epochs}")

    def decode_params(self) -> DecodeParams:
        return DecodeParams(
            binary_threshold=self.binary_threshold,
            min_segment_frames=self.min_segment_frames,
            min_gap_frames=self.min_gap_frames,
            peak_min_prominence=self.peak_min_prominence,
            peak_min_distance_frames=self.peak_min_distance_frames,
        )

    def loss_config(self) -> LossConfig:
        return LossConfig(kl_weight=self.kl_weight, l1_weight=self.l1_weight)


def config_to_json_dict(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)


def config_from_json_dict(record: dict) -> ExperimentConfig:
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(record) - known
    if unknown:
        raise BadConfig(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**record)


def config_hash(cfg: ExperimentConfig) -> str:
    canon = json.dumps(config_to_json_dict(cfg), sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def write_dataset(samples: list[tuple[SkeletonSequence, RepetitionAnnotation]] | list[Sample], out_dir: str | Path) -> list[str]:
    """Write <id>.csv + <id>.json (+ <id>.meta.json) per sample; returns ids."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ids = []
    for i, item in enumerate(samples):
        if isinstance(item, Sample):
            sid, seq, ann = item.sample_id, item.sequence, item.annotation
        else:
            seq, ann = item
            sid = f"{seq.dataset_id or 'sample'}{i:04d}"
        (out / f"{sid}.csv").write_text(serialize_skeleton(seq))
        (out / f"{sid}.json").write_text(
            serialize_annotation(ann, exercise=seq.exercise_id, subject=seq.subject_id)
        )
        (out / f"{sid}.meta.json").write_text(json.dumps(skeleton_meta(seq), sort_keys=True))
        ids.append(sid)
    return ids


def load_dataset(path: str | Path) -> list[Sample]:
    """Read every <id>.csv with its annotation sidecar into Samples."""
    root = Path(path)
    if not root.is_dir():
        raise BadConfig(f"dataset path {root} is not a directory")
    samples = []
    for csv_path in sorted(root.glob("*.csv")):
        if csv_path.name == "counts_scatter.csv":
            continue
        sid = csv_path.stem
        ann_path = root / f"{sid}.json"
        if not ann_path.exists():
            raise MalformedRow(f"missing annotation sidecar {ann_path.name}")
        ann_text = ann_path.read_text()
        ann = parse_annotation(ann_text)
        ann_record = json.loads(ann_text)
        meta_path = root / f"{sid}.meta.json"
        if meta_path.exists():
            meta = json.loads(meta_path.read_text())
        else:
            meta = {
                "exercise": ann_record.get("exercise", ""),
                "subject": ann_record.get("subject", ""),
            }
        seq = parse_skeleton(csv_path.read_text(), meta=meta)
        if ann.sequence_length != seq.n_frames:
            raise LengthMismatch(
                f"{sid}: annotation covers {ann.sequence_length} frames, "
                f"skeleton has {seq.n_frames}"
            )
        samples.append(Sample(sample_id=sid, sequence=seq, annotation=ann))
    if not samples:
        raise EmptyInput(f"no samples found under {root}")
    return samples


def samples_from_pairs(
    pairs: list[tuple[SkeletonSequence, RepetitionAnnotation]],
) -> list[Sample]:
    return [
        Sample(
            sample_id=f"{seq.dataset_id or 'sample'}{i:04d}",
            sequence=seq,
            annotation=ann,
        )
        for i, (seq, ann) in enumerate(pairs)
    ]


def load_benchmark_config() -> tuple["SynthParams", ExperimentConfig]:
    """The committed synthetic benchmark: generator params + experiment config."""
    from importlib import resources

    from .synth import SynthParams

    record = json.loads(
        resources.files("repseg.configs").joinpath("synth_benchmark.json").read_text()
    )
    synth_record = dict(record["synth"])
    for key in ("reps_range", "rep_duration_frames", "gap_frames"):
        synth_record[key] = tuple(synth_record[key])
    return SynthParams(**synth_record), config_from_json_dict(record["experiment"])


def _features_for(
    seq: SkeletonSequence,
    variant: str,
    angle_spec: AngleSpec | None,
    norm: NormalizationSpec,
) -> FeatureSequence:
    seq = normalize(seq, norm)
    if variant == "raw":
        return raw_features(seq)
    if variant == "angles":
        return angle_features(seq, angle_spec)
    return concat_features(raw_features(seq), angle_features(seq, angle_spec))


def predict_sample(
    model: SequenceModel,
    pipeline: PipelineInfo,
    seq: SkeletonSequence,
    decode: DecodeParams,
) -> tuple[SegmentPrediction | float, np.ndarray]:
    """Run the full pipeline on one sequence; returns (prediction, raw output)."""
    feats = _features_for(seq, pipeline.feature_variant, pipeline.angle_spec, pipeline.normalization)
    if pipeline.standardization is not None:
        feats = apply_standardize(pipeline.standardization, feats)
    y = forward(model, feats)
    head = model.config.head
    if head == "binary":
        return segments_from_binary(y, decode), y
    if head == "density":
        return segments_from_density(y, decode), y
    return float(y.sum()), y


@dataclass
class FoldResult:
    rows: list[SampleMetrics]
    predictions: dict[str, SegmentPrediction | float]
    model: SequenceModel
    pipeline: PipelineInfo
    training_log: TrainingLog


def run_fold(
    train: list[Sample], test: list[Sample], cfg: ExperimentConfig, fold_index: int = 0
) -> FoldResult:
    """Fit on the train split only, decode and score the test split."""
    angle_spec = default_angle_spec() if cfg.feature_variant in ("angles", "concat") else None
    norm = NormalizationSpec(enabled=cfg.normalization_enabled)
    train_feats = [_features_for(s.sequence, cfg.feature_variant, angle_spec, norm) for s in train]
    stats = fit_standardize(train_feats)
    train_feats = [apply_standardize(stats, f) for f in train_feats]
    bundles = [make_bundle(s.annotation, cfg.sigma_fraction) for s in train]
    model_cfg = ModelConfig(
        input_dim=train_feats[0].dim,
        hidden_dim=cfg.hidden_dim,
        lstm_layers=cfg.lstm_layers,
        conv_enabled=cfg.conv_enabled,
        conv_kernel=cfg.conv_kernel,
        conv_channels=cfg.conv_channels,
        head=cfg.head,
        seed=cfg.seed * 1009 + fold_index,
    )
    model = init_model(model_cfg)
    schedule = TrainSchedule(
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        shuffle_seed=cfg.seed * 9176 + fold_index,
    )
    log = fit_model(model, list(zip(train_feats, bundles)), schedule, cfg.loss_config())
    pipeline = PipelineInfo(
        feature_variant=cfg.feature_variant,
        angle_spec=angle_spec,
        normalization=norm,
        standardization=stats,
    )
    decode = cfg.decode_params()
    rows: list[SampleMetrics] = []
    predictions: dict[str, SegmentPrediction | float] = {}
    for s in test:
        pred, _ = predict_sample(model, pipeline, s.sequence, decode)
        predictions[s.sample_id] = pred
        if isinstance(pred, SegmentPrediction):
            pred_count = pred.count
            pred_segments = pred.segments
        else:
            pred_count = count_from_prediction(pred)
            pred_segments = None
        rows.append(
            evaluate_sample(
                sample_id=s.sample_id,
                exercise_id=s.exercise_id,
                gt_segments=s.annotation.segments,
                gt_count=s.annotation.count(),
                pred_count=pred_count,
                pred_segments=pred_segments,
            )
        )
    return FoldResult(rows=rows, predictions=predictions, model=model, pipeline=pipeline, training_log=log)


@dataclass
class ExperimentResult:
    overall: MetricsReport
    per_exercise: dict[str, MetricsReport]
    per_fold: list[MetricsReport]
    rows: list[SampleMetrics]
    run_dir: Path


def _report_csv(overall: MetricsReport, per_exercise: dict[str, MetricsReport], scope: str) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(
        ["scope", "exercise", "n_samples", "mae_abs", "mae_norm", "obo", "iou", "mae_f", "mae_f_coverage"]
    )

    def fmt(v: float | None) -> str:
        return "" if v is None else f"{v:.6f}"

    for name, rep in list(per_exercise.items()) + [("overall", overall)]:
        writer.writerow(
            [
                scope,
                name,
                rep.n_samples,
                fmt(rep.mae_abs),
                fmt(rep.mae_norm),
                fmt(rep.obo),
                fmt(rep.iou),
                fmt(rep.mae_f),
                fmt(rep.mae_f_coverage),
            ]
        )
    return out.getvalue()


def run_experiment(
    cfg: ExperimentConfig,
    samples: list[Sample] | None = None,
    out_root: str | Path = "runs",
) -> ExperimentResult:
    """K-fold cross-validation per the config; writes artifacts, returns reports."""
    if samples is None:
        if cfg.dataset_path is None:
            raise BadConfig("config has no dataset_path and no samples were passed")
        samples = load_dataset(cfg.dataset_path)
    run_dir = Path(out_root) / config_hash(cfg)
    (run_dir / "segments").mkdir(parents=True, exist_ok=True)
    (run_dir / "checkpoints").mkdir(parents=True, exist_ok=True)

    if cfg.scope == "general":
        groups = {"general": list(samples)}
    else:
        groups = {}
        for s in samples:
            groups.setdefault(s.exercise_id, []).append(s)

    by_id = {s.sample_id: s for s in samples}
    rows: list[SampleMetrics] = []
    per_fold: list[MetricsReport] = []
    predictions: dict[str, SegmentPrediction | float] = {}
    for group_name in sorted(groups):
        group = groups[group_name]
        split = make_folds(group, cfg.folds, seed=cfg.seed, subject_disjoint=cfg.subject_disjoint)
        for fold in range(cfg.folds):
            train = [by_id[sid] for sid in sorted(split.train_ids(fold))]
            test = [by_id[sid] for sid in sorted(split.test_ids(fold))]
            result = run_fold(train, test, cfg, fold_index=fold)
            rows.extend(result.rows)
            per_fold.append(aggregate(result.rows))
            predictions.update(result.predictions)
            save_checkpoint(
                run_dir / "checkpoints" / f"{group_name}_fold{fold}.json",
                result.model,
                result.pipeline,
            )

    overall = aggregate(rows)
    per_exercise = aggregate(rows, "per_exercise")

    for sid, pred in predictions.items():
        s = by_id[sid]
        record = {
            "sample_id": sid,
            "gt_segments": [list(seg) for seg in s.annotation.segments],
            "gt_count": s.annotation.count(),
        }
        if isinstance(pred, SegmentPrediction):
            record.update(pred.to_json_dict())
        else:
            record.update(
                {"source": "count_head", "raw_sum": pred, "count": count_from_prediction(pred)}
            )
        (run_dir / "segments" / f"{sid}.json").write_text(json.dumps(record, sort_keys=True))

    (run_dir / "run.json").write_text(
        json.dumps(
            {
                "format_version": RUN_FORMAT_VERSION,
                "config": config_to_json_dict(cfg),
                "config_hash": config_hash(cfg),
                "n_samples": len(samples),
            },
            indent=2,
            sort_keys=True,
        )
    )
    (run_dir / "report.json").write_text(
        json.dumps(
            {
                "overall": overall.to_json_dict(),
                "per_exercise": {k: v.to_json_dict() for k, v in per_exercise.items()},
                "per_fold": [r.to_json_dict() for r in per_fold],
            },
            indent=2,
            sort_keys=True,
        )
    )
    (run_dir / "report.csv").write_text(_report_csv(overall, per_exercise, cfg.scope))

    scatter = io.StringIO()
    writer = csv.writer(scatter, lineterminator="\n")
    writer.writerow(["sample_id", "exercise", "gt_count", "pred_count", "population_tag"])
    for row in rows:
        writer.writerow(
            [
                row.sample_id,
                row.exercise_id,
                row.gt_count,
                row.pred_count,
                by_id[row.sample_id].population_tag,
            ]
        )
    (run_dir / "counts_scatter.csv").write_text(scatter.getvalue())

    return ExperimentResult(
        overall=overall,
        per_exercise=per_exercise,
        per_fold=per_fold,
        rows=rows,
        run_dir=run_dir,
    )
