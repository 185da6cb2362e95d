"""Command-line interface.

Exit codes: 0 success, 2 usage error (click), 3 data error, 4 numeric
failure. Failures print a one-line JSON error record to stderr.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from ..errors import DataError, HeadMismatch, NumericError
from ..neural import ModelConfig, grad_check, load_checkpoint
from ..skeleton_io import parse_skeleton
from ..decode import DecodeParams, SegmentPrediction, count_from_prediction
from ..metrics import aggregate, evaluate_sample
from ..neural.model import HEADS
from .experiment import (
    FEATURE_VARIANTS,
    SCOPES,
    config_from_json_dict,
    load_dataset,
    predict_sample,
    run_experiment,
    write_dataset,
)
from .synth import SynthParams, synth_generate

def _fail(exc: Exception, code: int) -> None:
    click.echo(json.dumps({"error": type(exc).__name__, "message": str(exc)}), err=True)
    sys.exit(code)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DataError as exc:
            _fail(exc, 3)
        except NumericError as exc:
            _fail(exc, 4)

    return wrapper


@click.group()
def main() -> None:
    """Segment and count exercise repetitions in skeletal recordings."""


@main.command()
@click.option("--input", "input_dir", required=True, type=click.Path(exists=True))
@click.option("--output", "-o", "output_dir", required=True, type=click.Path())
@handle_errors
def ingest(input_dir: str, output_dir: str) -> None:
    """Validate raw skeleton CSV + annotation JSON pairs; rewrite canonically."""
    samples = load_dataset(input_dir)
    ids = write_dataset(samples, output_dir)
    click.echo(f"ingested {len(ids)} samples into {output_dir}")


@main.command()
@click.option("--n", "n_sequences", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--reps-min", default=3, show_default=True)
@click.option("--reps-max", default=12, show_default=True)
@click.option("--rep-duration", nargs=2, type=float, default=(26.0, 8.0), show_default=True,
              help="mean and jitter, frames")
@click.option("--gap", nargs=2, type=float, default=(12.0, 5.0), show_default=True,
              help="mean and jitter, frames")
@click.option("--noise-std", default=0.01, show_default=True, help="coordinate noise, meters")
@click.option("--amplitude-variation", default=0.2, show_default=True)
@click.option("--frame-rate", default=30.0, show_default=True)
@click.option("--output", "-o", "output_dir", required=True, type=click.Path())
@handle_errors
def synth(
    n_sequences: int,
    seed: int,
    reps_min: int,
    reps_max: int,
    rep_duration: tuple[float, float],
    gap: tuple[float, float],
    noise_std: float,
    amplitude_variation: float,
    frame_rate: float,
    output_dir: str,
) -> None:
    """Generate synthetic exercise recordings with exact annotations."""
    params = SynthParams(
        n_sequences=n_sequences,
        reps_range=(reps_min, reps_max),
        rep_duration_frames=tuple(rep_duration),
        gap_frames=tuple(gap),
        joint_noise_std=noise_std,
        amplitude_variation=amplitude_variation,
        frame_rate=frame_rate,
        seed=seed,
    )
    ids = write_dataset(synth_generate(params), output_dir)
    click.echo(f"wrote {len(ids)} sequences to {output_dir}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON file of experiment-config fields; flags override it")
@click.option("--dataset", "dataset_path", type=click.Path(exists=True), default=None)
@click.option("--head", type=click.Choice(HEADS), default=None)
@click.option("--feature-variant", type=click.Choice(FEATURE_VARIANTS), default=None)
@click.option("--epochs", type=int, default=None)
@click.option("--learning-rate", type=float, default=None)
@click.option("--hidden-dim", type=int, default=None)
@click.option("--lstm-layers", type=int, default=None)
@click.option("--conv/--no-conv", "conv_enabled", default=None)
@click.option("--folds", type=int, default=None)
@click.option("--scope", type=click.Choice(SCOPES), default=None)
@click.option("--subject-disjoint/--no-subject-disjoint", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_root", default="runs", show_default=True)
@handle_errors
def train(config_path: str | None, out_root: str, **overrides) -> None:
    """Run k-fold cross-validation and write run artifacts."""
    record: dict = {}
    if config_path is not None:
        record = json.loads(Path(config_path).read_text())
    record.update({k: v for k, v in overrides.items() if v is not None})
    cfg = config_from_json_dict(record)
    result = run_experiment(cfg, out_root=out_root)
    rep = result.overall
    click.echo(f"run dir: {result.run_dir}")
    click.echo(
        f"mae_abs {rep.mae_abs:.4f}  mae_norm {rep.mae_norm:.4f}  obo {rep.obo:.4f}"
        + (f"  iou {rep.iou:.4f}" if rep.iou is not None else "")
        + (f"  mae_f {rep.mae_f:.2f}" if rep.mae_f is not None else "")
    )


def _decode_options(fn):
    fn = click.option("--binary-threshold", default=0.5, show_default=True)(fn)
    fn = click.option("--min-segment-frames", default=5, show_default=True)(fn)
    fn = click.option("--min-gap-frames", default=1, show_default=True)(fn)
    fn = click.option("--peak-min-prominence", default=0.05, show_default=True)(fn)
    fn = click.option("--peak-min-distance-frames", default=10, show_default=True)(fn)
    return fn


def _decode_params(kwargs: dict) -> DecodeParams:
    return DecodeParams(
        binary_threshold=kwargs.pop("binary_threshold"),
        min_segment_frames=kwargs.pop("min_segment_frames"),
        min_gap_frames=kwargs.pop("min_gap_frames"),
        peak_min_prominence=kwargs.pop("peak_min_prominence"),
        peak_min_distance_frames=kwargs.pop("peak_min_distance_frames"),
    )


@main.command("eval")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@_decode_options
@handle_errors
def eval_cmd(dataset_path: str, checkpoint_path: str, **kwargs) -> None:
    """Score a saved checkpoint against an annotated dataset."""
    decode = _decode_params(kwargs)
    model, pipeline = load_checkpoint(checkpoint_path)
    rows = []
    for sample in load_dataset(dataset_path):
        pred, _ = predict_sample(model, pipeline, sample.sequence, decode)
        if isinstance(pred, SegmentPrediction):
            pred_count, pred_segments = pred.count, pred.segments
        else:
            pred_count, pred_segments = count_from_prediction(pred), None
        rows.append(
            evaluate_sample(
                sample_id=sample.sample_id,
                exercise_id=sample.exercise_id,
                gt_segments=sample.annotation.segments,
                gt_count=sample.annotation.count(),
                pred_count=pred_count,
                pred_segments=pred_segments,
            )
        )
    click.echo(json.dumps(aggregate(rows).to_json_dict(), indent=2, sort_keys=True))


@main.command()
@click.option("--input", "input_csv", required=True, type=click.Path(exists=True))
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(exists=True))
@click.option("--output", "-o", "output_path", type=click.Path(), default=None,
              help="write the segment JSON here instead of stdout")
@_decode_options
@handle_errors
def segment(input_csv: str, checkpoint_path: str, output_path: str | None, **kwargs) -> None:
    """Segment one skeleton CSV into repetitions using a checkpoint."""
    decode = _decode_params(kwargs)
    model, pipeline = load_checkpoint(checkpoint_path)
    if model.config.head == "count":
        raise HeadMismatch(
            "checkpoint was trained with the count head; segmentation needs binary or density"
        )
    meta_path = Path(input_csv).with_suffix(".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else None
    seq = parse_skeleton(Path(input_csv).read_text(), meta=meta)
    pred, _ = predict_sample(model, pipeline, seq, decode)
    record = pred.to_json_dict()
    record["length"] = seq.n_frames
    text = json.dumps(record, indent=2, sort_keys=True)
    if output_path is None:
        click.echo(text)
    else:
        Path(output_path).write_text(text)
        click.echo(f"wrote {output_path}")


@main.command()
@click.option("--input-dim", default=6, show_default=True)
@click.option("--hidden-dim", default=12, show_default=True)
@click.option("--lstm-layers", default=1, show_default=True)
@click.option("--conv/--no-conv", "conv_enabled", default=True, show_default=True)
@click.option("--head", type=click.Choice(HEADS), default="density", show_default=True)
@click.option("--frames", default=20, show_default=True)
@click.option("--tolerance", default=1e-4, show_default=True)
@click.option("--seed", default=0, show_default=True)
@handle_errors
def gradcheck(
    input_dim: int,
    hidden_dim: int,
    lstm_layers: int,
    conv_enabled: bool,
    head: str,
    frames: int,
    tolerance: float,
    seed: int,
) -> None:
    """Check analytic gradients against central finite differences."""
    cfg = ModelConfig(
        input_dim=input_dim,
        hidden_dim=hidden_dim,
        lstm_layers=lstm_layers,
        conv_enabled=conv_enabled,
        head=head,
        seed=seed,
    )
    report = grad_check(cfg, n_frames=frames, tolerance=tolerance, seed=seed)
    for name in sorted(report.per_tensor):
        click.echo(f"{name}: {report.per_tensor[name]:.3e}")
    click.echo(f"max relative error {report.max_rel_error:.3e} (tolerance {tolerance:.1e})")
    if not report.passed:
        raise NumericError(f"gradient check failed: {report.max_rel_error:.3e} >= {tolerance:.1e}")
    click.echo("gradient check passed")
