"""Experiment runner: one function per CLI subcommand.

Each runner takes a validated :class:`ExperimentConfig`, does its work
through the library modules and returns the artifact paths it wrote.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Callable, Optional

from .analysis.convergence import (
    CONVERGENCE_ALPHA,
    CSV_HEADER as CONVERGENCE_HEADER,
    DEFAULT_SAMPLE_COUNTS,
    convergence_study,
)
from .analysis.metrics import (
    CSV_HEADER as METRIC_HEADER,
    MetricKind,
    MetricResult,
    build_shifted_pair,
    consistency_score,
    evaluate_maps,
    invariance_check,
    retrain_shifted_pair,
)
from .analysis.noise import empirical_oob_rate, noise_report, noise_sweep
from .attribution.base import NoiseGradConfig, SaliencyMap, SmootherConfig, SmootherMode
from .attribution.compose import AttributionPipeline, compose
from .config.defaults import CONSISTENCY_FORMULA, DEFAULT_ALPHA, RangeProfile, get_range
from .config.experiment import ExperimentConfig
from .core.checkpoint import load_checkpoint, save_checkpoint, save_sidecar
from .core.dataset import Dataset, load_idx
from .core.domain import DataRange
from .core.errors import ConfigError
from .core.model import ModelFunction, Sinusoid1D
from .core.train import TrainConfig, evaluate_accuracy, train_mlp
from .output.render import render_saliency, write_pgm
from .output.writers import read_saliency_csv, write_csv, write_json, write_saliency_csv

log = logging.getLogger(__name__)

# Inputs used by metric commands when --n-inputs is not given
DEFAULT_METRIC_INPUTS = 100

# Convergence accepts this name in place of a checkpoint path
SINUSOID_MODEL = "sinusoid"


def artifact_config(cfg: ExperimentConfig) -> dict[str, Any]:
    """Provenance record embedded in artifacts (the output path is left out)."""
    d = cfg.to_dict()
    d.pop("out", None)
    return d


def _dataset(cfg: ExperimentConfig) -> Dataset:
    return load_idx(cfg.data_images, cfg.data_labels)


def _range_for(cfg: ExperimentConfig, dataset: Optional[Dataset] = None) -> DataRange:
    explicit = cfg.data_range
    if explicit is not None:
        return explicit
    if dataset is not None:
        return dataset.range
    return get_range(RangeProfile.MNIST)


def _subset(cfg: ExperimentConfig, dataset: Dataset, default: Optional[int]) -> Dataset:
    n = cfg.n_inputs if cfg.n_inputs is not None else default
    return dataset if n is None else dataset.head(n)


def _train_config(cfg: ExperimentConfig) -> TrainConfig:
    return TrainConfig(
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        batch_size=cfg.batch_size,
        seed=cfg.seed,
        hidden_units=cfg.hidden_units,
    )


def _noise_smoother(cfg: ExperimentConfig) -> SmootherConfig:
    mode = SmootherMode.SMOOTHGRAD if cfg.method == "sg" else SmootherMode.ADAPTGRAD
    return SmootherConfig(
        mode, n_samples=cfg.n, alpha=cfg.alpha, confidence=cfg.confidence, seed=cfg.seed
    )


def build_pipeline(
    cfg: ExperimentConfig,
    data_range: DataRange,
    method: Optional[str] = None,
) -> AttributionPipeline:
    """Pipeline for ``--method`` / ``--smoother`` on *data_range*."""
    smoother_tag, method_tag = cfg.pipeline_tags(method)
    return compose(
        smoother_tag,
        method_tag,
        data_range=data_range,
        n_samples=cfg.n,
        alpha=cfg.alpha if smoother_tag == "sg" else None,
        confidence=cfg.confidence if smoother_tag == "ag" else None,
        seed=cfg.seed,
        ig_steps=cfg.ig_steps,
        noisegrad_cfg=NoiseGradConfig(cfg.ng_models, cfg.ng_sigma, cfg.seed),
    )


# ----------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------


def run_train(cfg: ExperimentConfig) -> list[Path]:
    train = _dataset(cfg)
    tcfg = _train_config(cfg)
    model, history = train_mlp(train, tcfg)
    out = Path(cfg.out)

    written = [save_checkpoint(model, out)]
    loss_path = out.with_name(out.name + ".loss.csv")
    written.append(write_csv(
        loss_path,
        ("epoch", "loss", "accuracy"),
        ((h.epoch, h.loss, h.accuracy) for h in history),
        artifact_config(cfg),
    ))

    metadata: dict[str, Any] = {
        "config": artifact_config(cfg),
        "model_id": model.model_id,
        "train_accuracy": history[-1].accuracy,
        "final_loss": history[-1].loss,
    }
    if cfg.test_images is not None and cfg.test_labels is not None:
        test = load_idx(cfg.test_images, cfg.test_labels)
        metadata["test_accuracy"] = evaluate_accuracy(model, test)
        log.info("Test accuracy %.4f", metadata["test_accuracy"])
    written.append(save_sidecar(out, metadata))
    return written


def run_saliency(cfg: ExperimentConfig) -> list[Path]:
    model = load_checkpoint(cfg.model)
    dataset = _dataset(cfg)
    if not 0 <= cfg.index < len(dataset):
        raise ConfigError(f"--index {cfg.index} outside the dataset of {len(dataset)} images")
    data_range = _range_for(cfg, dataset)
    pipeline = build_pipeline(cfg, data_range)

    x = dataset.images[cfg.index]
    class_index = model.predict(x)
    smap = pipeline(model, x, class_index)

    provenance = {
        **artifact_config(cfg),
        "method_chain": smap.method_chain,
        "model_id": smap.model_id,
        "class_index": class_index,
        "label": int(dataset.labels[cfg.index]),
        "image_shape": list(dataset.image_shape),
        "pipeline": pipeline.to_dict(),
    }
    out = Path(cfg.out)
    written = [write_saliency_csv(out, smap.values, provenance)]
    height, width = dataset.image_shape
    image = render_saliency(smap, cfg.render_options, width, height)
    written.append(write_pgm(out.with_suffix(".pgm"), image, provenance))
    return written


def run_render(cfg: ExperimentConfig) -> list[Path]:
    values, stored = read_saliency_csv(cfg.saliency)
    smap = SaliencyMap(
        values,
        stored.get("method_chain", "unknown"),
        stored.get("model_id", "unknown"),
        stored,
    )
    width, height = cfg.width, cfg.height
    if width is None and height is None and "image_shape" in stored:
        height, width = stored["image_shape"]
    image = render_saliency(smap, cfg.render_options, width, height)
    provenance = {**artifact_config(cfg), "source": stored}
    return [write_pgm(Path(cfg.out), image, provenance)]


def run_noise_report(cfg: ExperimentConfig) -> list[Path]:
    dataset = _dataset(cfg) if cfg.data_images and cfg.data_labels else None
    data_range = _range_for(cfg, dataset)
    if cfg.sweep:
        reports = noise_sweep(data_range, alpha=cfg.alpha if cfg.alpha is not None else DEFAULT_ALPHA)
        document = {
            "config": artifact_config(cfg),
            "reports": [r.to_dict() for r in reports],
        }
    else:
        if dataset is not None:
            dataset = _subset(cfg, dataset, None)
        report = noise_report(_noise_smoother(cfg), data_range, dataset=dataset, seed=cfg.seed)
        document = {"config": artifact_config(cfg), **report.to_dict()}
        log.info("expected area %.6g (%s)", report.expected_area, report.method)
    return [write_json(Path(cfg.out), document)]


def run_convergence(cfg: ExperimentConfig) -> list[Path]:
    model: Optional[ModelFunction] = None
    if cfg.model is not None and str(cfg.model) != SINUSOID_MODEL:
        model = load_checkpoint(cfg.model)
        if not isinstance(model, Sinusoid1D):
            raise ConfigError("convergence needs a sinusoid1d model")
    if cfg.method == "sg":
        alpha = cfg.alpha if cfg.alpha is not None else CONVERGENCE_ALPHA
        smoother = SmootherConfig.smoothgrad(alpha, seed=cfg.seed)
    else:
        smoother = _noise_smoother(cfg)

    kwargs: dict[str, Any] = {}
    if cfg.data_range is not None:
        kwargs["data_range"] = cfg.data_range
    result = convergence_study(
        smoother,
        sample_counts=cfg.sample_counts or DEFAULT_SAMPLE_COUNTS,
        n_seeds=cfg.n_seeds,
        seed=cfg.seed,
        model=model,
        **kwargs,
    )
    provenance = {**artifact_config(cfg), **result.to_dict()}
    return [write_csv(Path(cfg.out), CONVERGENCE_HEADER, result.as_rows(), provenance)]


def run_metrics(cfg: ExperimentConfig) -> list[Path]:
    model = load_checkpoint(cfg.model)
    dataset = _subset(cfg, _dataset(cfg), DEFAULT_METRIC_INPUTS)
    data_range = _range_for(cfg, dataset)
    pipelines = [build_pipeline(cfg, data_range, m) for m in cfg.methods or (cfg.method,)]

    rows = evaluate_maps(pipelines, model, dataset.images, seed=cfg.seed)
    for pipeline in pipelines:
        value = consistency_score(pipeline, model, dataset.images, seed=cfg.seed, data_range=data_range)
        rows.append(MetricResult(
            MetricKind.CONSISTENCY, value, pipeline.method_chain,
            model.model_id, len(dataset), cfg.seed,
        ))
    provenance = {**artifact_config(cfg), "consistency_formula": CONSISTENCY_FORMULA}
    return [write_csv(Path(cfg.out), METRIC_HEADER, (r.as_row() for r in rows), provenance)]


def run_invariance(cfg: ExperimentConfig) -> list[Path]:
    full = _dataset(cfg)
    data_range = _range_for(cfg, full)
    if cfg.retrain:
        pair = retrain_shifted_pair(full, _train_config(cfg), cfg.shift)
        construction = "retrained"
    else:
        pair = build_shifted_pair(load_checkpoint(cfg.model), cfg.shift)
        construction = "bias-compensated"
    inputs = _subset(cfg, full, DEFAULT_METRIC_INPUTS)
    pipeline = build_pipeline(cfg, data_range)

    value = invariance_check(pipeline, pair, cfg.shift, inputs.images, data_range)
    row = MetricResult(
        MetricKind.INVARIANCE, value, pipeline.method_chain,
        pair[0].model_id, len(inputs), cfg.seed,
    )
    log.info("invariance %s (%s) = %.6g", row.method_chain, construction, value)
    provenance = {**artifact_config(cfg), "construction": construction}
    return [write_csv(Path(cfg.out), METRIC_HEADER, [row.as_row()], provenance)]


def run_oob_rate(cfg: ExperimentConfig) -> list[Path]:
    dataset = _subset(cfg, _dataset(cfg), None)
    stats = empirical_oob_rate(dataset, _noise_smoother(cfg), cfg.n, cfg.seed)
    document = {"config": artifact_config(cfg), "method": cfg.method, **stats.to_dict()}
    return [write_json(Path(cfg.out), document)]


RUNNERS: dict[str, Callable[[ExperimentConfig], list[Path]]] = {
    "train": run_train,
    "saliency": run_saliency,
    "render": run_render,
    "noise-report": run_noise_report,
    "convergence": run_convergence,
    "metrics": run_metrics,
    "invariance": run_invariance,
    "oob-rate": run_oob_rate,
}


def run_experiment(cfg: ExperimentConfig) -> list[Path]:
    """Validate *cfg* and run its subcommand; returns the files written."""
    cfg.validate()
    log.info("Running %s", cfg.command)
    written = RUNNERS[cfg.command](cfg)
    for path in written:
        log.info("  %s", path)
    return written
