"""Config-driven experiment runs: method presets, worker-count sweeps, diagnostics."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .aggregation import AggregationSpec
from .data import Dataset, load_csv, minmax_bounds, minmax_normalize, stratified_split, synth_imbalanced
from .errors import ConfigError
from .federation import FederationConfig, run_pretraining, run_retraining
from .losses import LossSpec
from .nn import INITIALIZERS, TrainConfig, classifier_spec
from .partition import homogeneity, kmeans_partition, partition_stats, verify_theorem1
from . import report

log = logging.getLogger(__name__)

SEED_ENV = "FEDCRIT_SEED"
INIT_COMPARISON = "single_model_init_comparison"


@dataclass(frozen=True)
class Preset:
    aggregation: str
    loss: str
    pretrain: bool


PRESETS: Dict[str, Preset] = {
    "proposed": Preset("easgd", "adaptive_focal", True),
    "easgd_ce": Preset("easgd", "cross_entropy", False),
    "fedavg_focal": Preset("fed_avg", "focal", False),
    "ssfedavg_ce": Preset("ss_fed_avg", "cross_entropy", False),
    "fedadp_ce": Preset("fed_adp", "cross_entropy", False),
}
METHODS = (*PRESETS, INIT_COMPARISON)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class SynthSource(_Strict):
    n: int = Field(2000, ge=4)
    d: int = Field(2, ge=1)
    n_clusters: int = Field(8, ge=2)
    minority_fraction: float = Field(0.05, gt=0, lt=0.5)
    separation: float = Field(4.0, gt=0)
    stretch: float = Field(1.0, gt=0)
    gap: float = 0.0
    seed: int = Field(0, ge=0)


class DatasetSource(_Strict):
    name: Optional[str] = None
    csv: Optional[str] = None
    synth: Optional[SynthSource] = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.csv is None) == (self.synth is None):
            raise ValueError("give exactly one of 'csv' or 'synth'")
        return self


class NetworkSection(_Strict):
    hidden_sizes: Optional[List[int]] = None
    hidden_activation: Literal["sigmoid", "relu", "tanh"] = "sigmoid"
    output_activation: Literal["softmax", "sigmoid"] = "softmax"
    # used by presets without autoencoder pre-training
    initializer: Literal[INITIALIZERS[:-1]] = "glorot_uniform"  # type: ignore[valid-type]

    @field_validator("hidden_sizes")
    @classmethod
    def _positive(cls, v):
        if v is not None and (not v or any(s < 1 for s in v)):
            raise ValueError("hidden sizes must be a non-empty list of positive integers")
        return v


class TrainSection(_Strict):
    learning_rate: float = Field(0.5, gt=0)
    local_epochs: int = Field(1, ge=1)
    batch_size: int = Field(32, ge=1)


class LossSection(_Strict):
    xi: float = Field(2.0, ge=0)
    rho: float = Field(1.0, gt=0, le=1)
    a: float = Field(2.0, gt=0)
    b: float = Field(3.0, gt=0)


class AggregationSection(_Strict):
    gamma: float = Field(0.9, ge=0, le=1)
    alpha: float = Field(5.0, gt=0)


class ExperimentConfig(_Strict):
    dataset: DatasetSource
    method: List[str]
    node_counts: List[int] = [1]
    seeds: List[int] = list(range(10))
    test_fraction: float = Field(0.3, gt=0, lt=1)
    rounds: int = Field(20, ge=1)
    pretrain_rounds: int = Field(10, ge=0)
    network: NetworkSection = NetworkSection()
    train: TrainSection = TrainSection()
    loss: LossSection = LossSection()
    aggregation: AggregationSection = AggregationSection()
    initializers: List[str] = list(INITIALIZERS)
    plots: bool = False

    @field_validator("method", mode="before")
    @classmethod
    def _listify(cls, v):
        return [v] if isinstance(v, str) else v

    @field_validator("method")
    @classmethod
    def _known_methods(cls, v):
        unknown = [m for m in v if m not in METHODS]
        if unknown or not v:
            raise ValueError(f"unknown method(s) {unknown}; choose from {list(METHODS)}")
        return v

    @field_validator("node_counts")
    @classmethod
    def _sorted_counts(cls, v):
        if not v or any(k < 1 for k in v) or v != sorted(v):
            raise ValueError("node_counts must be positive and sorted ascending")
        return v

    @field_validator("seeds")
    @classmethod
    def _seeds(cls, v):
        if not v or any(s < 0 for s in v):
            raise ValueError("need at least one non-negative seed")
        return v

    @field_validator("initializers")
    @classmethod
    def _inits(cls, v):
        bad = [i for i in v if i not in INITIALIZERS]
        if bad:
            raise ValueError(f"unknown initializer(s) {bad}")
        return v

    @property
    def dataset_name(self) -> str:
        if self.dataset.name:
            return self.dataset.name
        return Path(self.dataset.csv).stem if self.dataset.csv else "synth"


def load_config(path, seed_override: Optional[int] = None) -> ExperimentConfig:
    """Parse a JSON config; unknown keys are rejected.

    The master seed list is replaced by ``seed_override`` when given, else by
    the FEDCRIT_SEED environment variable when set.
    """
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        cfg = ExperimentConfig.model_validate(raw)
    except (OSError, json.JSONDecodeError, ValidationError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return apply_seed_override(cfg, seed_override)


def apply_seed_override(cfg: ExperimentConfig, seed_override: Optional[int] = None) -> ExperimentConfig:
    if seed_override is None and os.environ.get(SEED_ENV):
        try:
            seed_override = int(os.environ[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an unsigned integer") from None
    if seed_override is not None:
        if seed_override < 0:
            raise ConfigError("seed override must be unsigned")
        cfg = cfg.model_copy(update={"seeds": [seed_override]})
    return cfg


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    src = cfg.dataset
    if src.csv is not None:
        return load_csv(src.csv, name=cfg.dataset_name)
    return synth_imbalanced(**src.synth.model_dump(), name=cfg.dataset_name)


def prepare(ds: Dataset, test_fraction: float, seed: int):
    """Stratified split, then min-max scaling fitted on the training rows."""
    train, test = stratified_split(ds, test_fraction, seed)
    bounds = minmax_bounds(train.X)
    return minmax_normalize(train, bounds), minmax_normalize(test, bounds)


def federation_config(cfg: ExperimentConfig, input_dim: int, n_workers: int, seed: int,
                      aggregation: str, loss: str, initializer: str) -> FederationConfig:
    net = cfg.network
    spec = classifier_spec(
        input_dim, 2 if net.output_activation == "softmax" else 1, net.hidden_sizes,
        hidden_activation=net.hidden_activation, output_activation=net.output_activation,
        initializer=initializer, seed=seed,
    )
    loss_spec = LossSpec(kind=loss, **cfg.loss.model_dump())
    train = TrainConfig(cfg.train.learning_rate, cfg.train.local_epochs, cfg.train.batch_size, loss_spec)
    return FederationConfig(
        n_workers=n_workers,
        network=spec,
        train=train,
        aggregation=AggregationSpec(aggregation, cfg.aggregation.gamma, cfg.aggregation.alpha),
        rounds=cfg.rounds,
        pretrain_rounds=cfg.pretrain_rounds,
        master_seed=seed,
    )


def _rows(records, dataset, method, n_workers, seed):
    return [{"dataset": dataset, "method": method, "n_workers": n_workers, "seed": seed, **r}
            for r in records]


def run_cell(cfg: ExperimentConfig, ds: Dataset, method: str, n_workers: int, seed: int) -> List[dict]:
    """One (method, worker count, seed) cell: split, partition, pre-train, retrain."""
    train, test = prepare(ds, cfg.test_fraction, seed)
    parts = kmeans_partition(train, n_workers, seed)
    local = [train.subset(parts.indices(i)) for i in range(n_workers)]
    preset = PRESETS[method]
    init = "ae_pretrained" if preset.pretrain else cfg.network.initializer
    fc = federation_config(cfg, ds.d, n_workers, seed, preset.aggregation, preset.loss, init)
    ae = run_pretraining(fc, local) if preset.pretrain else None
    _, records = run_retraining(fc, local, ae, test)
    return _rows(records, cfg.dataset_name, method, n_workers, seed)


def run_init_comparison(cfg: ExperimentConfig, ds: Dataset, seed: int) -> List[dict]:
    """Single model, focal loss, one run per initializer."""
    train, test = prepare(ds, cfg.test_fraction, seed)
    rows = []
    for init in cfg.initializers:
        fc = federation_config(cfg, ds.d, 1, seed, "fed_avg", "focal", init)
        # one worker with gamma 0 is plain centralized training
        fc = FederationConfig(1, fc.network, fc.train, AggregationSpec("fed_avg", 0.0),
                              fc.rounds, fc.pretrain_rounds, seed)
        ae = run_pretraining(fc, [train]) if init == "ae_pretrained" else None
        _, records = run_retraining(fc, [train], ae, test)
        rows += _rows(records, cfg.dataset_name, f"init_{init}", 1, seed)
    return rows


def run_sweep(cfg: ExperimentConfig, out_dir=None, ds: Optional[Dataset] = None):
    """Every method x node count x seed. Returns (rows, written paths)."""
    ds = load_dataset(cfg) if ds is None else ds
    rows: List[dict] = []
    for method in cfg.method:
        if method == INIT_COMPARISON:
            for seed in cfg.seeds:
                log.info("%s seed=%d", method, seed)
                rows += run_init_comparison(cfg, ds, seed)
            continue
        for k in cfg.node_counts:
            for seed in cfg.seeds:
                log.info("%s n_workers=%d seed=%d", method, k, seed)
                rows += run_cell(cfg, ds, method, k, seed)
    paths = {} if out_dir is None else report.emit_report(rows, out_dir, plots=cfg.plots)
    return rows, paths


def diagnose_partitions(cfg: ExperimentConfig, out_dir=None, ds: Optional[Dataset] = None):
    """Homogeneity and critical-imbalance counts of the k-means split for every k."""
    ds = load_dataset(cfg) if ds is None else ds
    rows = []
    for k in cfg.node_counts:
        for seed in cfg.seeds:
            train, _ = prepare(ds, cfg.test_fraction, seed)
            parts = kmeans_partition(train, k, seed)
            stats = partition_stats(parts)
            rows.append({
                "dataset": cfg.dataset_name, "k": k, "seed": seed,
                "homogeneity": homogeneity(parts),
                "minority_free": stats.minority_free,
                "below_global": stats.below_global,
                "theorem1": verify_theorem1(parts),
            })
    paths = {}
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths["diagnostics"] = report.write_rows(out_dir / "diagnostics.csv", report.DIAGNOSTIC_COLUMNS, rows)
        if cfg.plots:
            paths.update(report.plot_diagnostics(rows, out_dir))
    return rows, paths
