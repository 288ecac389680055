"""Simulated parameter server and workers running the two-phase protocol.

Phase one trains the mirrored autoencoder on every worker with MSE and
merges the copies with EASGD. Phase two re-initializes the classifier from
the encoder and retrains it with each worker's own loss, merging with the
configured aggregation rule. After every merge the server broadcasts, so
each round starts with all workers holding the server parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import aggregation as agg
from .data import Dataset
from .errors import ConfigError, ContractError
from .losses import ImbalanceProfile, LossSpec
from .metrics import evaluate_scores
from .nn import (
    Network,
    NetworkSpec,
    TrainConfig,
    autoencoder_spec,
    build_params,
    init_params,
    pretrain_autoencoder,
    train_local,
)


@dataclass(frozen=True)
class FederationConfig:
    n_workers: int
    network: NetworkSpec
    train: TrainConfig = TrainConfig()
    aggregation: agg.AggregationSpec = agg.AggregationSpec()
    rounds: int = 20
    pretrain_rounds: int = 10
    master_seed: int = 0

    def __post_init__(self):
        if self.n_workers < 1:
            raise ConfigError("need at least one worker")
        if self.rounds < 1 or self.pretrain_rounds < 0:
            raise ConfigError("rounds must be >= 1 and pretrain_rounds >= 0")

    @property
    def loss(self) -> LossSpec:
        return self.train.loss


@dataclass
class FederationState:
    server: np.ndarray
    workers: List[np.ndarray]
    profiles: List[ImbalanceProfile] = field(default_factory=list)
    fedadp: Optional[agg.FedAdpState] = None
    t: int = 0


PRETRAIN, RETRAIN = 0, 1


def worker_seed(master_seed: int, worker_id: int, round: int, phase: int = RETRAIN) -> int:
    """Seed for one worker's local pass; independent of execution order."""
    ss = np.random.SeedSequence([master_seed, phase, worker_id, round])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def _check_parts(cfg, parts):
    if len(parts) != cfg.n_workers:
        raise ContractError(f"{len(parts)} partitions for {cfg.n_workers} workers")
    for i, p in enumerate(parts):
        if p.n == 0:
            raise ContractError(f"worker {i} received an empty partition")


def _broadcast(state: FederationState, params: np.ndarray) -> None:
    state.server = params
    state.workers = [params.copy() for _ in state.workers]


def run_pretraining(cfg: FederationConfig, parts: Sequence[Dataset],
                    on_round: Optional[Callable[[FederationState], None]] = None) -> np.ndarray:
    """Federated autoencoder training; returns the final server AE parameters."""
    _check_parts(cfg, parts)
    ae = autoencoder_spec(cfg.network)
    server = init_params(ae)
    state = FederationState(server, [server.copy() for _ in parts])
    for t in range(1, cfg.pretrain_rounds + 1):
        local = []
        for i, part in enumerate(parts):
            tc = replace(cfg.train, seed=worker_seed(cfg.master_seed, i, t, PRETRAIN))
            local.append(pretrain_autoencoder(cfg.network, part.X, tc, round=t, init=state.workers[i]))
        state.t = t
        _broadcast(state, agg.easgd_aggregate(state.server, local, cfg.aggregation.gamma))
        if on_round is not None:
            on_round(state)
    return state.server


def predict_scores(spec: NetworkSpec, params, X) -> np.ndarray:
    """Minority-class probability per row."""
    return Network(spec, params).forward(X)[:, 1]


def evaluate_round(spec: NetworkSpec, params, test: Dataset, threshold: float = 0.5) -> Dict[str, float]:
    return evaluate_scores(predict_scores(spec, params, test.X), test.y, threshold)


def aggregate(spec: agg.AggregationSpec, state: FederationState, local: List[np.ndarray],
              sizes: List[int]) -> np.ndarray:
    if spec.kind == "fed_avg":
        return agg.fed_avg(local)
    if spec.kind == "ss_fed_avg":
        return agg.ss_fed_avg(local, sizes)
    if spec.kind == "easgd":
        return agg.easgd_aggregate(state.server, local, spec.gamma)
    # local update directions from the round-start server; the angle ignores scale
    grads = [state.server - w for w in local]
    out, state.fedadp, _ = agg.fedadp_aggregate(local, sizes, grads, state.fedadp or agg.FedAdpState(),
                                                spec.alpha)
    return out


def run_retraining(cfg: FederationConfig, parts: Sequence[Dataset], ae_params=None,
                   test: Optional[Dataset] = None,
                   on_round: Optional[Callable[[FederationState], None]] = None):
    """Supervised federated rounds.

    Returns ``(server_params, records)`` where each record is a dict with
    ``round``, ``scope`` and the four metrics. Worker scopes are evaluated on
    the local models before the merge, the global scope after it. Nothing is
    recorded when ``test`` is None.
    """
    _check_parts(cfg, parts)
    spec = cfg.network
    n_classes = spec.n_classes
    server = build_params(spec, ae_params)
    profiles = [ImbalanceProfile(tuple(int(c) for c in p.counts(n_classes))) for p in parts]
    # rho_j is fixed per worker for the whole run
    losses = [cfg.loss.for_counts(prof.counts) for prof in profiles]
    sizes = [p.n for p in parts]
    state = FederationState(server, [server.copy() for _ in parts], profiles)
    records = []
    for t in range(1, cfg.rounds + 1):
        local = []
        for i, part in enumerate(parts):
            tc = replace(cfg.train, loss=losses[i], seed=worker_seed(cfg.master_seed, i, t))
            net = train_local(Network(spec, state.workers[i]), part.X, part.y, tc, round=t)
            local.append(net.params)
        if test is not None and cfg.n_workers > 1:
            for i, w in enumerate(local):
                records.append({"round": t, "scope": f"worker_{i}", **evaluate_round(spec, w, test)})
        state.t = t
        _broadcast(state, aggregate(cfg.aggregation, state, local, sizes))
        if test is not None:
            records.append({"round": t, "scope": "global", **evaluate_round(spec, state.server, test)})
        if on_round is not None:
            on_round(state)
    return state.server, records
