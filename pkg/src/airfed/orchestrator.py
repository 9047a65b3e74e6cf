"""The round loop: energy, scheduling, local training, the air interface,
denoising, and the global model update, with per-round records and
convergence diagnostics.

Every random draw is addressed by (kind, entity, round), so two runs of the
same config produce bitwise-identical records regardless of the worker count,
and runs differing in one knob stay paired on everything else.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import channel, denoising, learning, scheduling
from .config import SimConfig, validate
from .energy import EnergyParams, computation_energy, harvested_energy
from .errors import ConfigError, DiagnosticsUnavailableError, DomainError, NumericalError
from .rng import substream
from .topology import Geometry, build_geometry


@dataclass
class RoundRecord:
    """Everything observable about one round."""

    t: int
    active_ids: list
    n_active: int
    tau_per_device: list      # epochs, aligned with active_ids
    fractions: list           # dataset fractions, aligned with active_ids
    alpha: float | None       # denoising factor (None when nobody transmitted)
    error_sq: float | None    # ||s_hat - s||^2
    phi: float                # realized interference-plus-noise power
    global_loss: float | None     # training objective over all devices (eval cadence)
    test_accuracy: float | None   # held-out accuracy (eval cadence)
    harvested: list           # J per device, length M
    consumed: list            # J per device, length M
    battery_after: list       # J per device, length M
    cumulative_energy: float  # J consumed by the fleet so far

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "active_ids": self.active_ids,
            "n_active": self.n_active,
            "tau_per_device": self.tau_per_device,
            "fractions": self.fractions,
            "alpha": self.alpha,
            "error_sq": self.error_sq,
            "phi": self.phi,
            "global_loss": self.global_loss,
            "test_accuracy": self.test_accuracy,
            "harvested": self.harvested,
            "consumed": self.consumed,
            "battery_after": self.battery_after,
            "cumulative_energy": self.cumulative_energy,
        }

    def summary_row(self) -> tuple:
        return (self.t, self.n_active, self.alpha, self.error_sq,
                self.global_loss, self.test_accuracy, self.cumulative_energy)


@dataclass
class ConvergenceDiagnostics:
    """Measured stand-ins for the constants in the convergence bound."""

    g_sq_hat: float            # max ||local gradient||^2 seen at any step
    zeta_sq_hat: float         # max per-round aggregation error
    tau_bar_per_round: list    # mean epochs over the active set, non-idle rounds
    tau_hat_min: float
    tau_hat_max: float
    delta0_hat: float          # F(w_1) minus the best global loss observed
    avg_grad_norm_sq: float | None  # mean ||grad F||^2 at round starts (eval cadence)
    bound_value: float

    def to_dict(self) -> dict:
        return {
            "g_sq_hat": self.g_sq_hat,
            "zeta_sq_hat": self.zeta_sq_hat,
            "tau_bar_per_round": self.tau_bar_per_round,
            "tau_hat_min": self.tau_hat_min,
            "tau_hat_max": self.tau_hat_max,
            "delta0_hat": self.delta0_hat,
            "avg_grad_norm_sq": self.avg_grad_norm_sq,
            "bound_value": self.bound_value,
        }


@dataclass
class RunResult:
    config: SimConfig
    geometry: Geometry
    records: list
    diagnostics: ConvergenceDiagnostics | None
    model: np.ndarray
    initial_loss: float
    initial_accuracy: float
    grad_norms: list = field(default_factory=list)      # per round: per-active-device max ||grad||^2
    global_grad_sq: list = field(default_factory=list)  # per round: ||grad F(w_t)||^2 or None

    @property
    def final_accuracy(self) -> float | None:
        for record in reversed(self.records):
            if record.test_accuracy is not None:
                return record.test_accuracy
        return None


def convergence_bound(delta0: float, eta: float, rounds: int, tau_min: float,
                      tau_max: float, smoothness: float, g_sq: float, zeta_sq: float) -> float:
    """Upper bound on the mean squared global gradient norm over the run:

    delta0 / (eta T tau_min) + L eta tau_max G^2 / 2 + L zeta^2 / (2 eta tau_min)
    """
    if rounds <= 0:
        raise DomainError("convergence_bound: rounds must be >= 1")
    if eta <= 0.0 or tau_min <= 0.0 or tau_max <= 0.0 or smoothness <= 0.0:
        raise DomainError("convergence_bound: eta, tau bounds, and smoothness must be > 0")
    return (delta0 / (eta * rounds * tau_min)
            + smoothness * eta * tau_max * g_sq / 2.0
            + smoothness * zeta_sq / (2.0 * eta * tau_min))


def estimate_diagnostics(records, grad_norms, config: SimConfig,
                         initial_loss: float | None = None,
                         global_grad_sq=None) -> ConvergenceDiagnostics:
    """Fill the bound from measurements; needs at least one non-idle round."""
    tau_bars = []
    for record in records:
        if record.n_active > 0:
            tau_bars.append(sum(record.tau_per_device) / record.n_active)
    if not tau_bars:
        raise DiagnosticsUnavailableError("estimate_diagnostics: every round was idle")
    g_sq_hat = max((max(per_round) for per_round in grad_norms if per_round), default=0.0)
    errors = [r.error_sq for r in records if r.error_sq is not None]
    zeta_sq_hat = max(errors) if errors else 0.0
    losses = [r.global_loss for r in records if r.global_loss is not None]
    if initial_loss is None:
        if not losses:
            raise DiagnosticsUnavailableError("estimate_diagnostics: no evaluated rounds")
        initial_loss = losses[0]
    best = min(losses + [initial_loss])
    delta0_hat = initial_loss - best
    grad_values = [g for g in (global_grad_sq or []) if g is not None]
    avg_grad = sum(grad_values) / len(grad_values) if grad_values else None
    bound = convergence_bound(delta0_hat, config.eta, len(records), min(tau_bars),
                              max(tau_bars), config.smoothness_L, g_sq_hat, zeta_sq_hat)
    return ConvergenceDiagnostics(
        g_sq_hat=g_sq_hat, zeta_sq_hat=zeta_sq_hat, tau_bar_per_round=tau_bars,
        tau_hat_min=min(tau_bars), tau_hat_max=max(tau_bars), delta0_hat=delta0_hat,
        avg_grad_norm_sq=avg_grad, bound_value=bound)


def build_datasets(config: SimConfig):
    """Per-device training sets plus the held-out test set."""
    spec = ModelSpecFromConfig(config)
    if config.dataset == "synthetic":
        train = [
            learning.make_synthetic_dataset(
                config.num_classes, config.samples_per_device, config.input_dim,
                config.separation, substream(config.seed, ("data", m, 0)))
            for m in range(config.M)
        ]
        test = learning.make_synthetic_dataset(
            config.num_classes, config.test_samples, config.input_dim,
            config.separation, substream(config.seed, ("data-test", 0, 0)))
        return train, test, spec
    full = learning.load_idx(config.idx_images, config.idx_labels)
    test = learning.load_idx(config.idx_test_images, config.idx_test_labels)
    if full.x.shape[1] != config.input_dim:
        raise ConfigError(
            f"idx images have {full.x.shape[1]} pixels but input_dim = {config.input_dim}")
    need = config.M * config.samples_per_device
    if full.size < need:
        raise ConfigError(f"idx dataset has {full.size} samples, need {need}")
    order = substream(config.seed, ("data", 0, 0)).permutation(full.size)
    train = [
        full.subset(order[m * config.samples_per_device:(m + 1) * config.samples_per_device])
        for m in range(config.M)
    ]
    return train, test, spec


def ModelSpecFromConfig(config: SimConfig) -> learning.ModelSpec:
    return learning.ModelSpec(kind=config.model, input_dim=config.input_dim,
                              num_classes=config.num_classes, hidden_units=config.hidden_units)


def _decide(config: SimConfig, battery: float, e_comp_full: float, dataset_size: int):
    if config.scheduler == "adaptive":
        return scheduling.decide_adaptive(battery, config.E_up, e_comp_full,
                                          dataset_size, config.tau_cap)
    return scheduling.decide_nonadaptive(battery, config.E_up, e_comp_full, config.fixed_tau)


def run_round(state: "RunState", t: int) -> RoundRecord:
    """Advance the simulation by one round and append its record."""
    config = state.config
    draw = channel.draw_round_channels(state.geometry, t, config.seed)
    harvested = [
        harvested_energy(state.params, draw.eh_in_sq[m], draw.eh_out_sq[m],
                         state.geometry.inband_device_dist[m],
                         state.geometry.outband_device_dist[m])
        for m in range(config.M)
    ]
    decisions = [
        _decide(config, state.batteries[m], state.e_comp_full, state.datasets[m].size)
        for m in range(config.M)
    ]
    active = [m for m in range(config.M) if decisions[m].active]

    w_start = state.model
    evaluate = (t == 1) or (t % config.eval_cadence == 0) or (t == config.T)

    def train_one(m: int):
        decision = decisions[m]
        data = state.datasets[m]
        if decision.fraction < 1.0:
            size = math.floor(decision.fraction * data.size)
            picks = substream(config.seed, ("subset", m, t)).choice(data.size, size=size,
                                                                    replace=False)
            data = data.subset(np.sort(picks))
        result = learning.train_epochs(
            w_start, data, config.eta, decision.tau, state.spec,
            stream=substream(config.seed, ("train", m, t)), batch_size=config.batch_size)
        return learning.model_difference(w_start, result.model), result.max_grad_sq

    if len(active) > 1 and config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(train_one, active))
    else:
        outcomes = [train_one(m) for m in active]
    updates = [delta for delta, _ in outcomes]
    state.grad_norms.append([g for _, g in outcomes])

    phi_parts = channel.interference_components(state.geometry, draw,
                                                state.params.p_inband, config.xi)
    phi = float(np.sum(phi_parts)) + config.N0

    alpha = None
    error_sq = None
    if active:
        gains = [
            channel.effective_gain(config.P_up, state.geometry.device_ps_dist[m],
                                   config.xi, draw.h_up_mag[m])
            for m in active
        ]
        ideal = denoising.ideal_aggregate(updates)
        if config.denoise == "ideal":
            estimate = ideal
        else:
            received = channel.superpose(updates, gains, (phi_parts, config.N0),
                                         state.dim, substream(config.seed, ("noise", 0, t)))
            if config.denoise == "fading":
                alpha = denoising.fading_alpha(gains)
            elif config.denoise == "mse":
                alpha = denoising.mse_alpha(gains, np.asarray(gains) ** 2, phi)
            elif config.denoise == "variance":
                alpha = denoising.variance_alpha_empirical(received, len(active))
            elif config.denoise == "variance-analytic":
                expected = [
                    config.P_up * state.geometry.device_ps_dist[m] ** (-config.xi)
                    for m in active
                ]
                alpha = denoising.variance_alpha_analytic(expected, phi)
            else:
                raise ConfigError(f"unknown denoise policy {config.denoise!r}")
            estimate = denoising.denoise(received, alpha, len(active))
        error_sq = denoising.aggregation_error(estimate, ideal)
        state.model = w_start - estimate
        if not np.all(np.isfinite(state.model)):
            raise NumericalError(f"round {t}: global model became non-finite")

    global_grad = None
    if evaluate and active:
        active_data = [state.datasets[m] for m in active]
        stacked = learning.LocalDataset(
            x=np.concatenate([d.x for d in active_data]),
            y=np.concatenate([d.y for d in active_data]))
        _, grad = learning.loss_and_gradient(w_start, stacked, state.spec)
        global_grad = float(np.dot(grad, grad))
    state.global_grad_sq.append(global_grad)

    consumed = [decisions[m].planned_consumption for m in range(config.M)]
    for m in range(config.M):
        state.batteries[m] = scheduling.apply_storage_policy(
            config.scheduler, decisions[m], state.batteries[m], harvested[m], config.B_max)
    state.cumulative_energy += sum(consumed)

    loss = accuracy = None
    if evaluate:
        loss = learning.global_loss(state.model, state.datasets, state.spec)
        accuracy = learning.evaluate_accuracy(state.model, state.test_set, state.spec)

    return RoundRecord(
        t=t,
        active_ids=active,
        n_active=len(active),
        tau_per_device=[decisions[m].tau for m in active],
        fractions=[decisions[m].fraction for m in active],
        alpha=alpha,
        error_sq=error_sq,
        phi=phi,
        global_loss=loss,
        test_accuracy=accuracy,
        harvested=harvested,
        consumed=consumed,
        battery_after=list(state.batteries),
        cumulative_energy=state.cumulative_energy,
    )


@dataclass
class RunState:
    config: SimConfig
    geometry: Geometry
    datasets: list
    test_set: learning.LocalDataset
    spec: learning.ModelSpec
    params: EnergyParams
    e_comp_full: float
    dim: int
    model: np.ndarray
    batteries: list
    cumulative_energy: float = 0.0
    grad_norms: list = field(default_factory=list)
    global_grad_sq: list = field(default_factory=list)


def run(config: SimConfig) -> RunResult:
    """Simulate T rounds and return records, diagnostics, and the final model."""
    validate(config)
    geometry = build_geometry(config, substream(config.seed, ("geometry", 0, 0)))
    datasets, test_set, spec = build_datasets(config)
    params = EnergyParams.from_config(config)
    model = learning.init_model(spec, substream(config.seed, ("model-init", 0, 0)))
    state = RunState(
        config=config, geometry=geometry, datasets=datasets, test_set=test_set,
        spec=spec, params=params,
        e_comp_full=computation_energy(params, config.samples_per_device),
        dim=learning.model_dim(spec), model=model,
        batteries=[config.B_init] * config.M)
    initial_loss = learning.global_loss(model, datasets, spec)
    initial_accuracy = learning.evaluate_accuracy(model, test_set, spec)
    records = [run_round(state, t) for t in range(1, config.T + 1)]
    try:
        diagnostics = estimate_diagnostics(records, state.grad_norms, config,
                                           initial_loss=initial_loss,
                                           global_grad_sq=state.global_grad_sq)
    except DiagnosticsUnavailableError:
        diagnostics = None
    return RunResult(
        config=config, geometry=geometry, records=records, diagnostics=diagnostics,
        model=state.model, initial_loss=initial_loss, initial_accuracy=initial_accuracy,
        grad_norms=state.grad_norms, global_grad_sq=state.global_grad_sq)
