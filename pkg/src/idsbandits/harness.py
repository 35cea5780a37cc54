"""Seeded experiment runner.

Wires environments, posteriors, and selectors into per-seed episode loops,
aggregates final regrets across seeds, and emits traces or summaries as
CSV/JSON.  Every run is a deterministic function of (config, master seed):
per-run generators are derived by seeding a ``SeedSequence`` with the tuple
(master seed, seed index, selector code, eta key), with code 0 reserved for
the environment/offline stream.  Within one cell every selector therefore
shares the identical environment draw, offline dataset, warm-start
posterior, and (for the linear bandit) context and noise sequences, while
owning its own selection randomness; adding a selector never perturbs
another selector's stream.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .envs import (
    A_RARE,
    HiddenModeEnv,
    LQ_RARE,
    LinearContextualEnv,
    LinearQEnv,
    LinearQInstance,
    p_from_offline,
)
from .infodiag import (
    BoundInputs,
    CoverageInputs,
    coverage_coeff,
    elliptical_potential,
    ids_upper_bound,
    residual_regret_bound,
    separation_ratio,
    ts_lower_bound,
    ts_lower_bound_threshold,
    two_branch_bound,
)
from .posterior import GaussianLinearPosterior
from .selectors import SELECTOR_KINDS, BeliefScores, CandidateSet, mc_deltas, psi, select

EXPERIMENT_KINDS = ("hidden-mode", "linear", "linearq", "diagnostics")

_KIND_CODES = {"greedy": 1, "ucb": 2, "ts": 3, "ids": 4}


@dataclass(frozen=True)
class SelectorSpec:
    """One selection rule plus its parameters."""

    kind: str
    eta: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in SELECTOR_KINDS:
            raise ValueError(f"unknown selector kind {self.kind!r}")
        if self.eta < 0:
            raise ValueError(f"eta must be nonnegative, got {self.eta}")

    @property
    def label(self) -> str:
        if self.kind == "ids":
            return f"ids{self.eta:g}"
        return self.kind


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one experiment.

    ``q`` is the per-episode probability that the offline stream reveals
    the rare mode (mode-belief experiments); ``c`` the probe cost of the
    linear-Q instance; ``beta`` the behaviour-policy bias of the linear
    bandit.  The posterior's ``model_noise_var`` is a modelling choice kept
    separate from ``env_noise_std`` on purpose.  Defaults follow the
    hidden-mode protocol.
    """

    kind: str = "hidden-mode"
    offline_sizes: tuple = (100, 200, 300, 1000)
    horizon: int = 500
    n_seeds: int = 10
    master_seed: int = 0
    selectors: tuple = (
        SelectorSpec("greedy"),
        SelectorSpec("ucb"),
        SelectorSpec("ts"),
        SelectorSpec("ids", 0.0),
    )
    q: float = 0.005
    c: float = 0.3
    beta: float = 6.0
    env_noise_std: float = 0.05
    state_dim: int = 16
    action_dim: int = 4
    feature_dim: int = 128
    n_candidates: int = 256
    mc_samples: int = 64
    ucb_alpha: float = 1.0
    weight_amplitude: float = 1.0
    prior_precision: float = 1.0
    model_noise_var: float = 1.0
    realized: bool = False
    diagnostics: bool = False
    out: str | None = None
    fmt: str = "csv"

    def validate(self) -> None:
        problems = []
        if self.kind not in EXPERIMENT_KINDS:
            problems.append(f"kind must be one of {EXPERIMENT_KINDS}, got {self.kind!r}")
        if not self.offline_sizes or any(int(n) < 0 for n in self.offline_sizes):
            problems.append("offline_sizes must be nonempty with nonnegative entries")
        if self.horizon < 0:
            problems.append(f"horizon must be nonnegative, got {self.horizon}")
        if self.n_seeds < 1:
            problems.append(f"n_seeds must be >= 1, got {self.n_seeds}")
        if self.master_seed < 0:
            problems.append(f"master_seed must be nonnegative, got {self.master_seed}")
        if not self.selectors:
            problems.append("at least one selector is required")
        if not 0.0 < self.q < 1.0:
            problems.append(f"q must lie in (0, 1), got {self.q}")
        if self.kind == "linearq" and not 0.0 < self.c < 0.5:
            problems.append(f"c must lie in (0, 0.5), got {self.c}")
        if min(self.state_dim, self.action_dim, self.feature_dim, self.n_candidates) < 1:
            problems.append("dimensions and candidate count must be >= 1")
        if self.mc_samples < 1:
            problems.append(f"mc_samples must be >= 1, got {self.mc_samples}")
        if self.env_noise_std < 0:
            problems.append(f"env_noise_std must be nonnegative, got {self.env_noise_std}")
        if self.prior_precision <= 0 or self.model_noise_var <= 0:
            problems.append("prior_precision and model_noise_var must be positive")
        if self.fmt not in ("csv", "json"):
            problems.append(f"fmt must be csv or json, got {self.fmt!r}")
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def effective_kind(self) -> str:
        # "diagnostics" is the linear experiment with diagnostics collection on
        return "linear" if self.kind == "diagnostics" else self.kind

    @property
    def collect_diagnostics(self) -> bool:
        return self.diagnostics or self.kind in ("diagnostics", "linearq")


@dataclass
class RegretTrace:
    """Per-step record of one seeded run.

    ``deltas``/``gains``/``psis`` are the chosen action's scores at
    selection time; in the linear bandit they are only evaluated for the
    information-ratio rule (NaN otherwise, gain excepted since it is closed
    form).  Steps after a mode belief resolves are filled with the
    zero-regret optimal action without invoking the selector.
    """

    seed: int
    regrets: np.ndarray
    actions: np.ndarray
    deltas: np.ndarray
    gains: np.ndarray
    psis: np.ndarray

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.regrets)

    @property
    def final_regret(self) -> float:
        return float(self.cumulative[-1]) if self.regrets.size else 0.0


@dataclass(frozen=True)
class ResultRow:
    """Across-seed summary of one (algorithm, N, eta) cell."""

    algorithm: str
    N: int
    eta: float
    mean_final_regret: float
    std_final_regret: float
    n_seeds: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: dict
    rows: list
    diagnostics: dict | None = None


def _stream_rng(master_seed: int, seed_index: int,
                selector: SelectorSpec | None) -> np.random.Generator:
    if selector is None:
        kind_code, eta_key = 0, 0
    else:
        kind_code = _KIND_CODES[selector.kind]
        eta_key = int(round(selector.eta * 1_000_000))
    entropy = (int(master_seed), int(seed_index), kind_code, eta_key)
    return np.random.default_rng(np.random.SeedSequence(entropy=entropy))


# --------------------------------------------------------------------------
# Mode-belief experiments (hidden-mode bandit, linear-Q instance)
# --------------------------------------------------------------------------


def _make_two_mode_env(cfg: ExperimentConfig, n_offline: int,
                       env_rng: np.random.Generator):
    if cfg.effective_kind == "linearq":
        inst = LinearQInstance(cfg.c, cfg.q, n_offline)
        mode = int(env_rng.random() < inst.p)
        return LinearQEnv(inst, mode, cfg.realized)
    p0 = p_from_offline(n_offline, cfg.q)
    mode = int(env_rng.random() < p0)
    return HiddenModeEnv(p0, mode, cfg.realized)


def _run_two_mode(cfg: ExperimentConfig, selector: SelectorSpec, seed: int,
                  n_offline: int) -> RegretTrace:
    env = _make_two_mode_env(cfg, n_offline, _stream_rng(cfg.master_seed, seed, None))
    sel_rng = _stream_rng(cfg.master_seed, seed, selector)
    T = cfg.horizon
    regrets = np.zeros(T)
    deltas = np.zeros(T)
    gains = np.zeros(T)
    psis = np.zeros(T)
    actions = np.zeros(T, dtype=int)
    for t in range(T):
        if env.belief.resolved:
            # once the mode is revealed the belief-optimal action has zero
            # regret and zero information forever; fill and stop
            actions[t:] = env.optimal_action()
            break
        scores = env.belief_scores()
        a = select(selector.kind, scores, sel_rng,
                   eta=selector.eta, ucb_alpha=cfg.ucb_alpha)
        actions[t] = a
        deltas[t] = scores.deltas[a]
        gains[t] = scores.gains[a]
        psis[t] = psi(deltas[t], gains[t],
                      selector.eta if selector.kind == "ids" else 0.0)
        regrets[t], _ = env.step(a)
    return RegretTrace(seed=seed, regrets=regrets, actions=actions,
                       deltas=deltas, gains=gains, psis=psis)


# --------------------------------------------------------------------------
# Linear contextual bandit
# --------------------------------------------------------------------------


@dataclass
class LinearRunMaterials:
    """Everything one seed shares across selectors: the environment, the
    warm-start posterior, and the pre-drawn online contexts and noise."""

    env: LinearContextualEnv
    warm_posterior: GaussianLinearPosterior
    warm_gram: np.ndarray
    features: np.ndarray      # (T, M, d) candidate features per step
    true_values: np.ndarray   # (T, M) mean rewards under the true weights
    noises: np.ndarray        # (T,) standard-normal observation noise


def prepare_linear_run(cfg: ExperimentConfig, seed: int,
                       n_offline: int) -> LinearRunMaterials:
    """Build the shared per-seed materials from the environment stream.

    Draw order is fixed (environment, offline rounds, online contexts, then
    online noise) so trajectories are reproducible.
    """
    env_rng = _stream_rng(cfg.master_seed, seed, None)
    env = LinearContextualEnv(
        env_rng,
        state_dim=cfg.state_dim,
        action_dim=cfg.action_dim,
        feature_dim=cfg.feature_dim,
        n_candidates=cfg.n_candidates,
        behaviour_bias=cfg.beta,
        env_noise_std=cfg.env_noise_std,
        weight_amplitude=cfg.weight_amplitude,
    )
    phi_off, y_off = env.generate_offline(n_offline, env_rng)
    post = GaussianLinearPosterior(cfg.feature_dim, cfg.prior_precision,
                                   cfg.model_noise_var)
    if n_offline:
        post.absorb_batch(phi_off, y_off)
    warm_gram = post.precision.copy()
    T = cfg.horizon
    contexts = env_rng.standard_normal((T, cfg.state_dim))
    noises = env_rng.standard_normal(T)
    if T:
        features = np.stack([env.candidate_features(s) for s in contexts])
    else:
        features = np.empty((0, cfg.n_candidates, cfg.feature_dim))
    return LinearRunMaterials(
        env=env,
        warm_posterior=post,
        warm_gram=warm_gram,
        features=features,
        true_values=features @ env.w_star,
        noises=noises,
    )


def _run_linear_online(mats: LinearRunMaterials, cfg: ExperimentConfig,
                       selector: SelectorSpec, seed: int) -> tuple[RegretTrace, dict]:
    post = mats.warm_posterior.copy()
    sel_rng = _stream_rng(cfg.master_seed, seed, selector)
    T = cfg.horizon
    d = cfg.feature_dim
    regrets = np.zeros(T)
    deltas = np.full(T, np.nan)
    gains = np.zeros(T)
    psis = np.full(T, np.nan)
    actions = np.zeros(T, dtype=int)
    gain_sum = 0.0
    visit_sum = np.zeros((d, d))
    for t in range(T):
        cand = mats.features[t]
        truth = mats.true_values[t]
        if selector.kind == "ids":
            cand_deltas = mc_deltas(post, CandidateSet(cand), cfg.mc_samples, sel_rng)
            cand_gains = post.info_gain_many(cand)
            a = select("ids", BeliefScores(deltas=cand_deltas, gains=cand_gains),
                       sel_rng, eta=selector.eta)
            deltas[t] = cand_deltas[a]
            gains[t] = cand_gains[a]
            psis[t] = psi(float(cand_deltas[a]), float(cand_gains[a]), selector.eta)
        else:
            if selector.kind == "greedy":
                scores = BeliefScores(means=cand @ post.mean())
            elif selector.kind == "ucb":
                scores = BeliefScores(means=cand @ post.mean(),
                                      stds=np.sqrt(post.project_var_many(cand)))
            else:
                scores = BeliefScores(
                    sample_rewards=lambda rng: cand @ post.sample(rng))
            a = select(selector.kind, scores, sel_rng, ucb_alpha=cfg.ucb_alpha)
            gains[t] = post.info_gain(cand[a])
        actions[t] = a
        regrets[t] = truth.max() - truth[a]
        gain_sum += gains[t]
        visit_sum += np.outer(cand[a], cand[a])
        observed = truth[a] + cfg.env_noise_std * mats.noises[t]
        post.absorb(cand[a], observed)
    info = {
        "warm_logdet": mats.warm_posterior.logdet(),
        "final_logdet": post.logdet(),
        "gain_sum": float(gain_sum),
        "visit_cov": visit_sum / T if T else visit_sum,
        "warm_gram": mats.warm_gram,
    }
    trace = RegretTrace(seed=seed, regrets=regrets, actions=actions,
                        deltas=deltas, gains=gains, psis=psis)
    return trace, info


# --------------------------------------------------------------------------
# Experiment drivers
# --------------------------------------------------------------------------


def run_one(cfg: ExperimentConfig, selector: SelectorSpec, seed: int,
            n_offline: int | None = None) -> RegretTrace:
    """One seeded run of one selector; deterministic given (cfg, seed).

    Uses the first configured offline size unless ``n_offline`` is given.
    """
    cfg.validate()
    N = int(cfg.offline_sizes[0] if n_offline is None else n_offline)
    if cfg.effective_kind in ("hidden-mode", "linearq"):
        return _run_two_mode(cfg, selector, seed, N)
    mats = prepare_linear_run(cfg, seed, N)
    trace, _ = _run_linear_online(mats, cfg, selector, seed)
    return trace


def _summarise(selector: SelectorSpec, n_offline: int, traces) -> ResultRow:
    finals = np.array([t.final_regret for t in traces])
    std = float(np.std(finals, ddof=1)) if finals.size > 1 else 0.0
    return ResultRow(
        algorithm=selector.label,
        N=int(n_offline),
        eta=float(selector.eta),
        mean_final_regret=float(np.mean(finals)),
        std_final_regret=std,
        n_seeds=int(finals.size),
    )


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every (selector, offline size, seed) cell of the experiment."""
    cfg.validate()
    traces: dict = {}
    extras: dict = {}
    if cfg.effective_kind == "linear":
        for N in cfg.offline_sizes:
            for sel in cfg.selectors:
                traces[(sel, int(N))] = []
                extras[(sel, int(N))] = []
            for seed in range(cfg.n_seeds):
                mats = prepare_linear_run(cfg, seed, int(N))
                for sel in cfg.selectors:
                    trace, info = _run_linear_online(mats, cfg, sel, seed)
                    traces[(sel, int(N))].append(trace)
                    extras[(sel, int(N))].append(info)
    else:
        for N in cfg.offline_sizes:
            for sel in cfg.selectors:
                traces[(sel, int(N))] = [
                    _run_two_mode(cfg, sel, seed, int(N))
                    for seed in range(cfg.n_seeds)
                ]
    rows = [
        _summarise(sel, int(N), traces[(sel, int(N))])
        for N in cfg.offline_sizes
        for sel in cfg.selectors
    ]
    diagnostics = None
    if cfg.collect_diagnostics:
        if cfg.effective_kind == "linear":
            diagnostics = _linear_diagnostics(cfg, extras)
        elif cfg.effective_kind == "linearq":
            diagnostics = _linearq_diagnostics(cfg, traces)
        else:
            diagnostics = _hidden_diagnostics(cfg)
    return ExperimentResult(config=cfg, traces=traces, rows=rows,
                            diagnostics=diagnostics)


def run_table(cfg: ExperimentConfig) -> list:
    """Across-seed summary rows, one per (selector, offline size) cell."""
    return run_experiment(cfg).rows


def sweep_eta(cfg: ExperimentConfig, etas) -> list:
    """Rerun the table with the configured non-ratio selectors plus one
    information-ratio selector per requested eta."""
    base = tuple(s for s in cfg.selectors if s.kind != "ids")
    swept = base + tuple(SelectorSpec("ids", float(e)) for e in etas)
    return run_table(replace(cfg, selectors=swept))


# --------------------------------------------------------------------------
# Diagnostics blocks
# --------------------------------------------------------------------------


def _hidden_diagnostics(cfg: ExperimentConfig) -> dict:
    cells = []
    for N in cfg.offline_sizes:
        p = p_from_offline(int(N), cfg.q)
        cells.append({
            "N": int(N),
            "p": p,
            "ts_expected_cumulative":
                ts_lower_bound(p, 1.0, 0.8, cfg.horizon) if 0 < p < 1 else 0.0,
        })
    return {"kind": "hidden-mode", "cells": cells}


def _linear_diagnostics(cfg: ExperimentConfig, extras: dict) -> dict:
    cells = []
    for N in cfg.offline_sizes:
        for sel in cfg.selectors:
            infos = extras[(sel, int(N))]
            residuals = np.array([
                0.5 * (i["final_logdet"] - i["warm_logdet"]) for i in infos])
            gap = max(abs(r - i["gain_sum"]) for r, i in zip(residuals, infos))
            cell = {
                "algorithm": sel.label,
                "eta": float(sel.eta),
                "N": int(N),
                "residual_info_mean": float(residuals.mean()),
                "residual_info_std":
                    float(residuals.std(ddof=1)) if residuals.size > 1 else 0.0,
                "gain_telescoping_max_err": float(gap),
            }
            if int(N) >= 1 and cfg.horizon >= 1:
                coverages = np.array([
                    coverage_coeff(CoverageInputs(
                        grams=(i["warm_gram"],),
                        counts=(int(N),),
                        visit_covs=(i["visit_cov"],),
                    ))[1]
                    for i in infos
                ])
                potential = float(np.mean([
                    elliptical_potential([i["warm_gram"]], cfg.horizon,
                                         cfg.feature_dim)
                    for i in infos
                ]))
                bounds = BoundInputs(
                    H=1, d=cfg.feature_dim, T=cfg.horizon, N=int(N),
                    eta=float(sel.eta),
                    residual_info=float(residuals.mean()),
                )
                branches = two_branch_bound(bounds, potential,
                                            float(coverages.mean()))
                cell.update({
                    "coverage_mean": float(coverages.mean()),
                    "coverage_std":
                        float(coverages.std(ddof=1)) if coverages.size > 1 else 0.0,
                    "elliptical_potential_mean": potential,
                    "bound_explore": float(branches.explore),
                    "bound_warmstart": float(branches.warmstart),
                    "bound_generic": float(residual_regret_bound(bounds)),
                })
            cells.append(cell)
    return {"kind": "linear", "cells": cells}


def _linearq_diagnostics(cfg: ExperimentConfig, traces: dict) -> dict:
    cells = []
    for N in cfg.offline_sizes:
        inst = LinearQInstance(cfg.c, cfg.q, int(N))
        p = inst.p
        k = inst.constants
        cell = {
            "N": int(N),
            "p": p,
            "probe_cost_bound": ids_upper_bound(p, k.c0, k.c1),
            "ts_bound_finite":
                ts_lower_bound(p, k.d_plus, k.d_minus, cfg.horizon),
            "ts_bound_threshold":
                ts_lower_bound_threshold(p, k.d_plus, k.d_minus),
            "separation_ratio": separation_ratio(k.d_plus, k.d_minus, k.c0),
            "probe_predicted": bool(p < 0.5 - cfg.c),
        }
        ts_traces = None
        for sel in cfg.selectors:
            if sel.kind == "ts":
                ts_traces = traces[(sel, int(N))]
                break
        if ts_traces is not None:
            discovery, censored = [], 0
            for trace in ts_traces:
                hits = np.flatnonzero(trace.actions == LQ_RARE)
                if hits.size:
                    discovery.append(int(hits[0]) + 1)
                else:
                    censored += 1
            if discovery:
                arr = np.array(discovery, dtype=float)
                cell["discovery_mean"] = float(arr.mean())
                cell["discovery_se"] = float(
                    arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
            cell["discovery_expected"] = 1.0 / p
            cell["n_censored"] = censored
        cells.append(cell)
    return {"kind": "linearq", "cells": cells}


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

TRACE_HEADER = ("algorithm", "N", "eta", "seed", "step",
                "expected_regret", "cumulative_regret")
SUMMARY_HEADER = ("algorithm", "N", "eta", "mean_final_regret",
                  "std_final_regret", "n_seeds")


def emit(result: ExperimentResult, fmt: str | None = None,
         path: str | Path | None = None, mode: str = "trace") -> Path:
    """Write results to disk and return the output path.

    ``csv`` writes per-step traces (``mode="trace"``, one anchor row at step
    0 plus one row per step) or one summary line per cell
    (``mode="summary"``); ``json`` writes the summary document with a config
    echo, per-cell mean/std, and the diagnostics block when collected.
    Floats are rendered with ``repr`` so parsing them back is lossless.
    """
    fmt = fmt or result.config.fmt
    out = path if path is not None else result.config.out
    if out is None:
        raise ValueError("no output path: pass path= or set config.out")
    if not result.rows:
        raise ValueError("nothing to emit: results are empty")
    out = Path(out)
    try:
        if fmt == "csv":
            _emit_csv(result, out, mode)
        elif fmt == "json":
            _emit_json(result, out)
        else:
            raise ValueError(f"unknown format {fmt!r}; expected csv or json")
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc}") from exc
    return out


def _cells(result: ExperimentResult):
    cfg = result.config
    for N in cfg.offline_sizes:
        for sel in cfg.selectors:
            yield sel, int(N), result.traces[(sel, int(N))]


def _emit_csv(result: ExperimentResult, out: Path, mode: str) -> None:
    if mode not in ("trace", "summary"):
        raise ValueError(f"unknown csv mode {mode!r}; expected trace or summary")
    with out.open("w", newline="") as handle:
        writer = csv.writer(handle)
        if mode == "summary":
            writer.writerow(SUMMARY_HEADER)
            for row in result.rows:
                writer.writerow([
                    row.algorithm, row.N, repr(row.eta),
                    repr(row.mean_final_regret), repr(row.std_final_regret),
                    row.n_seeds,
                ])
            return
        writer.writerow(TRACE_HEADER)
        for sel, N, traces in _cells(result):
            for trace in traces:
                writer.writerow([sel.label, N, repr(float(sel.eta)),
                                 trace.seed, 0, repr(0.0), repr(0.0)])
                cumulative = trace.cumulative
                for t in range(trace.regrets.size):
                    writer.writerow([
                        sel.label, N, repr(float(sel.eta)), trace.seed, t + 1,
                        repr(float(trace.regrets[t])),
                        repr(float(cumulative[t])),
                    ])


def _emit_json(result: ExperimentResult, out: Path) -> None:
    payload = {
        "config": asdict(result.config),
        "results": [asdict(row) for row in result.rows],
        "diagnostics": result.diagnostics,
    }
    with out.open("w") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")
