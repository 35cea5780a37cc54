"""Action selection over a fixed candidate set.

Four rules share one interface: greedy (posterior-mean argmax), UCB
(mean plus a posterior-standard-deviation bonus), Thompson sampling
(argmax under one posterior draw), and information-ratio minimisation
(argmin of squared expected regret over information gain plus an optional
regulariser ``eta``).  Selectors only ever see per-action score vectors or
a reward-vector sampler, never environment internals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .posterior import GaussianLinearPosterior

SELECTOR_KINDS = ("greedy", "ucb", "ts", "ids")


@dataclass(frozen=True)
class CandidateSet:
    """Fixed, indexed set of candidate actions given by their feature rows.

    Action ids are the dense row indices ``0 .. len(self) - 1``.
    """

    features: np.ndarray

    def __post_init__(self) -> None:
        features = np.atleast_2d(np.asarray(self.features, dtype=float))
        if features.size == 0:
            raise ValueError("candidate set must be nonempty")
        if not np.all(np.isfinite(features)):
            raise ValueError("candidate features contain non-finite entries")
        object.__setattr__(self, "features", features)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class ActionScore:
    """Per-action triple: expected regret, information gain, and their ratio."""

    delta: float
    gain: float
    psi: float


@dataclass(frozen=True)
class BeliefScores:
    """Per-action quantities a belief exposes to the selectors.

    Any subset of fields may be populated; :func:`select` validates that the
    fields its rule needs are present.  ``sample_rewards`` draws one reward
    vector per call and is the only hook Thompson sampling uses.
    """

    deltas: Optional[np.ndarray] = None
    gains: Optional[np.ndarray] = None
    means: Optional[np.ndarray] = None
    stds: Optional[np.ndarray] = None
    sample_rewards: Optional[Callable[[np.random.Generator], np.ndarray]] = None

    def __post_init__(self) -> None:
        lengths = set()
        for name in ("deltas", "gains", "means", "stds"):
            value = getattr(self, name)
            if value is None:
                continue
            value = np.asarray(value, dtype=float)
            object.__setattr__(self, name, value)
            lengths.add(value.shape[0])
        if len(lengths) > 1:
            raise ValueError(f"score vectors disagree on action count: {sorted(lengths)}")


def psi(delta: float, gain: float, eta: float = 0.0) -> float:
    """Information ratio ``delta^2 / (gain + eta)`` with boundary conventions.

    At ``eta == 0`` the ratio is ``+inf`` when ``gain == 0 < delta`` and
    ``0`` when ``delta == gain == 0``.
    """
    if delta < 0 or gain < 0 or eta < 0:
        raise ValueError(f"delta, gain, eta must be nonnegative, got {(delta, gain, eta)}")
    if eta > 0:
        return delta * delta / (gain + eta)
    if gain == 0:
        return np.inf if delta > 0 else 0.0
    return delta * delta / gain


def psi_values(deltas: np.ndarray, gains: np.ndarray, eta: float = 0.0) -> np.ndarray:
    """Vectorised :func:`psi` with the same boundary conventions."""
    deltas = np.asarray(deltas, dtype=float)
    gains = np.asarray(gains, dtype=float)
    if np.any(deltas < 0) or np.any(gains < 0) or eta < 0:
        raise ValueError("deltas, gains, eta must be nonnegative")
    if eta > 0:
        return deltas ** 2 / (gains + eta)
    out = np.full(deltas.shape, np.inf)
    pos = gains > 0
    out[pos] = deltas[pos] ** 2 / gains[pos]
    out[(~pos) & (deltas == 0)] = 0.0
    return out


def score_actions(deltas: np.ndarray, gains: np.ndarray,
                  eta: float = 0.0) -> list[ActionScore]:
    """Bundle aligned delta/gain vectors into per-action score records."""
    psis = psi_values(deltas, gains, eta)
    return [ActionScore(float(d), float(g), float(p))
            for d, g, p in zip(deltas, gains, psis)]


def mc_deltas(post: GaussianLinearPosterior, cands: CandidateSet,
              n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo estimate of per-action expected regret.

    Draws ``n_samples`` posterior weight vectors and averages, per action,
    the gap to the best action under each draw.  Entries are nonnegative by
    construction.
    """
    if len(cands) == 0:
        raise ValueError("candidate set must be nonempty")
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    draws = post.sample_many(n_samples, rng)          # (S, d)
    rewards = draws @ cands.features.T                # (S, M)
    regrets = rewards.max(axis=1, keepdims=True) - rewards
    return regrets.mean(axis=0)


def select(kind: str, scores: BeliefScores, rng: np.random.Generator | None = None,
           *, eta: float = 0.0, ucb_alpha: float = 1.0) -> int:
    """Pick an action id under the given rule.

    Ties break toward the lowest action id for every rule, so selections are
    reproducible.  The information-ratio rule falls back to the
    smallest-regret action in the degenerate case where every action has an
    infinite ratio.
    """
    if kind == "ids":
        if scores.deltas is None or scores.gains is None:
            raise ValueError("ids selection needs deltas and gains")
        ratios = psi_values(scores.deltas, scores.gains, eta)
        if np.isinf(ratios).all():
            return int(np.argmin(scores.deltas))
        return int(np.argmin(ratios))
    if kind == "greedy":
        if scores.means is None:
            raise ValueError("greedy selection needs means")
        return int(np.argmax(scores.means))
    if kind == "ucb":
        if scores.means is None or scores.stds is None:
            raise ValueError("ucb selection needs means and stds")
        return int(np.argmax(scores.means + ucb_alpha * scores.stds))
    if kind == "ts":
        if scores.sample_rewards is None:
            raise ValueError("ts selection needs a reward sampler")
        if rng is None:
            raise ValueError("ts selection needs a random generator")
        return int(np.argmax(scores.sample_rewards(rng)))
    raise ValueError(f"unknown selector kind {kind!r}; expected one of {SELECTOR_KINDS}")
