"""Experiment environments.

Three environments, each exposing per-action belief scores and
posterior-expected instantaneous regret:

* a hidden-mode bandit with a default action, a rare-mode action, and a
  dominated probe that reveals the latent mode in one observation;
* a biased linear contextual bandit whose offline data comes from a shifted
  behaviour policy, with a fixed nonlinear random feature map;
* a small two-stage linear-Q construction with closed-form regret and
  information vectors, used for the separation analysis.

Regret accounting defaults to the posterior-expected gap under the current
belief; realized accounting (gap under the true latent mode) is available
via the ``realized`` flag on the mode-belief environments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .infodiag import binary_entropy
from .selectors import BeliefScores

# --------------------------------------------------------------------------
# Hidden-mode bandit
# --------------------------------------------------------------------------

# Rows: actions; columns: latent mode 0 / mode 1.
HIDDEN_MODE_REWARDS = np.array([
    [1.0, 1.0],     # default: best in mode 0, uninformative
    [0.2, 2.0],     # rare-mode action: best in mode 1, reveals the mode
    [0.85, 1.85],   # probe: 0.15 below best in both modes, reveals the mode
])
HIDDEN_MODE_ACTIONS = ("default", "rare", "probe")
A_DEFAULT, A_RARE, A_PROBE = 0, 1, 2


def p_from_offline(n_offline: int, q: float) -> float:
    """Rare-mode posterior probability after ``n_offline`` uninformative-of-
    mode-1 offline episodes under an odds model with per-episode signal
    probability ``q``: ``(1-q)^N / (1 + (1-q)^N)``.

    Equals 0.5 at ``n_offline == 0`` and is strictly decreasing in it.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"q must lie in (0, 1), got {q}")
    if n_offline < 0:
        raise ValueError(f"n_offline must be nonnegative, got {n_offline}")
    odds = (1.0 - q) ** n_offline
    return odds / (1.0 + odds)


def deltas_hidden(p: float) -> np.ndarray:
    """Expected per-action regret under rare-mode probability ``p``.

    Closed form from the reward table: ``(p, 0.8 * (1 - p), 0.15)``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return np.array([p * 1.0, (1.0 - p) * 0.8, 0.15])


def gains_hidden(p: float) -> np.ndarray:
    """Per-action information about the latent mode, in nats.

    The default action is uninformative; the other two resolve the mode in
    one observation, so each is worth the full binary entropy of ``p``.
    """
    h = binary_entropy(p)
    return np.array([0.0, h, h])


@dataclass
class ModeBelief:
    """Bernoulli posterior over a binary latent mode."""

    p: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")

    @property
    def resolved(self) -> bool:
        return self.p in (0.0, 1.0)

    def collapse(self, mode: int) -> None:
        self.p = float(mode)


class _TwoModeEnv:
    """Shared machinery for environments driven by a binary mode belief.

    Subclasses provide a reward/value table of shape (n_actions, 2), the set
    of mode-revealing action ids, and the expected-regret vector under the
    current belief.
    """

    table: np.ndarray
    informative: frozenset

    def __init__(self, p0: float, mode: int, realized: bool = False) -> None:
        if mode not in (0, 1):
            raise ValueError(f"mode must be 0 or 1, got {mode}")
        self.belief = ModeBelief(float(p0))
        self.mode = int(mode)
        self.realized = bool(realized)

    def expected_deltas(self) -> np.ndarray:
        raise NotImplementedError

    def gains(self) -> np.ndarray:
        raise NotImplementedError

    def expected_rewards(self) -> np.ndarray:
        p = self.belief.p
        return self.table[:, 0] * (1.0 - p) + self.table[:, 1] * p

    def reward_stds(self) -> np.ndarray:
        p = self.belief.p
        spread = np.abs(self.table[:, 1] - self.table[:, 0])
        return spread * np.sqrt(p * (1.0 - p))

    def belief_scores(self) -> BeliefScores:
        p = self.belief.p
        table = self.table

        def sample_rewards(rng: np.random.Generator) -> np.ndarray:
            return table[:, int(rng.random() < p)]

        return BeliefScores(
            deltas=self.expected_deltas(),
            gains=self.gains(),
            means=self.expected_rewards(),
            stds=self.reward_stds(),
            sample_rewards=sample_rewards,
        )

    def optimal_action(self) -> int:
        """Best action under the current belief (mode-optimal once resolved)."""
        return int(np.argmax(self.expected_rewards()))

    def step(self, action: int) -> tuple[float, float]:
        """Play ``action``; return (recorded regret, observed reward).

        Mode-revealing actions collapse the belief onto the true mode; the
        default action leaves it untouched.
        """
        n_actions = self.table.shape[0]
        if not 0 <= action < n_actions:
            raise ValueError(f"action must lie in [0, {n_actions}), got {action}")
        if self.realized:
            column = self.table[:, self.mode]
            regret = float(column.max() - column[action])
        else:
            regret = float(self.expected_deltas()[action])
        observation = float(self.table[action, self.mode])
        if action in self.informative:
            self.belief.collapse(self.mode)
        return regret, observation


class HiddenModeEnv(_TwoModeEnv):
    """Three-action hidden-mode bandit.

    Rewards are deterministic given the latent mode; informativeness is
    purely structural (the rare-mode action and the probe each reveal the
    mode, the default action never does).
    """

    table = HIDDEN_MODE_REWARDS
    informative = frozenset({A_RARE, A_PROBE})

    def expected_deltas(self) -> np.ndarray:
        return deltas_hidden(self.belief.p)

    def gains(self) -> np.ndarray:
        return gains_hidden(self.belief.p)


# --------------------------------------------------------------------------
# Biased linear contextual bandit
# --------------------------------------------------------------------------


class RandomFeatureMap:
    """Deterministic nonlinear random feature map on (state, action) pairs.

    A constant term, the raw state and action, their squares, and all
    state-action products are concatenated, projected by a fixed Gaussian
    matrix (entries scaled by the inverse square root of the input width),
    passed through tanh, and unit-normalised.  The constant term keeps the
    output well defined even for all-zero inputs.
    """

    def __init__(self, rng: np.random.Generator, state_dim: int = 16,
                 action_dim: int = 4, feature_dim: int = 128) -> None:
        self.state_dim = int(state_dim)
        self.action_dim = int(action_dim)
        self.feature_dim = int(feature_dim)
        raw_dim = 1 + 2 * self.state_dim + 2 * self.action_dim \
            + self.state_dim * self.action_dim
        self.projection = rng.standard_normal((self.feature_dim, raw_dim)) \
            / np.sqrt(raw_dim)

    def _raw(self, state: np.ndarray, actions: np.ndarray) -> np.ndarray:
        m = actions.shape[0]
        s = np.broadcast_to(state, (m, self.state_dim))
        cross = (s[:, :, None] * actions[:, None, :]).reshape(m, -1)
        return np.concatenate(
            [np.ones((m, 1)), s, actions, s * s, actions * actions, cross],
            axis=1,
        )

    def batch(self, state: np.ndarray, actions: np.ndarray) -> np.ndarray:
        """Unit-norm feature rows for one state against (m, action_dim) actions."""
        state = np.asarray(state, dtype=float)
        actions = np.atleast_2d(np.asarray(actions, dtype=float))
        hidden = np.tanh(self._raw(state, actions) @ self.projection.T)
        norms = np.linalg.norm(hidden, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise ValueError("feature map produced a zero vector")
        return hidden / norms

    def __call__(self, state: np.ndarray, action: np.ndarray) -> np.ndarray:
        action = np.asarray(action, dtype=float)
        return self.batch(state, action[None, :])[0]


def build_feature_map(seed: int, state_dim: int = 16, action_dim: int = 4,
                      feature_dim: int = 128) -> RandomFeatureMap:
    """Feature map drawn deterministically from ``seed``."""
    return RandomFeatureMap(np.random.default_rng(seed), state_dim, action_dim,
                            feature_dim)


class LinearContextualEnv:
    """Linear contextual bandit with a biased offline behaviour policy.

    The true weights are a random unit vector (times ``weight_amplitude``);
    the behaviour weights are shifted by ``behaviour_bias`` along an
    independent random unit direction.  A fixed set of ``n_candidates``
    actions is drawn once and featurised against each round's context, so
    candidate ids are stable across steps.
    """

    def __init__(self, rng: np.random.Generator, state_dim: int = 16,
                 action_dim: int = 4, feature_dim: int = 128,
                 n_candidates: int = 256, behaviour_bias: float = 6.0,
                 env_noise_std: float = 0.05,
                 weight_amplitude: float = 1.0) -> None:
        if n_candidates < 1:
            raise ValueError(f"n_candidates must be >= 1, got {n_candidates}")
        if env_noise_std < 0:
            raise ValueError(f"env_noise_std must be nonnegative, got {env_noise_std}")
        self.state_dim = int(state_dim)
        self.env_noise_std = float(env_noise_std)
        self.feature_map = RandomFeatureMap(rng, state_dim, action_dim, feature_dim)
        w = rng.standard_normal(feature_dim)
        self.w_star = weight_amplitude * w / np.linalg.norm(w)
        shift = rng.standard_normal(feature_dim)
        self.w_behav = self.w_star + behaviour_bias * shift / np.linalg.norm(shift)
        self.candidate_actions = rng.standard_normal((n_candidates, action_dim))

    @property
    def n_candidates(self) -> int:
        return self.candidate_actions.shape[0]

    def sample_context(self, rng: np.random.Generator) -> np.ndarray:
        return rng.standard_normal(self.state_dim)

    def candidate_features(self, state: np.ndarray) -> np.ndarray:
        """(n_candidates, feature_dim) unit-norm features for one context."""
        return self.feature_map.batch(state, self.candidate_actions)

    def generate_offline(self, n: int,
                         rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Logged data from the biased behaviour policy.

        Each round draws a fresh context, the behaviour policy takes its
        argmax candidate, and the reward is the true mean plus Gaussian
        noise.  Returns an (n, feature_dim) design and n rewards.
        """
        if n < 0:
            raise ValueError(f"n must be nonnegative, got {n}")
        features = np.empty((n, self.w_star.shape[0]))
        rewards = np.empty(n)
        for i in range(n):
            cand = self.candidate_features(self.sample_context(rng))
            j = int(np.argmax(cand @ self.w_behav))
            features[i] = cand[j]
            rewards[i] = cand[j] @ self.w_star \
                + self.env_noise_std * rng.standard_normal()
        return features, rewards

    def step(self, state: np.ndarray, action: int,
             rng: np.random.Generator | None = None) -> tuple[float, float]:
        """Play candidate ``action`` in ``state``; return (regret, reward).

        Regret is measured against the best candidate under the true
        weights.  The reward observation is noiseless when no generator is
        supplied.
        """
        cand = self.candidate_features(state)
        if not 0 <= action < cand.shape[0]:
            raise ValueError(f"action must lie in [0, {cand.shape[0]}), got {action}")
        true_values = cand @ self.w_star
        regret = float(true_values.max() - true_values[action])
        noise = 0.0 if rng is None else self.env_noise_std * rng.standard_normal()
        return regret, float(true_values[action] + noise)


# --------------------------------------------------------------------------
# Two-stage linear-Q separation instance
# --------------------------------------------------------------------------

LINQ_ACTIONS = ("default", "rare", "probe", "behaviour")
LQ_DEFAULT, LQ_RARE, LQ_PROBE, LQ_BEHAVIOUR = 0, 1, 2, 3
# The behaviour action is only partially informative about the mode, so the
# restricted candidate class for online selection excludes it.
LINQ_CANDIDATE_CLASS = (LQ_DEFAULT, LQ_RARE, LQ_PROBE)


class GapConstants(NamedTuple):
    """Conditional gap constants of a two-mode separation instance.

    ``d_plus``/``d_minus``: regret of the default (resp. rare) policy
    conditional on the mode it is wrong about; ``c0``/``c1``: probe regret
    conditional on mode 0 / mode 1.
    """

    d_plus: float
    d_minus: float
    c0: float
    c1: float


@dataclass(frozen=True)
class LinearQInstance:
    """Closed-form two-stage instance parameterised by probe cost ``c``,
    per-episode offline signal probability ``q``, and offline size."""

    c: float
    q: float
    n_offline: int

    def __post_init__(self) -> None:
        if not 0.0 < self.c < 0.5:
            raise ValueError(f"c must lie in (0, 0.5), got {self.c}")
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie in (0, 1), got {self.q}")
        if self.n_offline < 0:
            raise ValueError(f"n_offline must be nonnegative, got {self.n_offline}")

    @property
    def p(self) -> float:
        return p_from_offline(self.n_offline, self.q)

    @property
    def constants(self) -> GapConstants:
        return GapConstants(d_plus=0.5, d_minus=0.5, c0=self.c, c1=0.5 + self.c)


@dataclass(frozen=True)
class LinearQScores:
    """Per-action (delta, gain) vectors over the four-action instance."""

    deltas: np.ndarray
    gains: np.ndarray
    fully_informative: np.ndarray

    def restricted(self) -> tuple[np.ndarray, np.ndarray]:
        """Score vectors over the three-action candidate class."""
        idx = list(LINQ_CANDIDATE_CLASS)
        return self.deltas[idx], self.gains[idx]


def linear_q_scores(inst: LinearQInstance) -> LinearQScores:
    """Closed-form first-episode scores for all four actions.

    The behaviour action's gain is the exact channel information of its
    next-state observation, which is strictly between zero and the full
    binary entropy; it is flagged as not fully informative and sits outside
    the candidate class.
    """
    p, c, q = inst.p, inst.c, inst.q
    h = binary_entropy(p)
    deltas = np.array([p / 2.0, (1.0 - p) / 2.0, p / 2.0 + c, 0.5 + p / 2.0])
    gains = np.array([0.0, h, h, binary_entropy(p * q) - p * binary_entropy(q)])
    return LinearQScores(
        deltas=deltas,
        gains=gains,
        fully_informative=np.array([False, True, True, False]),
    )


def ids_selects_probe(p: float, c: float) -> bool:
    """Whether the vanilla information-ratio rule prefers the probe over the
    rare-mode action at mode probability ``p``: true iff ``p < 1/2 - c``
    (strict)."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if not 0.0 < c < 0.5:
        raise ValueError(f"c must lie in (0, 0.5), got {c}")
    return p < 0.5 - c


class LinearQEnv(_TwoModeEnv):
    """Simulable two-mode environment over the restricted candidate class.

    Values per (action, mode): default 1/2 in both; rare 0 or 1; probe
    ``1/2 - c`` in both.  The rare action and the probe reveal the mode.
    The partially informative behaviour action only appears in the
    first-episode diagnostics, not in online selection.
    """

    informative = frozenset({LQ_RARE, LQ_PROBE})

    def __init__(self, inst: LinearQInstance, mode: int,
                 realized: bool = False) -> None:
        super().__init__(inst.p, mode, realized)
        self.inst = inst
        self.table = np.array([
            [0.5, 0.5],
            [0.0, 1.0],
            [0.5 - inst.c, 0.5 - inst.c],
        ])

    def expected_deltas(self) -> np.ndarray:
        p = self.belief.p
        k = self.inst.constants
        # Mixture form over the conditional gap constants; for the probe this
        # is float-identical to the regret ceiling evaluator.
        return np.array([
            p * k.d_plus,
            (1.0 - p) * k.d_minus,
            (1.0 - p) * k.c0 + p * k.c1,
        ])

    def gains(self) -> np.ndarray:
        h = binary_entropy(self.belief.p)
        return np.array([0.0, h, h])
