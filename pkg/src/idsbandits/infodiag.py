"""Analytic information and regret-bound diagnostics.

Pure functions over Gram matrices, visitation covariances, and scalar
problem constants: binary entropy, residual information in log-determinant
form, coverage coefficients, the elliptical-potential term, the generic
residual-information regret bound, its two-branch specialisation, and the
closed-form separation quantities for two-mode warm starts.  Everything is
reported in nats.  The bound evaluators carry explicit constants but drop
polylogarithmic factors, so they are comparative diagnostics rather than
certified bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import eigh
from scipy.special import xlogy

LOG2 = math.log(2.0)

# Tolerance for "did the Gram matrix only grow" checks.
_PSD_TOL = 1e-10


def binary_entropy(p: float) -> float:
    """Entropy of a Bernoulli(p) variable in nats, with 0 * log 0 = 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return float(-xlogy(p, p) - xlogy(1.0 - p, 1.0 - p))


def reference_ratio_constant(horizon: int, dim: int) -> float:
    """Default information-ratio constant ``4 * H * d / log 2``."""
    if horizon < 1 or dim < 1:
        raise ValueError("horizon and dim must be >= 1")
    return 4.0 * horizon * dim / LOG2


def _logdet_spd(mat: np.ndarray) -> float:
    sign, value = np.linalg.slogdet(mat)
    if sign <= 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return float(value)


def residual_info(grams_before: Sequence[np.ndarray],
                  grams_after: Sequence[np.ndarray]) -> float:
    """Half the summed log-determinant growth across stages, in nats.

    ``grams_after[h]`` must dominate ``grams_before[h]`` in the
    positive-semidefinite order (updates only ever add rank-one terms);
    violations beyond tolerance raise ``ValueError``.
    """
    if len(grams_before) != len(grams_after) or not grams_before:
        raise ValueError("need one nonempty before/after Gram pair per stage")
    total = 0.0
    for before, after in zip(grams_before, grams_after):
        before = np.asarray(before, dtype=float)
        after = np.asarray(after, dtype=float)
        if before.shape != after.shape:
            raise ValueError("before/after Gram shapes disagree")
        diff = after - before
        scale = max(1.0, float(np.abs(after).max()))
        if np.linalg.eigvalsh(0.5 * (diff + diff.T)).min() < -_PSD_TOL * scale:
            raise ValueError("after-Gram does not dominate before-Gram")
        total += _logdet_spd(after) - _logdet_spd(before)
    return 0.5 * total


@dataclass(frozen=True)
class CoverageInputs:
    """Per-stage offline Gram matrices, sample counts, and time-averaged
    online visitation covariances."""

    grams: tuple
    counts: tuple
    visit_covs: tuple

    def __post_init__(self) -> None:
        grams = tuple(np.asarray(g, dtype=float) for g in self.grams)
        covs = tuple(np.asarray(c, dtype=float) for c in self.visit_covs)
        counts = tuple(int(n) for n in self.counts)
        if not (len(grams) == len(covs) == len(counts)) or not grams:
            raise ValueError("need matching nonempty per-stage grams, counts, visit_covs")
        if any(n < 1 for n in counts):
            raise ValueError("every stage needs at least one offline sample")
        for mat in (*grams, *covs):
            if not np.allclose(mat, mat.T, rtol=1e-10, atol=1e-12):
                raise ValueError("coverage inputs must be symmetric")
        object.__setattr__(self, "grams", grams)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "visit_covs", covs)


def coverage_coeff(cov: CoverageInputs) -> tuple[np.ndarray, float]:
    """Per-stage coverage spectra and their count-weighted aggregate.

    Stage value: largest generalized eigenvalue of the visitation covariance
    against the per-sample offline Gram ``gram / count`` (equivalently the
    top eigenvalue of the symmetrically whitened covariance).  Aggregate:
    ``(N / H) * sum_h stage_h / count_h`` with ``N`` the total count.
    Raises ``LinAlgError`` if a Gram matrix is singular.
    """
    per_stage = []
    for gram, n, sigma in zip(cov.grams, cov.counts, cov.visit_covs):
        eigs = eigh(sigma, gram / n, eigvals_only=True)
        per_stage.append(max(float(eigs[-1]), 0.0))
    n_total = sum(cov.counts)
    n_stages = len(cov.counts)
    aggregate = (n_total / n_stages) * sum(
        c / n for c, n in zip(per_stage, cov.counts))
    return np.asarray(per_stage), float(aggregate)


def elliptical_potential(grams: Sequence[np.ndarray], horizon_steps: int,
                         dim: int) -> float:
    """Stage-averaged ``log(1 + T / (d * lambda_min(gram)))``.

    Controls how much log-determinant growth ``T`` further unit-norm updates
    can cause; decreasing in the smallest offline eigenvalue.
    """
    if horizon_steps < 0 or dim < 1 or not grams:
        raise ValueError("need nonempty grams, T >= 0, dim >= 1")
    total = 0.0
    for gram in grams:
        lam_min = float(np.linalg.eigvalsh(np.asarray(gram, dtype=float)).min())
        total += math.log1p(horizon_steps / (dim * lam_min))
    return total / len(grams)


@dataclass(frozen=True)
class BoundInputs:
    """Scalar inputs to the regret-bound evaluators.

    ``C_chi`` defaults to :func:`reference_ratio_constant`; ``failure_prob``
    is the probability mass outside the event on which the ratio condition
    holds (zero in the linear-Gaussian model).
    """

    H: int
    d: int
    T: int
    N: int
    eta: float = 0.0
    residual_info: float = 0.0
    C_chi: float | None = None
    failure_prob: float = 0.0

    def __post_init__(self) -> None:
        if min(self.H, self.d, self.T, self.N) < 1:
            raise ValueError("H, d, T, N must all be >= 1")
        if self.eta < 0 or self.residual_info < 0 or self.failure_prob < 0:
            raise ValueError("eta, residual_info, failure_prob must be nonnegative")
        if self.C_chi is None:
            object.__setattr__(self, "C_chi", reference_ratio_constant(self.H, self.d))
        elif self.C_chi <= 0:
            raise ValueError("C_chi must be positive")


def residual_regret_bound(b: BoundInputs) -> float:
    """Generic regret bound ``sqrt(T * C_chi * (residual_info + T * eta))``
    plus the ``H * T * failure_prob`` slack; monotone in every argument."""
    return math.sqrt(b.T * b.C_chi * (b.residual_info + b.T * b.eta)) \
        + b.H * b.T * b.failure_prob


class BoundBranches(NamedTuple):
    explore: float
    warmstart: float

    @property
    def tightest(self) -> float:
        return min(self.explore, self.warmstart)


def two_branch_bound(b: BoundInputs, potential: float,
                     coverage_aggregate: float) -> BoundBranches:
    """Evaluate the two regret-bound branches with explicit constants.

    The explore branch charges the elliptical potential; the warm-start
    branch charges ``T * sqrt(coverage / N)`` and vanishes as the offline
    sample count grows.  Both share the prefactor
    ``sqrt(T * C_chi * H * d / 2)``; polylog factors are dropped.
    """
    if potential < 0 or coverage_aggregate < 0:
        raise ValueError("potential and coverage_aggregate must be nonnegative")
    common = b.T * b.C_chi * (b.H * b.d / 2.0)
    return BoundBranches(
        explore=math.sqrt(common * potential),
        warmstart=math.sqrt(common * b.T * coverage_aggregate / b.N),
    )


def ts_lower_bound(p: float, d_plus: float, d_minus: float, T: int) -> float:
    """Finite-horizon Bayes-regret lower bound for probability matching in a
    two-mode warm start: ``(1-p) * (1 - (1-p)^T) * (d_plus + d_minus)``.

    Nondecreasing in ``T`` with limit ``(1-p) * (d_plus + d_minus)``.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if d_plus <= 0 or d_minus <= 0:
        raise ValueError("gap constants must be positive")
    if T < 0:
        raise ValueError("T must be nonnegative")
    return (1.0 - p) * (1.0 - (1.0 - p) ** T) * (d_plus + d_minus)


def ts_lower_bound_threshold(p: float, d_plus: float, d_minus: float) -> float:
    """Value the finite-horizon bound is guaranteed to exceed once
    ``T >= ceil(1/p)``: ``(1-p) * (1 - 1/e) * (d_plus + d_minus)``."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if d_plus <= 0 or d_minus <= 0:
        raise ValueError("gap constants must be positive")
    return (1.0 - p) * (1.0 - math.exp(-1.0)) * (d_plus + d_minus)


def ids_upper_bound(p: float, c0: float, c1: float) -> float:
    """Probe-cost regret ceiling ``(1-p) * c0 + p * c1`` for the
    information-ratio rule in the separation regime."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if c0 <= 0 or c1 <= 0:
        raise ValueError("probe cost constants must be positive")
    return (1.0 - p) * c0 + p * c1


def separation_ratio(d_plus: float, d_minus: float, c0: float) -> float:
    """Asymptotic regret ratio ``(1 - 1/e) * (d_plus + d_minus) / c0``; a
    value above 1 certifies a constant-factor separation."""
    if d_plus <= 0 or d_minus <= 0 or c0 <= 0:
        raise ValueError("constants must be positive")
    return (1.0 - math.exp(-1.0)) * (d_plus + d_minus) / c0
