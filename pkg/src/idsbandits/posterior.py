"""Exact Bayesian linear-Gaussian posterior with rank-one updates.

The posterior over a weight vector ``w`` in R^d is kept in precision form:
a precision matrix (initially ``prior_precision * I``) and a
precision-weighted mean, so that ``mean = precision^{-1} @ pw_mean`` and the
posterior covariance is ``precision^{-1}``.  A scalar observation
``y = phi @ w + noise`` with modelled noise variance ``model_noise_var``
enters as ``precision += outer(phi, phi) / model_noise_var`` and
``pw_mean += phi * y / model_noise_var``; with unit modelled noise this is
the plain Gram-matrix recursion.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

# Features are expected to be normalised upstream; the posterior math is
# valid for any phi, so an oversized feature only warns.
FEATURE_NORM_BOUND = 1.0 + 1e-9


class GaussianLinearPosterior:
    """Conjugate Gaussian posterior for a linear reward model.

    Parameters
    ----------
    dim : int
        Feature dimension d, at least 1.
    prior_precision : float
        Isotropic prior precision; the prior is N(0, I / prior_precision).
    model_noise_var : float
        Modelled variance of the scalar observation channel.  This is a
        modelling choice and may deliberately differ from the noise the
        environment actually adds.

    Notes
    -----
    ``absorb`` updates the posterior in place; call :meth:`copy` first when
    the pre-update value must be retained (e.g. to share one warm start
    across several selectors).  The Cholesky factor of the precision matrix
    is cached and recomputed lazily after updates.
    """

    def __init__(self, dim: int, prior_precision: float = 1.0,
                 model_noise_var: float = 1.0) -> None:
        dim = int(dim)
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        if not (prior_precision > 0 and np.isfinite(prior_precision)):
            raise ValueError(f"prior_precision must be positive, got {prior_precision}")
        if not (model_noise_var > 0 and np.isfinite(model_noise_var)):
            raise ValueError(f"model_noise_var must be positive, got {model_noise_var}")
        self.dim = dim
        self.prior_precision = float(prior_precision)
        self.model_noise_var = float(model_noise_var)
        self.precision = prior_precision * np.eye(dim)
        self.pw_mean = np.zeros(dim)
        self._chol: np.ndarray | None = None

    @classmethod
    def from_data(cls, features: np.ndarray, targets: np.ndarray,
                  prior_precision: float = 1.0,
                  model_noise_var: float = 1.0) -> "GaussianLinearPosterior":
        """Batch-fit a posterior from an (n, d) design and n targets."""
        features = np.atleast_2d(np.asarray(features, dtype=float))
        post = cls(features.shape[1], prior_precision, model_noise_var)
        if features.shape[0]:
            post.absorb_batch(features, targets)
        return post

    def copy(self) -> "GaussianLinearPosterior":
        """Independent copy; the cached Cholesky factor is carried over."""
        other = self.__class__(self.dim, self.prior_precision, self.model_noise_var)
        other.precision = self.precision.copy()
        other.pw_mean = self.pw_mean.copy()
        other._chol = None if self._chol is None else self._chol.copy()
        return other

    def _validate_phi(self, phi: np.ndarray) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.dim,):
            raise ValueError(f"feature must have shape ({self.dim},), got {phi.shape}")
        if not np.all(np.isfinite(phi)):
            raise ValueError("feature vector contains non-finite entries")
        return phi

    def absorb(self, phi: np.ndarray, y: float) -> "GaussianLinearPosterior":
        """Fold one observation ``(phi, y)`` into the posterior, in place.

        Returns
        -------
        GaussianLinearPosterior
            ``self``, updated.  A zero feature vector is a no-op.
        """
        phi = self._validate_phi(phi)
        y = float(y)
        if not np.isfinite(y):
            raise ValueError(f"target must be finite, got {y}")
        if phi @ phi > FEATURE_NORM_BOUND ** 2:
            warnings.warn(
                f"feature norm {np.linalg.norm(phi):.6g} exceeds 1; updates are "
                "still exact but downstream normalisation may be missing",
                stacklevel=2,
            )
        self.precision += np.outer(phi, phi) / self.model_noise_var
        # re-symmetrise to bound floating-point drift over long runs
        self.precision = 0.5 * (self.precision + self.precision.T)
        self.pw_mean += phi * (y / self.model_noise_var)
        self._chol = None
        return self

    def absorb_batch(self, features: np.ndarray,
                     targets: np.ndarray) -> "GaussianLinearPosterior":
        """Fold a batch of observations in one sufficient-statistics update."""
        features = np.asarray(features, dtype=float)
        targets = np.asarray(targets, dtype=float)
        if features.ndim != 2 or features.shape[1] != self.dim:
            raise ValueError(f"features must have shape (n, {self.dim})")
        if targets.shape != (features.shape[0],):
            raise ValueError("targets must be one per feature row")
        if not (np.all(np.isfinite(features)) and np.all(np.isfinite(targets))):
            raise ValueError("batch contains non-finite entries")
        self.precision += features.T @ features / self.model_noise_var
        self.precision = 0.5 * (self.precision + self.precision.T)
        self.pw_mean += features.T @ targets / self.model_noise_var
        self._chol = None
        return self

    def _lower_chol(self) -> np.ndarray:
        # scipy raises LinAlgError (numerical degeneracy) if the precision
        # matrix is not positive definite.
        if self._chol is None:
            self._chol = cholesky(self.precision, lower=True)
        return self._chol

    def mean(self) -> np.ndarray:
        """Posterior mean, solved from the precision-weighted mean."""
        return cho_solve((self._lower_chol(), True), self.pw_mean)

    def logdet(self) -> float:
        """Log-determinant of the precision matrix."""
        return float(2.0 * np.sum(np.log(np.diag(self._lower_chol()))))

    def project_var(self, phi: np.ndarray) -> float:
        """Posterior variance of the scalar projection ``phi @ w``.

        Computed as ``|| L^{-1} phi ||^2`` with one triangular solve; never
        forms the explicit covariance matrix.
        """
        phi = self._validate_phi(phi)
        u = solve_triangular(self._lower_chol(), phi, lower=True)
        return float(u @ u)

    def project_var_many(self, features: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`project_var` over the rows of an (m, d) matrix."""
        features = np.asarray(features, dtype=float)
        u = solve_triangular(self._lower_chol(), features.T, lower=True)
        return np.einsum("ij,ij->j", u, u)

    def info_gain(self, phi: np.ndarray) -> float:
        """Expected information (nats) from observing the channel at ``phi``.

        Equals ``0.5 * log(1 + var(phi @ w) / model_noise_var)``, which is
        also the log-determinant increment the matching ``absorb`` would
        produce.  Zero exactly when the projection variance is zero.
        """
        return float(0.5 * np.log1p(self.project_var(phi) / self.model_noise_var))

    def info_gain_many(self, features: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`info_gain` over the rows of an (m, d) matrix."""
        return 0.5 * np.log1p(self.project_var_many(features) / self.model_noise_var)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """One draw ``w ~ N(mean, precision^{-1})``.

        Uses ``mean + L^{-T} z`` with ``L`` the lower Cholesky factor of the
        precision matrix and ``z`` standard normal; deterministic given the
        generator state.
        """
        z = rng.standard_normal(self.dim)
        return self.mean() + solve_triangular(self._lower_chol(), z, lower=True, trans=1)

    def sample_many(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` independent posterior draws, returned as an (n, d) array."""
        z = rng.standard_normal((self.dim, int(n)))
        offsets = solve_triangular(self._lower_chol(), z, lower=True, trans=1)
        return self.mean()[None, :] + offsets.T
