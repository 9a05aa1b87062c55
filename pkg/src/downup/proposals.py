"""Symmetric Gaussian jumping rules shared by every kernel.

A proposal is immutable after construction and safe to share across
chains; randomness comes only from the generator passed to :meth:`draw`.
"""

from __future__ import annotations

import numpy as np


class GaussianProposal:
    """Random-walk Gaussian proposal with fixed covariance.

    The rule is symmetric by construction: the density of drawing ``b``
    centered at ``a`` equals that of drawing ``a`` centered at ``b``.

    Attributes:
        dim: State dimension.
        covariance: Symmetric positive-definite matrix, shape ``(d, d)``.
        chol: Its lower-triangular Cholesky factor.
    """

    def __init__(self, covariance):
        cov = np.atleast_2d(np.asarray(covariance, dtype=float))
        if cov.shape[0] != cov.shape[1]:
            raise ValueError("covariance must be square")
        if not np.allclose(cov, cov.T, atol=1e-12, rtol=0.0):
            raise ValueError("covariance must be symmetric to 1e-12")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as err:
            raise ValueError("covariance is not positive definite") from err
        self.dim = cov.shape[0]
        self.covariance = cov
        self.chol = chol

    @classmethod
    def isotropic(cls, dim: int, sigma: float) -> "GaussianProposal":
        """sigma^2 * I_d."""
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        return cls(sigma ** 2 * np.eye(dim))

    @classmethod
    def rw_default(cls, dim: int) -> "GaussianProposal":
        """The standard random-walk tuning preset (2.38^2 / d) * I_d."""
        return cls(2.38 ** 2 / dim * np.eye(dim))

    @classmethod
    def from_config(cls, dim: int, spec) -> "GaussianProposal":
        """Build from a config value: scalar sigma or row-major matrix."""
        if np.isscalar(spec):
            return cls.isotropic(dim, float(spec))
        return cls(np.asarray(spec, dtype=float).reshape(dim, dim))

    def draw(self, center, rng) -> np.ndarray:
        """One draw centered at ``center``: center + L @ z, z ~ N(0, I)."""
        return center + self.chol @ rng.standard_normal(self.dim)


def adapt_from_sample(draws) -> GaussianProposal:
    """Proposal whose covariance is the sample covariance of ``draws``.

    Uses the n-1 denominator.  If the Cholesky factorization fails, a
    single retry adds 1e-10 * trace/d of jitter to the diagonal; a second
    failure (degenerate draws) is a hard error.

    Args:
        draws: Array-like of shape ``(n, d)`` with ``n >= d + 1``.
    """
    arr = np.atleast_2d(np.asarray(draws, dtype=float))
    n, d = arr.shape
    if n < d + 1:
        raise ValueError(f"need at least {d + 1} draws to adapt in dimension {d}")
    cov = np.cov(arr, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    try:
        return GaussianProposal(cov)
    except ValueError:
        jitter = 1e-10 * np.trace(cov) / d
        try:
            return GaussianProposal(cov + jitter * np.eye(d))
        except ValueError as err:
            raise ValueError(
                "sample covariance is not positive definite even after jitter; "
                "burn-in draws are degenerate"
            ) from err
