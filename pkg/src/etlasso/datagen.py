"""Synthetic sparse regression problems with Gaussian designs.

Rows of ``X`` are iid ``N(0, Sigma)`` with ``Sigma`` the identity, an AR(1)
correlation ``rho^|i-j|`` or a compound-symmetric matrix (1 on the diagonal,
``rho`` elsewhere).  ``k`` coefficients equal ``+-beta_magnitude`` with
independent fair signs; the response adds ``N(0, noise_sd^2)`` noise.

All randomness comes from numpy's PCG64 generator.  Replication ``r`` of a
campaign seeded with ``s`` uses ``SeedSequence([s, r])``, so replications are
independent of each other and of execution order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import CholeskyFailure, ConfigError, InvalidRho


class CovKind(str, enum.Enum):
    INDEPENDENT = "independent"
    AR1 = "ar1"
    CS = "cs"


@dataclass(frozen=True)
class CovarianceSpec:
    kind: CovKind
    p: int
    rho: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CovKind(self.kind))
        if self.p < 1:
            raise ConfigError(f"dimension must be positive, got {self.p}")
        if self.kind is CovKind.AR1 and not -1 < self.rho < 1:
            raise InvalidRho(f"AR(1) needs rho in (-1, 1), got {self.rho}")
        if self.kind is CovKind.CS and not 0 <= self.rho < 1:
            raise InvalidRho(f"compound symmetry needs rho in [0, 1), got {self.rho}")

    @classmethod
    def parse(cls, text: str, p: int) -> "CovarianceSpec":
        """Parse ``independent``, ``ar1``, ``ar1:0.3``, ``cs`` or ``cs:0.1``.

        Without an explicit rho, AR(1) uses 0.5 and CS uses 0.25.
        """
        kind, _, rho = text.strip().lower().partition(":")
        try:
            kind = CovKind(kind)
        except ValueError:
            raise ConfigError(f"unknown covariance structure {text!r}") from None
        if kind is CovKind.INDEPENDENT:
            if rho:
                raise ConfigError("independent covariance takes no rho")
            return cls(kind, p)
        default = 0.5 if kind is CovKind.AR1 else 0.25
        try:
            value = float(rho) if rho else default
        except ValueError:
            raise ConfigError(f"bad rho in {text!r}") from None
        return cls(kind, p, value)

    def label(self) -> str:
        if self.kind is CovKind.INDEPENDENT:
            return "independent"
        return f"{self.kind.value}:{self.rho:g}"


def sigma_matrix(spec: CovarianceSpec) -> np.ndarray:
    p = spec.p
    if spec.kind is CovKind.INDEPENDENT:
        return np.eye(p)
    if spec.kind is CovKind.AR1:
        lag = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
        return spec.rho**lag
    sigma = np.full((p, p), spec.rho)
    np.fill_diagonal(sigma, 1.0)
    return sigma


@dataclass(frozen=True)
class SimConfig:
    n: int
    p: int
    k: int
    cov: CovarianceSpec
    beta_magnitude: float = 2.0
    noise_sd: float = 1.0
    seed: int = 0
    random_support: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}")
        if not 0 <= self.k <= self.p:
            raise ConfigError(f"need 0 <= k <= p, got k={self.k}, p={self.p}")
        if self.cov.p != self.p:
            raise ConfigError("covariance dimension does not match p")
        if self.noise_sd < 0:
            raise ConfigError("noise_sd must be nonnegative")


@dataclass(frozen=True)
class SimInstance:
    X: np.ndarray
    y: np.ndarray
    true_support: np.ndarray
    true_beta: np.ndarray = field(repr=False)


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, replication])))


def sample_design(spec: CovarianceSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` iid rows from ``N(0, Sigma)``.

    AR(1) uses the stationary recursion ``x_j = rho x_{j-1} + sqrt(1-rho^2) z_j``
    and CS a shared factor ``sqrt(rho) z_0 + sqrt(1-rho) z_j``; both are exact
    and avoid factorizing ``Sigma``.
    """
    p = spec.p
    z = rng.standard_normal((n, p))
    if spec.kind is CovKind.INDEPENDENT:
        return z
    if spec.kind is CovKind.AR1:
        x = np.empty_like(z)
        x[:, 0] = z[:, 0]
        scale = np.sqrt(1.0 - spec.rho**2)
        for j in range(1, p):
            x[:, j] = spec.rho * x[:, j - 1] + scale * z[:, j]
        return x
    z0 = rng.standard_normal((n, 1))
    return np.sqrt(spec.rho) * z0 + np.sqrt(1.0 - spec.rho) * z


def sample_cholesky(sigma: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Rows ``L z`` with ``L L' = sigma``, for arbitrary covariance matrices."""
    try:
        factor = linalg.cholesky(sigma, lower=True)
    except linalg.LinAlgError as exc:
        raise CholeskyFailure(str(exc)) from exc
    return rng.standard_normal((n, sigma.shape[0])) @ factor.T


def sample_instance(cfg: SimConfig, replication: int = 0) -> SimInstance:
    rng = replication_rng(cfg.seed, replication)
    X = sample_design(cfg.cov, cfg.n, rng)
    if cfg.random_support:
        support = np.sort(rng.choice(cfg.p, size=cfg.k, replace=False))
    else:
        support = np.arange(cfg.k)
    signs = np.where(rng.random(cfg.k) < 0.5, 1.0, -1.0)
    beta = np.zeros(cfg.p)
    beta[support] = signs * cfg.beta_magnitude
    y = X @ beta + cfg.noise_sd * rng.standard_normal(cfg.n)
    return SimInstance(X, y, support, beta)
