"""Bernstein-polynomial tv-PSD surfaces over the unit square.

A surface is tau times a mixture of tensor products of truncated-dilated
beta densities; the mixture weights come from a truncated stick-breaking
measure whose atoms are binned by degree.  Truncation of the beta basis
to [xi_left, xi_right] keeps every basis value bounded away from 0 and
infinity, so evaluation never needs log space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .special import betainc_reg


@dataclass(frozen=True)
class BetaBasisConfig:
    """Truncation points of the dilated beta basis."""

    xi_left: float = 0.1
    xi_right: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.xi_left < self.xi_right < 1.0:
            raise ValueError("need 0 < xi_left < xi_right < 1")


DEFAULT_BASIS = BetaBasisConfig()

# Normalizing constants of the truncated basis, keyed by (a, b, xi_l, xi_r).
_NORM_CACHE: dict[tuple, float] = {}


def _beta_pdf(y, a, b):
    """Standard beta density; broadcasts over all arguments."""
    y = np.asarray(y, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ln = (
            gammaln(a + b)
            - gammaln(a)
            - gammaln(b)
            + np.where(a == 1.0, 0.0, (a - 1.0) * np.log(y))
            + np.where(b == 1.0, 0.0, (b - 1.0) * np.log1p(-y))
        )
    return np.exp(ln)


def _norm_const(a: int, b: int, cfg: BetaBasisConfig) -> float:
    key = (a, b, cfg.xi_left, cfg.xi_right)
    c = _NORM_CACHE.get(key)
    if c is None:
        mass = betainc_reg(a, b, cfg.xi_right) - betainc_reg(a, b, cfg.xi_left)
        c = (cfg.xi_right - cfg.xi_left) / mass
        _NORM_CACHE[key] = c
    return c


def truncated_beta_density(x, a: int, b: int, cfg: BetaBasisConfig = DEFAULT_BASIS):
    """Truncated-dilated beta density on [0, 1] with integer shapes (a, b)."""
    if a < 1 or b < 1:
        raise ValueError("shape parameters must be integers >= 1")
    x = np.asarray(x, dtype=float)
    y = cfg.xi_left + x * (cfg.xi_right - cfg.xi_left)
    return _norm_const(int(a), int(b), cfg) * _beta_pdf(y, a, b)


def basis_matrix(x, k: int, cfg: BetaBasisConfig = DEFAULT_BASIS) -> np.ndarray:
    """Truncated basis values beta~(x; j, k-j+1) for j = 1..k, shape (k, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = cfg.xi_left + x * (cfg.xi_right - cfg.xi_left)
    j = np.arange(1, k + 1)[:, None]
    vals = _beta_pdf(y[None, :], j, k - j + 1)
    consts = np.array([_norm_const(int(jj), int(k - jj + 1), cfg) for jj in range(1, k + 1)])
    return consts[:, None] * vals


def standard_basis_matrix(x, k: int) -> np.ndarray:
    """Untruncated basis beta(x; j, k-j+1), j = 1..k; rows sum to k at every x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    j = np.arange(1, k + 1)[:, None]
    return _beta_pdf(x[None, :], j, k - j + 1)


def stick_weights(V) -> np.ndarray:
    """Weights (p_0, p_1, ..., p_L) of a truncated stick-breaking measure.

    p_l = V_l * prod_{r<l} (1 - V_r) for l >= 1; p_0 absorbs the remainder
    so the weights always sum to one.
    """
    V = np.asarray(V, dtype=float)
    if V.size and (np.any(V <= 0.0) | np.any(V >= 1.0)):
        raise ValueError("sticks must lie strictly inside (0, 1)")
    remain = np.concatenate(([1.0], np.cumprod(1.0 - V)))
    p = remain[:-1] * V
    return np.concatenate(([max(remain[-1], 0.0)], p))


@dataclass(frozen=True)
class StickBreakingMeasure:
    """Truncated Sethuraman representation with L sticks and L + 1 atoms."""

    V: np.ndarray
    W1: np.ndarray
    W2: np.ndarray

    def __post_init__(self):
        V = np.asarray(self.V, dtype=float)
        W1 = np.asarray(self.W1, dtype=float)
        W2 = np.asarray(self.W2, dtype=float)
        if W1.size != V.size + 1 or W2.size != V.size + 1:
            raise ValueError("need L sticks and L + 1 atoms per coordinate")
        for w in (W1, W2):
            if np.any(w < 0.0) or np.any(w > 1.0):
                raise ValueError("atoms must lie in [0, 1]")
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "W1", W1)
        object.__setattr__(self, "W2", W2)

    @property
    def L(self) -> int:
        return self.V.size

    def weights(self) -> np.ndarray:
        return stick_weights(self.V)


def atom_bins(k: int, W) -> np.ndarray:
    """Map atoms in [0, 1] to basis indices ceil(k W) clamped to >= 1."""
    return np.maximum(1, np.ceil(k * np.asarray(W, dtype=float)).astype(int))


@dataclass(frozen=True)
class SurfaceParams:
    """One tv-PSD surface: scale, degrees and mixing measure."""

    tau: float
    k1: int
    k2: int
    measure: StickBreakingMeasure
    basis: BetaBasisConfig = field(default_factory=BetaBasisConfig)

    def __post_init__(self):
        if not self.tau > 0.0:
            raise ValueError("tau must be positive")
        if self.k1 < 1 or self.k2 < 1:
            raise ValueError("degrees must be >= 1")


def weights_from_measure(k1: int, k2: int, measure: StickBreakingMeasure) -> np.ndarray:
    """Bin masses of the measure on the k1 x k2 dyadic-style grid."""
    p = measure.weights()
    j1 = atom_bins(k1, measure.W1) - 1
    j2 = atom_bins(k2, measure.W2) - 1
    w = np.zeros((k1, k2))
    np.add.at(w, (j1, j2), p)
    return w


def evaluate_surface(params: SurfaceParams, u, lam) -> np.ndarray:
    """Evaluate the surface pointwise; ``u`` and ``lam`` broadcast."""
    u = np.asarray(u, dtype=float)
    lam = np.asarray(lam, dtype=float)
    u, lam = np.broadcast_arrays(u, lam)
    shape = u.shape
    uf, lf = u.ravel(), lam.ravel()

    m = params.measure
    p = m.weights()
    j1 = atom_bins(params.k1, m.W1)
    j2 = atom_bins(params.k2, m.W2)
    bu = basis_matrix(uf, params.k1, params.basis)
    bl = basis_matrix(lf, params.k2, params.basis)
    vals = params.tau * np.einsum("l,lx,lx->x", p, bu[j1 - 1], bl[j2 - 1])
    return vals.reshape(shape) if shape else float(vals[0])
