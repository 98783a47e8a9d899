"""Dynamic Whittle likelihood: index grid construction and evaluation.

The likelihood treats moving periodogram ordinates as independent
exponentials with mean f(t/T, lambda_j).  Thinning keeps every i-th block
of m consecutive time points; blocks are generated until their start
passes T and entries beyond T are dropped, so for i = 1 the grid is
exactly {1, ..., T} and thinned grids always cover the tail.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .periodogram import MovingPeriodogramSet, fourier_frequencies, mod_index


class EvaluationError(RuntimeError):
    """A likelihood term could not be evaluated (nonpositive f or bad data)."""


@dataclass(frozen=True)
class LikelihoodGrid:
    """(time, frequency) index set of a (thinned) dynamic Whittle likelihood."""

    thinning: int
    T: int
    m: int
    t: np.ndarray  # internal time indices, 1-based
    j: np.ndarray  # frequency indices, 1..m
    n_blocks: int  # B_i = ceil((T - m) / (i m))

    @property
    def u(self) -> np.ndarray:
        """Rescaled times t / T."""
        return self.t / self.T

    @property
    def lam(self) -> np.ndarray:
        """Rescaled frequencies of each entry."""
        return 2.0 * self.j / (2 * self.m + 1)

    def __len__(self):
        return self.t.size


def build_grid(T: int, m: int, thinning: int = 1) -> LikelihoodGrid:
    """Build the (thinned) likelihood index grid."""
    if thinning not in (1, 2, 3):
        raise ValueError("thinning factor must be 1, 2 or 3")
    if m < 1 or T < m:
        raise ValueError(f"need T >= m >= 1, got T={T}, m={m}")
    i = thinning
    ts = []
    l = 1
    while i * (l - 1) * m + 1 <= T:
        start = i * (l - 1) * m
        stop = min(start + m, T)
        ts.append(np.arange(start + 1, stop + 1))
        l += 1
    t = np.concatenate(ts)
    j = mod_index(t, m)
    return LikelihoodGrid(
        thinning=i,
        T=T,
        m=m,
        t=t,
        j=j,
        n_blocks=ceil((T - m) / (i * m)),
    )


def log_dynamic_whittle(
    surface,
    periodograms: MovingPeriodogramSet,
    grid: LikelihoodGrid,
) -> float:
    """Log of the (thinned) dynamic Whittle likelihood.

    ``surface`` is either a vectorized callable f(u, lam) or an array of
    surface values aligned with the grid entries.
    """
    if grid.T != periodograms.T or grid.m != periodograms.m:
        raise ValueError("grid and periodogram set do not match")
    mi = periodograms.ordinates[grid.t - 1]
    f = surface if isinstance(surface, np.ndarray) else np.asarray(surface(grid.u, grid.lam))
    bad = ~(np.isfinite(f) & (f > 0.0) & np.isfinite(mi))
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise EvaluationError(
            f"non-finite likelihood term at t={int(grid.t[idx])}, j={int(grid.j[idx])}"
        )
    return float(np.sum(-np.log(f) - mi / f))


def grid_frequencies(m: int) -> np.ndarray:
    """Convenience re-export of the Fourier frequency ladder."""
    return fourier_frequencies(m)
