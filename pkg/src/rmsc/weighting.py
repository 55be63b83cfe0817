"""Self-paced sample weighting through a convex regularizer and its conjugate.

A regularizer ``psi`` on a weight ``p >= 0`` induces a concave latent loss
``phi(l) = min_p {p*l + psi(p)}`` whose argmin ``sigma(l)`` maps a sample's
reconstruction loss to its weight. Larger losses give smaller weights.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np


@runtime_checkable
class Regularizer(Protocol):
    """The ``(psi, phi, sigma)`` trio used by the weight update."""

    def psi(self, p): ...

    def latent_loss(self, ell): ...

    def minimizer(self, ell): ...


@dataclass(frozen=True)
class WeightRegularizer:
    """``psi(p) = gamma*p + 1/p - 2`` with latent loss ``2(sqrt(gamma + l) - 1)``.

    ``psi`` goes negative for ``gamma < 1`` near ``p = 1``; it is evaluated
    as written and never clamped.
    """

    gamma: float = 1e-5

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")

    def psi(self, p):
        p = np.asarray(p, dtype=np.float64)
        if np.any(p <= 0):
            raise ValueError("psi is defined only for p > 0")
        out = self.gamma * p + 1.0 / p - 2.0
        return out if out.ndim else float(out)

    def latent_loss(self, ell):
        ell = np.asarray(ell, dtype=np.float64)
        if np.any(ell < 0):
            raise ValueError("latent loss needs ell >= 0")
        out = 2.0 * (np.sqrt(self.gamma + ell) - 1.0)
        return out if out.ndim else float(out)

    def minimizer(self, ell):
        ell = np.asarray(ell, dtype=np.float64)
        if np.any(ell < 0):
            raise ValueError("minimizer needs ell >= 0")
        s = self.gamma + ell
        if np.any(s <= 0):
            raise ZeroDivisionError("gamma + ell = 0: weight is unbounded (use gamma > 0)")
        out = 1.0 / np.sqrt(s)
        return out if out.ndim else float(out)


def psi(reg: Regularizer, p):
    return reg.psi(p)


def latent_loss(reg: Regularizer, ell):
    return reg.latent_loss(ell)


def minimizer(reg: Regularizer, ell):
    return reg.minimizer(ell)


def conjugacy_residual(reg: Regularizer, ell: float, grid) -> float:
    """Gap between a grid minimum of ``p*ell + psi(p)`` and ``phi(ell)``.

    Small residuals confirm that ``phi`` is the pointwise minimum of the
    weighted loss over ``p``, provided the grid brackets ``sigma(ell)``.
    """
    grid = np.asarray(grid, dtype=np.float64).ravel()
    if grid.size == 0:
        raise ValueError("empty search grid")
    if np.any(grid <= 0):
        raise ValueError("grid entries must be positive")
    values = grid * ell + reg.psi(grid)
    return float(abs(values.min() - reg.latent_loss(ell)))
