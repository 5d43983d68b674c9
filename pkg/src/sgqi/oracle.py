"""Brute-force references for tests: torus quadrature and finite differences.

Nothing here touches the interpolant evaluation path; kernels are taken
pointwise from :mod:`sgqi.kernel` and integrated with the composite
midpoint rule, which is spectrally accurate for smooth periodic integrands.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ResourceError
from .kernel import eval_phi, eval_psi_c, eval_psi_ch

__all__ = [
    "QuadratureSpec",
    "integrate_psi_c",
    "integrate_abs_phi2",
    "convolve",
    "finite_diff",
    "midpoint_nodes",
]

MAX_DIM = 3
DEFAULT_BUDGET = 1 << 24


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite midpoint rule with ``resolution`` nodes per axis."""

    resolution: int = 1 << 16
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        r = self.resolution
        if r < 2 or r & (r - 1):
            raise DomainError(f"resolution must be a power of two >= 2, got {r}")


def midpoint_nodes(resolution: int) -> np.ndarray:
    return (np.arange(resolution) + 0.5) / resolution


def _mean(values: np.ndarray) -> float:
    # numpy's pairwise summation keeps the rounding error at O(log N) ulps
    return float(np.sum(values) / values.size)


def integrate_psi_c(c: float, q: QuadratureSpec = QuadratureSpec()) -> float:
    """Midpoint value of the integral of ``Psi_c`` over one period."""
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    return _mean(eval_psi_c(c, midpoint_nodes(q.resolution)))


def integrate_abs_phi2(c: float, q: QuadratureSpec = QuadratureSpec()) -> float:
    """Midpoint value of the integral of ``|phi_c''|`` over one period."""
    if not c > 0:
        raise DomainError(f"c must be positive, got {c}")
    return _mean(np.abs(eval_phi(c, midpoint_nodes(q.resolution), 2)))


def convolve(f: Callable[[np.ndarray], np.ndarray], c: Sequence[float], h: Sequence[float], x,
             alpha: Sequence[int] | None = None, q: QuadratureSpec = QuadratureSpec(1 << 12)) -> float:
    """Midpoint quadrature of ``int f(t) prod_k D^{alpha_k} Psi_{c_k,h_k}(x_k - t_k) dt``.

    ``f`` takes points of shape ``(npoints, d)``.  Only ``d <= 3``.
    """
    c, h = tuple(c), tuple(h)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = len(c)
    if not (len(h) == d == x.size):
        raise DomainError("c, h and x must have the same length")
    if d > MAX_DIM:
        raise DomainError(f"oracle convolution is limited to d <= {MAX_DIM}, got {d}")
    if q.resolution**d > q.budget:
        raise ResourceError(f"{q.resolution}**{d} quadrature nodes exceed budget {q.budget}")
    alpha = tuple(alpha) if alpha is not None else (0,) * d
    t = midpoint_nodes(q.resolution)
    factors = [eval_psi_ch(c[k], h[k], x[k] - t, alpha[k]) for k in range(d)]
    mesh = np.meshgrid(*([t] * d), indexing="ij")
    fv = np.asarray(f(np.stack([m.ravel() for m in mesh], axis=-1)), dtype=float).reshape((q.resolution,) * d)
    kern = factors[0]
    for fac in factors[1:]:
        kern = np.multiply.outer(kern, fac)
    return float(np.sum(fv * kern) / q.resolution**d)


_STENCILS = {
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
}


def finite_diff(fn: Callable[[float], float], x: float, order: int = 1, step: float = 1e-4) -> float:
    """Central difference of ``fn`` at ``x`` (orders 1 and 2)."""
    if order not in _STENCILS:
        raise DomainError(f"finite differences implemented for orders 1 and 2, got {order}")
    return sum(w * float(fn(x + k * step)) for k, w in _STENCILS[order]) / step**order


def grid_points(axes: Sequence[np.ndarray]) -> np.ndarray:
    """Flattened tensor grid, ``ij`` order."""
    return np.array(list(itertools.product(*axes)), dtype=float)
