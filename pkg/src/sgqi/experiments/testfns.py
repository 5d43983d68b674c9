"""Benchmark targets: a periodic product polynomial and a non-periodic quadratic product.

The periodic factor ``g(x) = u^6/5 - u^4 + 7u^2/5`` with ``u = 2x - 1``
has matching values and first four derivatives at 0 and 1, so the product
``f_d(x) = prod_j g(x_j)`` lies in ``W^4_inf`` of the torus but not ``C^5``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import CapabilityError, DomainError

__all__ = ["poly_factor", "test_fn_periodic", "test_fn_nonperiodic", "periodic_target", "nonperiodic_target"]


def poly_factor(x, order: int = 0):
    """``g`` or its first or second derivative."""
    u = 2.0 * np.asarray(x, dtype=float) - 1.0
    if order == 0:
        return u**6 / 5.0 - u**4 + 7.0 * u**2 / 5.0
    if order == 1:
        return 2.0 * (6.0 * u**5 / 5.0 - 4.0 * u**3 + 14.0 * u / 5.0)
    if order == 2:
        return 4.0 * (6.0 * u**4 - 12.0 * u**2 + 14.0 / 5.0)
    raise CapabilityError(f"derivative order {order} of the test polynomial is not provided")


def _alpha_on_first(alpha, d: int) -> int:
    if alpha is None:
        return 0
    if np.ndim(alpha) == 0:
        return int(alpha)
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != d:
        raise DomainError(f"alpha {alpha} has wrong length for d={d}")
    if any(alpha[1:]):
        raise CapabilityError("only derivatives with respect to the first coordinate are provided")
    return alpha[0]


def test_fn_periodic(d: int, x, alpha: int | Sequence[int] | None = None):
    """``D^alpha f_d`` at points ``x`` of shape ``(d,)`` or ``(npoints, d)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != d:
        raise DomainError(f"points must have {d} coordinates, got shape {x.shape}")
    a = _alpha_on_first(alpha, d)
    out = poly_factor(x[..., 0], a)
    for k in range(1, d):
        out = out * poly_factor(x[..., k])
    return out[()] if np.ndim(out) == 0 else out


def test_fn_nonperiodic(d: int, y):
    """``prod_j (y_j^2 - y_j + 3/4)`` on ``[-1/2, 1/2]^d``."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != d:
        raise DomainError(f"points must have {d} coordinates, got shape {y.shape}")
    out = np.prod(y * y - y + 0.75, axis=-1)
    return out[()] if np.ndim(out) == 0 else out


def periodic_target(d: int, alpha: int = 0):
    """Callable on ``(npoints, d)`` arrays, as expected by the samplers."""
    return lambda pts: test_fn_periodic(d, pts, (alpha,) + (0,) * (d - 1))


def nonperiodic_target(d: int):
    return lambda pts: test_fn_nonperiodic(d, pts)


def periodic_on_grid(axes: Sequence[np.ndarray], alpha: int = 0) -> np.ndarray:
    """``D^alpha f_d`` on a tensor grid, built from per-axis factors."""
    out = np.ones([len(a) for a in axes])
    d = len(axes)
    for k, a in enumerate(axes):
        fac = poly_factor(a, alpha if k == 0 else 0)
        out = out * fac.reshape((1,) * k + (-1,) + (1,) * (d - k - 1))
    return out


# keep pytest from collecting these when imported into test modules
test_fn_periodic.__test__ = False
test_fn_nonperiodic.__test__ = False
