"""Multiquadric trigonometric kernels on the unit torus.

The building block is the 1-periodic MQ trigonometric function

    phi_c(x) = sqrt(c**2 + sin(pi x)**2) / (2 pi),

from which two operator kernels are formed: the continuous
``Psi_c = phi_c'' + pi**2 phi_c`` and its trigonometric second divided
difference ``Psi_{c,h}`` with step ``h``.  Every routine accepts scalars or
numpy arrays for ``x`` and broadcasts.  No range reduction is applied to
``x``: ``sin(pi x)**2`` is already 1-periodic.

Only derivative orders 0, 1 and 2 are implemented (closed forms).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CapabilityError, DomainError, SingularityError

__all__ = [
    "MAX_ORDER",
    "KernelSpec",
    "eval_phi",
    "eval_psi_c",
    "eval_psi_ch",
    "eval_tensor_kernel",
    "eval_weighted_psi",
    "quadrature_weight",
]

MAX_ORDER = 2
PI = np.pi


def _check_order(order: int) -> None:
    if order not in (0, 1, 2):
        raise CapabilityError(f"derivative order {order} not supported (0..{MAX_ORDER})")


def eval_phi(c: float, x, order: int = 0):
    """Evaluate the ``order``-th derivative of ``phi_c`` at ``x``.

    Parameters
    ----------
    c : float
        Shape parameter, ``c >= 0``.  ``c = 0`` gives the trigonometric
        B-spline limit ``|sin(pi x)| / (2 pi)`` which is only differentiable
        away from the integers.
    x : float or ndarray
        Evaluation points (any real numbers).
    order : {0, 1, 2}
        Derivative order.

    Returns
    -------
    float or ndarray
    """
    _check_order(order)
    if c < 0:
        raise DomainError(f"shape parameter must be non-negative, got {c}")
    x = np.asarray(x, dtype=float)
    sin_px = np.sin(PI * x)
    s = np.sqrt(c * c + sin_px * sin_px)
    if order == 0:
        out = s / (2.0 * PI)
    else:
        if c == 0.0 and np.any(s == 0.0):
            raise SingularityError("phi_0 is not differentiable where sin(pi x) = 0")
        sin_2px = np.sin(2.0 * PI * x)
        if order == 1:
            out = sin_2px / (4.0 * s)
        else:
            out = PI * np.cos(2.0 * PI * x) / (2.0 * s) - PI * sin_2px**2 / (8.0 * s**3)
    return out[()] if out.ndim == 0 else out


def eval_psi_c(c: float, x):
    """Closed form of ``Psi_c(x) = phi_c''(x) + pi**2 phi_c(x)``.

    ``Psi_c = pi c^2 (c^2 + 1) / (2 (c^2 + sin^2(pi x))^{3/2})``, strictly
    positive and integrating to ``1 + O(c^2 |ln c|)`` over the torus.
    """
    if not c > 0:
        raise DomainError(f"Psi_c requires c > 0, got {c}")
    x = np.asarray(x, dtype=float)
    s2 = c * c + np.sin(PI * x) ** 2
    out = PI * c * c * (c * c + 1.0) / (2.0 * s2 * np.sqrt(s2))
    return out[()] if out.ndim == 0 else out


def _check_step(h: float, closed: bool = False) -> None:
    ok = 0.0 < h <= 0.5 if closed else 0.0 < h < 0.5
    if not ok:
        bound = "]" if closed else ")"
        raise DomainError(f"step h must lie in (0, 1/2{bound}, got {h}")


def _psi_numerator(c: float, h: float, x: np.ndarray, order: int) -> np.ndarray:
    # pi * [phi(x+h) - 2 cos(pi h) phi(x) + phi(x-h)] / sin(pi h)
    if order == 0:
        s_mid = np.sqrt(c * c + np.sin(PI * x) ** 2)
        s_hi = np.sqrt(c * c + np.sin(PI * (x + h)) ** 2)
        s_lo = np.sqrt(c * c + np.sin(PI * (x - h)) ** 2)
        with np.errstate(invalid="ignore", divide="ignore"):
            # first differences divided by sin(pi h)
            up = np.sin(PI * (2.0 * x + h)) / (2.0 * PI * (s_hi + s_mid))
            down = np.sin(PI * (2.0 * x - h)) / (2.0 * PI * (s_mid + s_lo))
        if c == 0.0:
            # 0/0 only when both endpoints vanish, impossible for 0 < h <= 1/2
            up = np.where(s_hi + s_mid == 0.0, 0.0, up)
            down = np.where(s_mid + s_lo == 0.0, 0.0, down)
        center = 2.0 * np.tan(0.5 * PI * h) * s_mid / (2.0 * PI)
        return PI * (up - down + center)
    p_mid = eval_phi(c, x, order)
    p_hi = eval_phi(c, x + h, order)
    p_lo = eval_phi(c, x - h, order)
    num = (p_hi - p_mid) - (p_mid - p_lo) + 4.0 * np.sin(0.5 * PI * h) ** 2 * p_mid
    return PI * np.asarray(num) / np.sin(PI * h)


def eval_psi_ch(c: float, h: float, x, order: int = 0):
    """Derivative of the divided-difference kernel ``Psi_{c,h}``.

    ``Psi_{c,h}(x) = 2 pi^2 [phi_c(x+h) - 2 cos(pi h) phi_c(x) + phi_c(x-h)]
    / (sin(2 pi h) sin(pi h))``; the derivative is the same divided
    difference applied to ``phi_c^{(order)}``.

    The numerator is regrouped as two first differences plus
    ``4 sin^2(pi h / 2) phi_c(x)``.  For ``order = 0`` the first differences
    use ``sin^2 a - sin^2 b = sin(a + b) sin(a - b)`` so no cancellation
    occurs as ``h -> 0``.
    """
    _check_order(order)
    _check_step(h)
    if c < 0:
        raise DomainError(f"shape parameter must be non-negative, got {c}")
    x = np.asarray(x, dtype=float)
    out = np.asarray(2.0 * PI * _psi_numerator(c, h, x, order) / np.sin(2.0 * PI * h))
    return out[()] if out.ndim == 0 else out


def eval_weighted_psi(c: float, h: float, x, order: int = 0):
    """``D^order Psi_{c,h}(x) * quadrature_weight(h)`` without the cancelling factor.

    Finite on the whole range ``0 < h <= 1/2``; at ``h = 1/2`` (a level-1
    axis) the kernel itself is undefined but the weighted product is not.
    """
    _check_order(order)
    _check_step(h, closed=True)
    if c < 0:
        raise DomainError(f"shape parameter must be non-negative, got {c}")
    out = np.asarray(_psi_numerator(c, h, np.asarray(x, dtype=float), order))
    return out[()] if out.ndim == 0 else out


def quadrature_weight(h: float) -> float:
    """Per-axis node weight ``sin(2 pi h) / (2 pi)`` of the dyadic rule.

    With this weight the trigonometric B-spline limit reproduces constants
    exactly at the nodes; it equals ``h (1 + O(h^2))``.
    """
    return float(np.sin(2.0 * PI * h) / (2.0 * PI))


@dataclass(frozen=True)
class KernelSpec:
    """Per-coordinate shape parameters ``c`` and steps ``h``."""

    c: tuple[float, ...]
    h: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in self.c)
        h = tuple(float(v) for v in self.h)
        if len(c) == 0 or len(c) != len(h):
            raise DomainError(f"c and h must be non-empty and equally long, got {len(c)} and {len(h)}")
        for v in c:
            if v < 0:
                raise DomainError(f"negative shape parameter {v}")
        for v in h:
            _check_step(v, closed=True)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "h", h)

    @property
    def dim(self) -> int:
        return len(self.c)

    @classmethod
    def from_levels(cls, c: Sequence[float], levels: Sequence[int]) -> "KernelSpec":
        return cls(tuple(c), tuple(2.0 ** -int(l) for l in levels))


def eval_tensor_kernel(spec: KernelSpec, x, alpha: Sequence[int] | None = None):
    """``prod_k D^{alpha_k} Psi_{c_k,h_k}(x_k) * sin(2 pi h_k)``.

    ``x`` has shape ``(d,)`` or ``(npoints, d)``.  Axes with ``h_k = 1/2``
    are evaluated through the finite weighted product.
    """
    x = np.asarray(x, dtype=float)
    d = spec.dim
    if alpha is None:
        alpha = (0,) * d
    if x.shape[-1:] != (d,) or len(alpha) != d:
        raise DomainError(f"dimension mismatch: kernel d={d}, point shape {x.shape}, alpha {tuple(alpha)}")
    out = np.ones(x.shape[:-1])
    for k in range(d):
        out = out * 2.0 * PI * eval_weighted_psi(spec.c[k], spec.h[k], x[..., k], alpha[k])
    return out[()] if out.ndim == 0 else out
