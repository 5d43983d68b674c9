"""Torus-to-cube transformations and the non-periodic quasi-interpolant.

A function ``g`` on the cube is made periodic by

    f(t) = g(gamma(x)) * prod_j sqrt(omega_j(gamma_j(x_j)) * gamma_j'(x_j)),

where ``x`` is the torus point ``t`` shifted into the transform domain.
The periodic interpolant ``Q f`` is mapped back with

    Qg(y) = sqrt(rho(y) / omega(y)) * Q f(gamma^{-1}(y)),

``rho = (gamma^{-1})'`` being the density.  Errors are measured in the
matching weighted sup norm, where ``sqrt(omega / rho) (g - Qg)`` equals
the periodic residual ``f - Q f`` at the preimage.

The logarithmic map on ``[-1/2, 1/2]`` is written as
``gamma(x) = tanh(eta * artanh(2x)) / 2``, which equals the rational form
``((1+2x)^eta - (1-2x)^eta) / (2((1+2x)^eta + (1-2x)^eta))`` and gives the
inverse ``tanh(artanh(2y) / eta) / 2`` directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DataError, DomainError, SingularityError
from .periodic import QuasiInterpolant, SampledField, ShapePolicy, _subgrid_points, ENDPOINT_POLICIES
from .sparse_grid import DEFAULT_NODE_BUDGET, CombinationPlan, _check_budget, combination_plan, full_plan

__all__ = [
    "TransformSpec",
    "DensitySpec",
    "periodize_samples",
    "NonPeriodicQuasiInterpolant",
    "build_nonperiodic",
    "evaluate_nonperiodic",
    "weighted_residual",
    "weighted_residual_grid",
    "weighted_sup_error",
    "vanishing_boundary_derivatives",
]

KINDS = {"logarithmic": (-0.5, 0.5), "identity": (0.0, 1.0)}


def _unit(y):
    return np.ones_like(np.asarray(y, dtype=float))


@dataclass(frozen=True, eq=False)
class TransformSpec:
    """Per-axis torus-to-cube map with optional product weight ``omega``.

    ``eta`` is ignored for ``kind="identity"`` apart from fixing ``d``.
    """

    kind: str = "logarithmic"
    eta: tuple[float, ...] = (4.0,)
    weights: tuple[Callable, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown transform kind {self.kind!r}, expected one of {sorted(KINDS)}")
        eta = tuple(float(e) for e in self.eta)
        if not eta or any(not e > 0 for e in eta):
            raise DomainError(f"eta must be a non-empty vector of positive reals, got {eta}")
        object.__setattr__(self, "eta", eta)
        if self.weights is not None and len(self.weights) != len(eta):
            raise DomainError(f"{len(self.weights)} weights for dimension {len(eta)}")

    @classmethod
    def logarithmic(cls, eta: float | Sequence[float], d: int | None = None) -> "TransformSpec":
        if np.ndim(eta) == 0:
            eta = (float(eta),) * (d or 1)
        return cls("logarithmic", tuple(eta))

    @classmethod
    def identity(cls, d: int) -> "TransformSpec":
        return cls("identity", (1.0,) * d)

    @property
    def dim(self) -> int:
        return len(self.eta)

    @property
    def domain(self) -> tuple[float, float]:
        return KINDS[self.kind]

    @property
    def unweighted(self) -> bool:
        return self.weights is None

    def weight(self, y, axis: int):
        fn = _unit if self.weights is None else self.weights[axis]
        return np.asarray(fn(np.asarray(y, dtype=float)), dtype=float)

    def _check(self, v, axis: int) -> np.ndarray:
        if not 0 <= axis < self.dim:
            raise DomainError(f"axis {axis} out of range for dimension {self.dim}")
        v = np.asarray(v, dtype=float)
        lo, hi = self.domain
        if np.any((v < lo) | (v > hi)) or np.any(np.isnan(v)):
            raise DomainError(f"argument outside [{lo}, {hi}] on axis {axis}")
        return v

    def forward(self, x, axis: int = 0):
        x = self._check(x, axis)
        if self.kind == "identity":
            out = x.copy()
        else:
            with np.errstate(divide="ignore"):
                out = 0.5 * np.tanh(self.eta[axis] * np.arctanh(2.0 * x))
        return out[()] if out.ndim == 0 else out

    def forward_deriv(self, x, axis: int = 0):
        x = self._check(x, axis)
        if self.kind == "identity":
            out = np.ones_like(x)
        else:
            eta = self.eta[axis]
            a = (1.0 + 2.0 * x) ** eta
            b = (1.0 - 2.0 * x) ** eta
            with np.errstate(divide="ignore"):
                out = 4.0 * eta * (1.0 - 4.0 * x * x) ** (eta - 1.0) / (a + b) ** 2
        return out[()] if out.ndim == 0 else out

    def inverse(self, y, axis: int = 0):
        y = self._check(y, axis)
        if self.kind == "identity":
            out = y.copy()
        else:
            with np.errstate(divide="ignore"):
                out = 0.5 * np.tanh(np.arctanh(2.0 * y) / self.eta[axis])
        return out[()] if out.ndim == 0 else out

    def density(self, y, axis: int = 0):
        """``rho(y) = 1 / gamma'(gamma^{-1}(y))``; singular where ``gamma'`` vanishes."""
        deriv = np.asarray(self.forward_deriv(self.inverse(y, axis), axis))
        if np.any(deriv == 0.0):
            raise SingularityError(f"density is unbounded at a boundary point on axis {axis}")
        out = 1.0 / deriv
        return out[()] if out.ndim == 0 else out

    def sample_factor(self, x, axis: int = 0) -> np.ndarray:
        """``sqrt(omega(gamma(x)) * gamma'(x))`` on one axis."""
        return np.sqrt(self.weight(self.forward(x, axis), axis) * np.asarray(self.forward_deriv(x, axis)))

    def to_dict(self) -> dict:
        if self.weights is not None:
            raise DomainError("custom weight callables cannot be serialized")
        return {"kind": self.kind, "eta": list(self.eta)}

    @classmethod
    def from_dict(cls, data: dict) -> "TransformSpec":
        return cls(data["kind"], tuple(data["eta"]))


@dataclass(frozen=True)
class DensitySpec:
    """Per-axis density view of a transform."""

    transform: TransformSpec

    def __call__(self, y, axis: int = 0):
        return self.transform.density(y, axis)

    def product(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.prod([self.transform.density(pts[:, k], k) for k in range(pts.shape[1])], axis=0)


def _torus_to_domain(t: np.ndarray, transform: TransformSpec) -> np.ndarray:
    return t + transform.domain[0]


def periodize_samples(g: Callable[[np.ndarray], np.ndarray], transform: TransformSpec,
                      plan: CombinationPlan, endpoint: str = "identify",
                      budget: int | None = DEFAULT_NODE_BUDGET) -> SampledField:
    """Sample the periodized version of ``g`` on every subgrid of ``plan``.

    ``g`` receives cube points of shape ``(npoints, d)``.  Nodes whose
    transform derivative vanishes get the exact value 0.
    """
    if endpoint not in ENDPOINT_POLICIES:
        raise DomainError(f"unknown endpoint policy {endpoint!r}")
    if plan.d != transform.dim:
        raise DomainError(f"plan dimension {plan.d} does not match transform dimension {transform.dim}")
    convention = ENDPOINT_POLICIES[endpoint]
    _check_budget(plan.total_samples(convention), budget)
    values = []
    for _, level in plan.items():
        pts = _subgrid_points(level, convention)
        x = _torus_to_domain(np.where(pts >= 1.0, pts - 1.0, pts), transform)
        y = np.stack([transform.forward(x[:, k], k) for k in range(plan.d)], axis=-1)
        factor = np.prod([transform.sample_factor(x[:, k], k) for k in range(plan.d)], axis=0)
        gy = np.asarray(g(y), dtype=float)
        if gy.shape != (len(pts),):
            raise DataError(f"g returned shape {gy.shape} for {len(pts)} points")
        bad = ~np.isfinite(gy)
        if bad.any():
            i = int(np.argmax(bad))
            raise DataError(f"non-finite value {gy[i]} of g at {tuple(y[i].tolist())} (subgrid {level})")
        vals = np.where(factor == 0.0, 0.0, gy * factor)
        values.append(vals.reshape([2**l + (convention == "cube") for l in level]))
    return SampledField(plan, tuple(values), endpoint)


class NonPeriodicQuasiInterpolant:
    """Quasi-interpolant of a cube function built from periodized samples."""

    def __init__(self, periodic: QuasiInterpolant, transform: TransformSpec):
        if periodic.d != transform.dim:
            raise DomainError(f"interpolant dimension {periodic.d} does not match transform {transform.dim}")
        self.periodic = periodic
        self.transform = transform

    @property
    def d(self) -> int:
        return self.periodic.d

    def preimage(self, points) -> np.ndarray:
        """Torus coordinates ``gamma^{-1}(y) - lower`` of cube points."""
        pts = np.asarray(points, dtype=float)
        return np.stack([self.transform.inverse(pts[:, k], k) for k in range(self.d)], axis=-1) \
            - self.transform.domain[0]

    def _scale(self, points: np.ndarray) -> np.ndarray:
        t = self.transform
        rho = np.prod([t.density(points[:, k], k) for k in range(self.d)], axis=0)
        omega = np.prod([t.weight(points[:, k], k) for k in range(self.d)], axis=0)
        return np.sqrt(rho / omega)

    def periodic_values(self, points) -> np.ndarray:
        """``Q f`` at the preimages of ``points``."""
        return self.periodic.evaluate_batch(self.preimage(points))

    def evaluate_batch(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.d:
            raise DomainError(f"points must have shape (npoints, {self.d}), got {pts.shape}")
        return self._scale(pts) * self.periodic_values(pts)

    def evaluate(self, y) -> float:
        y = np.asarray(y, dtype=float).reshape(1, -1)
        return float(self.evaluate_batch(y)[0])

    __call__ = evaluate


def build_nonperiodic(g, n: int, transform: TransformSpec, policy: ShapePolicy, *, grid: str = "sparse",
                      endpoint: str = "identify", budget: int | None = DEFAULT_NODE_BUDGET,
                      threads: int = 1) -> NonPeriodicQuasiInterpolant:
    d = transform.dim
    if grid == "sparse":
        plan = combination_plan(n, d)
    elif grid == "full":
        plan = full_plan((n,) * d)
    else:
        raise DomainError(f"unknown grid kind {grid!r}")
    field = periodize_samples(g, transform, plan, endpoint, budget)
    return NonPeriodicQuasiInterpolant(QuasiInterpolant(field, policy, threads=threads), transform)


def evaluate_nonperiodic(qg: NonPeriodicQuasiInterpolant, y) -> float:
    return qg.evaluate(y)


def weighted_residual(g, qg: NonPeriodicQuasiInterpolant, points) -> np.ndarray:
    """``sqrt(omega / rho)(y) * (g(y) - Qg(y))`` at cube points.

    Computed as ``sqrt(omega(y) gamma'(x)) g(y) - Q f(x)`` with
    ``x = gamma^{-1}(y)``, which is the continuous extension and stays
    finite on the boundary.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != qg.d:
        raise DomainError(f"points must have shape (npoints, {qg.d}), got {pts.shape}")
    if len(pts) == 0:
        raise DomainError("no prediction points")
    t = qg.transform
    x = np.stack([t.inverse(pts[:, k], k) for k in range(qg.d)], axis=-1)
    factor = np.prod([t.sample_factor(x[:, k], k) for k in range(qg.d)], axis=0)
    qf = qg.periodic.evaluate_batch(x - t.domain[0])
    return factor * np.asarray(g(pts), dtype=float) - qf


def weighted_residual_grid(g, qg: NonPeriodicQuasiInterpolant, axes: Sequence[Sequence[float]]) -> np.ndarray:
    """Weighted residual on the tensor grid ``axes``, shape ``(len(axes[0]), ...)``."""
    t = qg.transform
    axes = [np.asarray(a, dtype=float).ravel() for a in axes]
    if len(axes) != qg.d:
        raise DomainError(f"expected {qg.d} axes, got {len(axes)}")
    if any(a.size == 0 for a in axes):
        raise DomainError("no prediction points")
    xs = [t.inverse(a, k) for k, a in enumerate(axes)]
    qf = qg.periodic.evaluate_grid([x - t.domain[0] for x in xs])
    factor = np.ones(qf.shape)
    for k, x in enumerate(xs):
        factor = factor * t.sample_factor(x, k).reshape((1,) * k + (-1,) + (1,) * (qg.d - k - 1))
    mesh = np.meshgrid(*axes, indexing="ij")
    gv = np.asarray(g(np.stack([m.ravel() for m in mesh], axis=-1)), dtype=float).reshape(qf.shape)
    return factor * gv - qf


def weighted_sup_error(g, qg: NonPeriodicQuasiInterpolant, points) -> float:
    """Discrete weighted sup norm of ``g - Qg`` over ``points``."""
    return float(np.max(np.abs(weighted_residual(g, qg, points))))


def vanishing_boundary_derivatives(transform: TransformSpec, axis: int = 0, max_order: int = 2) -> int:
    """Highest ``k <= max_order`` with ``D^j sqrt(omega(gamma) gamma')`` -> 0 at the boundary for all ``j <= k``.

    Numeric spot check near the upper endpoint: a derivative is taken to
    vanish when its finite-difference estimate shrinks as the distance to
    the boundary drops from 1e-2 to 1e-3.  Returns -1 if the factor itself
    does not vanish.
    """
    hi = transform.domain[1]

    def deriv(dist: float, order: int) -> float:
        step = dist / 4.0
        x = hi - dist
        f = [float(transform.sample_factor(min(x + i * step, hi), axis)) for i in (-1, 0, 1)]
        if order == 0:
            return abs(f[1])
        if order == 1:
            return abs(f[2] - f[0]) / (2 * step)
        return abs(f[2] - 2 * f[1] + f[0]) / step**2

    result = -1
    for order in range(max_order + 1):
        far, near = deriv(1e-2, order), deriv(1e-3, order)
        if not near < 0.5 * far:
            break
        result = order
    return result
