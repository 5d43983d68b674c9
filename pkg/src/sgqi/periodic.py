"""Sparse-grid quasi-interpolation of periodic functions on the d-torus.

A :class:`QuasiInterpolant` is the signed sum (combination technique) of
subgrid quasi-interpolants

    Q_l f(x) = sum_j f(t_{l,j}) prod_k Psi_{c_k,h_k}(x_k - t_{l_k,j_k}) w(h_k),

with ``h_k = 2**-l_k``, per-subgrid shape parameters from a
:class:`ShapePolicy` and the node weight ``w(h) = sin(2 pi h) / (2 pi)``.
Evaluation is tensor-structured: each subgrid's sample array is contracted
axis by axis with small kernel matrices, never forming the d-dimensional
kernel explicitly.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import CapabilityError, ConfigError, DataError, DomainError
from .kernel import MAX_ORDER, KernelSpec, eval_psi_ch, eval_weighted_psi, quadrature_weight
from .sparse_grid import (
    DEFAULT_NODE_BUDGET,
    CombinationPlan,
    _check_budget,
    combination_plan,
    full_plan,
    subgrid_axes,
)

__all__ = [
    "ShapePolicy",
    "SampledField",
    "QuasiInterpolant",
    "ScatteredQuasiInterpolant",
    "shape_parameters",
    "sample_periodic",
    "sample_grid",
    "build",
    "evaluate",
    "evaluate_batch",
]

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
ENDPOINT_POLICIES = {"identify": "torus", "duplicate": "cube"}
_C_MAX = math.exp(-1.0)
_CHUNK_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class ShapePolicy:
    """Rule mapping a subgrid level to per-coordinate shape parameters.

    ``mode="fixed"`` gives ``c_j = A_j h_j``; ``mode="power"`` gives
    ``c_j = A_j h_j**((r+2)/(r+2+alpha_j))``; ``mode="constant"`` uses
    ``c_j = A_j`` on every subgrid (global override, for ablations).
    Values above ``1/e`` are logged, and clipped when ``clamp`` is set.
    """

    A: tuple[float, ...]
    mode: str = "fixed"
    r: int = 2
    alpha: tuple[int, ...] | None = None
    clamp: bool = False

    def __post_init__(self):
        A = tuple(float(a) for a in self.A)
        if self.mode not in ("fixed", "power", "constant"):
            raise DomainError(f"unknown shape mode {self.mode!r}")
        if any(not a > 0 for a in A):
            raise DomainError(f"shape coefficients must be positive, got {A}")
        if self.r < 0:
            raise DomainError(f"r must be non-negative, got {self.r}")
        object.__setattr__(self, "A", A)
        if self.alpha is not None:
            alpha = tuple(int(a) for a in self.alpha)
            if len(alpha) != len(A) or any(a < 0 for a in alpha):
                raise DomainError(f"alpha {alpha} incompatible with A of length {len(A)}")
            object.__setattr__(self, "alpha", alpha)

    @property
    def dim(self) -> int:
        return len(self.A)

    def exponents(self) -> tuple[float, ...]:
        if self.mode == "fixed":
            return (1.0,) * self.dim
        if self.mode == "constant":
            return (0.0,) * self.dim
        alpha = self.alpha or (0,) * self.dim
        return tuple((self.r + 2) / (self.r + 2 + a) for a in alpha)


def shape_parameters(policy: ShapePolicy, level: Sequence[int]) -> tuple[float, ...]:
    """Shape parameters for the subgrid with level vector ``level``."""
    if len(level) != policy.dim:
        raise DomainError(f"level {tuple(level)} does not match policy dimension {policy.dim}")
    out = []
    for a, e, l in zip(policy.A, policy.exponents(), level):
        c = a * (2.0 ** -l) ** e
        if c > _C_MAX:
            if policy.clamp:
                log.warning("shape parameter %.4g on level %s clamped to 1/e", c, tuple(level))
                c = _C_MAX
            else:
                log.debug("shape parameter %.4g on level %s exceeds 1/e", c, tuple(level))
        out.append(c)
    return tuple(out)


def _check_alpha(alpha, d: int) -> tuple[int, ...]:
    if alpha is None:
        return (0,) * d
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != d:
        raise DomainError(f"derivative multi-index {alpha} has wrong length for d={d}")
    if any(a < 0 for a in alpha):
        raise DomainError(f"negative derivative order in {alpha}")
    if max(alpha) > MAX_ORDER:
        raise CapabilityError(f"derivative orders above {MAX_ORDER} are not supported: {alpha}")
    return alpha


@dataclass(frozen=True, eq=False)
class SampledField:
    """Function samples on every subgrid of a combination plan.

    ``values[i]`` belongs to the i-th subgrid of ``plan.items()`` and has
    shape ``(m_1, ..., m_d)`` with ``m_k = 2**l_k`` (``identify``) or
    ``2**l_k + 1`` (``duplicate``).
    """

    plan: CombinationPlan
    values: tuple[np.ndarray, ...]
    endpoint: str = "identify"

    def __post_init__(self):
        if self.endpoint not in ENDPOINT_POLICIES:
            raise DomainError(f"unknown endpoint policy {self.endpoint!r}")
        levels = [level for _, level in self.plan.items()]
        if len(levels) != len(self.values):
            raise DataError(f"{len(self.values)} value arrays for {len(levels)} subgrids")
        extra = 1 if self.endpoint == "duplicate" else 0
        for level, vals in zip(levels, self.values):
            shape = tuple(2**l + extra for l in level)
            if vals.shape != shape:
                raise DataError(f"subgrid {level}: values shape {vals.shape}, expected {shape}")

    @property
    def d(self) -> int:
        return self.plan.d

    @property
    def n(self) -> int:
        return self.plan.n

    @property
    def convention(self) -> str:
        return ENDPOINT_POLICIES[self.endpoint]

    @property
    def num_samples(self) -> int:
        return sum(v.size for v in self.values)

    def subgrids(self):
        """Yield ``(coefficient, level, values)`` in plan order."""
        for (coef, level), vals in zip(self.plan.items(), self.values):
            yield coef, level, vals

    def map(self, fn: Callable[[tuple[int, ...], np.ndarray], np.ndarray]) -> "SampledField":
        """New field with ``fn(level, values)`` applied to every subgrid."""
        vals = tuple(np.asarray(fn(level, v), dtype=float) for _, level, v in self.subgrids())
        return SampledField(self.plan, vals, self.endpoint)

    def __add__(self, other: "SampledField") -> "SampledField":
        return SampledField(self.plan, tuple(a + b for a, b in zip(self.values, other.values)),
                            self.endpoint)

    def __mul__(self, scalar: float) -> "SampledField":
        return SampledField(self.plan, tuple(scalar * v for v in self.values), self.endpoint)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        return {
            "format": "sgqi.sampled-field",
            "version": FORMAT_VERSION,
            "d": self.d,
            "n": self.n,
            "endpoint": self.endpoint,
            "plan": [[s, c] for s, c in self.plan.shells],
            "subgrids": [
                {"level": list(level), "coefficient": coef, "values": vals.ravel().tolist()}
                for coef, level, vals in self.subgrids()
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SampledField":
        if data.get("format") != "sgqi.sampled-field":
            raise ConfigError(f"not a sampled-field document: {data.get('format')!r}")
        if data.get("version") != FORMAT_VERSION:
            raise ConfigError(f"unsupported sampled-field version {data.get('version')!r}")
        d, n = int(data["d"]), int(data["n"])
        levels = [tuple(sg["level"]) for sg in data["subgrids"]]
        shells = tuple((int(s), int(c)) for s, c in data["plan"])
        plan = combination_plan(n, d)
        if plan.shells != shells and len(levels) == 1:
            plan = full_plan(levels[0])
        if plan.shells != shells or [l for _, l in plan.items()] != levels:
            raise ConfigError("stored plan is neither the combination plan for (n, d) nor a full grid")
        endpoint = data["endpoint"]
        extra = 1 if endpoint == "duplicate" else 0
        values = tuple(
            np.asarray(sg["values"], dtype=float).reshape([2**l + extra for l in sg["level"]])
            for sg in data["subgrids"]
        )
        return cls(plan, values, endpoint)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SampledField":
        return cls.from_dict(json.loads(text))


def _subgrid_points(level, convention) -> np.ndarray:
    axes = subgrid_axes(level, convention)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def sample_periodic(f: Callable[[np.ndarray], np.ndarray], plan: CombinationPlan,
                    endpoint: str = "identify",
                    budget: int | None = DEFAULT_NODE_BUDGET) -> SampledField:
    """Evaluate ``f`` on every node of every subgrid in ``plan``.

    ``f`` receives an array of shape ``(npoints, d)`` with coordinates in
    ``[0, 1)`` and returns ``npoints`` values.  Under ``duplicate`` the
    node at coordinate 1 reads the value at coordinate 0.
    """
    if endpoint not in ENDPOINT_POLICIES:
        raise DomainError(f"unknown endpoint policy {endpoint!r}")
    convention = ENDPOINT_POLICIES[endpoint]
    _check_budget(plan.total_samples(convention), budget)
    values = []
    for _, level in plan.items():
        pts = _subgrid_points(level, convention)
        vals = np.asarray(f(np.where(pts >= 1.0, pts - 1.0, pts)), dtype=float)
        if vals.shape != (len(pts),):
            raise DataError(f"f returned shape {vals.shape} for {len(pts)} points")
        bad = ~np.isfinite(vals)
        if bad.any():
            node = tuple(pts[np.argmax(bad)].tolist())
            raise DataError(f"non-finite sample {vals[np.argmax(bad)]} at node {node} of subgrid {level}")
        values.append(vals.reshape([len(a) for a in subgrid_axes(level, convention)]))
    return SampledField(plan, tuple(values), endpoint)


def sample_grid(f, n: int, d: int, grid: str = "sparse", endpoint: str = "identify",
                budget: int | None = DEFAULT_NODE_BUDGET) -> SampledField:
    """Shortcut: sample on the sparse grid of level ``n`` or the full grid ``(n,)*d``."""
    if grid == "sparse":
        plan = combination_plan(n, d)
    elif grid == "full":
        plan = full_plan((n,) * d)
    else:
        raise DomainError(f"unknown grid kind {grid!r}")
    return sample_periodic(f, plan, endpoint, budget)


def _contract_grid(values: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
    # tensordot appends the new axis at the end, so d steps restore the order
    out = values
    for mat in mats:
        out = np.tensordot(out, mat, axes=([0], [1]))
    return out


def _contract_points(values: np.ndarray, mats: Sequence[np.ndarray]) -> np.ndarray:
    # per-point reduction with elementwise products: result for a point does
    # not depend on which other points share the batch
    d = values.ndim
    npts = mats[0].shape[0]
    chunk = max(1, _CHUNK_ELEMENTS // values.size)
    out = np.empty(npts)
    for start in range(0, npts, chunk):
        stop = min(start + chunk, npts)
        r = values[None, ...]
        for k in reversed(range(d)):
            m = mats[k][start:stop].reshape((stop - start,) + (1,) * k + (-1,))
            r = (r * m).sum(axis=-1)
        out[start:stop] = r
    return out


class QuasiInterpolant:
    """Immutable sparse-grid quasi-interpolant of a periodic function.

    Parameters
    ----------
    field : SampledField
        Samples on the subgrids of a combination plan.
    policy : ShapePolicy
        Shape parameter rule, applied per subgrid with that subgrid's own
        mesh widths.
    cutoff : float, optional
        Drop kernel contributions whose periodic distance exceeds this
        radius.  Off by default (exact sums).
    threads : int
        Worker threads used across subgrids.  The combination order is
        fixed, so results do not depend on this number.
    """

    def __init__(self, field: SampledField, policy: ShapePolicy, *, cutoff: float | None = None,
                 threads: int = 1):
        if policy.dim != field.d:
            raise DomainError(f"policy dimension {policy.dim} does not match field dimension {field.d}")
        if cutoff is not None and not cutoff > 0:
            raise DomainError(f"cutoff must be positive, got {cutoff}")
        self.field = field
        self.policy = policy
        self.cutoff = cutoff
        self.threads = max(1, int(threads))
        specs = []
        for _, level, _ in field.subgrids():
            specs.append(KernelSpec.from_levels(shape_parameters(policy, level), level))
        self.kernel_specs: tuple[KernelSpec, ...] = tuple(specs)

    @property
    def d(self) -> int:
        return self.field.d

    @property
    def endpoint(self) -> str:
        return self.field.endpoint

    def _axis_matrix(self, c: float, level: int, x: np.ndarray, order: int) -> np.ndarray:
        h = 2.0**-level
        m = 2**level + (1 if self.endpoint == "duplicate" else 0)
        t = np.arange(m) * h
        diff = x[:, None] - t[None, :]
        mat = eval_weighted_psi(c, h, diff, order)
        if self.cutoff is not None:
            dist = np.abs((diff + 0.5) % 1.0 - 0.5)
            mat = np.where(dist > self.cutoff, 0.0, mat)
        return mat

    def _combine(self, partial: Callable[[int], np.ndarray]) -> np.ndarray:
        items = list(self.field.subgrids())
        if self.threads > 1:
            with ThreadPoolExecutor(self.threads) as pool:
                parts = list(pool.map(partial, range(len(items))))
        else:
            parts = [partial(i) for i in range(len(items))]
        # shells summed separately, then combined with their coefficients
        shell_sums: dict[int, np.ndarray] = {}
        coefs: dict[int, int] = {}
        for (coef, level, _), part in zip(items, parts):
            s = sum(level)
            shell_sums[s] = part if s not in shell_sums else shell_sums[s] + part
            coefs[s] = coef
        total = None
        for s in sorted(shell_sums):
            term = coefs[s] * shell_sums[s]
            total = term if total is None else total + term
        if total is None:
            raise DataError("combination plan contains no subgrids")
        return total

    def evaluate_grid(self, axes: Sequence[Sequence[float]], alpha=None) -> np.ndarray:
        """Evaluate on the tensor grid ``axes[0] x ... x axes[d-1]``.

        Returns an array of shape ``(len(axes[0]), ..., len(axes[d-1]))``.
        """
        alpha = _check_alpha(alpha, self.d)
        if len(axes) != self.d:
            raise DomainError(f"expected {self.d} axes, got {len(axes)}")
        axes = [np.asarray(a, dtype=float).ravel() for a in axes]
        items = list(self.field.subgrids())

        def partial(i):
            _, level, vals = items[i]
            spec = self.kernel_specs[i]
            mats = [self._axis_matrix(spec.c[k], level[k], axes[k], alpha[k]) for k in range(self.d)]
            return _contract_grid(vals, mats)

        return self._combine(partial)

    def evaluate_batch(self, points, alpha=None) -> np.ndarray:
        """Evaluate at scattered points of shape ``(npoints, d)``."""
        alpha = _check_alpha(alpha, self.d)
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.d:
            raise DomainError(f"points must have shape (npoints, {self.d}), got {pts.shape}")
        items = list(self.field.subgrids())

        def partial(i):
            _, level, vals = items[i]
            spec = self.kernel_specs[i]
            mats = [self._axis_matrix(spec.c[k], level[k], pts[:, k], alpha[k]) for k in range(self.d)]
            return _contract_points(vals, mats)

        return self._combine(partial)

    def evaluate(self, x, alpha=None) -> float:
        """Value (or partial derivative ``alpha``) at a single point."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape != (self.d,):
            raise DomainError(f"point must have {self.d} coordinates, got {x.shape[0]}")
        return float(self.evaluate_batch(x[None, :], alpha)[0])

    __call__ = evaluate

    def to_dict(self) -> dict:
        p = self.policy
        return {
            "format": "sgqi.quasi-interpolant",
            "version": FORMAT_VERSION,
            "policy": {"A": list(p.A), "mode": p.mode, "r": p.r,
                       "alpha": list(p.alpha) if p.alpha is not None else None, "clamp": p.clamp},
            "cutoff": self.cutoff,
            "kernels": [{"c": list(s.c), "h": list(s.h)} for s in self.kernel_specs],
            "field": self.field.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QuasiInterpolant":
        if data.get("format") != "sgqi.quasi-interpolant" or data.get("version") != FORMAT_VERSION:
            raise ConfigError("not a supported quasi-interpolant document")
        p = data["policy"]
        policy = ShapePolicy(tuple(p["A"]), p["mode"], p["r"],
                             tuple(p["alpha"]) if p["alpha"] is not None else None, p["clamp"])
        return cls(SampledField.from_dict(data["field"]), policy, cutoff=data["cutoff"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "QuasiInterpolant":
        return cls.from_dict(json.loads(text))


def build(f, n: int, d: int, policy: ShapePolicy, *, grid: str = "sparse", endpoint: str = "identify",
          budget: int | None = DEFAULT_NODE_BUDGET, threads: int = 1) -> QuasiInterpolant:
    """Sample ``f`` and return its quasi-interpolant in one call."""
    return QuasiInterpolant(sample_grid(f, n, d, grid, endpoint, budget), policy, threads=threads)


def evaluate(q: QuasiInterpolant, x, alpha=None) -> float:
    return q.evaluate(x, alpha)


def evaluate_batch(q: QuasiInterpolant, points, alpha=None) -> np.ndarray:
    return q.evaluate_batch(points, alpha)


@dataclass(frozen=True, eq=False)
class ScatteredQuasiInterpolant:
    """General quadrature form ``sum_i f(x_i) mu_i Psi_{c,h}(x - x_i)``.

    One tensor kernel (``spec``) is shared by all nodes; ``weights`` are
    arbitrary quadrature weights.  Steps must satisfy ``h_k < 1/2`` because
    the unweighted kernel is evaluated.
    """

    nodes: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    spec: KernelSpec

    def __post_init__(self):
        nodes = np.atleast_2d(np.asarray(self.nodes, dtype=float))
        values = np.asarray(self.values, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if nodes.shape[1] != self.spec.dim or not (len(nodes) == len(values) == len(weights)):
            raise DomainError("nodes, values and weights are inconsistent with the kernel dimension")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_subgrid(cls, level: Sequence[int], values: np.ndarray, c: Sequence[float]):
        """Tensor grid ``level`` with the default weights ``prod sin(2 pi h_k) / (2 pi)``."""
        level = tuple(level)
        spec = KernelSpec.from_levels(c, level)
        nodes = _subgrid_points(level, "torus")
        w = math.prod(quadrature_weight(h) for h in spec.h)
        return cls(nodes, np.asarray(values).ravel(), np.full(len(nodes), w), spec)

    def evaluate_batch(self, points, alpha=None) -> np.ndarray:
        d = self.spec.dim
        alpha = _check_alpha(alpha, d)
        pts = np.asarray(points, dtype=float).reshape(-1, d)
        coef = self.values * self.weights
        out = np.empty(len(pts))
        for i, x in enumerate(pts):
            kern = np.ones(len(self.nodes))
            for k in range(d):
                kern = kern * eval_psi_ch(self.spec.c[k], self.spec.h[k], x[k] - self.nodes[:, k], alpha[k])
            out[i] = np.sum(coef * kern)
        return out

    def evaluate(self, x, alpha=None) -> float:
        return float(self.evaluate_batch(np.asarray(x, dtype=float)[None, :], alpha)[0])
