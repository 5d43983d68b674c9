"""Dyadic subgrids, level shells and combination coefficients.

Levels start at 1, so a level vector ``l`` of length ``d`` has mesh
``h_k = 2**-l_k`` and the sparse grid of level ``n`` is the union of all
subgrids with ``|l| = n + d - 1``.  Nodes are identified by integer index
vectors; coordinates ``j * 2**-l`` are exact binary fractions, so
deduplication works on integer keys after rescaling to the finest level.

Two endpoint conventions are supported:

``"cube"``
    ``j_k in {0, ..., 2**l_k}``, both ends of ``[0, 1]`` included.
``"torus"``
    ``j_k in {0, ..., 2**l_k - 1}``; the point 1 is identified with 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, prod
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import DomainError, ResourceError

__all__ = [
    "DEFAULT_NODE_BUDGET",
    "GridNode",
    "CombinationPlan",
    "enumerate_shell",
    "combination_plan",
    "full_plan",
    "subgrid_size",
    "subgrid_nodes",
    "subgrid_axes",
    "count_sparse_nodes",
    "count_full_nodes",
    "sparse_nodes",
]

DEFAULT_NODE_BUDGET = 10**8

CONVENTIONS = ("torus", "cube")


class GridNode(NamedTuple):
    level: tuple[int, ...]
    j: tuple[int, ...]

    @property
    def coords(self) -> tuple[float, ...]:
        return tuple(jk * 2.0**-lk for jk, lk in zip(self.j, self.level))


def _check_convention(convention: str) -> None:
    if convention not in CONVENTIONS:
        raise DomainError(f"unknown convention {convention!r}, expected one of {CONVENTIONS}")


def _check_level(level: Sequence[int]) -> tuple[int, ...]:
    level = tuple(int(v) for v in level)
    if not level or any(v < 1 for v in level):
        raise DomainError(f"level indices must be >= 1, got {level}")
    return level


def enumerate_shell(s: int, d: int) -> list[tuple[int, ...]]:
    """All ``l`` with ``l_k >= 1`` and ``|l| = s``, in lexicographic order.

    >>> enumerate_shell(4, 2)
    [(1, 3), (2, 2), (3, 1)]
    """
    if d < 1:
        raise DomainError(f"dimension must be >= 1, got {d}")
    if s < d:
        return []
    if d == 1:
        return [(s,)]
    out = []
    for first in range(1, s - d + 2):
        for rest in enumerate_shell(s - first, d - 1):
            out.append((first,) + rest)
    return out


@dataclass(frozen=True)
class CombinationPlan:
    """Signed shells of the combination technique.

    ``shells`` holds ``(shell_sum, coefficient)`` pairs in increasing shell
    order and ``levels`` the matching lists of level vectors.
    """

    n: int
    d: int
    shells: tuple[tuple[int, int], ...]
    levels: tuple[tuple[tuple[int, ...], ...], ...]

    def items(self) -> Iterator[tuple[int, tuple[int, ...]]]:
        """Yield ``(coefficient, level)`` for every subgrid, in plan order."""
        for (_, coef), levels in zip(self.shells, self.levels):
            for level in levels:
                yield coef, level

    @property
    def num_subgrids(self) -> int:
        return sum(len(ls) for ls in self.levels)

    def coefficient_sum(self) -> int:
        """Sum of coefficient times shell cardinality (equals 1)."""
        return sum(coef * len(ls) for (_, coef), ls in zip(self.shells, self.levels))

    def total_samples(self, convention: str = "torus") -> int:
        """Number of stored samples summed over all subgrids (with repeats)."""
        return sum(subgrid_size(level, convention) for _, level in self.items())

    def finest_levels(self) -> tuple[int, ...]:
        return tuple(max(level[k] for _, level in self.items()) for k in range(self.d))


def combination_plan(n: int, d: int) -> CombinationPlan:
    """Shells ``n + k`` with coefficients ``(-1)**(d-1-k) * C(d-1, k)``.

    Shells that contain no admissible level (``n + k < d``) are kept with
    an empty level list so the coefficient pattern stays visible.
    """
    if n < 1 or d < 1:
        raise DomainError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    shells = []
    levels = []
    for k in range(d):
        coef = (-1) ** (d - 1 - k) * comb(d - 1, k)
        shells.append((n + k, coef))
        levels.append(tuple(enumerate_shell(n + k, d)))
    return CombinationPlan(n, d, tuple(shells), tuple(levels))


def full_plan(level: Sequence[int]) -> CombinationPlan:
    """Degenerate plan consisting of a single full grid ``level``."""
    level = _check_level(level)
    s = sum(level)
    return CombinationPlan(max(level), len(level), ((s, 1),), ((level,),))


def subgrid_size(level: Sequence[int], convention: str = "cube") -> int:
    _check_convention(convention)
    extra = 1 if convention == "cube" else 0
    return prod(2**l + extra for l in level)


def _check_budget(count: int, budget: int | None) -> None:
    if budget is not None and count > budget:
        raise ResourceError(f"grid needs {count} nodes, budget is {budget}")


def subgrid_axes(level: Sequence[int], convention: str = "torus") -> list[np.ndarray]:
    """Per-axis node coordinates of the full subgrid ``level``."""
    level = _check_level(level)
    _check_convention(convention)
    extra = 1 if convention == "cube" else 0
    return [np.arange(2**l + extra) * 2.0**-l for l in level]


def subgrid_nodes(level: Sequence[int], convention: str = "cube",
                  budget: int | None = DEFAULT_NODE_BUDGET) -> list[GridNode]:
    """All nodes of the directionally uniform grid ``level``."""
    level = _check_level(level)
    _check_convention(convention)
    _check_budget(subgrid_size(level, convention), budget)
    extra = 1 if convention == "cube" else 0
    ranges = [range(2**l + extra) for l in level]
    return [GridNode(level, j) for j in itertools.product(*ranges)]


def count_full_nodes(n: int, d: int, convention: str = "cube") -> int:
    """Size of the full grid with mesh ``2**-n`` in every direction."""
    return subgrid_size((n,) * d, convention)


def _count_by_formula(n: int, d: int, convention: str) -> int:
    # combination identity applied to indicator functions of nested grids
    plan = combination_plan(n, d)
    return sum(coef * subgrid_size(level, convention) for coef, level in plan.items())


def _union_keys(n: int, d: int, convention: str) -> set[tuple[int, ...]]:
    top = n + d - 1
    finest = top - (d - 1)
    keys = set()
    for level in enumerate_shell(top, d):
        shifts = [finest - l for l in level]
        for node in subgrid_nodes(level, convention, budget=None):
            keys.add(tuple(j << s for j, s in zip(node.j, shifts)))
    return keys


def count_sparse_nodes(n: int, d: int, convention: str = "cube", method: str = "formula",
                       budget: int | None = DEFAULT_NODE_BUDGET) -> int:
    """Number of distinct nodes of the sparse grid ``W_{n,d}``.

    ``method="formula"`` uses the signed shell sum of subgrid sizes;
    ``method="enumerate"`` deduplicates the union explicitly and is
    subject to ``budget``.
    """
    if n < 1 or d < 1:
        raise DomainError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    _check_convention(convention)
    if method == "formula":
        return _count_by_formula(n, d, convention)
    if method == "enumerate":
        raw = sum(subgrid_size(l, convention) for l in enumerate_shell(n + d - 1, d))
        _check_budget(raw, budget)
        return len(_union_keys(n, d, convention))
    raise DomainError(f"unknown counting method {method!r}")


def sparse_nodes(n: int, d: int, convention: str = "cube",
                 budget: int | None = DEFAULT_NODE_BUDGET) -> list[GridNode]:
    """Deduplicated nodes of ``W_{n,d}`` sorted by coordinates.

    Each node is reported on the finest level that contains it along every
    axis, i.e. ``level = (n, ..., n)`` with rescaled indices.
    """
    if n < 1 or d < 1:
        raise DomainError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    _check_convention(convention)
    raw = sum(subgrid_size(l, convention) for l in enumerate_shell(n + d - 1, d))
    _check_budget(raw, budget)
    finest = (n,) * d
    return [GridNode(finest, key) for key in sorted(_union_keys(n, d, convention))]
