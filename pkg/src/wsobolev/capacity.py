"""Wiener capacity of cell sets via the discrete equilibrium potential.

The discrete capacity of an obstacle F inside an ambient box is

    min  h^(n-2) * sum over grid edges (u_i - u_j)^2
    s.t. u = 1 on nodes of F,  u = 0 on the box boundary,

whose minimizer is discrete-harmonic off F.  It is found with conjugate
gradients on the free nodes.

Two conventions decide the ambient box:

* ``SQUARE_2D`` (n = 2): the open square Q_2d concentric with the smallest
  square Q_d containing F.  The obstacle is resolved on a grid refined by an
  even factor so Q_2d stays concentric even for non-square bounding boxes.
* ``WHOLE_SPACE`` (n >= 3): capacity relative to R^n, approximated by boxes of
  side L and 2L around F and extrapolated using the L^(2-n) truncation decay.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .grid import CellSet, GridDomain, GridField


class Convention(str, enum.Enum):
    WHOLE_SPACE = "whole-space"
    SQUARE_2D = "square-2d"

    @classmethod
    def for_dimension(cls, n):
        if n < 2:
            raise ValueError("capacity is only defined here for n >= 2")
        return cls.SQUARE_2D if n == 2 else cls.WHOLE_SPACE


class CapacityError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class CapacityProblem:
    ambient: GridDomain
    obstacle: CellSet
    convention: Convention

    def __post_init__(self):
        if self.obstacle.domain != self.ambient:
            raise ValueError("obstacle must live on the ambient grid")
        if self.ambient.n < 2:
            raise ValueError("capacity is only defined here for n >= 2")


@dataclass(frozen=True, eq=False)
class CapacityResult:
    value: float
    residual: float
    iterations: int
    h: float
    potential: Optional[GridField] = None
    box_values: tuple = ()
    truncation: float = 0.0


def _max_iterations(size):
    return max(50, int(10 * math.sqrt(size)))


def solve_equilibrium(obstacle_nodes: np.ndarray, tol: float):
    """Equilibrium potential on a node grid whose outer layer is held at 0.

    Returns ``(u, iterations, relative_residual)``.
    """
    shape = obstacle_nodes.shape
    strides = kernels.flat_strides(shape)
    g = obstacle_nodes.ravel().astype(float)
    interior = np.zeros(shape, dtype=bool)
    interior[(slice(1, -1),) * len(shape)] = True
    free = interior.ravel() & ~obstacle_nodes.ravel()
    idx = np.flatnonzero(free).astype(np.int64)
    b = np.zeros_like(g)
    nb = np.zeros_like(g)
    for s in strides:
        nb += np.roll(g, -int(s)) + np.roll(g, int(s))
    b[idx] = nb[idx]
    maxiter = _max_iterations(g.size)
    x, iters, rel = kernels.cg_graph_laplace(b, idx, strides, tol, maxiter)
    if rel > tol:
        raise CapacityError(
            f"CG did not reach relative residual {tol:g} in {maxiter} iterations "
            f"(got {rel:.3g}); refine tol or the grid")
    return (x + g).reshape(shape), int(iters), float(rel)


def dirichlet_energy(u, h):
    n = u.ndim
    return float(sum(np.sum(np.diff(u, axis=k) ** 2) for k in range(n)) * h ** (n - 2))


def capacity(problem: CapacityProblem, tol: float = 1e-8) -> CapacityResult:
    if not tol > 0:
        raise ValueError("tol must be positive")
    dom = problem.ambient
    nodes = problem.obstacle.node_mask()
    if not nodes.any():
        return CapacityResult(0.0, 0.0, 0, dom.h, GridField(dom, np.zeros(dom.shape)))
    u, iters, rel = solve_equilibrium(nodes, tol)
    value = dirichlet_energy(u, dom.h)
    field = GridField(dom, u)
    if problem.convention is Convention.SQUARE_2D:
        return CapacityResult(value, rel, iters, dom.h, field)

    k = dom.m - 1
    pad = [(k // 2, k - k // 2)] * dom.n
    big = np.pad(problem.obstacle.membership, pad)
    big_dom = GridDomain(dom.n, dom.center, 2 * dom.side, 2 * k + 1)
    u2, iters2, rel2 = solve_equilibrium(CellSet(big_dom, big).node_mask(), tol)
    value2 = dirichlet_energy(u2, dom.h)
    q = 2.0 ** (dom.n - 2)
    extrapolated = (q * value2 - value) / (q - 1.0)
    return CapacityResult(extrapolated, max(rel, rel2), iters + iters2, dom.h, field,
                          box_values=(value, value2),
                          truncation=abs(extrapolated - value2))


def _bbox(mask):
    lo, hi = [], []
    for k in range(mask.ndim):
        other = tuple(j for j in range(mask.ndim) if j != k)
        hit = np.flatnonzero(mask.any(axis=other) if other else mask)
        lo.append(int(hit[0]))
        hi.append(int(hit[-1]) + 1)
    return lo, hi


def embed_obstacle(cells: CellSet, convention: Optional[Convention] = None,
                   refine: int = 2, box_factor: int = 8) -> CapacityProblem:
    """Capacity problem for ``cells`` with the ambient box of the convention."""
    src = cells.domain
    n = src.n
    convention = Convention(convention or Convention.for_dimension(n))
    if not cells.membership.any():
        empty = GridDomain(n, src.center, src.side, 3)
        return CapacityProblem(empty, CellSet(empty, np.zeros((2,) * n, bool)), convention)
    lo, hi = _bbox(cells.membership)
    ext = [b - a for a, b in zip(lo, hi)]
    k = max(ext)
    pattern = cells.membership[tuple(slice(a, b) for a, b in zip(lo, hi))]
    if convention is Convention.SQUARE_2D:
        if refine < 2 or refine % 2:
            raise ValueError("the n=2 convention needs an even refinement factor")
        cells_per_axis = 2 * k
    else:
        cells_per_axis = box_factor * k
        cells_per_axis += cells_per_axis % 2
    r = refine
    total = cells_per_axis * r
    fine = np.kron(pattern, np.ones((r,) * n, dtype=bool)) if r > 1 else pattern
    mask = np.zeros((total,) * n, dtype=bool)
    offsets = [(total - e * r) // 2 for e in ext]
    mask[tuple(slice(o, o + e * r) for o, e in zip(offsets, ext))] = fine
    hf = src.h / r
    lower = src.lower + src.h * np.array(lo) - hf * np.array(offsets)
    center = lower + total * hf / 2
    amb = GridDomain(n, tuple(center), total * hf, total + 1)
    return CapacityProblem(amb, CellSet(amb, mask), convention)


_PATTERN_CACHE: dict = {}


def _symmetries(n):
    return [(perm, flips) for perm in itertools.permutations(range(n))
            for flips in itertools.product((False, True), repeat=n)]


def canonical_pattern(pattern):
    """Representative of a pattern's orbit under axis permutations and flips."""
    best = None
    for perm, flips in _symmetries(pattern.ndim):
        t = np.transpose(pattern, perm)
        axes = tuple(k for k, f in enumerate(flips) if f)
        if axes:
            t = np.flip(t, axes)
        key = (t.shape, np.packbits(t).tobytes())
        if best is None or key < best[0]:
            best = (key, t)
    return np.ascontiguousarray(best[1])


def pattern_capacity(pattern: np.ndarray, convention: Convention, refine: int = 2,
                     box_factor: int = 8, tol: float = 1e-8) -> float:
    """Capacity of a cell pattern on a unit-spacing grid.

    Memoized on the cropped pattern up to the symmetries of the cube, which
    both conventions respect (the whole-space box only up to a half-cell
    offset for odd extents).

    Capacity of the same pattern at spacing h is this value times h^(n-2).
    """
    pattern = np.asarray(pattern, dtype=bool)
    if not pattern.any():
        return 0.0
    lo, hi = _bbox(pattern)
    pattern = canonical_pattern(pattern[tuple(slice(a, b) for a, b in zip(lo, hi))])
    key = (pattern.shape, pattern.tobytes(), Convention(convention), refine, box_factor, tol)
    hit = _PATTERN_CACHE.get(key)
    if hit is None:
        n = pattern.ndim
        k = max(pattern.shape) + 1
        unit = GridDomain(n, (0.0,) * n, float(k), k + 1)
        padded = np.zeros(unit.cell_shape, dtype=bool)
        padded[tuple(slice(0, s) for s in pattern.shape)] = pattern
        problem = embed_obstacle(CellSet(unit, padded), convention, refine, box_factor)
        hit = capacity(problem, tol).value
        _PATTERN_CACHE[key] = hit
    return hit


def cell_set_capacity(cells: CellSet, convention: Optional[Convention] = None,
                      refine: int = 2, box_factor: int = 8, tol: float = 1e-8) -> float:
    n = cells.domain.n
    convention = convention or Convention.for_dimension(n)
    return pattern_capacity(cells.membership, convention, refine, box_factor, tol) \
        * cells.domain.h ** (n - 2)


def capacity_of_cube(dom: GridDomain, convention: Optional[Convention] = None,
                     refine: int = 2, box_factor: int = 8, tol: float = 1e-8) -> float:
    """cap(Q_d) for the cube of ``dom`` resolved on its own cells."""
    full = CellSet(dom, np.ones(dom.cell_shape, dtype=bool))
    return cell_set_capacity(full, convention, refine, box_factor, tol)
