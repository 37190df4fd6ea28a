"""Uniform grids on axis-aligned cubes, fields on them, and quadrature."""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np

MAX_NODES = 2 * 10**7


class GridTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GridDomain:
    """Cube of side ``side`` centred at ``center`` with ``m`` nodes per axis."""

    n: int
    center: tuple
    side: float
    m: int

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if len(self.center) != self.n or self.n < 1:
            raise ValueError("center must have n >= 1 coordinates")
        if not self.side > 0:
            raise ValueError("side must be positive")
        if self.m < 3:
            raise ValueError("need m >= 3 points per axis")
        if self.m**self.n > MAX_NODES:
            raise GridTooLarge(
                f"{self.m}^{self.n} nodes exceeds the cap of {MAX_NODES:.0e}")

    @property
    def h(self):
        return self.side / (self.m - 1)

    @property
    def shape(self):
        return (self.m,) * self.n

    @property
    def cell_shape(self):
        return (self.m - 1,) * self.n

    @property
    def size(self):
        return self.m**self.n

    @property
    def lower(self):
        return np.array(self.center) - self.side / 2

    def axes(self):
        i = np.arange(self.m)
        return [lo + self.h * i for lo in self.lower]

    def points(self):
        """Node coordinates, shape ``(m**n, n)`` in C order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([a.ravel() for a in mesh], axis=1)

    def cell_centers(self):
        c = np.arange(self.m - 1) + 0.5
        mesh = np.meshgrid(*[lo + self.h * c for lo in self.lower], indexing="ij")
        return np.stack([a.ravel() for a in mesh], axis=1)

    def interior_mask(self):
        mask = np.zeros(self.shape, dtype=bool)
        mask[(slice(1, -1),) * self.n] = True
        return mask

    def refined(self):
        """Same cube with every cell halved; old nodes are a subset of new ones."""
        return GridDomain(self.n, self.center, self.side, 2 * self.m - 1)


@dataclass(frozen=True, eq=False)
class GridField:
    domain: GridDomain
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(self.domain.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("grid field has non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def to_csv(self, path):
        dom = self.domain
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"i{j + 1}" for j in range(dom.n)]
                            + [f"x{j + 1}" for j in range(dom.n)] + ["value"])
            axes = dom.axes()
            for idx in itertools.product(range(dom.m), repeat=dom.n):
                writer.writerow(list(idx) + [repr(float(axes[j][i])) for j, i in enumerate(idx)]
                                + [repr(float(self.values[idx]))])


@dataclass(frozen=True, eq=False)
class CellSet:
    """Union of closed grid cells, stored as a boolean mask of shape (m-1,)*n."""

    domain: GridDomain
    membership: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.membership, dtype=bool)
        if mask.shape != self.domain.cell_shape:
            raise ValueError(f"membership shape {mask.shape} != {self.domain.cell_shape}")
        object.__setattr__(self, "membership", mask)

    @property
    def count(self):
        return int(self.membership.sum())

    @property
    def measure(self):
        return self.count * self.domain.h**self.domain.n

    def node_mask(self):
        """Nodes that are corners of a member cell."""
        nodes = np.zeros(self.domain.shape, dtype=bool)
        for corner in itertools.product((0, 1), repeat=self.domain.n):
            sl = tuple(slice(c, c + self.domain.m - 1) for c in corner)
            nodes[sl] |= self.membership
        return nodes


def sample_field(V, dom: GridDomain) -> GridField:
    """Evaluate a potential (anything with ``.value(points)``) at every node."""
    return GridField(dom, V.value(dom.points()))


def cell_means(values):
    """Mean of the 2^n corner values of every cell."""
    n = values.ndim
    acc = np.zeros(tuple(s - 1 for s in values.shape))
    for corner in itertools.product((0, 1), repeat=n):
        acc += values[tuple(slice(c, c + s - 1) for c, s in zip(corner, values.shape))]
    return acc / 2**n


def cell_integrals(f: GridField):
    """Trapezoidal integral over every cell; they sum to ``integrate_cube(f)``."""
    return cell_means(f.values) * f.domain.h**f.domain.n


def integrate_cube(f: GridField) -> float:
    dom = f.domain
    w = np.full(dom.m, dom.h)
    w[0] = w[-1] = dom.h / 2
    out = f.values
    for _ in range(dom.n):
        out = np.tensordot(out, w, axes=([0], [0]))
    return float(out)


def ball_cells(dom: GridDomain, center, r) -> CellSet:
    c = dom.cell_centers() - np.asarray(center, dtype=float)
    inside = np.einsum("ij,ij->i", c, c) <= r * r
    return CellSet(dom, inside.reshape(dom.cell_shape))


def ball_grid(center, r, m):
    center = tuple(float(c) for c in center)
    return GridDomain(len(center), center, 2.0 * r, m)


def integrate_ball(V, center, r: float, resolution: int = 101) -> float:
    """Integral of V over B(center, r): cells of the bounding-cube grid whose
    centre lies in the ball contribute their trapezoidal integral."""
    if not r > 0:
        raise ValueError("radius must be positive")
    dom = ball_grid(center, r, resolution)
    cells = ball_cells(dom, center, r)
    ci = cell_integrals(sample_field(V, dom))
    return float(ci[cells.membership].sum())
