"""The Molcanov functional and the capacity criterion for compact resolvent.

    M_gamma(Q_d, V) = inf { integral of V over Q_d \\ F : cap(F) <= gamma cap(Q_d) }

with F ranging over unions of closed grid cells of Q_d.  V must be
nonnegative on the cube; callers shift a semibounded potential first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np

from . import rays, trend
from .capacity import Convention, capacity_of_cube, cell_set_capacity, pattern_capacity
from .grid import CellSet, GridDomain, GridField, cell_integrals, sample_field
from .potential import PotentialField, require_semibounded

MAX_EXHAUSTIVE_CELLS = 16

G_CHOICES = {
    "d": lambda d: d,
    "sqrt-d": math.sqrt,
    "d2": lambda d: d * d,
}
G_ALIASES = {"d-squared": "d2"}


@dataclass(frozen=True, eq=False)
class MolcanovQuery:
    cube: GridDomain
    field: GridField
    gamma: float
    convention: Optional[Convention] = None
    refine: int = 2
    box_factor: int = 8
    tol: float = 1e-8

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.field.domain != self.cube:
            raise ValueError("potential field must be sampled on the query cube")
        vals = self.field.values
        if vals.min() < -1e-12 * max(1.0, float(np.abs(vals).max())):
            raise ValueError("Molcanov functional needs V >= 0 on the cube; shift V first")
        if self.convention is None:
            object.__setattr__(self, "convention", Convention.for_dimension(self.cube.n))

    @property
    def cap_options(self):
        return dict(refine=self.refine, box_factor=self.box_factor, tol=self.tol)

    def cube_capacity(self):
        return capacity_of_cube(self.cube, self.convention, **self.cap_options)

    def capacity(self, mask):
        return cell_set_capacity(CellSet(self.cube, mask), self.convention, **self.cap_options)


@dataclass(frozen=True, eq=False)
class MolcanovResult:
    value: float
    minimizing_set: CellSet
    capacity_used: float
    exact: bool
    budget: float
    cube_capacity: float


def _subset_masks(cells):
    b = np.arange(2**cells, dtype=np.int64)[:, None]
    return ((b >> np.arange(cells, dtype=np.int64)) & 1).astype(bool)


@lru_cache(maxsize=None)
def subset_capacity_table(cell_shape, convention, refine, box_factor, tol):
    """Unit-spacing capacity of every subset of a cube's cells, indexed by bitmask."""
    cells = int(np.prod(cell_shape))
    masks = _subset_masks(cells)
    table = np.empty(len(masks))
    for i, mask in enumerate(masks):
        table[i] = pattern_capacity(mask.reshape(cell_shape), convention, refine,
                                    box_factor, tol)
    table.setflags(write=False)
    return table


def molcanov_exhaustive(q: MolcanovQuery, order=None) -> MolcanovResult:
    """Exact discrete minimum by enumerating every cell subset.

    ``order`` permutes the cell labelling used for enumeration; values are
    always summed in the canonical cell order, so the minimum is unaffected.
    """
    dom = q.cube
    cells = int(np.prod(dom.cell_shape))
    if cells > MAX_EXHAUSTIVE_CELLS:
        raise ValueError(f"{cells} cells is too many for exhaustive search "
                         f"(limit {MAX_EXHAUSTIVE_CELLS})")
    table = subset_capacity_table(dom.cell_shape, q.convention, q.refine,
                                  q.box_factor, q.tol) * dom.h ** (dom.n - 2)
    cap_q = q.cube_capacity()
    budget = q.gamma * cap_q
    ci = cell_integrals(q.field).ravel()
    masks = _subset_masks(cells)
    remaining = (~masks).astype(float) @ ci

    perm = np.arange(cells) if order is None else np.asarray(order, dtype=np.int64)
    bits = np.arange(2**cells, dtype=np.int64)[:, None] >> np.arange(cells, dtype=np.int64)
    canonical = ((bits & 1) << perm[None, :]).sum(axis=1)
    admissible = table[canonical] <= budget
    candidates = np.where(admissible, remaining[canonical], np.inf)
    best = canonical[int(np.argmin(candidates))]
    return MolcanovResult(float(remaining[best]),
                          CellSet(dom, masks[best].reshape(dom.cell_shape)),
                          float(table[best]), True, budget, cap_q)


def molcanov_greedy(q: MolcanovQuery, k: int = 4) -> MolcanovResult:
    """Greedy knapsack: add the cell with the most integral per unit of marginal
    capacity while the budget holds.

    Marginal capacities come from fresh solves every ``k`` additions and are
    reused in between.  When no single cell fits, pairs of cells are tried: in
    the n = 2 convention a lone cell is as capacious as the whole cube, while
    spread-out pairs can be much cheaper.
    """
    dom = q.cube
    shape = dom.cell_shape
    ci = cell_integrals(q.field).ravel()
    cells = ci.size
    cap_q = q.cube_capacity()
    budget = q.gamma * cap_q
    tiny = 1e-12 * cap_q

    def cap_of(mask):
        return q.capacity(mask.reshape(shape))

    chosen = np.zeros(cells, dtype=bool)
    added = []
    cap_exact = 0.0
    cap_est = 0.0
    marg = None
    since = 0
    while True:
        if marg is None:
            marg = np.full(cells, np.inf)
            for c in np.flatnonzero(~chosen & (ci > 0)):
                trial = chosen.copy()
                trial[c] = True
                marg[c] = cap_of(trial) - cap_exact
            since = 0
        fits = np.flatnonzero(~chosen & (ci > 0) & (cap_est + marg <= budget))
        move = None
        if fits.size:
            score = ci[fits] / np.maximum(marg[fits], tiny)
            move = (int(fits[int(np.argmax(score))]),)
            gain = marg[move[0]]
        elif since == 0:
            move, gain = _best_pair(chosen, ci, cap_exact, budget, tiny, cap_of)
        if move is None:
            if since > 0:
                cap_exact = cap_est = cap_of(chosen)
                marg = None
                continue
            break
        for c in move:
            chosen[c] = True
            added.append(c)
        cap_est += gain
        since += 1
        if since >= k or len(move) > 1:
            cap_exact = cap_est = cap_of(chosen)
            marg = None

    cap_exact = cap_of(chosen)
    while cap_exact > budget and added:
        chosen[added.pop()] = False
        cap_exact = cap_of(chosen)
    value = float(ci[~chosen].sum())
    return MolcanovResult(value, CellSet(dom, chosen.reshape(shape)), float(cap_exact),
                          False, budget, cap_q)


def _best_pair(chosen, ci, cap_now, budget, tiny, cap_of):
    free = np.flatnonzero(~chosen & (ci > 0))
    best, best_score, best_gain = None, -np.inf, 0.0
    for i, a in enumerate(free):
        for b in free[i + 1:]:
            trial = chosen.copy()
            trial[a] = trial[b] = True
            cap = cap_of(trial)
            if cap > budget:
                continue
            score = (ci[a] + ci[b]) / max(cap - cap_now, tiny)
            if score > best_score:
                best, best_score, best_gain = (int(a), int(b)), score, cap - cap_now
    return best, best_gain


def molcanov(q: MolcanovQuery) -> MolcanovResult:
    if int(np.prod(q.cube.cell_shape)) <= MAX_EXHAUSTIVE_CELLS:
        return molcanov_exhaustive(q)
    return molcanov_greedy(q)


def default_cube_points(n):
    """Largest m with at most 16 cells, so the exact solver applies."""
    m = 3
    while m**n <= MAX_EXHAUSTIVE_CELLS:
        m += 1
    return m  # (m - 1)^n <= 16 < m^n


def gamma_for(d, g="d", c=0.5):
    g = G_ALIASES.get(g, g)
    if g not in G_CHOICES:
        raise ValueError(f"unknown g choice {g!r}; pick one of {sorted(G_CHOICES)}")
    gd = G_CHOICES[g](d)
    if not d * d <= gd * (1 + 1e-12):
        raise ValueError(f"g(d) = {gd:g} violates d^2 <= g(d) at d = {d:g}")
    gamma = c * d * d / gd
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma = c d^2 / g(d) = {gamma:g} must lie in (0, 1)")
    return gamma, gd


@dataclass(eq=False)
class CriterionSweep:
    d: float
    g: str
    g_of_d: float
    c: float
    gamma: float
    shift: float
    radii: list
    centers: list
    values: list
    per_ray: dict = field(default_factory=dict)
    exact: bool = True
    verdict: Optional[trend.Trend] = None

    def series(self):
        return list(zip(self.radii, self.values))


def criterion_sweep(V: PotentialField, d: float = 1.0, g: str = "d", c: float = 0.5,
                    R_max: float = 8.0, m: Optional[int] = None, n_radii: int = 8,
                    refine: int = 2, box_factor: int = 8, tol: float = 1e-8) -> CriterionSweep:
    """d^-n M_gamma(Q_d(x), V + C) for cube centres x moving out along rays.

    The reported series is the minimum over rays at each radius.
    """
    V = require_semibounded(V, R_max + d * math.sqrt(V.n))
    gamma, gd = gamma_for(d, g, c)
    n = V.n
    if n < 2:
        raise ValueError("the capacity criterion needs n >= 2")
    m = m or default_cube_points(n)
    shift = V.shift
    schedule = rays.molcanov_rays(n)
    rr = rays.radii(R_max, n_radii)
    per_ray = {}
    exact = True
    for label, direction in schedule:
        row = []
        for r in rr:
            cube = GridDomain(n, tuple(direction * r), d, m)
            vals = sample_field(V, cube).values + shift
            q = MolcanovQuery(cube, GridField(cube, vals), gamma,
                              refine=refine, box_factor=box_factor, tol=tol)
            res = molcanov(q)
            exact = exact and res.exact
            row.append(res.value / d**n)
        per_ray[label] = row
    values, centers = rays.envelope(per_ray, rr, schedule)
    return CriterionSweep(d=d, g=g, g_of_d=gd, c=c, gamma=gamma, shift=shift, radii=rr,
                          centers=centers, values=values, per_ray=per_ray, exact=exact,
                          verdict=trend.classify(values))
