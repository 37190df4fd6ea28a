"""Integral, measure and pointwise criteria, and the aggregated verdict.

Every "as |x| -> infinity" statement is probed along the rays of
``rays.criteria_rays`` at radii R_max*k/8, and judged on the minimum over rays
at each radius (the worst direction decides).
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from math import comb, gamma as gamma_fn
from typing import TYPE_CHECKING, Optional

import numpy as np

from . import rays, trend
from .grid import ball_cells, ball_grid, cell_integrals, integrate_ball, sample_field
from .molcanov import CriterionSweep
from .potential import PotentialField, require_semibounded
from .sampling import sphere_directions
from .weight import PolynomialWeight

if TYPE_CHECKING:
    from .spectral import SpectralSweep


class Direction(str, enum.Enum):
    SUFFICIENT = "sufficient"
    NECESSARY = "necessary"
    CHARACTERIZATION = "characterization"


class Outcome(str, enum.Enum):
    PASSES = "passes"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


LIKELY_COMPACT = "likely-compact"
LIKELY_NOT_COMPACT = "likely-not-compact"
INCONCLUSIVE = "inconclusive"


@dataclass(eq=False)
class CriterionVerdict:
    criterion: str
    direction: Direction
    outcome: Outcome
    evidence: dict = field(default_factory=dict)

    @property
    def vote(self):
        """The overall verdict this criterion forces on its own, if any."""
        if self.direction is Direction.NECESSARY and self.outcome is Outcome.FAILS:
            return LIKELY_NOT_COMPACT
        if self.direction is Direction.SUFFICIENT and self.outcome is Outcome.PASSES:
            return LIKELY_COMPACT
        if self.direction is Direction.CHARACTERIZATION:
            if self.outcome is Outcome.PASSES:
                return LIKELY_COMPACT
            if self.outcome is Outcome.FAILS:
                return LIKELY_NOT_COMPACT
        return None


def _outcome(direction, label):
    if label == trend.DIVERGING:
        return Outcome.PASSES
    if label == trend.BOUNDED and direction is not Direction.SUFFICIENT:
        return Outcome.FAILS
    return Outcome.INCONCLUSIVE


def _ray_series(fn, n, R_max, n_radii):
    schedule = rays.criteria_rays(n)
    rr = rays.radii(R_max, n_radii)
    per_ray = {label: [float(fn(direction * r)) for r in rr] for label, direction in schedule}
    values, centers = rays.envelope(per_ray, rr, schedule)
    return {"abscissa": rr, "values": values, "centers": centers,
            "rays": [label for label, _ in schedule], "per_ray": per_ray}


def _verdict(criterion, direction, evidence):
    t = trend.classify(evidence["values"])
    evidence["trend"] = t.as_dict()
    return CriterionVerdict(criterion, direction, _outcome(direction, t.label), evidence)


def necessary_integral(V: PotentialField, r: float = 1.0, R_max: float = 8.0,
                       m: int = 41, n_radii: int = 8) -> CriterionVerdict:
    """Integral of V over B(x, r) along rays; a plateau rules compactness out."""
    if not r > 0:
        raise ValueError("r must be positive")
    V = require_semibounded(V, R_max + r)
    ev = _ray_series(lambda x: integrate_ball(V, x, r, m), V.n, R_max, n_radii)
    ev.update(r=r, m=m)
    return _verdict("necessary_integral", Direction.NECESSARY, ev)


def measure_knapsack(cell_values, max_cells):
    """Remove at most ``max_cells`` equal-measure cells to minimize the remaining
    sum.  Taking the largest values first is optimal for this constraint."""
    v = np.asarray(cell_values, dtype=float).ravel()
    order = np.argsort(-v, kind="stable")
    removed = np.zeros(v.size, dtype=bool)
    removed[order[:max(0, int(max_cells))]] = True
    return float(v[~removed].sum()), removed


def worst_case_residual(V: PotentialField, center, r, gamma_m, m, shift):
    dom = ball_grid(center, r, m)
    inside = ball_cells(dom, center, r).membership
    ci = cell_integrals(sample_field(V, dom))
    ci = ci + shift * dom.h ** dom.n
    budget = int(np.floor(gamma_m * r**dom.n / dom.h**dom.n * (1 + 1e-12)))
    value, _ = measure_knapsack(ci[inside], budget)
    return value


def sufficient_measure(V: PotentialField, r: float = 1.0, gamma_m: float = 0.5,
                       R_max: float = 8.0, m: int = 41, n_radii: int = 8) -> CriterionVerdict:
    """inf over F with measure <= gamma_m r^n of the integral of V + C over
    B(x, r) \\ F; divergence along every ray is sufficient for compactness.

    Rays stand in for "every discrete sequence" and the cell-level knapsack
    for "any compact F", so this under-approximates the quantifiers.
    """
    if not (r > 0 and gamma_m > 0):
        raise ValueError("r and gamma_m must be positive")
    V = require_semibounded(V, R_max + r)
    shift = V.shift
    ev = _ray_series(lambda x: worst_case_residual(V, x, r, gamma_m, m, shift),
                     V.n, R_max, n_radii)
    ev.update(r=r, gamma_m=gamma_m, m=m, shift=shift,
              limitation="rays and grid cells stand in for all sequences and all compact sets")
    return _verdict("sufficient_measure", Direction.SUFFICIENT, ev)


def pointwise_growth(V: PotentialField, R_max: float = 8.0, n_radii: int = 8,
                     samples: int = 2048) -> CriterionVerdict:
    """Minimum of V over spheres |x| = R; V -> infinity is sufficient."""
    dirs = sphere_directions(V.n, samples)
    rr = rays.radii(R_max, n_radii)
    mins = [float(np.min(V.value(dirs * R))) for R in rr]
    ev = {"abscissa": rr, "values": mins, "samples": int(len(dirs))}
    return _verdict("pointwise_growth", Direction.SUFFICIENT, ev)


def ball_moment(alpha, n):
    """Integral of prod u_i^(2 alpha_i) over the unit ball of R^n."""
    num = 1.0
    for a in alpha:
        num *= gamma_fn(a + 0.5)
    return num / gamma_fn(sum(alpha) + n / 2 + 1)


def polynomial_ball_integral(poly: PolynomialWeight, centers, r: float = 1.0):
    """Exact integral of a polynomial over B(x, r) for each row x of ``centers``.

    Each monomial is expanded binomially around x; odd powers of the offset
    integrate to zero and even ones use ``ball_moment``.
    """
    x = np.atleast_2d(np.asarray(centers, dtype=float))
    n = poly.dimension
    out = np.zeros(x.shape[0])
    for expo, coef in sorted(poly.terms.items()):
        for k in itertools.product(*[range(0, e + 1, 2) for e in expo]):
            w = coef * ball_moment([kk // 2 for kk in k], n) * r ** (sum(k) + n)
            for j in range(n):
                w = w * comb(expo[j], k[j]) * x[:, j] ** (expo[j] - k[j])
            out += w
    return out


def polynomial_characterization(w: PolynomialWeight, R_max: float = 8.0, m: int = 41,
                                n_radii: int = 8) -> CriterionVerdict:
    """Closed-form integral of |grad phi|^2 over B(x, 1) along rays.

    For polynomial phi this decides compactness of H^1(R^n, phi) in L^2.  The
    quadrature series of V1 over the same balls is computed alongside to check
    that both lead to the same trend.
    """
    if not isinstance(w, PolynomialWeight):
        raise TypeError("polynomial characterization needs a polynomial weight")
    from .potential import PotentialKind, build_potential

    grad_sq = w.grad_sq_poly
    ev = _ray_series(lambda x: polynomial_ball_integral(grad_sq, x[None, :])[0],
                     w.dimension, R_max, n_radii)
    V1 = build_potential(w, PotentialKind.V1)
    v1 = _ray_series(lambda x: integrate_ball(V1, x, 1.0, m), w.dimension, R_max, n_radii)
    ev["V1_ball_values"] = v1["values"]
    ev["V1_trend"] = trend.classify(v1["values"]).label
    verdict = _verdict("polynomial_characterization", Direction.CHARACTERIZATION, ev)
    ev["equivalence_agrees"] = ev["V1_trend"] == ev["trend"]["label"]
    return verdict


@dataclass(eq=False)
class CompactnessReport:
    verdicts: list
    overall: str
    molcanov: Optional[CriterionSweep] = None
    weight: Optional[str] = None
    embedding: Optional[str] = None
    kind: Optional[str] = None
    probe: Optional[dict] = None
    spectral: Optional["SpectralSweep"] = None  # reported, not aggregated
    provenance: dict = field(default_factory=dict)
    conflicts: list = field(default_factory=list)


def overall_verdict(verdicts, molcanov: Optional[CriterionSweep] = None):
    """Fold criterion outcomes into the trichotomy; returns (overall, conflicts)."""
    votes = [(v.criterion, v.vote) for v in verdicts if v.vote is not None]
    poly_decides = any(v.criterion == "polynomial_characterization" and v.vote
                       for v in verdicts)
    if molcanov is not None and molcanov.verdict is not None and not poly_decides:
        label = molcanov.verdict.label
        if label == trend.DIVERGING:
            votes.append(("molcanov", LIKELY_COMPACT))
        elif label == trend.BOUNDED:
            votes.append(("molcanov", LIKELY_NOT_COMPACT))
    kinds = {vote for _, vote in votes}
    if len(kinds) == 1:
        return kinds.pop(), []
    if not kinds:
        return INCONCLUSIVE, []
    return INCONCLUSIVE, [f"{name}: {vote}" for name, vote in votes]


def aggregate(verdicts, molcanov: Optional[CriterionSweep] = None, **meta) -> CompactnessReport:
    if not verdicts and molcanov is None:
        raise ValueError("need at least one criterion verdict")
    overall, conflicts = overall_verdict(verdicts, molcanov)
    return CompactnessReport(verdicts=list(verdicts), overall=overall, molcanov=molcanov,
                             conflicts=conflicts, **meta)
