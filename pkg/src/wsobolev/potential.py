"""Schrodinger potentials attached to a weight.

For a weight phi the two embeddings reduce to the operators -Laplace + V with

    V1 = |grad phi|^2 / 4 - (Laplace phi) / 2      (H^1(R^n, phi))
    V2 = |grad phi|^2 / 4 + (Laplace phi) / 2      (H^1(R^n, phi, grad phi))
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .sampling import ball_points, sphere_directions
from .weight import PolynomialWeight, WeightFunction, poly_add

PROBE_MARGIN = 0.05


class PotentialKind(str, enum.Enum):
    V1 = "V1"
    V2 = "V2"

    @property
    def sign(self):
        return -1.0 if self is PotentialKind.V1 else 1.0

    @property
    def embedding(self):
        return "H1" if self is PotentialKind.V1 else "H1-grad"


class HypothesisViolation(ValueError):
    """The potential does not look bounded below."""


@dataclass(frozen=True, eq=False)
class PotentialField:
    kind: Optional[PotentialKind]
    weight: Optional[WeightFunction]
    lower_bound_estimate: float = float("inf")
    probe_region: Optional[float] = None
    semibounded: Optional[bool] = None
    certified: bool = False
    func: Optional[Callable] = None
    dimension: int = 0

    @classmethod
    def from_callable(cls, func, n):
        """Potential given directly as a vectorized function of ``(N, n)`` points."""
        return cls(kind=None, weight=None, func=func, dimension=n)

    @property
    def n(self):
        return self.weight.dimension if self.weight is not None else self.dimension

    @property
    def shift(self):
        """Constant C >= 0 making V + C nonnegative on the probed region."""
        if not np.isfinite(self.lower_bound_estimate):
            return 0.0
        return max(0.0, -self.lower_bound_estimate)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if self.func is not None:
            return np.asarray(self.func(x), dtype=float)
        g = self.weight.grad(x)
        return 0.25 * np.einsum("ij,ij->i", g, g) + self.kind.sign * 0.5 * self.weight.lap(x)

    @property
    def polynomial(self) -> Optional[PolynomialWeight]:
        """Exact V as a polynomial when the weight is polynomial."""
        w = self.weight
        if not isinstance(w, PolynomialWeight):
            return None
        terms = {k: 0.25 * v for k, v in w.grad_sq_poly.terms.items()}
        half_lap = {k: 0.5 * v for k, v in w.laplacian_poly.terms.items()}
        return PolynomialWeight(w.dimension, poly_add(terms, half_lap, self.kind.sign))


def build_potential(w: WeightFunction, kind: PotentialKind) -> PotentialField:
    return PotentialField(kind=PotentialKind(kind), weight=w)


def eval_potential(V: PotentialField, x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return float(V.value(x[None, :])[0])
    return V.value(x)


@dataclass(frozen=True)
class SemiboundProbe:
    bound: float
    certified: bool
    semibounded: bool
    sampled_min: float
    inner_min: float
    shell_min: float
    argmin: tuple

    def __iter__(self):
        return iter((self.bound, self.certified))


def _leading_form_positive(poly: PolynomialWeight):
    deg = poly.degree
    if deg == 0:
        return True
    if deg % 2:
        return False
    lead = PolynomialWeight(poly.dimension,
                            {k: v for k, v in poly.terms.items() if sum(k) == deg})
    vals = lead.value(sphere_directions(poly.dimension, 4096))
    return bool(np.min(vals) > 1e-8 * np.max(np.abs(vals)))


def _polish(V, x0, inside):
    f0 = float(V.value(x0[None, :])[0])
    # the simplex may wander far out on potentials unbounded below; such
    # points fail ``inside`` anyway, so overflow there is not an error
    with np.errstate(over="ignore", invalid="ignore"):
        res = minimize(lambda z: float(V.value(z[None, :])[0]), x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 2000})
    if res.success and np.isfinite(res.fun) and inside(res.x) and res.fun < f0:
        return float(res.fun), tuple(res.x)
    return f0, tuple(x0)


def probe_semibounded(V: PotentialField, R_probe: float, samples: int = 4096) -> SemiboundProbe:
    """Estimate inf V on B(0, R_probe) and decide whether V looks bounded below.

    ``certified`` is only set for polynomial V of even degree whose leading form
    is positive on the unit sphere.  Otherwise V counts as semibounded when the
    minimum over the outer shell R/2 < |x| <= R does not undercut the inner
    ball's minimum.
    """
    if R_probe <= 0 or samples < 1:
        raise ValueError("R_probe must be > 0 and samples >= 1")
    n = V.n
    pts = ball_points(n, R_probe, samples)
    vals = V.value(pts)
    radii = np.linalg.norm(pts, axis=1)
    inner = radii <= R_probe / 2

    def region_min(mask, lo, hi):
        if not np.any(mask):
            return np.inf, None
        idx = np.flatnonzero(mask)
        order = idx[np.argsort(vals[idx], kind="stable")[:3]]
        best = (np.inf, None)
        for i in order:
            cand = _polish(V, pts[i], lambda z: lo < np.linalg.norm(z) <= hi)
            if cand[0] < best[0]:
                best = cand
        return best

    inner_min, inner_arg = region_min(inner, -1.0, R_probe / 2)
    shell_min, shell_arg = region_min(~inner, R_probe / 2, R_probe)
    if inner_min <= shell_min:
        vmin, arg = inner_min, inner_arg
    else:
        vmin, arg = shell_min, shell_arg
    bound = vmin - PROBE_MARGIN * abs(vmin)

    poly = V.polynomial
    certified = poly is not None and _leading_form_positive(poly)
    decreasing = shell_min < inner_min - (PROBE_MARGIN * abs(inner_min) + 1e-6)
    return SemiboundProbe(bound=float(bound), certified=bool(certified),
                          semibounded=bool(certified or not decreasing),
                          sampled_min=float(vmin), inner_min=float(inner_min),
                          shell_min=float(shell_min), argmin=tuple(float(a) for a in arg))


def probed(V: PotentialField, R_probe: float, samples: int = 4096) -> PotentialField:
    """Copy of V carrying the probe's bound and verdict."""
    p = probe_semibounded(V, R_probe, samples)
    return replace(V, lower_bound_estimate=p.bound, probe_region=R_probe,
                   semibounded=p.semibounded, certified=p.certified)


def require_semibounded(V: PotentialField, R_probe: float) -> PotentialField:
    if V.semibounded is None:
        V = probed(V, R_probe)
    if not V.semibounded:
        raise HypothesisViolation(
            "potential does not appear bounded below (sampled minimum keeps "
            "decreasing towards the probe radius); the capacity and integral "
            "criteria assume V >= -C")
    return V
