"""Dirichlet finite-difference operators and their lowest eigenvalues.

``DiscreteSchrodinger`` is S = -Delta_h + V on the interior nodes of a grid.
``DiscreteWeightedOp`` is the weighted operator

    P u = -Delta_h u + sum_j (d phi / d x_j) D_j u   (+ Delta phi u for P2)

with centred first differences D_j, self-adjoint up to O(h^2) in the inner
product sum e^(-phi) h^n u v.  Conjugating P by e^(phi/2) gives S with V1
(or V2), which ``conjugation_residual`` checks numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels, rays, trend
from .grid import GridDomain, GridField, sample_field
from .potential import PotentialField, PotentialKind, build_potential, require_semibounded

DEFAULT_WINDOW = 300


def _active_index(dom: GridDomain):
    return np.flatnonzero(dom.interior_mask().ravel()).astype(np.int64)


@dataclass(frozen=True, eq=False)
class DiscreteSchrodinger:
    domain: GridDomain
    potential: GridField

    def __post_init__(self):
        if self.potential.domain != self.domain:
            raise ValueError("potential must be sampled on the operator's grid")

    @classmethod
    def from_potential(cls, V: PotentialField, dom: GridDomain):
        return cls(dom, sample_field(V, dom))

    @property
    def active(self):
        return _active_index(self.domain)

    def apply(self, u):
        """S u for a flat full-grid array; boundary entries of the result are 0."""
        dom = self.domain
        return kernels.schrodinger_apply(
            np.ascontiguousarray(u, dtype=float), self.potential.values.ravel(),
            self.active, kernels.flat_strides(dom.shape), 1.0 / dom.h**2)

    def lower_bound(self):
        """min V over active nodes; -Delta_h is nonnegative, so S is above it."""
        return float(self.potential.values.ravel()[self.active].min())


@dataclass(frozen=True, eq=False)
class DiscreteWeightedOp:
    domain: GridDomain
    phi: np.ndarray
    grad: np.ndarray  # (n, size)
    zeroth: np.ndarray
    kind: PotentialKind = PotentialKind.V1

    @classmethod
    def from_weight(cls, w, dom: GridDomain, kind=PotentialKind.V1):
        kind = PotentialKind(kind)
        pts = dom.points()
        phi = np.asarray(w.value(pts), dtype=float)
        grad = np.ascontiguousarray(np.asarray(w.grad(pts), dtype=float).T)
        if kind is PotentialKind.V2:
            zeroth = np.asarray(w.lap(pts), dtype=float)
        else:
            zeroth = np.zeros(dom.size)
        return cls(dom, phi, grad, zeroth, kind)

    @property
    def active(self):
        return _active_index(self.domain)

    def apply(self, u):
        dom = self.domain
        return kernels.drift_apply(
            np.ascontiguousarray(u, dtype=float), self.grad, self.zeroth, self.active,
            kernels.flat_strides(dom.shape), 1.0 / dom.h**2, 0.5 / dom.h)

    def inner(self, u, v):
        """<u, v>_phi with node weights e^(-phi) h^n over active nodes."""
        a = self.active
        return float(np.sum(np.exp(-self.phi[a]) * u[a] * v[a]) * self.domain.h**self.domain.n)

    def symmetry_defect(self, u, v):
        return abs(self.inner(self.apply(u), v) - self.inner(u, self.apply(v)))


@dataclass(frozen=True, eq=False)
class EigenResult:
    values: np.ndarray
    residuals: np.ndarray
    iterations: int
    restarts: int
    converged: bool
    shift: float
    vectors: Optional[np.ndarray] = None  # (k, size), full grid, unit norm

    def field(self, op: DiscreteSchrodinger, i=0):
        return GridField(op.domain, self.vectors[i].reshape(op.domain.shape))


def lowest_eigenvalues(op: DiscreteSchrodinger, k: int = 1, tol: float = 1e-8,
                       bound: Optional[float] = None, window: int = DEFAULT_WINDOW,
                       max_restarts: int = 200, seed: int = 0) -> EigenResult:
    """k smallest eigenvalues of S by restarted Lanczos.

    The Krylov basis is fully reorthogonalized and capped at ``window``
    vectors; when full, the basis is compressed to the best Ritz vectors plus
    the current residual direction (a Krylov-Schur restart).  Lanczos runs on
    S - bound + 1, which is positive definite; ``bound`` defaults to the
    smallest node value of V.  Each returned pair satisfies
    ||S x - lambda x|| <= tol with ||x|| = 1 unless ``converged`` is False.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    idx = op.active
    N = idx.size
    if k > N:
        raise ValueError(f"asked for {k} eigenvalues of an operator of size {N}")
    size = op.domain.size
    lb = op.lower_bound() if bound is None else min(float(bound), op.lower_bound())
    shift = 1.0 - lb
    full = np.zeros(size)

    def A(v):
        full[idx] = v
        return op.apply(full)[idx] + shift * v

    window = max(min(window, N), min(N, k + 2))
    keep = min(max(2 * k, k + 10), window // 2, N)
    rng = np.random.default_rng(seed)
    Q = np.zeros((N, window))
    W = np.zeros((N, window))
    q = rng.standard_normal(N)
    q /= np.linalg.norm(q)
    j = 0
    iters = restarts = 0
    scale = 1.0
    theta = res = X = None

    def orthogonalize(v, basis):
        for _ in range(2):
            v = v - basis @ (basis.T @ v)
        return v

    while True:
        Q[:, j] = q
        W[:, j] = A(q)
        iters += 1
        j += 1
        r = orthogonalize(W[:, j - 1], Q[:, :j])
        beta = np.linalg.norm(r)
        scale = max(scale, float(np.linalg.norm(W[:, j - 1])))
        exhausted = j == N
        if j >= k and (j % 10 == 0 or j == window or exhausted or beta <= 1e-12 * scale):
            H = Q[:, :j].T @ W[:, :j]
            theta, Y = np.linalg.eigh(0.5 * (H + H.T))
            Yk = Y[:, :k]
            X = Q[:, :j] @ Yk
            res = np.linalg.norm(W[:, :j] @ Yk - X * theta[:k], axis=0)
            if np.all(res <= 0.5 * tol) or exhausted:
                break
            if j == window:
                if restarts >= max_restarts:
                    break
                restarts += 1
                Yp = Y[:, :keep]
                Q[:, :keep] = Q[:, :j] @ Yp
                W[:, :keep] = W[:, :j] @ Yp
                j = keep
                r = orthogonalize(r, Q[:, :j])
                beta = np.linalg.norm(r)
        if beta <= 1e-12 * scale:
            # invariant subspace: continue with a fresh direction
            r = orthogonalize(rng.standard_normal(N), Q[:, :j])
            beta = np.linalg.norm(r)
        q = r / beta

    values = theta[:k] - shift
    vectors = np.zeros((k, size))
    vectors[:, idx] = (X / np.linalg.norm(X, axis=0)).T
    true_res = np.array([np.linalg.norm(op.apply(vectors[i]) - values[i] * vectors[i])
                         for i in range(k)])
    return EigenResult(values=values, residuals=true_res, iterations=iters,
                       restarts=restarts, converged=bool(np.all(true_res <= tol)),
                       shift=shift, vectors=vectors)


def _bump(pts, center, radius, tilt):
    """prod_j (1 - t_j^2)^4 (1 + a_j t_j) with t = (x - center) / radius."""
    t = (pts - center) / radius
    inside = np.all(np.abs(t) < 1.0, axis=1)
    vals = np.prod(np.clip(1.0 - t * t, 0.0, None) ** 4 * (1.0 + tilt * t), axis=1)
    return np.where(inside, vals, 0.0)


def conjugation_residual(w, dom: GridDomain, trials: int = 8, seed: int = 0,
                         kind=PotentialKind.V1) -> float:
    """max over bump functions u of
    ||e^(-phi/2) P_h (e^(phi/2) u) - (-Delta_h + V) u|| / ||u||.

    Test functions are products of polynomial bumps filling the inner half of
    the cube, with random tilts drawn from ``seed`` independently of the
    resolution, so refinements test the same functions.  The residual is
    O(h^2); its constant grows with the curvature of u, hence the widest
    admissible support.
    """
    kind = PotentialKind(kind)
    pts = dom.points()
    phi = np.asarray(w.value(pts), dtype=float)
    if not np.all(np.isfinite(phi)) or np.max(np.abs(phi)) / 2 > 700.0:
        raise OverflowError(
            "e^(phi/2) overflows on this domain; center or rescale phi so that "
            "|phi| / 2 stays below ~700 on the grid")
    P = DiscreteWeightedOp.from_weight(w, dom, kind)
    S = DiscreteSchrodinger(dom, GridField(dom, build_potential(w, kind).value(pts)
                                           .reshape(dom.shape)))
    up = np.exp(0.5 * phi)
    down = np.exp(-0.5 * phi)
    rng = np.random.default_rng(seed)
    quarter = dom.side / 4
    a = S.active
    worst = 0.0
    for _ in range(trials):
        u = _bump(pts, np.array(dom.center), quarter, rng.uniform(-0.5, 0.5, dom.n))
        diff = down * P.apply(up * u) - S.apply(u)
        norm = np.linalg.norm(u[a])
        if norm > 0:
            worst = max(worst, float(np.linalg.norm(diff[a]) / norm))
    return worst


def box_ground_energy(n, side, m):
    """Lowest Dirichlet eigenvalue of -Delta_h on the cube (closed form)."""
    h = side / (m - 1)
    return n * 4.0 / h**2 * math.sin(math.pi / (2 * (m - 1))) ** 2


@dataclass(eq=False)
class SpectralSweep:
    d: float
    m: int
    radii: list
    centers: list
    values: list
    baseline: float
    per_ray: dict = field(default_factory=dict)
    residuals: list = field(default_factory=list)
    converged: bool = True
    verdict: Optional[trend.Trend] = None

    def series(self):
        return list(zip(self.radii, self.values))


def default_sweep_points(n):
    return {1: 65, 2: 21, 3: 11}.get(n, 7)


def dirichlet_sweep(V: PotentialField, d: float = 1.0, R_max: float = 8.0,
                    m: Optional[int] = None, n_radii: int = 8, tol: float = 1e-8) -> SpectralSweep:
    """lambda_1 of the Dirichlet realization on Q_d(x) for x moving out along rays.

    The reported series is the minimum over rays.  The trend is judged on
    lambda_1 minus the ground energy of the empty box, so the constant
    n pi^2 / d^2 offset does not mask growth of V.
    """
    if not d > 0:
        raise ValueError("d must be positive")
    n = V.n
    V = require_semibounded(V, R_max + d * math.sqrt(n))
    m = m or default_sweep_points(n)
    schedule = rays.molcanov_rays(n)
    rr = rays.radii(R_max, n_radii)
    per_ray, residuals = {}, []
    converged = True
    for label, direction in schedule:
        row = []
        for r in rr:
            dom = GridDomain(n, tuple(direction * r), d, m)
            res = lowest_eigenvalues(DiscreteSchrodinger.from_potential(V, dom), 1, tol)
            converged = converged and res.converged
            residuals.append(float(res.residuals[0]))
            row.append(float(res.values[0]))
        per_ray[label] = row
    values, centers = rays.envelope(per_ray, rr, schedule)
    base = box_ground_energy(n, d, m)
    return SpectralSweep(d=d, m=m, radii=rr, centers=centers, values=values, baseline=base,
                         per_ray=per_ray, residuals=residuals, converged=converged,
                         verdict=trend.classify([v - base for v in values]))
