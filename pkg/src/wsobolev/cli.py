"""Command-line interface: ``wsobolev <subcommand> [flags]``.

Exit codes: 0 success, 2 invalid configuration, 3 hypothesis violation
(V not semibounded), 1 numerical failure.  Errors are printed as JSON.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from . import __version__
from .capacity import CapacityError, CapacityProblem, Convention, capacity
from .criteria import (aggregate, necessary_integral, pointwise_growth,
                       polynomial_characterization, sufficient_measure)
from .grid import CellSet, GridDomain, ball_cells
from .molcanov import G_ALIASES, G_CHOICES, criterion_sweep, gamma_for
from .potential import (HypothesisViolation, PotentialKind, build_potential,
                        probe_semibounded, probed)
from .report import build_report, dumps, plain, sweep_series, write_csv_series
from .spectral import (DiscreteSchrodinger, conjugation_residual, dirichlet_sweep,
                       lowest_eigenvalues)
from .weight import PolynomialWeight, WeightDomainError, WeightSyntaxError, parse_weight

EMBEDDINGS = {"H1": PotentialKind.V1, "H1-grad": PotentialKind.V2}
EXIT_NUMERIC, EXIT_CONFIG, EXIT_HYPOTHESIS = 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    weight: str
    n: int
    embedding: str = "H1"
    d: float = 1.0
    g: str = "d"
    c: float = 0.5
    gamma_m: float = 0.5
    r: float = 1.0
    R_max: float = 8.0
    m: int = 41
    tol: float = 1e-8
    m_molcanov: Optional[int] = None
    m_spectral: Optional[int] = None
    spectral: bool = True

    def validate(self):
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.embedding not in EMBEDDINGS:
            raise ConfigError(f"embedding must be one of {sorted(EMBEDDINGS)}")
        for name in ("d", "c", "gamma_m", "r", "R_max", "tol"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a positive finite number")
        if self.gamma_m >= 1:
            raise ConfigError("gamma_m must be below 1")
        if self.m < 3:
            raise ConfigError("m must be at least 3")
        for name in ("m_molcanov", "m_spectral"):
            value = getattr(self, name)
            if value is not None and value < 3:
                raise ConfigError(f"{name.replace('_', '-')} must be at least 3")
        if not self.R_max > self.d:
            raise ConfigError("R_max must exceed d")
        try:
            gamma_for(self.d, self.g, self.c)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    @property
    def kind(self):
        return EMBEDDINGS[self.embedding]

    @property
    def probe_radius(self):
        return self.R_max + max(self.r, self.d) * math.sqrt(self.n)


def _parse(cfg: RunConfig):
    try:
        return parse_weight(cfg.weight, cfg.n)
    except WeightSyntaxError as exc:
        raise ConfigError(f"weight: {exc}") from None


def _probe_summary(V, radius):
    p = probe_semibounded(V, radius)
    return p, {"kind": V.kind.value, "lower_bound": p.bound, "certified": p.certified,
               "semibounded": p.semibounded, "probe_radius": radius,
               "sampled_min": p.sampled_min, "argmin": list(p.argmin)}


def _semibounded_potential(cfg: RunConfig, w):
    V = build_potential(w, cfg.kind)
    p, summary = _probe_summary(V, cfg.probe_radius)
    if not p.semibounded:
        raise HypothesisViolation(
            f"V = {cfg.kind.value} for weight {cfg.weight!r} does not look bounded below: "
            f"minimum {p.shell_min:.6g} on the outer shell undercuts {p.inner_min:.6g} "
            f"inside radius {cfg.probe_radius / 2:g}")
    return probed(V, cfg.probe_radius), summary


def analyze(cfg: RunConfig) -> dict:
    """Full report as a JSON-ready dict (validated against the schema)."""
    cfg.validate()
    w = _parse(cfg)
    V, summary = _semibounded_potential(cfg, w)
    verdicts = [
        necessary_integral(V, cfg.r, cfg.R_max, cfg.m),
        sufficient_measure(V, cfg.r, cfg.gamma_m, cfg.R_max, cfg.m),
        pointwise_growth(V, cfg.R_max),
    ]
    if isinstance(w, PolynomialWeight) and cfg.kind is PotentialKind.V1:
        verdicts.append(polynomial_characterization(w, cfg.R_max, cfg.m))
    sweep = None
    if cfg.n >= 2:
        sweep = criterion_sweep(V, cfg.d, cfg.g, cfg.c, cfg.R_max, cfg.m_molcanov,
                                tol=cfg.tol)
    spectral = None
    if cfg.spectral:
        spectral = dirichlet_sweep(V, cfg.d, cfg.R_max, cfg.m_spectral, tol=cfg.tol)
    rep = aggregate(verdicts, sweep, weight=cfg.weight, embedding=cfg.embedding,
                    kind=cfg.kind.value, probe=summary, spectral=spectral)
    return build_report(rep, asdict(cfg))


# --------------------------------------------------------------------------
# argument handling

def _common(p, weight=True):
    if weight:
        p.add_argument("--weight", required=True, help="weight phi, e.g. 'x1^2 + x2^2'")
        p.add_argument("--embedding", choices=sorted(EMBEDDINGS), default="H1")
    p.add_argument("--n", type=int, required=True, help="space dimension")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument("--csv-dir", help="directory for per-series CSV files")


def _sweep_flags(p):
    p.add_argument("--d", type=float, default=1.0, help="cube side")
    p.add_argument("--R-max", dest="R_max", type=float, default=8.0)
    p.add_argument("--tol", type=float, default=1e-8)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wsobolev",
        description="Compactness checks for weighted H^1 spaces in L^2.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run every criterion and aggregate a verdict")
    _common(p)
    _sweep_flags(p)
    p.add_argument("--g", default="d", choices=sorted(G_CHOICES) + sorted(G_ALIASES))
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--gamma-m", dest="gamma_m", type=float, default=0.5)
    p.add_argument("--r", type=float, default=1.0, help="ball radius for integral criteria")
    p.add_argument("--m", type=int, default=41, help="quadrature points per axis")
    p.add_argument("--m-molcanov", type=int, help="grid points per axis of each cube")
    p.add_argument("--m-spectral", type=int, help="grid points per axis for eigenvalues")
    p.add_argument("--no-spectral", action="store_true", help="skip the eigenvalue sweep")

    p = sub.add_parser("capacity", help="capacity of a ball or cube obstacle")
    _common(p, weight=False)
    p.add_argument("--obstacle", choices=["ball", "cube"], default="ball")
    p.add_argument("--radius", type=float, default=1.0, help="ball radius or cube half-side")
    p.add_argument("--box", type=float, default=None, help="ambient box side (default 8 radius)")
    p.add_argument("--m", type=int, default=33)
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("molcanov", help="capacity criterion sweep along rays")
    _common(p)
    _sweep_flags(p)
    p.add_argument("--g", default="d", choices=sorted(G_CHOICES) + sorted(G_ALIASES))
    p.add_argument("--c", type=float, default=0.5)
    p.add_argument("--m", type=int, default=None, help="grid points per axis of each cube")

    p = sub.add_parser("spectrum", help="lowest Dirichlet eigenvalues")
    _common(p)
    _sweep_flags(p)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--box", type=float, default=None,
                   help="if given, eigenvalues on the centred box of this side instead of a sweep")
    p.add_argument("--k", type=int, default=3, help="eigenvalue count for --box")

    p = sub.add_parser("check-conjugation", help="conjugation identity residual")
    _common(p)
    p.add_argument("--side", type=float, default=2.0)
    p.add_argument("--m", type=int, nargs="+", default=[21, 41, 81])
    p.add_argument("--trials", type=int, default=8)
    return parser


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _cmd_analyze(a):
    cfg = RunConfig(weight=a.weight, n=a.n, embedding=a.embedding, d=a.d, g=a.g, c=a.c,
                    gamma_m=a.gamma_m, r=a.r, R_max=a.R_max, m=a.m, tol=a.tol,
                    m_molcanov=a.m_molcanov, m_spectral=a.m_spectral,
                    spectral=not a.no_spectral)
    doc = analyze(cfg)
    return doc, doc["series"]


def _cmd_capacity(a):
    _require(a.n >= 2, "capacity needs n >= 2")
    _require(a.radius > 0 and a.m >= 3 and a.tol > 0, "radius, m and tol must be positive (m >= 3)")
    side = a.box or 8 * a.radius
    _require(side > 2 * a.radius, "box must contain the obstacle")
    dom = GridDomain(a.n, (0.0,) * a.n, side, a.m)
    if a.obstacle == "ball":
        cells = ball_cells(dom, (0.0,) * a.n, a.radius)
    else:
        cc = dom.cell_centers()
        inside = np.all(np.abs(cc) <= a.radius, axis=1).reshape(dom.cell_shape)
        cells = CellSet(dom, inside)
    conv = Convention.for_dimension(a.n)
    res = capacity(CapacityProblem(dom, cells, conv), a.tol)
    doc = {"obstacle": a.obstacle, "radius": a.radius, "n": a.n, "box": side, "m": a.m,
           "convention": conv.value, "value": res.value, "residual": res.residual,
           "iterations": res.iterations, "h": res.h, "box_values": list(res.box_values),
           "truncation": res.truncation,
           "u_min": float(res.potential.values.min()), "u_max": float(res.potential.values.max())}
    if a.obstacle == "ball" and a.n >= 3:
        area = 2 * math.pi ** (a.n / 2) / math.gamma(a.n / 2)
        doc["whole_space_reference"] = (a.n - 2) * area * a.radius ** (a.n - 2)
    return doc, {}


def _potential_from(a):
    w = _parse(RunConfig(weight=a.weight, n=a.n))
    return w, build_potential(w, EMBEDDINGS[a.embedding])


def _cmd_molcanov(a):
    _require(a.R_max > a.d > 0, "need R_max > d > 0")
    try:
        gamma_for(a.d, a.g, a.c)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _, V = _potential_from(a)
    sweep = criterion_sweep(V, a.d, a.g, a.c, a.R_max, a.m, tol=a.tol)
    s = sweep_series(sweep, "molcanov")
    return {"verdict": sweep.verdict.label, "series_ref": "molcanov", "series": {"molcanov": s}}, \
        {"molcanov": s}


def _cmd_spectrum(a):
    _require(a.m is None or a.m >= 3, "m must be at least 3")
    w, V = _potential_from(a)
    if a.box is not None:
        _require(a.box > 0 and a.k >= 1, "box must be positive and k >= 1")
        dom = GridDomain(a.n, (0.0,) * a.n, a.box, a.m or 101)
        res = lowest_eigenvalues(DiscreteSchrodinger.from_potential(V, dom), a.k, a.tol)
        return {"box": a.box, "m": dom.m, "eigenvalues": res.values, "residuals": res.residuals,
                "iterations": res.iterations, "converged": res.converged}, {}
    _require(a.R_max > a.d > 0, "need R_max > d > 0")
    sweep = dirichlet_sweep(V, a.d, a.R_max, a.m, tol=a.tol)
    s = sweep_series(sweep, "spectral")
    return {"verdict": sweep.verdict.label, "series_ref": "spectral", "series": {"spectral": s}}, \
        {"spectral": s}


def _cmd_check_conjugation(a):
    _require(all(m >= 3 for m in a.m) and a.side > 0 and a.trials >= 1,
             "need side > 0, trials >= 1 and every m >= 3")
    w, _ = _potential_from(a)
    kind = EMBEDDINGS[a.embedding]
    res = [conjugation_residual(w, GridDomain(a.n, (0.0,) * a.n, a.side, m), a.trials, kind=kind)
           for m in a.m]
    ratios = [r0 / r1 if r1 > 0 else None for r0, r1 in zip(res, res[1:])]
    series = {"conjugation": {"abscissa": [a.side / (m - 1) for m in a.m], "values": res}}
    return {"m": a.m, "residuals": res, "ratios": ratios, "series": series}, series


COMMANDS = {
    "analyze": _cmd_analyze,
    "capacity": _cmd_capacity,
    "molcanov": _cmd_molcanov,
    "spectrum": _cmd_spectrum,
    "check-conjugation": _cmd_check_conjugation,
}


def _error(kind, exc):
    return dumps({"error": {"type": kind, "message": str(exc)}})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc, series = COMMANDS[args.command](args)
    except HypothesisViolation as exc:
        sys.stdout.write(_error("hypothesis", exc))
        return EXIT_HYPOTHESIS
    except (CapacityError, FloatingPointError, OverflowError) as exc:
        sys.stdout.write(_error("numerical", exc))
        return EXIT_NUMERIC
    except (ValueError, WeightDomainError) as exc:
        # ConfigError, GridTooLarge and parameter checks inside the library
        sys.stdout.write(_error("config", exc))
        return EXIT_CONFIG
    text = dumps(plain(doc))
    if args.out:
        os.makedirs(os.path.dirname(os.path.abspath(args.out)), exist_ok=True)
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.csv_dir and series:
        write_csv_series(series, args.csv_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
