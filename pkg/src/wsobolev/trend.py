"""Heuristic classification of "does this series tend to infinity".

A series sampled at increasing radii is

* ``diverging`` when its second half is strictly increasing and the mean of
  the last quarter exceeds the first-quarter mean by at least
  ``(DIVERGENCE_RATIO - 1) * |first-quarter mean|`` (for a positive first
  quarter this is the plain ``last >= 4 * first`` rule);
* ``bounded`` when the last-quarter mean grows by at most
  ``PLATEAU_GROWTH * |first-quarter mean|``;
* ``inconclusive`` otherwise.

A finite series never proves a limit; the labels only summarize evidence.
"""
from dataclasses import asdict, dataclass

import numpy as np

DIVERGENCE_RATIO = 4.0
PLATEAU_GROWTH = 0.25
ABS_TOL = 1e-9

DIVERGING = "diverging"
BOUNDED = "bounded"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Trend:
    label: str
    first_quarter_mean: float
    last_quarter_mean: float
    tail_increasing: bool
    divergence_ratio: float = DIVERGENCE_RATIO
    plateau_growth: float = PLATEAU_GROWTH

    def as_dict(self):
        return asdict(self)


def classify(values) -> Trend:
    v = np.asarray(values, dtype=float)
    if v.size < 4:
        raise ValueError("need at least 4 samples to judge a trend")
    q = max(1, v.size // 4)
    first = float(v[:q].mean())
    last = float(v[-q:].mean())
    tail = v[v.size // 2:]
    increasing = bool(np.all(np.diff(tail) > 0))
    atol = ABS_TOL * max(1.0, float(np.max(np.abs(v))))
    scale = max(abs(first), atol)
    growth = last - first
    if increasing and growth > atol and growth >= (DIVERGENCE_RATIO - 1.0) * scale:
        label = DIVERGING
    elif growth <= PLATEAU_GROWTH * scale:
        label = BOUNDED
    else:
        label = INCONCLUSIVE
    return Trend(label, first, last, increasing)
