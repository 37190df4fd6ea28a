"""Ray schedules used to probe limits as |x| -> infinity."""
import itertools

import numpy as np


def axis_rays(n):
    eye = np.eye(n)
    return [(f"{s}x{j + 1}", sign * eye[j])
            for j in range(n) for s, sign in (("+", 1.0), ("-", -1.0))]


def diagonal_rays(n, limit=16):
    """Sign-pattern diagonals (1, +-1, ...)/sqrt(n) in lexicographic order."""
    if n == 1:
        return []
    out = []
    for signs in itertools.product((1.0, -1.0), repeat=n):
        label = "diag(" + "".join("+" if s > 0 else "-" for s in signs) + ")"
        out.append((label, np.array(signs) / np.sqrt(n)))
        if len(out) == limit:
            break
    return out


def criteria_rays(n):
    """2n axis rays plus up to 16 diagonals."""
    return axis_rays(n) + diagonal_rays(n, 16)


def molcanov_rays(n):
    """2n axis rays plus n diagonals."""
    return axis_rays(n) + diagonal_rays(n, n)


def radii(R_max, count=8):
    return [R_max * k / count for k in range(1, count + 1)]


def envelope(per_ray, radii_list, rays):
    """Minimum over rays at each radius, with the centre attaining it.

    Values within 1e-12 relative of the minimum count as ties and resolve to
    the first ray in schedule order, so symmetric rays pick a stable centre.
    """
    labels = [label for label, _ in rays]
    table = np.array([per_ray[label] for label in labels])
    low = table.min(axis=0)
    tie = table <= low + 1e-12 * np.maximum(np.abs(low), 1e-300)
    pick = np.argmax(tie, axis=0)
    values = table[pick, np.arange(len(radii_list))]
    centers = [tuple(float(c) for c in rays[i][1] * r) for i, r in zip(pick, radii_list)]
    return [float(v) for v in values], centers
