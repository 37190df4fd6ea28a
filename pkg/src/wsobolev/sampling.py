"""Seedless low-discrepancy point sets."""
import numpy as np
from scipy.stats import norm, qmc


def halton(n, count):
    """First ``count`` nonzero points of the unscrambled Halton sequence."""
    return qmc.Halton(d=n, scramble=False).random(count + 1)[1:]


def ball_points(n, radius, count):
    """About ``count`` Halton points inside the ball B(0, radius)."""
    vol_fraction = np.pi ** (n / 2) / (2**n * _gamma(n / 2 + 1))
    draw = int(np.ceil(count / vol_fraction)) + 1
    pts = (2.0 * halton(n, draw) - 1.0) * radius
    inside = np.einsum("ij,ij->i", pts, pts) <= radius**2
    return np.vstack([np.zeros((1, n)), pts[inside][:count]])


def sphere_directions(n, count):
    """Deterministic unit vectors covering S^{n-1}."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        t = np.linspace(0.0, 2 * np.pi, count, endpoint=False)
        return np.column_stack([np.cos(t), np.sin(t)])
    z = norm.ppf(np.clip(halton(n, count), 1e-12, 1 - 1e-12))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    axes = np.vstack([np.eye(n), -np.eye(n)])
    return np.vstack([axes, z])


def _gamma(x):
    from math import gamma
    return gamma(x)
