"""Independent oracles used by the tests.

Deliberately avoids the library's evaluation code: envelopes are rebuilt from
raw breakpoints with np.interp and integrated by brute-force dense sampling.
"""

from __future__ import annotations

import numpy as np


def interp_envelope(
    pieces: list[tuple[list[float], float]], xs: np.ndarray
) -> np.ndarray:
    """Pointwise max over clipped piecewise-linear sets.

    Each piece is (breakpoints, clip_height): breakpoints are strictly
    increasing [a, b, c] (triangle) or [a, b, c, d] (trapezoid).
    """
    env = np.zeros_like(xs, dtype=float)
    for points, height in pieces:
        if len(points) == 3:
            fp = [0.0, 1.0, 0.0]
        else:
            fp = [0.0, 1.0, 1.0, 0.0]
        mu = np.interp(xs, points, fp, left=0.0, right=0.0)
        env = np.maximum(env, np.minimum(height, mu))
    return env


def dense_centroid(
    pieces: list[tuple[list[float], float]],
    lo: float,
    hi: float,
    resolution: int,
) -> float:
    """Brute-force centroid: sum(x*mu)/sum(mu) over `resolution` samples."""
    xs = np.linspace(lo, hi, resolution)
    mu = interp_envelope(pieces, xs)
    mass = mu.sum()
    if mass <= 0:
        raise ValueError("zero mass envelope")
    return float((xs * mu).sum() / mass)


def denser(resolution: int, factor: int = 10) -> int:
    """Resolution whose grid step is `factor` times finer."""
    return factor * (resolution - 1) + 1


def lattice_envelope_pieces(
    rng: np.random.Generator, resolution: int, max_sets: int = 4
) -> list[tuple[list[float], float]]:
    """Random envelope whose kinks all fall on the `resolution` grid.

    Sets are disjoint symmetric triangles/trapezoids with breakpoints on the
    grid and clip heights of the form k/W (W the ramp width in cells), so the
    clip corners land on grid points too. On such envelopes the uniform-grid
    centroid is exact at the base resolution and at any 10x refinement, which
    pins the estimator implementation rather than quadrature error.
    """
    cells = resolution - 1
    h = 1.0 / cells
    n_sets = int(rng.integers(1, max_sets + 1))
    pieces = []
    cursor = 1  # keep the envelope zero at both universe endpoints
    for _ in range(n_sets):
        max_w = (cells - 1 - cursor) // (2 * n_sets)
        if max_w < 2:
            break
        w = int(rng.integers(2, max_w + 1))  # ramp width in cells
        plateau = int(rng.integers(0, max(1, max_w // 2)))
        start = cursor + int(rng.integers(0, max(1, (cells - cursor - 2 * w - plateau) // n_sets)))
        a = start
        b = a + w
        c = b + plateau
        d = c + w
        if d >= cells:
            break
        k = int(rng.integers(1, w + 1))
        height = k / w
        if plateau == 0:
            pieces.append(([a * h, b * h, d * h], height))
        else:
            pieces.append(([a * h, b * h, c * h, d * h], height))
        cursor = d + 1
    if not pieces:
        pieces.append(([0.25, 0.5, 0.75], 1.0))
    return pieces


def free_envelope_pieces(
    rng: np.random.Generator, max_sets: int = 4
) -> list[tuple[list[float], float]]:
    """Random envelope with unconstrained breakpoints (overlaps allowed)."""
    n_sets = int(rng.integers(1, max_sets + 1))
    pieces = []
    for _ in range(n_sets):
        points = np.sort(rng.uniform(0.02, 0.98, size=4))
        # enforce a minimum ramp width so slopes stay moderate
        points = np.maximum.accumulate(points + np.arange(4) * 0.03)
        if points[-1] >= 0.99:
            points = points / (points[-1] + 0.02)
        if rng.uniform() < 0.5:
            pieces.append((list(points[:3]), float(rng.uniform(0.1, 1.0))))
        else:
            pieces.append((list(points), float(rng.uniform(0.1, 1.0))))
    return pieces
