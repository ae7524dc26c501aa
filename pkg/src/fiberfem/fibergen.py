"""Fiber network generators and the line-based network file format.

Two generators cover the validation setups: regular arrays of straight
parallel fibers whose radius is derived from a requested volume ratio,
and randomly placed planar chopped fibers (random sequential adsorption,
deliberately without intersection avoidance, fibers clipped at the cube
boundary).

Randomness comes from numpy's PCG64 so networks are reproducible across
platforms; angles and coordinates are derived from raw 64-bit draws as
u64 / 2^64.
"""

from __future__ import annotations

import numpy as np

from .errors import OverlapError
from .mesh import FiberCurve, FiberNetwork

PRNG_ID = "numpy-pcg64"
MIN_FIBER_LENGTH = 1e-6


def uniform_parallel_fibers(n_per_side: int, beta: float, axis: int = 0,
                            margin: float = 0.05) -> FiberNetwork:
    """Regular n x n array of straight fibers parallel to ``axis``.

    Fibers span [margin, 1 - margin] along the axis and sit on the
    interior lattice (i+1)/(n+1) in the cross section; that grid shares
    no plane with any uniformly refined background mesh, which keeps the
    coupling quality even across fiber counts.  The radius is chosen so
    the network's volume ratio equals ``beta`` exactly:
    a = sqrt(beta / (n^2 pi L)).
    """
    if n_per_side < 1:
        raise ValueError("n_per_side must be at least 1")
    if not 0.0 < beta < 1.0:
        raise ValueError(f"volume ratio {beta} outside (0, 1)")
    if not 0.0 <= margin < 0.25:
        raise ValueError(f"margin {margin} outside [0, 0.25)")
    if axis not in (0, 1, 2):
        raise ValueError("axis must be 0, 1 or 2")
    n_f = n_per_side**2
    span = 1.0 - 2.0 * margin
    radius = float(np.sqrt(beta / (n_f * np.pi * span)))
    spacing = 1.0 / (n_per_side + 1)
    if radius >= 0.5 * spacing:
        raise OverlapError(
            f"radius {radius:.4g} reaches half the grid spacing {spacing:.4g}")
    c1, c2 = (axis + 1) % 3, (axis + 2) % 3
    centers = (np.arange(n_per_side) + 1.0) * spacing
    curves = []
    for x1 in centers:
        for x2 in centers:
            p0 = np.zeros(3)
            p0[axis], p0[c1], p0[c2] = margin, x1, x2
            p1 = p0.copy()
            p1[axis] = 1.0 - margin
            curves.append(FiberCurve(np.vstack([p0, p1]), radius))
    return FiberNetwork(curves, mode="uniform")


def _u01(rng) -> float:
    # uniform double from a raw 64-bit draw, stable across platforms
    return int(rng.integers(0, 2**64 - 1, dtype=np.uint64, endpoint=True)) * 2.0**-64


def random_planar_fibers(n_f: int, length: float, radius: float,
                         seed: int) -> FiberNetwork:
    """Randomly placed chopped fibers parallel to the xy plane.

    Each fiber starts at a uniform point of the cube with a uniform
    in-plane angle and is cut where it leaves the cube.  Fibers may
    intersect each other; clipped remnants shorter than 1e-6 are redrawn
    and counted on the returned network.
    """
    if n_f < 1:
        raise ValueError("n_f must be at least 1")
    if length <= 0.0 or radius <= 0.0:
        raise ValueError("length and radius must be positive")
    rng = np.random.Generator(np.random.PCG64(seed))
    curves = []
    resampled = 0
    while len(curves) < n_f:
        start = np.array([_u01(rng), _u01(rng), _u01(rng)])
        phi = 2.0 * np.pi * _u01(rng)
        direction = np.array([np.cos(phi), np.sin(phi), 0.0])
        t_max = 1.0
        for ax in range(2):
            d = length * direction[ax]
            if d > 0.0:
                t_max = min(t_max, (1.0 - start[ax]) / d)
            elif d < 0.0:
                t_max = min(t_max, -start[ax] / d)
        cut = t_max * length
        if cut < MIN_FIBER_LENGTH:
            resampled += 1
            continue
        end = np.clip(start + cut * direction, 0.0, 1.0)
        curves.append(FiberCurve(np.vstack([start, end]), radius))
    return FiberNetwork(curves, resampled=resampled, mode="random-planar",
                        seed=seed)


def write_network(network: FiberNetwork, path) -> None:
    """Serialize a network of two-point fibers, one fiber per line."""
    lines = [
        "# fiber network",
        f"# mode = {network.mode}",
        f"# seed = {network.seed if network.seed is not None else 'none'}",
        f"# prng = {PRNG_ID}",
        f"# resampled = {network.resampled}",
        f"# count = {len(network)}",
    ]
    for curve in network.curves:
        if curve.points.shape[0] != 2:
            raise ValueError("the line format holds two-point fibers only")
        x0, x1 = curve.points
        lines.append(" ".join(f"{v:.17g}" for v in (*x0, *x1, curve.radius)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_network(path) -> FiberNetwork:
    """Parse a network file written by :func:`write_network`."""
    mode, seed, resampled = "custom", None, 0
    curves = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = (s.strip() for s in body.partition("="))
                    if key == "mode":
                        mode = val
                    elif key == "seed" and val != "none":
                        seed = int(val)
                    elif key == "resampled":
                        resampled = int(val)
                continue
            vals = [float(v) for v in line.split()]
            if len(vals) != 7:
                raise ValueError(f"malformed fiber line: {line!r}")
            curves.append(FiberCurve(np.array([vals[0:3], vals[3:6]]), vals[6]))
    return FiberNetwork(curves, resampled=resampled, mode=mode, seed=seed)
