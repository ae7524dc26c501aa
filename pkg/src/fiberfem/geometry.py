"""Differential geometry of fiber centerlines.

Provides Frenet frames with curvature and torsion, the validity check for
a tubular neighbourhood of radius a, the curvature correction factor that
collapses the tube energy integral onto the centerline, and the average
of a volume field over the disk perpendicular to the centerline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfDomainError, TubeValidityError
from .quadrature import gauss_01, gauss_interval

KAPPA_TOL = 1e-12


@dataclass(frozen=True)
class FrenetFrame:
    """Orthonormal frame (t, n, b) with curvature and torsion at a point."""

    t: np.ndarray
    n: np.ndarray
    b: np.ndarray
    kappa: float
    tau: float


@dataclass(frozen=True)
class TubeValidity:
    """Whether a tube of the given radius around a curve is embedded."""

    max_curvature: float
    radius: float
    valid: bool


def check_tube(curve, radius: float) -> TubeValidity:
    """Validity requires radius < 1 / max curvature along the curve."""
    kmax = float(curve.max_curvature())
    return TubeValidity(kmax, radius, kmax * radius < 1.0)


def _fallback_normal(t: np.ndarray) -> np.ndarray:
    # project the global axis with smallest tangent component onto t's
    # orthogonal plane; deterministic on straight fibers
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(t)))] = 1.0
    n = axis - np.dot(axis, t) * t
    return n / np.linalg.norm(n)


def frenet_frame(curve, s: float) -> FrenetFrame:
    """Frenet frame of a curve at arclength s.

    Works for any parametrization: curvature and torsion are computed
    from the first three derivatives.  For locally straight curves
    (kappa below 1e-12) the normal falls back to a fixed axis projection
    and both kappa and tau are reported as zero.
    """
    if s < -1e-12 or s > curve.length + 1e-12:
        raise ValueError(f"arclength {s} outside [0, {curve.length}]")
    d1, d2, d3 = curve.derivatives(s)
    speed = np.linalg.norm(d1)
    if speed == 0.0:
        raise ValueError("degenerate curve parametrization")
    t = d1 / speed
    cross = np.cross(d1, d2)
    cross_norm = np.linalg.norm(cross)
    kappa = cross_norm / speed**3
    if kappa < KAPPA_TOL:
        n = _fallback_normal(t)
        return FrenetFrame(t, n, np.cross(t, n), 0.0, 0.0)
    n = d2 - np.dot(d2, t) * t
    n = n / np.linalg.norm(n)
    tau = float(np.dot(cross, d3)) / cross_norm**2
    return FrenetFrame(t, n, np.cross(t, n), float(kappa), float(tau))


def curvature_factor(kappa: float, a: float, reference_angle: float = 0.0,
                     n_r: int = 8, n_theta: int = 16) -> float:
    """Average over the perpendicular disk of 1/(1 - kappa r cos(theta - theta0)).

    Integrated with the polar area measure r dr dtheta and normalized by
    pi a^2, so the factor is exactly 1 for straight centerlines and grows
    with curvature.  Requires kappa * a < 1 (embedded tube).
    """
    if a <= 0.0:
        raise ValueError("radius must be positive")
    if kappa < 0.0:
        raise ValueError("curvature must be non-negative")
    if kappa * a >= 1.0:
        raise TubeValidityError(f"kappa*a = {kappa * a} >= 1, tube not embedded")
    if kappa == 0.0:
        return 1.0
    r, wr = gauss_interval(n_r, 0.0, a)
    th, wth = gauss_interval(n_theta, 0.0, 2.0 * np.pi)
    denom = 1.0 - kappa * r[:, None] * np.cos(th[None, :] - reference_angle)
    integral = np.einsum("i,j,ij->", wr * r, wth, 1.0 / denom)
    return float(integral / (np.pi * a**2))


def tubular_average(field, x, frame: FrenetFrame, a: float,
                    quad_order: int = 8) -> np.ndarray:
    """Average a vector field over the disk of radius a perpendicular to t at x.

    ``field`` is any callable mapping a 3D point to a 3-vector.  The disk
    must lie inside the closed unit cube.  Exact for fields constant on
    the disk; polar tensor Gauss quadrature with quad_order points in r
    and 2*quad_order points in theta otherwise.
    """
    x = np.asarray(x, float)
    r, wr = gauss_interval(quad_order, 0.0, a)
    th, wth = gauss_interval(2 * quad_order, 0.0, 2.0 * np.pi)
    cos_t, sin_t = np.cos(th), np.sin(th)
    # disk sample points, shape (n_r, n_theta, 3)
    pts = (x[None, None, :]
           + r[:, None, None] * (cos_t[None, :, None] * frame.n[None, None, :]
                                 + sin_t[None, :, None] * frame.b[None, None, :]))
    if np.any(pts < -1e-12) or np.any(pts > 1.0 + 1e-12):
        raise OutOfDomainError("averaging disk exits the unit cube")
    pts = np.clip(pts, 0.0, 1.0)
    w = (wr * r)[:, None] * wth[None, :]
    vals = np.array([np.asarray(field(p), float) for p in pts.reshape(-1, 3)])
    vals = vals.reshape(pts.shape[0], pts.shape[1], -1)
    return np.einsum("ij,ijk->k", w, vals) / (np.pi * a**2)


class StraightSegment:
    """Arclength parametrized straight line between two points."""

    def __init__(self, p0, p1):
        self.p0 = np.asarray(p0, float)
        p1 = np.asarray(p1, float)
        d = p1 - self.p0
        self.length = float(np.linalg.norm(d))
        if self.length == 0.0:
            raise ValueError("segment endpoints coincide")
        self.direction = d / self.length

    def point(self, s):
        return self.p0 + s * self.direction

    def derivatives(self, s):
        z = np.zeros(3)
        return self.direction, z, z

    def max_curvature(self):
        return 0.0


class CircleArc:
    """Arclength parametrized arc of a circle in the plane spanned by (u, v)."""

    def __init__(self, center, radius, sweep=2.0 * np.pi, u=(1.0, 0.0, 0.0),
                 v=(0.0, 1.0, 0.0)):
        if radius <= 0.0:
            raise ValueError("circle radius must be positive")
        self.center = np.asarray(center, float)
        self.radius = float(radius)
        self.u = np.asarray(u, float)
        self.v = np.asarray(v, float)
        self.length = float(sweep * radius)

    def point(self, s):
        phi = s / self.radius
        return self.center + self.radius * (np.cos(phi) * self.u + np.sin(phi) * self.v)

    def derivatives(self, s):
        phi = s / self.radius
        d1 = -np.sin(phi) * self.u + np.cos(phi) * self.v
        d2 = (-np.cos(phi) * self.u - np.sin(phi) * self.v) / self.radius
        d3 = (np.sin(phi) * self.u - np.cos(phi) * self.v) / self.radius**2
        return d1, d2, d3

    def max_curvature(self):
        return 1.0 / self.radius


class Helix:
    """Arclength parametrized helix (R cos t, R sin t, c t) around the z axis."""

    def __init__(self, radius=1.0, pitch=1.0, turns=1.0, origin=(0.0, 0.0, 0.0)):
        if radius <= 0.0:
            raise ValueError("helix radius must be positive")
        self.radius = float(radius)
        self.pitch = float(pitch)
        self.origin = np.asarray(origin, float)
        self.speed = float(np.hypot(radius, pitch))  # |d/dt| of the t parametrization
        self.length = float(2.0 * np.pi * turns * self.speed)

    def point(self, s):
        t = s / self.speed
        return self.origin + np.array(
            [self.radius * np.cos(t), self.radius * np.sin(t), self.pitch * t]
        )

    def derivatives(self, s):
        t = s / self.speed
        c = self.speed
        d1 = np.array([-self.radius * np.sin(t), self.radius * np.cos(t), self.pitch]) / c
        d2 = np.array([-self.radius * np.cos(t), -self.radius * np.sin(t), 0.0]) / c**2
        d3 = np.array([self.radius * np.sin(t), -self.radius * np.cos(t), 0.0]) / c**3
        return d1, d2, d3

    def max_curvature(self):
        return self.radius / self.speed**2
