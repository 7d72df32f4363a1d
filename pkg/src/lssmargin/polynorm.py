"""Planar centrally symmetric polytope norms (Minkowski gauges).

A :class:`PolytopeNorm` stores the vertices of a symmetric convex polygon and
the facet functionals ``f_i`` with ``f_i . x = 1`` on facet ``i``. The gauge is
``max_i |f_i . x|``, exact for polygons and cheap for the handful of vertices
used here. Everything in this module is two-dimensional.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .errors import InvalidInput
from .matlib import as_matrix


@dataclass(frozen=True)
class PolytopeNorm:
    vertices: np.ndarray
    facets: np.ndarray = field(repr=False)

    @classmethod
    def from_vertices(cls, points) -> "PolytopeNorm":
        """Build the gauge of ``conv(points ∪ -points)``."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidInput("polytope vertices must be 2-vectors")
        if not np.all(np.isfinite(pts)):
            raise InvalidInput("polytope vertices must be finite")
        sym = np.vstack([pts, -pts])
        try:
            hull = ConvexHull(sym)
        except Exception as exc:  # qhull raises its own error type on degenerate input
            raise InvalidInput("polytope must have nonempty interior") from exc
        # hull.equations rows are (normal, offset) with normal . x + offset <= 0 inside
        normals, offsets = hull.equations[:, :2], hull.equations[:, 2]
        if np.any(offsets >= 0):
            raise InvalidInput("origin must lie strictly inside the polytope")
        facets = normals / (-offsets)[:, None]
        verts = sym[hull.vertices]
        # counter-clockwise order starting from the smallest polar angle
        ang = np.mod(np.arctan2(verts[:, 1], verts[:, 0]), 2 * math.pi)
        verts = verts[np.argsort(ang)]
        return cls(verts, facets)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def __call__(self, x) -> float:
        return gauge(self, x)


def build_parallelotope(a: float) -> PolytopeNorm:
    """Parallelogram with vertices ``±(1, 0)``, ``±(1, -2/a)``.

    Both vertex directions are eigenvectors of ``[[1, a], [0, -1]]`` (for the
    eigenvalues +1 and -1), so that matrix acts on the polygon as an isometry.
    """
    if not a > 0:
        raise InvalidInput("a must be positive")
    return PolytopeNorm.from_vertices([[1.0, 0.0], [1.0, -2.0 / a]])


def gauge(p: PolytopeNorm, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.max(np.abs(p.facets @ x)))


def gauges(p: PolytopeNorm, xs: np.ndarray) -> np.ndarray:
    """Vectorized gauge over the rows of ``xs``."""
    return np.max(np.abs(np.asarray(xs, dtype=float) @ p.facets.T), axis=1)


def boundary_samples(p: PolytopeNorm, samples: int) -> np.ndarray:
    """Uniform angular grid pushed to the unit sphere of ``p``, plus all vertices."""
    if samples < 1:
        raise InvalidInput("samples must be positive")
    theta = np.linspace(0.0, 2 * math.pi, samples, endpoint=False)
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    pts = dirs / gauges(p, dirs)[:, None]
    return np.vstack([p.vertices, pts])


def induced_norm(p: PolytopeNorm, m) -> float:
    """Operator norm of ``m`` in the gauge; attained at a vertex."""
    m = as_matrix(m)
    return float(np.max(gauges(p, p.vertices @ m.T)))


@dataclass(frozen=True)
class NormCheck:
    """Outcome of a sampled norm-identity check; truthy iff it passed."""

    ok: bool
    max_deviation: float
    samples: int
    worst_point: tuple[float, float]

    def __bool__(self) -> bool:
        return self.ok


def _check(deviation: np.ndarray, pts: np.ndarray, tol: float) -> NormCheck:
    i = int(np.argmax(deviation))
    worst = float(deviation[i])
    return NormCheck(worst <= tol, worst, len(pts), (float(pts[i, 0]), float(pts[i, 1])))


def is_invariant_isometry(p: PolytopeNorm, m, samples: int = 1000, tol: float = 1e-12) -> NormCheck:
    """Does ``gauge(m x) == gauge(x)`` hold on sampled boundary points?"""
    m = as_matrix(m)
    if m.shape != (2, 2):
        raise InvalidInput("matrix must be 2x2")
    pts = boundary_samples(p, samples)
    dev = np.abs(gauges(p, pts @ m.T) - gauges(p, pts))
    return _check(dev, pts, tol)


def is_barabanov(p: PolytopeNorm, family, samples: int = 360, tol: float = 1e-9) -> NormCheck:
    """Does ``max_A gauge(A x) == gauge(x)`` hold on sampled boundary points?

    ``family`` is any iterable of 2x2 matrices (a :class:`MatrixFamily` works).
    """
    mats = [as_matrix(m) for m in family]
    if not mats:
        raise InvalidInput("family is empty")
    if any(m.shape != (2, 2) for m in mats):
        raise InvalidInput("all matrices must be 2x2")
    pts = boundary_samples(p, samples)
    images = np.max(np.stack([gauges(p, pts @ m.T) for m in mats]), axis=0)
    dev = np.abs(images - gauges(p, pts))
    return _check(dev, pts, tol)
