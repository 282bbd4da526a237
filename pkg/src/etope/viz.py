"""Boundary sampling of 2-D/3-D ellipsotopes and plot-file emission.

Two sampling routes: ray tracing in the workspace (the default, one convex
solve per direction) and coefficient-space boundary tracing (walk kernel
directions from a feasible coefficient until some block norm hits 1, then map
through the generators). Both produce a BoundarySample whose hull order forms
the plotted polygon.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import Ellipsotope, as_vector, pnorm
from .solve import (
    RAY_CONFIG,
    MembershipSolver,
    feasible_coefficient,
    ray_trace,
)

_GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class BoundarySample:
    """Sampled boundary points plus the index order forming their convex hull.

    In 2-D the hull order is counterclockwise. Every point is contained in
    the sampled set to within the boundary solver tolerance.
    """

    points: np.ndarray
    hull_order: np.ndarray


# ---------------------------------------------------------------------------
# deterministic direction schemes


def directions_2d(n_points, seed=0):
    """Uniformly spaced unit directions; the seed rotates the whole fan."""
    offset = 2.0 * math.pi * ((seed * (_GOLDEN - 1.0)) % 1.0) / max(n_points, 1)
    ang = offset + 2.0 * math.pi * np.arange(n_points) / max(n_points, 1)
    return np.column_stack([np.cos(ang), np.sin(ang)])


def directions_3d(n_points, seed=0):
    """Fibonacci-sphere unit directions; the seed rotates the azimuth."""
    i = np.arange(n_points) + 0.5
    z = 1.0 - 2.0 * i / max(n_points, 1)
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    az = 2.0 * math.pi * i / _GOLDEN + 2.0 * math.pi * ((seed * (_GOLDEN - 1.0)) % 1.0)
    return np.column_stack([r * np.cos(az), r * np.sin(az), z])


# ---------------------------------------------------------------------------
# convex hull (2-D, monotone chain) and polygon helpers


def convex_hull_2d(points, tol=1e-12):
    """Counterclockwise hull vertex indices of a 2-D point cloud.

    Degenerate inputs collapse gracefully: a single (repeated) point yields
    one index, collinear points yield the two extremes.
    """
    pts = np.asarray(points, dtype=float)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    dedup = []
    for i in order:
        if not dedup or np.any(np.abs(pts[i] - pts[dedup[-1]]) > tol):
            dedup.append(int(i))
    if len(dedup) == 1:
        return np.array(dedup)

    def cross(o, a, b):
        return (pts[a, 0] - pts[o, 0]) * (pts[b, 1] - pts[o, 1]) - (
            pts[a, 1] - pts[o, 1]
        ) * (pts[b, 0] - pts[o, 0])

    lower = []
    for i in dedup:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], i) <= tol:
            lower.pop()
        lower.append(i)
    upper = []
    for i in reversed(dedup):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], i) <= tol:
            upper.pop()
        upper.append(i)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:
        hull = [dedup[0], dedup[-1]]
    return np.array(hull)


def polygon_area(points, order=None):
    """Shoelace area of the polygon formed by points[order]."""
    pts = np.asarray(points, dtype=float)
    if order is not None:
        pts = pts[np.asarray(order, dtype=int)]
    if pts.shape[0] < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


# ---------------------------------------------------------------------------
# boundary sampling


def _witness_point(E, config):
    beta = feasible_coefficient(E, config=config)
    return E.map_coefficients(beta), beta


def sample_boundary_ray(E, n_points, seed=0, config=None):
    """Boundary points by tracing rays outward from a feasible interior point.

    Directions follow the deterministic uniform-angle (2-D) or Fibonacci
    (3-D) scheme; the seed rotates them. One convex solve per direction.
    """
    if E.dim not in (2, 3):
        raise ValueError(f"boundary sampling supports 2-D/3-D sets, got n = {E.dim}")
    cfg = config or RAY_CONFIG
    x0, beta0 = _witness_point(E, cfg)
    dirs = directions_2d(n_points, seed) if E.dim == 2 else directions_3d(n_points, seed)
    solver = MembershipSolver(E, config=cfg)
    solver.last_beta = None
    pts = np.empty((n_points, E.dim))
    for i, g in enumerate(dirs):
        solver.last_beta = beta0.copy()
        lam = ray_trace(E, x0, g, solver=solver)
        pts[i] = x0 + lam * g
    order = convex_hull_2d(pts) if E.dim == 2 else np.arange(n_points)
    return BoundarySample(points=pts, hull_order=order)


def _block_norm_excess(beta, I, p):
    worst = 0.0
    for blk in I:
        worst = max(worst, pnorm(beta[list(blk)], p))
    return worst - 1.0


def sample_boundary_coeff(E, n_points, seed=0, config=None, alpha_tol=1e-10):
    """Boundary points by tracing coefficient-space kernel directions.

    From a feasible coefficient, walk random unit directions in ker(A) until
    the first block norm reaches 1 (the unique positive crossing from an
    interior start), then map the coefficients through the generators. Many
    images may land inside the set; their hull is the approximation.
    """
    if E.dim not in (2, 3):
        raise ValueError(f"boundary sampling supports 2-D/3-D sets, got n = {E.dim}")
    cfg = config or RAY_CONFIG
    _, beta0 = _witness_point(E, cfg)
    m = E.num_generators
    rng = np.random.default_rng(seed)
    if E.num_constraints:
        _, s, Vt = np.linalg.svd(E.A, full_matrices=True)
        cutoff = max(E.A.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
        kernel = Vt[int(np.sum(s > cutoff)):].T
    else:
        kernel = np.eye(m)
    if kernel.shape[1] == 0 or m == 0:
        pt = E.map_coefficients(beta0).reshape(1, E.dim)
        return BoundarySample(points=pt, hull_order=np.array([0]))

    # a boundary start collapses the crossing to alpha = 0, which is sound
    start = beta0

    pts = np.empty((n_points, E.dim))
    for i in range(n_points):
        u = kernel @ rng.standard_normal(kernel.shape[1])
        nu = float(np.linalg.norm(u))
        if nu == 0.0:
            pts[i] = E.map_coefficients(start)
            continue
        u /= nu
        lo, hi = 0.0, 1.0
        while _block_norm_excess(start + hi * u, E.I, E.p) < 0.0:
            hi *= 2.0
            if hi > 1e12:
                raise RuntimeError("unbounded coefficient ray; invalid index set")
        while hi - lo > alpha_tol:
            mid = 0.5 * (lo + hi)
            if _block_norm_excess(start + mid * u, E.I, E.p) < 0.0:
                lo = mid
            else:
                hi = mid
        pts[i] = E.map_coefficients(start + hi * u)
    order = convex_hull_2d(pts) if E.dim == 2 else np.arange(n_points)
    return BoundarySample(points=pts, hull_order=order)


# ---------------------------------------------------------------------------
# file emission


def _fmt(x):
    return format(float(x), ".17g")


def emit_polygon(sample, fmt, path):
    """Write a 2-D boundary sample as CSV ("x,y" rows, hull order, closed by
    repeating the first vertex) or SVG (one closed path, 5% margin viewBox).
    """
    pts = np.asarray(sample.points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("polygon emission requires a 2-D sample")
    verts = pts[np.asarray(sample.hull_order, dtype=int)]
    fmt = fmt.lower()
    if fmt == "csv":
        lines = [f"{_fmt(x)},{_fmt(y)}" for x, y in verts]
        if len(verts) > 1:
            lines.append(lines[0])
        text = "\n".join(lines) + "\n"
    elif fmt == "svg":
        text = _svg_text(verts)
    else:
        raise ValueError(f"unknown format {fmt!r} (expected csv or svg)")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _svg_text(verts):
    # y is flipped so the polygon renders with the mathematical orientation
    v = np.column_stack([verts[:, 0], -verts[:, 1]])
    lo = v.min(axis=0)
    hi = v.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    margin = 0.05 * float(span.max())
    x0, y0 = lo - margin
    w, h = (hi - lo) + 2 * margin
    d = "M " + " L ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in v) + " Z"
    stroke = _fmt(0.01 * float(span.max()))
    return (
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(h)}">'
        f'<path d="{d}" fill="none" stroke="black" stroke-width="{stroke}"/>'
        "</svg>\n"
    )
