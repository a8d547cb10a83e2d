"""Planar domains and the geometric quantities used by the shape problems.

Four domain variants are supported: simple polygons, star-shaped sets with a
truncated Fourier radius, disks and axis-aligned rectangles.  All of them are
immutable and every function here is pure.

Boundary integrals over star-shaped sets use the composite trapezoid rule on
``QUAD_NODES`` equispaced angles, which is spectrally accurate for the
periodic integrands involved.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache, singledispatch
from typing import Union

import numpy as np
import shapely
from scipy.spatial import cKDTree

from .errors import DegenerateDomainError, InvalidDomainError

QUAD_NODES = 4096
GEOM_EPS = 1e-10
BOUNDARY_TOL = 1e-10


def _check_point(p, name):
    p = tuple(float(c) for c in p)
    if len(p) != 2 or not all(math.isfinite(c) for c in p):
        raise InvalidDomainError(f"{name} must be a finite 2D point, got {p!r}")
    return p


@dataclass(frozen=True)
class Polygon:
    """Simple polygon with counterclockwise vertices."""

    vertices: tuple

    def __post_init__(self):
        verts = tuple(_check_point(v, "vertex") for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise InvalidDomainError("a polygon needs at least 3 vertices")
        pts = self.array
        span = np.ptp(pts, axis=0).max()
        edges = np.roll(pts, -1, axis=0) - pts
        if np.min(np.hypot(edges[:, 0], edges[:, 1])) <= 1e-12 * max(span, 1e-300):
            raise InvalidDomainError("consecutive polygon vertices coincide")
        signed = _shoelace(pts)
        if signed <= GEOM_EPS * span**2:
            if abs(signed) <= GEOM_EPS * span**2:
                raise DegenerateDomainError("polygon has zero area")
            raise InvalidDomainError("polygon vertices must be counterclockwise")
        if not shapely.LinearRing(pts).is_simple:
            raise InvalidDomainError("polygon edges self-intersect")

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.asarray(self.vertices, dtype=float)
        arr.setflags(write=False)
        return arr

    @cached_property
    def _shape(self):
        poly = shapely.Polygon(self.array)
        shapely.prepare(poly)
        return poly

    @cached_property
    def _ring(self):
        ring = shapely.LinearRing(self.array)
        shapely.prepare(ring)
        return ring


def _polygon_unchecked(points) -> Polygon:
    # only for vertex lists that are simple and CCW by construction
    # (hulls, sampled stars, dilations of valid polygons)
    poly = object.__new__(Polygon)
    object.__setattr__(poly, "vertices", tuple((float(x), float(y)) for x, y in points))
    return poly


@dataclass(frozen=True)
class StarShape:
    """Star-shaped set ``r(theta) = r0 + sum_k a_k cos k theta + b_k sin k theta``."""

    center: tuple
    r0: float
    coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "center", _check_point(self.center, "center"))
        object.__setattr__(self, "r0", float(self.r0))
        coeffs = tuple((float(a), float(b)) for a, b in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if not all(math.isfinite(c) for ab in coeffs for c in ab) or not math.isfinite(self.r0):
            raise InvalidDomainError("star coefficients must be finite")
        theta = _quad_angles()
        if np.min(self.radius(theta)) <= 0.0:
            raise InvalidDomainError("star radius must stay positive")

    @property
    def K(self) -> int:
        return len(self.coeffs)

    def _modes(self, theta, order):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta) if order else np.full_like(theta, self.r0)
        for k, (a, b) in enumerate(self.coeffs, start=1):
            c, s = np.cos(k * theta), np.sin(k * theta)
            if order == 0:
                out = out + a * c + b * s
            elif order == 1:
                out = out + k * (b * c - a * s)
            else:
                out = out - k * k * (a * c + b * s)
        return out

    def radius(self, theta):
        return self._modes(theta, 0)

    def radius_prime(self, theta):
        return self._modes(theta, 1)

    def radius_second(self, theta):
        return self._modes(theta, 2)

    def boundary(self, n: int = QUAD_NODES) -> np.ndarray:
        theta = 2.0 * np.pi * np.arange(n) / n
        r = self.radius(theta)
        return np.column_stack(
            [self.center[0] + r * np.cos(theta), self.center[1] + r * np.sin(theta)]
        )


@dataclass(frozen=True)
class Disk:
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _check_point(self.center, "center"))
        object.__setattr__(self, "radius", float(self.radius))
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise InvalidDomainError("disk radius must be positive")


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle with lower-left ``corner``."""

    corner: tuple
    width: float
    height: float

    def __post_init__(self):
        object.__setattr__(self, "corner", _check_point(self.corner, "corner"))
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "height", float(self.height))
        if not (self.width > 0 and self.height > 0):
            raise InvalidDomainError("rectangle sides must be positive")
        if not (math.isfinite(self.width) and math.isfinite(self.height)):
            raise InvalidDomainError("rectangle sides must be finite")

    def to_polygon(self) -> Polygon:
        x, y = self.corner
        w, h = self.width, self.height
        return Polygon(((x, y), (x + w, y), (x + w, y + h), (x, y + h)))


DomainSpec = Union[Polygon, StarShape, Disk, Rectangle]
DOMAIN_TYPES = (Polygon, StarShape, Disk, Rectangle)


def _quad_angles(n: int = QUAD_NODES) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n) / n


def _shoelace(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _cross(o, a, b):
    return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (
        b[..., 0] - o[..., 0]
    )


def _unsupported(d):
    raise InvalidDomainError(f"not a domain: {type(d).__name__}")


# ---------------------------------------------------------------- perimeter

@singledispatch
def perimeter(d) -> float:
    """Boundary length of ``d``."""
    _unsupported(d)


@perimeter.register
def _(d: Polygon) -> float:
    edges = np.roll(d.array, -1, axis=0) - d.array
    return float(np.sum(np.hypot(edges[:, 0], edges[:, 1])))


@perimeter.register
def _(d: StarShape) -> float:
    theta = _quad_angles()
    speed = np.hypot(d.radius(theta), d.radius_prime(theta))
    return float(2.0 * np.pi * np.mean(speed))


@perimeter.register
def _(d: Disk) -> float:
    return 2.0 * np.pi * d.radius


@perimeter.register
def _(d: Rectangle) -> float:
    return 2.0 * (d.width + d.height)


# --------------------------------------------------------------------- area

@singledispatch
def area(d) -> float:
    """Lebesgue measure of ``d``."""
    _unsupported(d)


@area.register
def _(d: Polygon) -> float:
    return _shoelace(d.array)


@area.register
def _(d: StarShape) -> float:
    theta = _quad_angles()
    return float(np.pi * np.mean(d.radius(theta) ** 2))


@area.register
def _(d: Disk) -> float:
    return np.pi * d.radius**2


@area.register
def _(d: Rectangle) -> float:
    return d.width * d.height


# ----------------------------------------------------------------- centroid

@singledispatch
def centroid(d) -> np.ndarray:
    """Area centroid of ``d``."""
    _unsupported(d)


@centroid.register
def _(d: Polygon) -> np.ndarray:
    p = d.array
    q = np.roll(p, -1, axis=0)
    w = p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]
    a = 0.5 * w.sum()
    return np.array([np.dot(p[:, 0] + q[:, 0], w), np.dot(p[:, 1] + q[:, 1], w)]) / (6.0 * a)


@centroid.register
def _(d: StarShape) -> np.ndarray:
    theta = _quad_angles()
    r = d.radius(theta)
    a = np.mean(r**2) / 2.0
    m = np.array([np.mean(r**3 * np.cos(theta)), np.mean(r**3 * np.sin(theta))]) / 3.0
    return np.asarray(d.center) + m / a


@centroid.register
def _(d: Disk) -> np.ndarray:
    return np.asarray(d.center, dtype=float)


@centroid.register
def _(d: Rectangle) -> np.ndarray:
    return np.array([d.corner[0] + d.width / 2, d.corner[1] + d.height / 2])


# ----------------------------------------------------------------- sampling

def boundary_points(d, n: int = QUAD_NODES) -> np.ndarray:
    """At least ``n`` points on the boundary of ``d`` (polygon vertices included)."""
    if isinstance(d, StarShape):
        return d.boundary(n)
    if isinstance(d, Disk):
        theta = _quad_angles(n)
        return np.column_stack(
            [d.center[0] + d.radius * np.cos(theta), d.center[1] + d.radius * np.sin(theta)]
        )
    if isinstance(d, Rectangle):
        d = d.to_polygon()
    if not isinstance(d, Polygon):
        _unsupported(d)
    p = d.array
    q = np.roll(p, -1, axis=0)
    lengths = np.hypot(*(q - p).T)
    counts = np.maximum(1, np.ceil(n * lengths / lengths.sum()).astype(int))
    chunks = []
    for a, b, m in zip(p, q, counts):
        s = np.arange(m)[:, None] / m
        chunks.append(a + s * (b - a))
    return np.vstack(chunks)


def hull_points(d) -> np.ndarray:
    """Points whose convex hull is (a sampling of) the hull of ``d``."""
    if isinstance(d, Polygon):
        return d.array
    if isinstance(d, Rectangle):
        return d.to_polygon().array
    return boundary_points(d)


# --------------------------------------------------------------- convexity

def _monotone_chain(points, eps: float) -> np.ndarray:
    pts = np.unique(np.asarray(points, dtype=float), axis=0)  # lexicographic sort
    if len(pts) < 3:
        return pts
    seq = pts.tolist()

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2:
                (ox, oy), (ax, ay) = chain[-2], chain[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) > eps:
                    break
                chain.pop()
            chain.append(p)
        return chain

    lower = half(seq)
    upper = half(seq[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _caliper_diameter(hull) -> float:
    """Largest vertex distance of a convex CCW polygon (rotating calipers)."""
    m = len(hull)
    if m < 3:
        return float(np.ptp(hull, axis=0).max()) if m == 2 else 0.0
    P = hull.tolist()
    best = 0.0
    j = 1
    for i in range(m):
        (x0, y0), (x1, y1) = P[i], P[(i + 1) % m]
        ex, ey = x1 - x0, y1 - y0
        while True:
            (jx, jy), (kx, ky) = P[j], P[(j + 1) % m]
            if ex * (ky - jy) - ey * (kx - jx) > 0:
                j = (j + 1) % m
            else:
                break
        jx, jy = P[j]
        best = max(best, math.hypot(jx - x0, jy - y0), math.hypot(jx - x1, jy - y1))
    return best


def convex_hull(d) -> Polygon:
    """Convex hull of ``d`` as a CCW polygon; stars and disks are sampled."""
    pts = hull_points(d)
    eps = GEOM_EPS * diameter_of_points(pts) ** 2
    hull = _monotone_chain(pts, eps)
    if len(hull) < 3 or abs(_shoelace(hull)) <= eps:
        raise DegenerateDomainError("convex hull has zero area")
    return _polygon_unchecked(hull)


def diameter_of_points(pts: np.ndarray) -> float:
    pts = np.asarray(pts, dtype=float)
    if len(pts) <= 64:
        diff = pts[:, None, :] - pts[None, :, :]
        return float(np.sqrt((diff**2).sum(-1)).max())
    return _caliper_diameter(_monotone_chain(pts, 0.0))


def _turning_convex(pts: np.ndarray, eps: float) -> bool:
    prev = np.roll(pts, 1, axis=0)
    nxt = np.roll(pts, -1, axis=0)
    return bool(np.all(_cross(prev, pts, nxt) >= -eps))


def is_convex(d) -> bool:
    """True iff every turn along the (sampled) boundary is a left turn up to tolerance."""
    if isinstance(d, (Disk, Rectangle)):
        return True
    if isinstance(d, Polygon):
        pts = d.array
    elif isinstance(d, StarShape):
        pts = d.boundary()
    else:
        _unsupported(d)
    eps = GEOM_EPS * diameter_of_points(pts) ** 2
    return _turning_convex(pts, eps)


# ----------------------------------------------------------------- diameter

@lru_cache(maxsize=512)
def diameter(d) -> float:
    """Largest distance between two points of ``d`` (cached per domain)."""
    return _diameter(d)


@singledispatch
def _diameter(d) -> float:
    _unsupported(d)


@_diameter.register
def _(d: Polygon) -> float:
    return diameter_of_points(d.array)


@_diameter.register
def _(d: StarShape) -> float:
    return diameter_of_points(d.boundary())


@_diameter.register
def _(d: Disk) -> float:
    return 2.0 * d.radius


@_diameter.register
def _(d: Rectangle) -> float:
    return math.hypot(d.width, d.height)


def bounding_box(d) -> tuple:
    """``(xmin, ymin, xmax, ymax)``."""
    if isinstance(d, Disk):
        (cx, cy), r = d.center, d.radius
        return (cx - r, cy - r, cx + r, cy + r)
    if isinstance(d, Rectangle):
        (x, y) = d.corner
        return (x, y, x + d.width, y + d.height)
    if isinstance(d, StarShape):
        # sampled boundary plus a margin covering the chord sagitta
        pts = d.boundary()
        pad = 1e-3 * float(np.max(np.hypot(*(pts - d.center).T)))
        lo, hi = pts.min(axis=0) - pad, pts.max(axis=0) + pad
        return (lo[0], lo[1], hi[0], hi[1])
    if isinstance(d, Polygon):
        lo, hi = d.array.min(axis=0), d.array.max(axis=0)
        return (lo[0], lo[1], hi[0], hi[1])
    _unsupported(d)


# -------------------------------------------------------------- containment

def contains(d, x, y, *, closed: bool = False) -> np.ndarray:
    """Vectorized point membership.

    With ``closed=False`` points must lie strictly inside: anything within
    ``BOUNDARY_TOL * diameter`` of the boundary is rejected.  With
    ``closed=True`` such points are accepted instead.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    tol = BOUNDARY_TOL * diameter(d)
    sign = -1.0 if closed else 1.0
    if isinstance(d, Disk):
        rho = np.hypot(x - d.center[0], y - d.center[1])
        return rho < d.radius - sign * tol
    if isinstance(d, Rectangle):
        (x0, y0) = d.corner
        t = sign * tol
        return (x > x0 + t) & (x < x0 + d.width - t) & (y > y0 + t) & (y < y0 + d.height - t)
    if isinstance(d, StarShape):
        dx, dy = x - d.center[0], y - d.center[1]
        rho = np.hypot(dx, dy)
        return rho < d.radius(np.arctan2(dy, dx)) - sign * tol
    if isinstance(d, Polygon):
        flat_x, flat_y = x.ravel(), y.ravel()
        inside = shapely.contains_xy(d._shape, flat_x, flat_y)
        near = shapely.dwithin(d._ring, shapely.points(flat_x, flat_y), tol)
        out = (inside | near) if closed else (inside & ~near)
        return out.reshape(x.shape)
    _unsupported(d)


# ------------------------------------------------------------------ scaling

@singledispatch
def scale_domain(d, t: float):
    """Dilation ``t * d`` about the origin."""
    _unsupported(d)


def _check_factor(t):
    t = float(t)
    if not (t > 0 and math.isfinite(t)):
        raise ValueError(f"scale factor must be positive, got {t}")
    return t


@scale_domain.register
def _(d: Polygon, t: float) -> Polygon:
    t = _check_factor(t)
    return _polygon_unchecked(d.array * t)


@scale_domain.register
def _(d: StarShape, t: float) -> StarShape:
    t = _check_factor(t)
    return StarShape(
        (d.center[0] * t, d.center[1] * t), d.r0 * t, tuple((a * t, b * t) for a, b in d.coeffs)
    )


@scale_domain.register
def _(d: Disk, t: float) -> Disk:
    t = _check_factor(t)
    return Disk((d.center[0] * t, d.center[1] * t), d.radius * t)


@scale_domain.register
def _(d: Rectangle, t: float) -> Rectangle:
    t = _check_factor(t)
    return Rectangle((d.corner[0] * t, d.corner[1] * t), d.width * t, d.height * t)


def translate_domain(d, shift):
    sx, sy = (float(c) for c in shift)
    if isinstance(d, Polygon):
        return _polygon_unchecked(d.array + [sx, sy])
    if isinstance(d, StarShape):
        return StarShape((d.center[0] + sx, d.center[1] + sy), d.r0, d.coeffs)
    if isinstance(d, Disk):
        return Disk((d.center[0] + sx, d.center[1] + sy), d.radius)
    if isinstance(d, Rectangle):
        return Rectangle((d.corner[0] + sx, d.corner[1] + sy), d.width, d.height)
    _unsupported(d)


def saturate_perimeter(d, p: float, dim: int = 2):
    """Dilate ``d`` so that its perimeter equals ``p``.

    The factor is ``(p / P(d)) ** (1 / (dim - 1))``; only ``dim=2`` makes
    geometric sense for planar domains but the exponent is kept general.
    """
    p = float(p)
    if not p > 0:
        raise ValueError("target perimeter must be positive")
    factor = (p / perimeter(d)) ** (1.0 / (dim - 1))
    if factor == 1.0:
        return d
    return scale_domain(d, factor)


# ----------------------------------------------------------------- sampling

def star_to_polygon(s: StarShape, n: int) -> Polygon:
    """Inscribed polygon with vertices at ``theta_j = 2 pi j / n``."""
    if n < 3:
        raise ValueError("need at least 3 vertices")
    theta = _quad_angles(n)
    r = s.radius(theta)
    if np.min(r) <= 0:
        raise InvalidDomainError("star radius not positive at a sample angle")
    pts = np.column_stack([s.center[0] + r * np.cos(theta), s.center[1] + r * np.sin(theta)])
    return _polygon_unchecked(pts)


def regular_polygon(n: int, circumradius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0):
    theta = phase + _quad_angles(n)
    pts = np.column_stack(
        [center[0] + circumradius * np.cos(theta), center[1] + circumradius * np.sin(theta)]
    )
    return _polygon_unchecked(pts)


def closure_samples(d, n_boundary: int = QUAD_NODES, fill: int = 256) -> np.ndarray:
    """Boundary nodes plus an interior lattice with spacing ``diameter / fill``."""
    bnd = boundary_points(d, n_boundary)
    step = diameter(d) / fill
    xmin, ymin, xmax, ymax = bounding_box(d)
    gx = np.arange(math.floor(xmin / step), math.ceil(xmax / step) + 1) * step
    gy = np.arange(math.floor(ymin / step), math.ceil(ymax / step) + 1) * step
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    keep = contains(d, X, Y, closed=True)
    return np.vstack([bnd, np.column_stack([X[keep], Y[keep]])])


def _directed(samples_a: np.ndarray, b) -> float:
    outside = ~contains(b, samples_a[:, 0], samples_a[:, 1], closed=True)
    if not outside.any():
        return 0.0
    tree = cKDTree(boundary_points(b, 4 * QUAD_NODES))
    dist, _ = tree.query(samples_a[outside])
    return float(dist.max())


def hausdorff_distance(a, b) -> float:
    """Hausdorff distance between the closures of ``a`` and ``b`` (sampled)."""
    return max(_directed(closure_samples(a), b), _directed(closure_samples(b), a))


# --------------------------------------------------------------------- JSON

def domain_to_dict(d) -> dict:
    if isinstance(d, Polygon):
        return {"type": "polygon", "vertices": [list(v) for v in d.vertices]}
    if isinstance(d, StarShape):
        return {
            "type": "star",
            "center": list(d.center),
            "r0": d.r0,
            "coeffs": [list(c) for c in d.coeffs],
        }
    if isinstance(d, Disk):
        return {"type": "disk", "center": list(d.center), "radius": d.radius}
    if isinstance(d, Rectangle):
        return {"type": "rect", "corner": list(d.corner), "w": d.width, "h": d.height}
    _unsupported(d)


def domain_from_dict(obj: dict):
    if not isinstance(obj, dict) or "type" not in obj:
        raise InvalidDomainError("domain JSON must be an object with a 'type' field")
    kind = obj["type"]
    try:
        if kind == "polygon":
            return Polygon(tuple(tuple(v) for v in obj["vertices"]))
        if kind == "star":
            return StarShape(tuple(obj["center"]), obj["r0"], tuple(tuple(c) for c in obj.get("coeffs", [])))
        if kind == "disk":
            return Disk(tuple(obj["center"]), obj["radius"])
        if kind == "rect":
            return Rectangle(tuple(obj["corner"]), obj["w"], obj["h"])
    except (KeyError, TypeError) as exc:
        raise InvalidDomainError(f"malformed {kind} domain: {exc}") from exc
    raise InvalidDomainError(f"unknown domain type {kind!r}")


def dumps_domain(d) -> str:
    # json emits repr() floats, which round-trip exactly
    return json.dumps(domain_to_dict(d))


def loads_domain(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidDomainError(f"invalid JSON: {exc}") from exc
    return domain_from_dict(obj)
