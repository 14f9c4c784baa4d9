"""Planar footprints, poses and exact pairwise overlap tests.

Overlap means the open interiors intersect: two discs whose centres are
exactly ``r1 + r2`` apart, or polygons sharing only an edge, do not overlap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Tuple, Union

EPS = 1e-9
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError(f"non-finite pose {self!r}")
        t = math.fmod(float(self.theta), TWO_PI)
        if t < 0.0:
            t += TWO_PI
        if t >= TWO_PI:
            t = 0.0
        object.__setattr__(self, "theta", t)

    def close_to(self, other: "Pose", tol: float = 1e-6) -> bool:
        if abs(self.x - other.x) > tol or abs(self.y - other.y) > tol:
            return False
        d = abs(self.theta - other.theta)
        return min(d, TWO_PI - d) <= tol


@dataclass(frozen=True)
class Disc:
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError("disc radius must be positive")

    @property
    def bounding_radius(self) -> float:
        return self.radius

    def area(self) -> float:
        return math.pi * self.radius ** 2


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon, counterclockwise vertices in the local frame."""

    vertices: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        k = len(verts)
        if k < 3:
            raise ValueError("polygon needs at least 3 vertices")
        if len(set(verts)) != k:
            raise ValueError("polygon has repeated vertices")
        for i in range(k):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % k]
            cx, cy = verts[(i + 2) % k]
            cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
            if cross <= EPS:
                raise ValueError("polygon must be strictly convex and counterclockwise")

    @classmethod
    def rectangle(cls, length: float, width: float) -> "ConvexPolygon":
        hx, hy = length / 2.0, width / 2.0
        return cls(((-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy)))

    @classmethod
    def regular(cls, sides: int, circumradius: float) -> "ConvexPolygon":
        return cls(tuple(
            (circumradius * math.cos(TWO_PI * k / sides), circumradius * math.sin(TWO_PI * k / sides))
            for k in range(sides)
        ))

    @property
    def bounding_radius(self) -> float:
        return max(math.hypot(x, y) for x, y in self.vertices)

    def area(self) -> float:
        v = self.vertices
        return 0.5 * sum(v[i][0] * v[(i + 1) % len(v)][1] - v[(i + 1) % len(v)][0] * v[i][1]
                         for i in range(len(v)))


Footprint = Union[Disc, ConvexPolygon]


@dataclass(frozen=True)
class Workspace:
    width: float
    height: float

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("workspace dimensions must be positive")

    def area(self) -> float:
        return self.width * self.height


@dataclass
class Arrangement:
    """Object footprints at poses inside a workspace, keyed by object id."""

    workspace: Workspace
    objects: Dict[int, Tuple[Footprint, Pose]] = field(default_factory=dict)

    def ids(self) -> List[int]:
        return sorted(self.objects)

    def pose(self, oid: int) -> Pose:
        return self.objects[oid][1]

    def footprint(self, oid: int) -> Footprint:
        return self.objects[oid][0]

    def with_pose(self, oid: int, pose: Pose) -> "Arrangement":
        objs = dict(self.objects)
        objs[oid] = (objs[oid][0], pose)
        return Arrangement(self.workspace, objs)

    def same_poses(self, other: "Arrangement", tol: float = 1e-6) -> bool:
        if set(self.objects) != set(other.objects):
            return False
        return all(self.pose(i).close_to(other.pose(i), tol) for i in self.objects)


def world_vertices(poly: ConvexPolygon, p: Pose) -> List[Tuple[float, float]]:
    # rotate then translate
    c, s = math.cos(p.theta), math.sin(p.theta)
    return [(p.x + c * x - s * y, p.y + s * x + c * y) for x, y in poly.vertices]


def _project(points, ax, ay):
    lo = hi = points[0][0] * ax + points[0][1] * ay
    for x, y in points[1:]:
        d = x * ax + y * ay
        if d < lo:
            lo = d
        elif d > hi:
            hi = d
    return lo, hi


def _edge_normals(points):
    k = len(points)
    for i in range(k):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % k]
        yield y1 - y0, x0 - x1


def _poly_poly(pa, pb) -> bool:
    for pts in (pa, pb):
        for ax, ay in _edge_normals(pts):
            n = math.hypot(ax, ay)
            ax, ay = ax / n, ay / n
            lo1, hi1 = _project(pa, ax, ay)
            lo2, hi2 = _project(pb, ax, ay)
            if hi1 <= lo2 + EPS or hi2 <= lo1 + EPS:
                return False
    return True


def _disc_poly(cx, cy, r, pts) -> bool:
    axes = list(_edge_normals(pts))
    # axis from the disc centre to the nearest polygon vertex
    vx, vy = min(pts, key=lambda q: (q[0] - cx) ** 2 + (q[1] - cy) ** 2)
    axes.append((vx - cx, vy - cy))
    for ax, ay in axes:
        n = math.hypot(ax, ay)
        if n == 0.0:
            continue
        ax, ay = ax / n, ay / n
        lo1, hi1 = _project(pts, ax, ay)
        c = cx * ax + cy * ay
        if hi1 <= c - r + EPS or c + r <= lo1 + EPS:
            return False
    return True


def overlap(fpa: Footprint, pa: Pose, fpb: Footprint, pb: Pose) -> bool:
    """True iff the interiors of the two posed footprints intersect."""
    if isinstance(fpa, Disc) and isinstance(fpb, Disc):
        dx, dy = pa.x - pb.x, pa.y - pb.y
        rr = fpa.radius + fpb.radius
        return dx * dx + dy * dy < rr * rr
    # cheap bounding-circle reject
    dx, dy = pa.x - pb.x, pa.y - pb.y
    rr = fpa.bounding_radius + fpb.bounding_radius
    if dx * dx + dy * dy >= rr * rr:
        return False
    if isinstance(fpa, Disc):
        return _disc_poly(pa.x, pa.y, fpa.radius, world_vertices(fpb, pb))
    if isinstance(fpb, Disc):
        return _disc_poly(pb.x, pb.y, fpb.radius, world_vertices(fpa, pa))
    return _poly_poly(world_vertices(fpa, pa), world_vertices(fpb, pb))


def contains(ws: Workspace, fp: Footprint, p: Pose) -> bool:
    if isinstance(fp, Disc):
        r = fp.radius
        return (p.x - r >= -EPS and p.x + r <= ws.width + EPS
                and p.y - r >= -EPS and p.y + r <= ws.height + EPS)
    return all(-EPS <= x <= ws.width + EPS and -EPS <= y <= ws.height + EPS
               for x, y in world_vertices(fp, p))


def validate_arrangement(a: Arrangement, require_containment: bool = True) -> List[str]:
    violations = []
    ids = a.ids()
    if require_containment:
        for i in ids:
            fp, p = a.objects[i]
            if not contains(a.workspace, fp, p):
                violations.append(f"object {i} outside workspace")
    for k, i in enumerate(ids):
        fi, pi = a.objects[i]
        for j in ids[k + 1:]:
            fj, pj = a.objects[j]
            if overlap(fi, pi, fj, pj):
                violations.append(f"objects {i} and {j} overlap")
    return violations


def overlapping_pairs(bodies_a: Iterable[Tuple[int, Footprint, Pose]],
                      bodies_b: Iterable[Tuple[int, Footprint, Pose]]) -> List[Tuple[int, int]]:
    """All (i, j) with body i of the first set overlapping body j of the second."""
    bodies_b = list(bodies_b)
    out = []
    for i, fa, pa in bodies_a:
        for j, fb, pb in bodies_b:
            if overlap(fa, pa, fb, pb):
                out.append((i, j))
    return out
