"""Small 3D geometry helpers shared by the relation rules and the BEV layout.

Coordinate convention: right-handed, +z is up (gravity axis), units are
meters. Object boxes are axis-aligned boxes rotated by a yaw angle about
+z, i.e. extruded rotated rectangles.
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

Point3 = tuple[float, float, float]


def dist3(a: Point3, b: Point3) -> float:
    return math.dist(a, b)


def dist2(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def centroid(points: Iterable[Point3]) -> Point3:
    pts = list(points)
    n = len(pts)
    return (
        sum(p[0] for p in pts) / n,
        sum(p[1] for p in pts) / n,
        sum(p[2] for p in pts) / n,
    )


def rotate_xy(x: float, y: float, yaw: float) -> tuple[float, float]:
    c, s = math.cos(yaw), math.sin(yaw)
    return (c * x - s * y, s * x + c * y)


def point_to_box_distance(
    p: Point3, center: Point3, halfextents: Point3, yaw: float
) -> float:
    """Euclidean distance from a point to a yaw-rotated box (0 if inside)."""
    # express the point in the box frame
    lx, ly = rotate_xy(p[0] - center[0], p[1] - center[1], -yaw)
    lz = p[2] - center[2]
    dx = max(abs(lx) - halfextents[0], 0.0)
    dy = max(abs(ly) - halfextents[1], 0.0)
    dz = max(abs(lz) - halfextents[2], 0.0)
    return math.sqrt(dx * dx + dy * dy + dz * dz)


def point_in_footprint(
    p: Point3, center: Point3, halfextents: Point3, yaw: float
) -> bool:
    """True if the point's horizontal position lies inside the box footprint."""
    lx, ly = rotate_xy(p[0] - center[0], p[1] - center[1], -yaw)
    return abs(lx) <= halfextents[0] and abs(ly) <= halfextents[1]


def footprint_corners(
    center: Point3, halfextents: Point3, yaw: float
) -> list[tuple[float, float]]:
    """Floor-plane corners of a box footprint, counter-clockwise."""
    hx, hy = halfextents[0], halfextents[1]
    corners = []
    for sx, sy in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
        rx, ry = rotate_xy(sx * hx, sy * hy, yaw)
        corners.append((center[0] + rx, center[1] + ry))
    return corners


def _segment_distance_2d(
    p1: tuple[float, float], p2: tuple[float, float],
    q1: tuple[float, float], q2: tuple[float, float],
) -> float:
    """Minimum distance between two 2D segments."""
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    d1 = cross(p1, p2, q1)
    d2 = cross(p1, p2, q2)
    d3 = cross(q1, q2, p1)
    d4 = cross(q1, q2, p2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return 0.0  # proper intersection

    def point_seg(p, a, b):
        ax, ay = b[0] - a[0], b[1] - a[1]
        denom = ax * ax + ay * ay
        if denom == 0.0:
            return dist2(p, a)
        t = ((p[0] - a[0]) * ax + (p[1] - a[1]) * ay) / denom
        t = min(1.0, max(0.0, t))
        return dist2(p, (a[0] + t * ax, a[1] + t * ay))

    return min(
        point_seg(p1, q1, q2),
        point_seg(p2, q1, q2),
        point_seg(q1, p1, p2),
        point_seg(q2, p1, p2),
    )


def _polygon_contains(poly: list[tuple[float, float]], p: tuple[float, float]) -> bool:
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > p[1]) != (y2 > p[1]):
            xcross = x1 + (p[1] - y1) * (x2 - x1) / (y2 - y1)
            if p[0] < xcross:
                inside = not inside
    return inside


def box_to_box_distance(
    center_a: Point3, half_a: Point3, yaw_a: float,
    center_b: Point3, half_b: Point3, yaw_b: float,
) -> float:
    """Minimum distance between two yaw-rotated boxes.

    Both boxes are extruded rotated rectangles, so the distance factors
    into the 2D distance between footprints and the gap between the two
    z-intervals.
    """
    poly_a = footprint_corners(center_a, half_a, yaw_a)
    poly_b = footprint_corners(center_b, half_b, yaw_b)
    if _polygon_contains(poly_a, poly_b[0]) or _polygon_contains(poly_b, poly_a[0]):
        d_xy = 0.0
    else:
        d_xy = min(
            _segment_distance_2d(poly_a[i], poly_a[(i + 1) % 4],
                                 poly_b[j], poly_b[(j + 1) % 4])
            for i in range(4)
            for j in range(4)
        )
    d_z = max(0.0, abs(center_a[2] - center_b[2]) - (half_a[2] + half_b[2]))
    return math.hypot(d_xy, d_z)
