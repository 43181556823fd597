"""Exact 2D primitives: points, line segments and axis-aligned patch rectangles.

Coordinates are continuous image-frame pixels: origin at the top-left corner,
x grows right, y grows down.  Raster pixel (i, j) has its center at
(j + 0.5, i + 0.5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

# Segments shorter than this are treated as degenerate (a single point).
DEGENERATE_EPS = 1e-9
# Supporting lines with a direction cross product below this are parallel.
PARALLEL_EPS = 1e-9


class DegenerateSegmentError(ValueError):
    """An operation that needs a direction was called on a zero-length segment."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class LineSegment:
    a: Point
    b: Point

    def is_degenerate(self, tol: float = DEGENERATE_EPS) -> bool:
        return self.a.distance_to(self.b) <= tol

    @property
    def length(self) -> float:
        return self.a.distance_to(self.b)

    def swapped(self) -> "LineSegment":
        return LineSegment(self.b, self.a)

    def midpoint(self) -> Point:
        return Point(0.5 * (self.a.x + self.b.x), 0.5 * (self.a.y + self.b.y))

    def point_at(self, s: float) -> Point:
        return Point(self.a.x + s * (self.b.x - self.a.x),
                     self.a.y + s * (self.b.y - self.a.y))


@dataclass(frozen=True)
class PatchRect:
    """Axis-aligned p-by-p cell of the patch lattice, addressed by (row, col)."""

    row: int
    col: int
    size: float

    def __post_init__(self) -> None:
        if self.size <= 0:
            raise ValueError("patch size must be positive")

    @property
    def origin(self) -> Point:
        return Point(self.col * self.size, self.row * self.size)

    @property
    def x0(self) -> float:
        return self.col * self.size

    @property
    def y0(self) -> float:
        return self.row * self.size

    @property
    def x1(self) -> float:
        return (self.col + 1) * self.size

    @property
    def y1(self) -> float:
        return (self.row + 1) * self.size

    def center(self) -> Point:
        return Point(self.x0 + 0.5 * self.size, self.y0 + 0.5 * self.size)

    def contains(self, p: Point, tol: float = 0.0) -> bool:
        return (self.x0 - tol <= p.x <= self.x1 + tol
                and self.y0 - tol <= p.y <= self.y1 + tol)

    def contains_strict(self, p: Point) -> bool:
        return self.x0 < p.x < self.x1 and self.y0 < p.y < self.y1


def point_segment_distance(q: Point, l: LineSegment) -> float:
    """Euclidean distance from q to the nearest point of the closed segment."""
    ax, ay = l.a.x, l.a.y
    ux, uy = l.b.x - ax, l.b.y - ay
    L2 = ux * ux + uy * uy
    if L2 <= DEGENERATE_EPS * DEGENERATE_EPS:
        return math.hypot(q.x - ax, q.y - ay)
    s = ((q.x - ax) * ux + (q.y - ay) * uy) / L2
    s = min(1.0, max(0.0, s))
    return math.hypot(q.x - (ax + s * ux), q.y - (ay + s * uy))


def projection_param(q: Point, l: LineSegment) -> float:
    """Parameter s of the perpendicular foot of q on the supporting line of l.

    s = ((q - a) . (b - a)) / |b - a|^2; the foot lies on the segment iff
    0 <= s <= 1.
    """
    if l.is_degenerate():
        raise DegenerateSegmentError("projection undefined for degenerate segment")
    ax, ay = l.a.x, l.a.y
    ux, uy = l.b.x - ax, l.b.y - ay
    return ((q.x - ax) * ux + (q.y - ay) * uy) / (ux * ux + uy * uy)


def perpendicular_line_distance(q: Point, l: LineSegment) -> float:
    """Unsigned distance from q to the infinite supporting line of l.

    A degenerate segment falls back to the plain point distance.
    """
    ax, ay = l.a.x, l.a.y
    ux, uy = l.b.x - ax, l.b.y - ay
    L2 = ux * ux + uy * uy
    if L2 <= DEGENERATE_EPS * DEGENERATE_EPS:
        return math.hypot(q.x - ax, q.y - ay)
    cross = ux * (q.y - ay) - uy * (q.x - ax)
    return abs(cross) / math.sqrt(L2)


def segment_intersection(l1: LineSegment, l2: LineSegment) -> Optional[Point]:
    """Intersection of the two infinite supporting lines, or None if parallel."""
    if l1.is_degenerate() or l2.is_degenerate():
        raise DegenerateSegmentError("intersection undefined for degenerate segment")
    u1x, u1y = l1.b.x - l1.a.x, l1.b.y - l1.a.y
    u2x, u2y = l2.b.x - l2.a.x, l2.b.y - l2.a.y
    cross = u1x * u2y - u1y * u2x
    if abs(cross) < PARALLEL_EPS:
        return None
    wx, wy = l2.a.x - l1.a.x, l2.a.y - l1.a.y
    t = (wx * u2y - wy * u2x) / cross
    return Point(l1.a.x + t * u1x, l1.a.y + t * u1y)


def angle_difference(l1: LineSegment, l2: LineSegment) -> float:
    """Undirected acute angle between the supporting lines, in degrees [0, 90]."""
    if l1.is_degenerate() or l2.is_degenerate():
        raise DegenerateSegmentError("angle undefined for degenerate segment")
    u1x, u1y = l1.b.x - l1.a.x, l1.b.y - l1.a.y
    u2x, u2y = l2.b.x - l2.a.x, l2.b.y - l2.a.y
    dot = abs(u1x * u2x + u1y * u2y)
    cross = abs(u1x * u2y - u1y * u2x)
    return math.degrees(math.atan2(cross, dot))


def _orient(p: Point, q: Point, r: Point) -> float:
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)


def _on_segment(p: Point, q: Point, r: Point) -> bool:
    # assumes p, q, r collinear; is q within the bounding box of p-r?
    return (min(p.x, r.x) - DEGENERATE_EPS <= q.x <= max(p.x, r.x) + DEGENERATE_EPS
            and min(p.y, r.y) - DEGENERATE_EPS <= q.y <= max(p.y, r.y) + DEGENERATE_EPS)


def segments_intersect(l1: LineSegment, l2: LineSegment) -> bool:
    """True when the two closed segments share at least one point."""
    p1, p2, q1, q2 = l1.a, l1.b, l2.a, l2.b
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 \
            and d3 != 0 and d4 != 0:
        return True
    if abs(d1) <= DEGENERATE_EPS and _on_segment(q1, p1, q2):
        return True
    if abs(d2) <= DEGENERATE_EPS and _on_segment(q1, p2, q2):
        return True
    if abs(d3) <= DEGENERATE_EPS and _on_segment(p1, q1, p2):
        return True
    if abs(d4) <= DEGENERATE_EPS and _on_segment(p1, q2, p2):
        return True
    return False


def shape_distance(l1: LineSegment, l2: LineSegment) -> float:
    """Shortest distance between two closed segments.

    Zero when they intersect, otherwise the minimum over the four
    endpoint-to-opposite-segment distances.
    """
    if segments_intersect(l1, l2):
        return 0.0
    return min(point_segment_distance(l1.a, l2),
               point_segment_distance(l1.b, l2),
               point_segment_distance(l2.a, l1),
               point_segment_distance(l2.b, l1))


def extension_distance(l1: LineSegment, l2: LineSegment) -> float:
    """Lateral gap between two segments measured on their supporting lines.

    Minimum over the four endpoint-to-opposite-supporting-line distances;
    zero for collinear segments regardless of the gap between them.  Used by
    continuation tests where roads extend across an intervening patch.
    """
    return min(perpendicular_line_distance(l1.a, l2),
               perpendicular_line_distance(l1.b, l2),
               perpendicular_line_distance(l2.a, l1),
               perpendicular_line_distance(l2.b, l1))


def polyline_length(points: List[Point]) -> float:
    return sum(points[i].distance_to(points[i + 1]) for i in range(len(points) - 1))


def _clip_edge_to_rect(p: Point, q: Point, rect: PatchRect):
    """Liang-Barsky clip of the edge p->q against the closed rect.

    Returns (t0, t1) with 0 <= t0 <= t1 <= 1, or None if outside.
    """
    dx, dy = q.x - p.x, q.y - p.y
    t0, t1 = 0.0, 1.0
    for num, den in (
        (rect.x0 - p.x, dx),
        (p.x - rect.x1, -dx),
        (rect.y0 - p.y, dy),
        (p.y - rect.y1, -dy),
    ):
        if den == 0.0:
            if num > 0.0:
                return None
            continue
        t = num / den
        if den > 0.0:
            if t > t1:
                return None
            if t > t0:
                t0 = t
        else:
            if t < t0:
                return None
            if t < t1:
                t1 = t
    return t0, t1


def clip_polyline_to_rect(poly: List[Point], rect: PatchRect) -> List[List[Point]]:
    """Maximal connected sub-polylines of poly lying inside the closed rect.

    Entry/exit points are placed exactly on the rectangle boundary.  Pieces
    are ordered by traversal; pieces of zero arc length are dropped.
    """
    if len(poly) < 2:
        raise ValueError("polyline needs at least 2 points")
    pieces: List[List[Point]] = []
    current: List[Point] = []
    for i in range(len(poly) - 1):
        p, q = poly[i], poly[i + 1]
        if p.distance_to(q) <= DEGENERATE_EPS:
            continue
        span = _clip_edge_to_rect(p, q, rect)
        if span is None:
            if len(current) >= 2:
                pieces.append(current)
            current = []
            continue
        t0, t1 = span
        c0 = p if t0 <= 0.0 else Point(p.x + t0 * (q.x - p.x), p.y + t0 * (q.y - p.y))
        c1 = q if t1 >= 1.0 else Point(p.x + t1 * (q.x - p.x), p.y + t1 * (q.y - p.y))
        if current and current[-1].distance_to(c0) <= 1e-9:
            if c0.distance_to(c1) > DEGENERATE_EPS:
                current.append(c1)
        else:
            if len(current) >= 2:
                pieces.append(current)
            current = [c0, c1] if c0.distance_to(c1) > DEGENERATE_EPS else [c0]
        if t1 < 1.0:
            # the polyline leaves the rect on this edge
            if len(current) >= 2:
                pieces.append(current)
            current = []
    if len(current) >= 2:
        pieces.append(current)
    return [p for p in pieces if polyline_length(p) > 0.0]
