"""Seeded synthetic scenes: small road layouts standing in for real imagery.

Coordinates are kept off patch borders so that encoding stays unambiguous.
"""

from __future__ import annotations

from typing import Dict, List, Tuple

import numpy as np

from .geometry import Point, point_segment_distance, LineSegment
from .graph import RoadGraph

SCENE_NAMES = ("grid", "plus", "overpass", "manhattan")


def _off_border(x: float, patch_size: int = 8, margin: float = 1.5) -> float:
    """Nudge a coordinate away from the patch lattice lines."""
    frac = x % patch_size
    if frac < margin:
        return x + (margin - frac)
    if frac > patch_size - margin:
        return x - (frac - (patch_size - margin))
    return x


def _lattice(xs: List[float], ys: List[float], width: int,
             height: int) -> RoadGraph:
    """Full crossing lattice: vertical roads at xs, horizontal at ys, with a
    shared junction vertex at every crossing."""
    vertices: List[Point] = []
    index: Dict[Tuple[float, float], int] = {}

    def vid(x: float, y: float) -> int:
        key = (round(x, 9), round(y, 9))
        if key not in index:
            index[key] = len(vertices)
            vertices.append(Point(x, y))
        return index[key]

    edges: List[Tuple[int, int]] = []

    def chain(points: List[Tuple[float, float]]) -> None:
        ids = [vid(x, y) for x, y in points]
        for a, b in zip(ids, ids[1:]):
            edges.append((a, b))

    for x in xs:
        chain([(x, 0.0)] + [(x, y) for y in sorted(ys)] + [(x, float(height))])
    for y in ys:
        chain([(0.0, y)] + [(x, y) for x in sorted(xs)] + [(float(width), y)])
    return RoadGraph(vertices, edges)


def scene_plus(seed: int = 0) -> Tuple[RoadGraph, int, int]:
    """One horizontal and one vertical road crossing at a shared junction."""
    h = w = 64
    c = 28.0
    g = RoadGraph(
        [Point(c, 0), Point(c, c), Point(c, h), Point(0, c), Point(w, c)],
        [(0, 1), (1, 2), (3, 1), (1, 4)])
    return g, h, w


def scene_overpass(seed: int = 0) -> Tuple[RoadGraph, int, int]:
    """Two roads crossing at different elevations: disjoint paths, no shared
    vertex at the crossing."""
    h = w = 64
    c = 28.0
    g = RoadGraph(
        [Point(c, 0), Point(c, h), Point(0, c), Point(w, c)],
        [(0, 1), (2, 3)])
    return g, h, w


def scene_grid(seed: int = 0) -> Tuple[RoadGraph, int, int]:
    """Regular 3x3 road lattice."""
    h = w = 96
    coords = [20.0, 44.0, 68.0]
    return _lattice(coords, coords, w, h), h, w


def scene_manhattan(seed: int = 0) -> Tuple[RoadGraph, int, int]:
    """Randomized axis-aligned lattice: jittered road positions with spacing
    of at least 24 px (three patches)."""
    h = w = 128
    rng = np.random.default_rng(seed)

    def positions() -> List[float]:
        out = []
        x = 12.0 + float(rng.uniform(0, 8))
        while x < w - 10:
            out.append(_off_border(x))
            x += float(rng.uniform(28, 40))
        return out

    return _lattice(positions(), positions(), w, h), h, w


_SCENES = {
    "grid": scene_grid,
    "plus": scene_plus,
    "overpass": scene_overpass,
    "manhattan": scene_manhattan,
}


def make_scene(name: str, seed: int = 0) -> Tuple[RoadGraph, int, int]:
    if name not in _SCENES:
        raise ValueError(f"unknown scene '{name}', pick one of {SCENE_NAMES}")
    g, h, w = _SCENES[name](seed)
    g.validate()
    return g, h, w


def centerline_mask(g: RoadGraph, height: int, width: int,
                    radius: float = 0.75) -> np.ndarray:
    """Binary mask marking pixels whose center lies within `radius` of a road."""
    mask = np.zeros((height, width))
    for i, j in g.edges:
        a, b = g.vertices[i], g.vertices[j]
        seg = LineSegment(a, b)
        r0 = max(0, int(min(a.y, b.y) - radius - 1))
        r1 = min(height, int(max(a.y, b.y) + radius + 2))
        c0 = max(0, int(min(a.x, b.x) - radius - 1))
        c1 = min(width, int(max(a.x, b.x) + radius + 2))
        for r in range(r0, r1):
            for c in range(c0, c1):
                if point_segment_distance(Point(c + 0.5, r + 0.5), seg) <= radius:
                    mask[r, c] = 1.0
    return mask
