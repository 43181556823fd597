"""Encoding of vector road graphs into the patched line segment grid.

Each non-overlapping p-by-p patch is classified by the road traversals that
cross it (background / single-traversal / junction / crossing-without-junction)
and single-traversal patches store the chord of their traversal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .geometry import (LineSegment, PatchRect, Point, clip_polyline_to_rect,
                       point_segment_distance, polyline_length)
from .graph import RoadGraph

# Clipped traversal pieces shorter than this do not count toward a patch's
# traversal count; avoids corner-grazing pieces flipping the patch class.
MIN_PIECE_LENGTH = 0.5
# Chord endpoints may sit this far outside their cell (numerical slack).
CONTAINMENT_TOL = 1e-6
# Chords deviating more than this from their source piece are flagged.
CURVATURE_FLAG_PX = 2.0


class PatchClass(enum.Enum):
    BACKGROUND = "background"
    I = "I"
    X = "X"
    T = "T"


@dataclass
class PatchGrid:
    """Lattice of patch records; background cells are implicit."""

    patch_size: int
    rows: int
    cols: int
    cells: Dict[Tuple[int, int], Tuple[PatchClass, Optional[LineSegment]]] = \
        field(default_factory=dict)
    diagnostics: List[str] = field(default_factory=list)

    @property
    def height(self) -> int:
        return self.rows * self.patch_size

    @property
    def width(self) -> int:
        return self.cols * self.patch_size

    def rect(self, row: int, col: int) -> PatchRect:
        return PatchRect(row, col, float(self.patch_size))

    def class_at(self, row: int, col: int) -> PatchClass:
        entry = self.cells.get((row, col))
        return entry[0] if entry else PatchClass.BACKGROUND

    def segment_at(self, row: int, col: int) -> Optional[LineSegment]:
        entry = self.cells.get((row, col))
        return entry[1] if entry else None

    def set_cell(self, row: int, col: int, cls: PatchClass,
                 segment: Optional[LineSegment] = None) -> None:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise ValueError(f"cell ({row}, {col}) outside the grid")
        if cls is PatchClass.BACKGROUND:
            if segment is not None:
                raise ValueError("background cell cannot carry a segment")
            self.cells.pop((row, col), None)
            return
        if cls is PatchClass.I:
            if segment is None:
                raise ValueError("single-traversal cell requires a segment")
            rect = self.rect(row, col)
            for p in (segment.a, segment.b):
                if not rect.contains(p, tol=CONTAINMENT_TOL):
                    raise ValueError(
                        f"segment endpoint ({p.x}, {p.y}) outside cell ({row}, {col})")
        elif segment is not None:
            raise ValueError(f"{cls.value} cell cannot carry a segment")
        self.cells[(row, col)] = (cls, segment)

    def i_cells(self) -> List[Tuple[int, int, LineSegment]]:
        out = []
        for (r, c) in sorted(self.cells):
            cls, seg = self.cells[(r, c)]
            if cls is PatchClass.I:
                out.append((r, c, seg))
        return out

    def validate(self) -> None:
        for (r, c), (cls, seg) in self.cells.items():
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"cell ({r}, {c}) outside the grid")
            if cls is PatchClass.I:
                if seg is None:
                    raise ValueError(f"cell ({r}, {c}) lacks its segment")
                rect = self.rect(r, c)
                for p in (seg.a, seg.b):
                    if not rect.contains(p, tol=CONTAINMENT_TOL):
                        raise ValueError(
                            f"segment endpoint outside cell ({r}, {c})")
            elif seg is not None:
                raise ValueError(f"non-I cell ({r}, {c}) carries a segment")


def _keep_boundary_piece(piece: List[Point], rect: PatchRect) -> bool:
    """Tie-break for pieces running exactly along a shared patch border.

    The piece belongs to the patch whose interior lies on the left of the
    travel direction: nudge the midpoint 1e-6 to the left and test membership.
    Pieces with any interior point are always kept.
    """
    eps = 1e-9
    on_left = all(abs(p.x - rect.x0) <= eps for p in piece)
    on_right = all(abs(p.x - rect.x1) <= eps for p in piece)
    on_top = all(abs(p.y - rect.y0) <= eps for p in piece)
    on_bottom = all(abs(p.y - rect.y1) <= eps for p in piece)
    if not (on_left or on_right or on_top or on_bottom):
        return True
    # direction of travel at the midpoint edge
    p, q = piece[0], piece[-1]
    dx, dy = q.x - p.x, q.y - p.y
    norm = (dx * dx + dy * dy) ** 0.5
    if norm == 0:
        return False
    dx, dy = dx / norm, dy / norm
    # visual left of (dx, dy) in a y-down frame is (dy, -dx)
    mx = 0.5 * (p.x + q.x) + 1e-6 * dy
    my = 0.5 * (p.y + q.y) - 1e-6 * dx
    return rect.contains_strict(Point(mx, my))


def traversals_in_patch(g: RoadGraph, rect: PatchRect) -> List[List[Point]]:
    """Maximal road paths of g clipped to the patch rect.

    Pieces of arc length below MIN_PIECE_LENGTH are discarded; the list
    length is the patch's traversal count.
    """
    pieces: List[List[Point]] = []
    for path in g.maximal_paths():
        pts = g.path_points(path)
        for piece in clip_polyline_to_rect(pts, rect):
            if polyline_length(piece) < MIN_PIECE_LENGTH:
                continue
            if not _keep_boundary_piece(piece, rect):
                continue
            pieces.append(piece)
    return pieces


def classify_patch(pieces: List[List[Point]], g: RoadGraph,
                   rect: PatchRect) -> PatchClass:
    """Background for no traversal, I for one; X when a junction keypoint lies
    inside the rect, T otherwise (crossings without a shared vertex)."""
    if not pieces:
        return PatchClass.BACKGROUND
    if len(pieces) == 1:
        return PatchClass.I
    deg = g.degrees()
    inside = [v for v, p in enumerate(g.vertices) if rect.contains(p, tol=1e-9)]
    for v in inside:
        if deg[v] >= 3:
            return PatchClass.X
    # a vertex shared by two or more pieces also marks a junction
    for v in inside:
        p = g.vertices[v]
        hits = sum(1 for piece in pieces
                   if any(p.distance_to(q) <= 1e-6 for q in piece))
        if hits >= 2:
            return PatchClass.X
    return PatchClass.T


def chord_of_piece(piece: List[Point]) -> LineSegment:
    """Segment from the piece's first point to its last (patch entry/exit)."""
    if len(piece) < 2:
        raise ValueError("piece needs at least 2 points")
    return LineSegment(piece[0], piece[-1])


def piece_max_deviation(piece: List[Point]) -> float:
    """Largest distance of a piece vertex from the piece's chord."""
    chord = chord_of_piece(piece)
    return max(point_segment_distance(p, chord) for p in piece)


def encode_graph(g: RoadGraph, height: int, width: int,
                 patch_size: int = 8) -> PatchGrid:
    """Encode a road graph into an H/p x W/p patch grid."""
    g.validate()
    if patch_size <= 0:
        raise ValueError("patch size must be positive")
    if height % patch_size or width % patch_size:
        raise ValueError(
            f"patch size {patch_size} does not divide image {width}x{height}")
    grid = PatchGrid(patch_size, height // patch_size, width // patch_size)
    for row in range(grid.rows):
        for col in range(grid.cols):
            rect = grid.rect(row, col)
            pieces = traversals_in_patch(g, rect)
            cls = classify_patch(pieces, g, rect)
            if cls is PatchClass.BACKGROUND:
                continue
            if cls is PatchClass.I:
                piece = pieces[0]
                if piece_max_deviation(piece) > CURVATURE_FLAG_PX:
                    grid.diagnostics.append(
                        f"cell ({row}, {col}): traversal deviates more than "
                        f"{CURVATURE_FLAG_PX} px from its chord")
                grid.set_cell(row, col, cls, chord_of_piece(piece))
            else:
                grid.set_cell(row, col, cls)
    return grid
