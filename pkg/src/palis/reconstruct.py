"""Road graph reconstruction from a patched line segment grid.

Every I-cell contributes its segment as a graph edge; endpoints of adjacent
I-cells that pass the distance test are merged into one shared vertex,
junction (X) cells synthesize an intersection vertex connected to the
surrounding segments, and crossing (T) cells bridge continuing road pairs
without merging them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .codec import PatchClass, PatchGrid
from .geometry import (LineSegment, PatchRect, Point, angle_difference,
                       extension_distance, point_segment_distance,
                       segment_intersection)
from .graph import RoadGraph


@dataclass(frozen=True)
class ReconstructParams:
    tau_d: float = 2.0     # distance threshold, px
    tau_a: float = 15.0    # angle threshold, degrees
    neighbor_radius: int = 1  # Chebyshev radius, cells

    def __post_init__(self) -> None:
        if self.tau_d <= 0:
            raise ValueError("tau_d must be positive")
        if not (0 < self.tau_a <= 90):
            raise ValueError("tau_a must be in (0, 90]")
        if self.neighbor_radius < 1:
            raise ValueError("neighbor_radius must be >= 1")


class VertexMergeSet:
    """Union-find over provisional vertices; a merged vertex sits at the
    centroid of its members."""

    def __init__(self) -> None:
        self._points: List[Point] = []
        self._parent: List[int] = []

    def add(self, p: Point) -> int:
        self._points.append(p)
        self._parent.append(len(self._parent))
        return len(self._parent) - 1

    def find(self, i: int) -> int:
        root = i
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[i] != root:
            self._parent[i], i = root, self._parent[i]
        return root

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self._parent[max(ri, rj)] = min(ri, rj)

    def __len__(self) -> int:
        return len(self._parent)

    def centroids(self) -> Dict[int, Point]:
        groups: Dict[int, List[Point]] = {}
        for i, p in enumerate(self._points):
            groups.setdefault(self.find(i), []).append(p)
        return {root: Point(sum(p.x for p in pts) / len(pts),
                            sum(p.y for p in pts) / len(pts))
                for root, pts in groups.items()}


def neighbors(grid: PatchGrid, cell: Tuple[int, int],
              radius: int = 1) -> List[Tuple[int, int]]:
    """I-class cells within Chebyshev distance radius, excluding cell itself."""
    r0, c0 = cell
    out = []
    for r in range(max(0, r0 - radius), min(grid.rows, r0 + radius + 1)):
        for c in range(max(0, c0 - radius), min(grid.cols, c0 + radius + 1)):
            if (r, c) != (r0, c0) and grid.class_at(r, c) is PatchClass.I:
                out.append((r, c))
    return out


def connect_I(l_i: LineSegment, l_j: LineSegment,
              tau_d: float) -> Optional[Tuple[Point, Point]]:
    """Shared-endpoint test for two adjacent single-traversal segments.

    Returns the endpoint pair to merge when the average of the two
    endpoint-to-opposite-segment distances is within tau_d, else None.
    """
    e_i = l_i.a if point_segment_distance(l_i.a, l_j) <= \
        point_segment_distance(l_i.b, l_j) else l_i.b
    e_j = l_j.a if point_segment_distance(l_j.a, l_i) <= \
        point_segment_distance(l_j.b, l_i) else l_j.b
    avg = 0.5 * (point_segment_distance(e_j, l_i)
                 + point_segment_distance(e_i, l_j))
    if avg <= tau_d:
        return e_i, e_j
    return None


def resolve_X(rect: PatchRect, neighbor_segments: List[LineSegment],
              tau_d: float) -> Optional[Tuple[Point, List[Point]]]:
    """Junction vertex and connection endpoints for a junction cell.

    Pairwise supporting-line intersections falling inside the cell are
    averaged into the junction position; segments participating in at least
    one valid intersection are connected via their endpoint nearest the
    junction.  With no valid intersection the junction falls back to the
    centroid of the nearest endpoints of all neighbors.  None when the cell
    has no neighbors.
    """
    if not neighbor_segments:
        return None
    valid_points: List[Point] = []
    participating = [False] * len(neighbor_segments)
    for i in range(len(neighbor_segments)):
        for j in range(i + 1, len(neighbor_segments)):
            p = segment_intersection(neighbor_segments[i], neighbor_segments[j])
            if p is not None and rect.contains(p):
                valid_points.append(p)
                participating[i] = True
                participating[j] = True
    if valid_points:
        final = Point(sum(p.x for p in valid_points) / len(valid_points),
                      sum(p.y for p in valid_points) / len(valid_points))
        connected = [seg for seg, ok in zip(neighbor_segments, participating) if ok]
    else:
        nearest = [seg.a if seg.a.distance_to(rect.center())
                   <= seg.b.distance_to(rect.center()) else seg.b
                   for seg in neighbor_segments]
        final = Point(sum(p.x for p in nearest) / len(nearest),
                      sum(p.y for p in nearest) / len(nearest))
        connected = list(neighbor_segments)
    endpoints = [seg.a if seg.a.distance_to(final) <= seg.b.distance_to(final)
                 else seg.b for seg in connected]
    return final, endpoints


def resolve_T(neighbor_segments: List[LineSegment], tau_d: float,
              tau_a: float) -> List[Tuple[Point, Point]]:
    """Endpoint pairs bridging continuing roads across a crossing cell.

    Candidate pairs must be near-parallel (angle within tau_a) with a
    supporting-line lateral gap within tau_d; accepted greedily by ascending
    gap with every segment endpoint used at most once.  The measure is taken
    on supporting lines because continuing chords are separated by a full
    patch: their clipped-segment gap always exceeds any useful tau_d.
    """
    candidates = []
    for i in range(len(neighbor_segments)):
        for j in range(i + 1, len(neighbor_segments)):
            li, lj = neighbor_segments[i], neighbor_segments[j]
            if angle_difference(li, lj) > tau_a:
                continue
            gap = extension_distance(li, lj)
            if gap > tau_d:
                continue
            candidates.append((gap, i, j))
    candidates.sort()
    used = set()
    connections = []
    for _, i, j in candidates:
        li, lj = neighbor_segments[i], neighbor_segments[j]
        e_i = li.a if point_segment_distance(li.a, lj) <= \
            point_segment_distance(li.b, lj) else li.b
        e_j = lj.a if point_segment_distance(lj.a, li) <= \
            point_segment_distance(lj.b, li) else lj.b
        key_i = (i, 0 if e_i == li.a else 1)
        key_j = (j, 0 if e_j == lj.a else 1)
        if key_i in used or key_j in used:
            continue
        used.add(key_i)
        used.add(key_j)
        connections.append((e_i, e_j))
    return connections


@dataclass
class ReconstructResult:
    graph: RoadGraph
    diagnostics: List[str] = field(default_factory=list)


def reconstruct_graph(grid: PatchGrid,
                      params: ReconstructParams = ReconstructParams()
                      ) -> RoadGraph:
    return reconstruct_with_diagnostics(grid, params).graph


def reconstruct_with_diagnostics(grid: PatchGrid,
                                 params: ReconstructParams = ReconstructParams()
                                 ) -> ReconstructResult:
    """Build the road graph from a patch grid (row-major, deterministic)."""
    grid.validate()
    diagnostics: List[str] = []
    merge = VertexMergeSet()
    endpoint_ids: Dict[Tuple[int, int], Tuple[int, int]] = {}
    prov_edges: List[Tuple[int, int]] = []

    i_cells = {(r, c): seg for (r, c, seg) in grid.i_cells()}
    for (r, c), seg in sorted(i_cells.items()):
        va = merge.add(seg.a)
        vb = merge.add(seg.b)
        endpoint_ids[(r, c)] = (va, vb)
        prov_edges.append((va, vb))

    def endpoint_id(cell: Tuple[int, int], seg: LineSegment, e: Point) -> int:
        va, vb = endpoint_ids[cell]
        return va if e == seg.a else vb

    foreground = sorted(grid.cells)
    for cell in foreground:
        cls = grid.class_at(*cell)
        rect = grid.rect(*cell)
        if cls is PatchClass.I:
            l_i = i_cells[cell]
            for other in neighbors(grid, cell, params.neighbor_radius):
                if other <= cell:
                    continue  # each unordered pair once; the test is symmetric
                l_j = i_cells[other]
                joined = connect_I(l_i, l_j, params.tau_d)
                if joined is not None:
                    e_i, e_j = joined
                    merge.union(endpoint_id(cell, l_i, e_i),
                                endpoint_id(other, l_j, e_j))
        elif cls is PatchClass.X:
            cells_around = neighbors(grid, cell, params.neighbor_radius)
            segs = [i_cells[c] for c in cells_around]
            resolved = resolve_X(rect, segs, params.tau_d)
            if resolved is None:
                diagnostics.append(
                    f"junction cell {cell} skipped: no I-cell neighbors")
                continue
            final, endpoints = resolved
            jid = merge.add(final)
            # map each connection endpoint back to its owning cell/segment
            for e in endpoints:
                owner = None
                for other in cells_around:
                    seg = i_cells[other]
                    if e == seg.a or e == seg.b:
                        owner = (other, seg)
                        break
                if owner is not None:
                    prov_edges.append((jid, endpoint_id(owner[0], owner[1], e)))
        elif cls is PatchClass.T:
            cells_around = neighbors(grid, cell, params.neighbor_radius)
            segs = [i_cells[c] for c in cells_around]
            for e_i, e_j in resolve_T(segs, params.tau_d, params.tau_a):
                owner_i = owner_j = None
                for other in cells_around:
                    seg = i_cells[other]
                    if e_i == seg.a or e_i == seg.b:
                        owner_i = (other, seg)
                    if e_j == seg.a or e_j == seg.b:
                        owner_j = (other, seg)
                if owner_i and owner_j:
                    prov_edges.append(
                        (endpoint_id(owner_i[0], owner_i[1], e_i),
                         endpoint_id(owner_j[0], owner_j[1], e_j)))

    centroids = merge.centroids()
    roots = sorted(centroids)
    index = {root: k for k, root in enumerate(roots)}
    vertices = [centroids[root] for root in roots]
    edge_set = set()
    edges: List[Tuple[int, int]] = []
    for i, j in prov_edges:
        a, b = index[merge.find(i)], index[merge.find(j)]
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key in edge_set:
            continue
        edge_set.add(key)
        edges.append(key)
    # drop vertices that lost all incident edges to merging
    used = sorted({v for e in edges for v in e})
    remap = {v: k for k, v in enumerate(used)}
    graph = RoadGraph([vertices[v] for v in used],
                      [(remap[a], remap[b]) for a, b in edges])
    graph.validate()
    return ReconstructResult(graph, diagnostics)
