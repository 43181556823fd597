"""Undirected road graphs: 2D vertices plus index edges.

Used both for ground-truth annotations and for reconstruction output.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from .geometry import Point


@dataclass
class RoadGraph:
    vertices: List[Point] = field(default_factory=list)
    edges: List[Tuple[int, int]] = field(default_factory=list)

    def validate(self) -> None:
        n = len(self.vertices)
        seen = set()
        for i, j in self.edges:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) references a missing vertex")
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        for p in self.vertices:
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise ValueError("non-finite vertex")

    @property
    def is_empty(self) -> bool:
        return not self.vertices or not self.edges

    def degrees(self) -> List[int]:
        deg = [0] * len(self.vertices)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def adjacency(self) -> Dict[int, List[Tuple[int, int]]]:
        """vertex -> list of (neighbor, edge index)."""
        adj: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
        for eid, (i, j) in enumerate(self.edges):
            adj[i].append((j, eid))
            adj[j].append((i, eid))
        return adj

    def edge_length(self, eid: int) -> float:
        i, j = self.edges[eid]
        return self.vertices[i].distance_to(self.vertices[j])

    def total_length(self) -> float:
        return sum(self.edge_length(e) for e in range(len(self.edges)))

    def translated(self, dx: float, dy: float) -> "RoadGraph":
        return RoadGraph([Point(p.x + dx, p.y + dy) for p in self.vertices],
                         list(self.edges))

    def maximal_paths(self) -> List[List[int]]:
        """Maximal road paths: chains of edges between non-degree-2 vertices.

        Each edge belongs to exactly one path.  Pure cycles (all vertices of
        degree 2) are returned as closed vertex lists.
        """
        adj = self.adjacency()
        deg = self.degrees()
        used = [False] * len(self.edges)
        paths: List[List[int]] = []

        def walk(start: int, nxt: int, eid: int) -> List[int]:
            used[eid] = True
            path = [start, nxt]
            while deg[path[-1]] == 2:
                cur = path[-1]
                step = [(w, e) for (w, e) in adj[cur] if not used[e]]
                if not step:
                    break
                w, e = step[0]
                used[e] = True
                path.append(w)
            return path

        for v in range(len(self.vertices)):
            if deg[v] == 2:
                continue
            for (w, eid) in adj[v]:
                if not used[eid]:
                    paths.append(walk(v, w, eid))
        # remaining edges form cycles through degree-2 vertices
        for eid, (i, j) in enumerate(self.edges):
            if not used[eid]:
                paths.append(walk(i, j, eid))
        return paths

    def path_points(self, path: List[int]) -> List[Point]:
        return [self.vertices[v] for v in path]
