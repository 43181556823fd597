"""Graph-quality scoring: average path length similarity and the
marble-and-hole topology score.

Both metrics compare a proposal graph against a ground-truth graph purely
geometrically; every parameter is explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from .geometry import Point
from .graph import RoadGraph


@dataclass(frozen=True)
class AplsParams:
    control_point_spacing: float = 16.0
    snap_radius: float = 8.0

    def __post_init__(self) -> None:
        if self.control_point_spacing <= 0 or self.snap_radius <= 0:
            raise ValueError("parameters must be positive")


@dataclass(frozen=True)
class TopoParams:
    seed_interval: float = 16.0
    match_radius: float = 8.0
    propagation_radius: float = 300.0
    marble_interval: float = 5.0

    def __post_init__(self) -> None:
        if min(self.seed_interval, self.match_radius,
               self.propagation_radius, self.marble_interval) <= 0:
            raise ValueError("parameters must be positive")
        if self.marble_interval > self.propagation_radius:
            raise ValueError("marble_interval must not exceed propagation_radius")


@dataclass(frozen=True)
class TopoScore:
    precision: float
    recall: float
    f1: float


def _f1(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def densify(g: RoadGraph, spacing: float) -> RoadGraph:
    """Subdivide edges so none exceeds spacing; geometry is unchanged."""
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    vertices = list(g.vertices)
    edges: List[Tuple[int, int]] = []
    for i, j in g.edges:
        a, b = g.vertices[i], g.vertices[j]
        n = max(1, math.ceil(a.distance_to(b) / spacing))
        prev = i
        for k in range(1, n):
            t = k / n
            vertices.append(Point(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
            edges.append((prev, len(vertices) - 1))
            prev = len(vertices) - 1
        edges.append((prev, j))
    return RoadGraph(vertices, edges)


def _nx_graph(g: RoadGraph) -> nx.Graph:
    G = nx.Graph()
    for i, p in enumerate(g.vertices):
        G.add_node(i, pos=(p.x, p.y))
    for i, j in g.edges:
        G.add_edge(i, j, weight=g.vertices[i].distance_to(g.vertices[j]))
    return G


def _nearest_on_edges(g: RoadGraph, q: Point) -> Tuple[float, int, float]:
    """(distance, edge index, param in [0,1]) of the nearest edge point to q."""
    best = (math.inf, -1, 0.0)
    for eid, (i, j) in enumerate(g.edges):
        a, b = g.vertices[i], g.vertices[j]
        ux, uy = b.x - a.x, b.y - a.y
        L2 = ux * ux + uy * uy
        s = 0.0 if L2 == 0 else min(1.0, max(
            0.0, ((q.x - a.x) * ux + (q.y - a.y) * uy) / L2))
        d = math.hypot(q.x - (a.x + s * ux), q.y - (a.y + s * uy))
        if d < best[0]:
            best = (d, eid, s)
    return best


def _edge_point(g: RoadGraph, eid: int, s: float) -> Point:
    i, j = g.edges[eid]
    a, b = g.vertices[i], g.vertices[j]
    return Point(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y))


def _inject_points(g: RoadGraph, locations: List[Tuple[int, float]]) -> nx.Graph:
    """Graph copy with extra nodes ('p', k) splitting edges at the given
    (edge index, param) locations."""
    G = nx.Graph()
    for i, p in enumerate(g.vertices):
        G.add_node(i, pos=(p.x, p.y))
    per_edge: Dict[int, List[Tuple[float, Tuple[str, int]]]] = {}
    for k, (eid, s) in enumerate(locations):
        key = ("p", k)
        p = _edge_point(g, eid, s)
        G.add_node(key, pos=(p.x, p.y))
        per_edge.setdefault(eid, []).append((s, key))
    for eid, (i, j) in enumerate(g.edges):
        length = g.vertices[i].distance_to(g.vertices[j])
        if eid not in per_edge:
            G.add_edge(i, j, weight=length)
            continue
        chain = [(0.0, i)] + sorted(per_edge[eid]) + [(1.0, j)]
        for (s0, n0), (s1, n1) in zip(chain, chain[1:]):
            w = (s1 - s0) * length
            if G.has_edge(n0, n1):
                w = min(w, G.edges[n0, n1]["weight"])
            G.add_edge(n0, n1, weight=w)
    return G


def _directional_apls(gt: RoadGraph, prop: RoadGraph,
                      params: AplsParams) -> float:
    control = list(gt.vertices)
    G_gt = _nx_graph(gt)
    matched: List[Optional[int]] = []
    locations: List[Tuple[int, float]] = []
    for q in control:
        d, eid, s = _nearest_on_edges(prop, q)
        if d <= params.snap_radius:
            matched.append(len(locations))
            locations.append((eid, s))
        else:
            matched.append(None)
    H = _inject_points(prop, locations)
    gt_lengths = dict(nx.all_pairs_dijkstra_path_length(G_gt))
    prop_lengths: Dict[int, Dict] = {}
    for k, m in enumerate(matched):
        if m is not None:
            prop_lengths[k] = nx.single_source_dijkstra_path_length(H, ("p", m))
    penalties = []
    n = len(control)
    for i in range(n):
        for j in range(i + 1, n):
            L_gt = gt_lengths.get(i, {}).get(j)
            if L_gt is None or L_gt <= 1e-12:
                continue
            if matched[i] is None or matched[j] is None:
                penalties.append(1.0)
                continue
            L_prop = prop_lengths[i].get(("p", matched[j]))
            if L_prop is None:
                penalties.append(1.0)
            else:
                penalties.append(min(1.0, abs(L_gt - L_prop) / L_gt))
    if not penalties:
        return 1.0
    return 1.0 - sum(penalties) / len(penalties)


def apls(gt: RoadGraph, prop: RoadGraph,
         params: AplsParams = AplsParams()) -> float:
    """Symmetric shortest-path length similarity in [0, 1]."""
    gt.validate()
    prop.validate()
    if gt.is_empty:
        raise ValueError("ground-truth graph is empty")
    if prop.is_empty:
        return 0.0
    gt_d = densify(gt, params.control_point_spacing)
    prop_d = densify(prop, params.control_point_spacing)
    return 0.5 * (_directional_apls(gt_d, prop_d, params)
                  + _directional_apls(prop_d, gt_d, params))


def _sample_along_paths(g: RoadGraph,
                        interval: float) -> List[Tuple[Point, int, float]]:
    """Points every `interval` of arc length along each maximal road path,
    deduplicated by position.  Returns (point, edge index, edge param)."""
    adj_eid = {}
    for eid, (i, j) in enumerate(g.edges):
        adj_eid[(i, j)] = eid
        adj_eid[(j, i)] = eid
    seen = set()
    out: List[Tuple[Point, int, float]] = []
    for path in g.maximal_paths():
        total = 0.0
        target = 0.0
        for u, v in zip(path, path[1:]):
            eid = adj_eid[(u, v)]
            a, b = g.vertices[u], g.vertices[v]
            length = a.distance_to(b)
            while target <= total + length + 1e-12:
                s = 0.0 if length == 0 else min(1.0, (target - total) / length)
                if g.edges[eid][0] != u:
                    s = 1.0 - s  # param is relative to the stored edge order
                p = _edge_point(g, eid, s)
                key = (round(p.x, 9), round(p.y, 9))
                if key not in seen:
                    seen.add(key)
                    out.append((p, eid, s))
                target += interval
            total += length
    return out


def _propagate(g: RoadGraph, eid: int, s: float, radius: float,
               interval: float) -> List[Point]:
    """Sample points at multiples of `interval` of geodesic distance from the
    location (eid, s), along all geodesic paths out to `radius`.

    Every edge is swept from both ends: the point at offset o from u on an
    edge (u, v) of length w has geodesic distance min(d_u + o, d_v + w - o),
    which makes the sampling independent of shortest-path tie-breaking.
    """
    G = _inject_points(g, [(eid, s)])
    src = ("p", 0)
    dist = nx.single_source_dijkstra_path_length(G, src, cutoff=radius)
    pos = nx.get_node_attributes(G, "pos")
    pts: List[Point] = [Point(*pos[src])]
    seen = {(round(pts[0].x, 9), round(pts[0].y, 9))}

    def emit(ax, ay, bx, by, d0, d1):
        # points at multiples of interval with geodesic distance in (d0, d1],
        # linearly mapped onto the geometric sub-segment (a, b]
        if d1 <= d0:
            return
        m = math.floor(d0 / interval) * interval
        if m <= d0 + 1e-12:
            m += interval
        while m <= d1 + 1e-12:
            f = (m - d0) / (d1 - d0)
            p = Point(ax + f * (bx - ax), ay + f * (by - ay))
            key = (round(p.x, 9), round(p.y, 9))
            if key not in seen:
                seen.add(key)
                pts.append(p)
            m += interval

    for u, v in sorted(G.edges, key=lambda e: (str(e[0]), str(e[1]))):
        w = G.edges[u, v]["weight"]
        d_u = dist.get(u, math.inf)
        d_v = dist.get(v, math.inf)
        if w <= 0 or (math.isinf(d_u) and math.isinf(d_v)):
            continue
        # offset from u where the sweeps from both ends meet
        o_star = min(w, max(0.0, 0.5 * (d_v + w - d_u)))
        (ux, uy), (vx, vy) = pos[u], pos[v]
        if not math.isinf(d_u):
            lim = min(o_star, radius - d_u)
            if lim > 0:
                f = lim / w
                emit(ux, uy, ux + f * (vx - ux), uy + f * (vy - uy),
                     d_u, d_u + lim)
        if not math.isinf(d_v):
            lim = min(w - o_star, radius - d_v)
            if lim > 0:
                f = lim / w
                emit(vx, vy, vx + f * (ux - vx), vy + f * (uy - vy),
                     d_v, d_v + lim)
    return pts


def _greedy_match(holes: List[Point], marbles: List[Point],
                  radius: float) -> int:
    if not holes or not marbles:
        return 0
    H = np.array([[p.x, p.y] for p in holes])
    M = np.array([[p.x, p.y] for p in marbles])
    d = np.sqrt(((H[:, None, :] - M[None, :, :]) ** 2).sum(axis=2))
    hi, mi = np.nonzero(d <= radius)
    order = np.lexsort((mi, hi, d[hi, mi]))
    used_h = set()
    used_m = set()
    matched = 0
    for k in order:
        h, m = int(hi[k]), int(mi[k])
        if h in used_h or m in used_m:
            continue
        used_h.add(h)
        used_m.add(m)
        matched += 1
    return matched


def topo(gt: RoadGraph, prop: RoadGraph,
         params: TopoParams = TopoParams()) -> TopoScore:
    """Marble-and-hole precision/recall over seeded geodesic subgraphs."""
    gt.validate()
    prop.validate()
    if gt.is_empty:
        raise ValueError("ground-truth graph is empty")
    total_holes = total_marbles = matched_pairs = 0
    prop_empty = prop.is_empty
    for seed, eid, s in _sample_along_paths(gt, params.seed_interval):
        holes = _propagate(gt, eid, s, params.propagation_radius,
                           params.marble_interval)
        total_holes += len(holes)
        if prop_empty:
            continue
        d, p_eid, p_s = _nearest_on_edges(prop, seed)
        if d > params.match_radius:
            continue
        marbles = _propagate(prop, p_eid, p_s, params.propagation_radius,
                             params.marble_interval)
        total_marbles += len(marbles)
        matched_pairs += _greedy_match(holes, marbles, params.match_radius)
    precision = matched_pairs / total_marbles if total_marbles else 0.0
    recall = matched_pairs / total_holes if total_holes else 0.0
    return TopoScore(precision, recall, _f1(precision, recall))
