"""Generate parity fixtures for the TypeScript client tests.

Each fixture pairs a service request payload with the expected response
computed through the native Python API, so the vitest suite can verify the
HTTP surface end to end without trusting the service implementation twice.

Run from the repository root:

    python3 frontend/scripts/generate_fixtures.py
"""

import json
import pathlib
import sys

import numpy as np

from palis.codec import PatchClass, PatchGrid
from palis.geometry import LineSegment, Point
from palis.graph import RoadGraph
from palis.metrics import apls, topo
from palis.raster import RasterParams, backward, compose_soft_mask
from palis.reconstruct import reconstruct_graph

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"

CLASS_CODES = {PatchClass.BACKGROUND: 0, PatchClass.I: 1,
               PatchClass.X: 2, PatchClass.T: 3}


def flat_grid(grid):
    classes = []
    segments = []
    for r in range(grid.rows):
        for c in range(grid.cols):
            classes.append(CLASS_CODES[grid.class_at(r, c)])
            seg = grid.segment_at(r, c)
            if seg is None:
                segments.extend([0.0, 0.0, 0.0, 0.0])
            else:
                segments.extend([seg.a.x, seg.a.y, seg.b.x, seg.b.y])
    return {"patch_size": grid.patch_size, "rows": grid.rows,
            "cols": grid.cols, "classes": classes, "segments": segments}


def random_grid(rng):
    rows = int(rng.integers(1, 4))
    cols = int(rng.integers(1, 4))
    grid = PatchGrid(8, rows, cols)
    for r in range(rows):
        for c in range(cols):
            roll = rng.random()
            if roll < 0.55:
                a = rng.uniform(0.0, 8.0, 2)
                b = rng.uniform(0.0, 8.0, 2)
                grid.set_cell(r, c, PatchClass.I, LineSegment(
                    Point(c * 8 + a[0], r * 8 + a[1]),
                    Point(c * 8 + b[0], r * 8 + b[1])))
            elif roll < 0.65:
                grid.set_cell(r, c, PatchClass.X)
            elif roll < 0.75:
                grid.set_cell(r, c, PatchClass.T)
    return grid


def random_params(rng):
    return RasterParams(tau_inv=float(rng.uniform(2, 16)),
                        t_out=float(rng.uniform(5, 20)),
                        t_in=float(rng.uniform(0.5, 2.0)))


def flat_graph(g):
    nodes = []
    for p in g.vertices:
        nodes.extend([p.x, p.y])
    edges = []
    for i, j in g.edges:
        edges.extend([i, j])
    return {"nodes": nodes, "edges": edges}


def random_graph(rng, jitter=0.0):
    n = int(rng.integers(3, 8))
    pts = rng.uniform(10, 150, size=(n, 2))
    if jitter:
        pts = pts + rng.uniform(-jitter, jitter, size=pts.shape)
    verts = [Point(float(x), float(y)) for x, y in pts]
    edges = [(k, k + 1) for k in range(n - 1)]
    return RoadGraph(verts, edges)


def main() -> int:
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(2024)

    rasterize_cases = []
    backward_cases = []
    for _ in range(100):
        grid = random_grid(rng)
        params = random_params(rng)
        h, w = grid.height, grid.width
        mask = compose_soft_mask(grid, h, w, params)
        payload_params = {"tau_inv": params.tau_inv, "t_out": params.t_out,
                          "t_in": params.t_in}
        rasterize_cases.append({
            "grid": flat_grid(grid), "height": h, "width": w,
            "params": payload_params,
            "expected_values": [float(v) for v in mask.ravel()],
        })
        upstream = rng.standard_normal((h, w))
        grads = [0.0] * (4 * grid.rows * grid.cols)
        for (r, c, seg) in grid.i_cells():
            up = upstream[r * 8:(r + 1) * 8, c * 8:(c + 1) * 8]
            g = backward(seg, grid.rect(r, c), params, up)
            k = 4 * (r * grid.cols + c)
            grads[k:k + 4] = [g.d_ax, g.d_ay, g.d_bx, g.d_by]
        backward_cases.append({
            "grid": flat_grid(grid), "height": h, "width": w,
            "params": payload_params,
            "upstream": [float(v) for v in upstream.ravel()],
            "expected_gradients": grads,
        })

    scores_cases = []
    for _ in range(100):
        gt = random_graph(rng)
        # proposal: jittered copy of the same skeleton half the time,
        # otherwise an unrelated graph
        if rng.random() < 0.5:
            prop = RoadGraph(
                [Point(p.x + float(rng.uniform(-3, 3)),
                       p.y + float(rng.uniform(-3, 3)))
                 for p in gt.vertices], list(gt.edges))
        else:
            prop = random_graph(rng)
        a = apls(gt, prop)
        t = topo(gt, prop)
        scores_cases.append({
            "gt": flat_graph(gt), "prop": flat_graph(prop),
            "expected": {"apls": a, "topo_precision": t.precision,
                         "topo_recall": t.recall, "topo_f1": t.f1},
        })

    reconstruct_cases = []
    for _ in range(20):
        grid = random_grid(rng)
        g = reconstruct_graph(grid)
        reconstruct_cases.append({
            "grid": flat_grid(grid),
            "expected": flat_graph(g),
        })

    for name, cases in (("rasterize", rasterize_cases),
                        ("backward", backward_cases),
                        ("scores", scores_cases),
                        ("reconstruct", reconstruct_cases)):
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(cases))
        print(f"wrote {path} ({len(cases)} cases)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
