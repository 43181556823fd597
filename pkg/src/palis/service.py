"""HTTP service exposing the numerical core over flat buffers.

The payloads mirror the tensor layout a training loop would hold: patch
classes as a flat row-major integer buffer and segments as four numbers per
cell.  All endpoints are stateless; buffers are copied in and out.
"""

from __future__ import annotations

from typing import List, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field, model_validator

from . import __version__
from .codec import PatchClass, PatchGrid
from .formats import FORMAT_VERSION
from .geometry import LineSegment, Point
from .graph import RoadGraph
from .metrics import AplsParams, TopoParams, apls, topo
from .raster import RasterParams, backward, compose_soft_mask
from .reconstruct import ReconstructParams, reconstruct_graph

CLASS_CODES = {0: PatchClass.BACKGROUND, 1: PatchClass.I,
               2: PatchClass.X, 3: PatchClass.T}


class RasterParamsModel(BaseModel):
    tau_inv: float = 8.0
    t_out: float = 10.0
    t_in: float = 1.0

    def to_params(self) -> RasterParams:
        try:
            return RasterParams(self.tau_inv, self.t_out, self.t_in)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc


class FlatGridModel(BaseModel):
    patch_size: int = Field(gt=0)
    rows: int = Field(gt=0)
    cols: int = Field(gt=0)
    classes: List[int]
    segments: List[float]

    @model_validator(mode="after")
    def _check_buffers(self):
        n = self.rows * self.cols
        if len(self.classes) != n:
            raise ValueError(f"classes buffer has {len(self.classes)} entries, "
                             f"expected {n}")
        if len(self.segments) != 4 * n:
            raise ValueError(f"segments buffer has {len(self.segments)} entries,"
                             f" expected {4 * n}")
        bad = [c for c in self.classes if c not in CLASS_CODES]
        if bad:
            raise ValueError(f"unknown class codes {sorted(set(bad))}")
        return self

    def to_grid(self) -> PatchGrid:
        grid = PatchGrid(self.patch_size, self.rows, self.cols)
        for k, code in enumerate(self.classes):
            cls = CLASS_CODES[code]
            if cls is PatchClass.BACKGROUND:
                continue
            r, c = divmod(k, self.cols)
            seg = None
            if cls is PatchClass.I:
                x1, y1, x2, y2 = self.segments[4 * k:4 * k + 4]
                seg = LineSegment(Point(x1, y1), Point(x2, y2))
            try:
                grid.set_cell(r, c, cls, seg)
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        return grid


class GraphModel(BaseModel):
    nodes: List[float] = Field(default_factory=list,
                               description="flat [x0, y0, x1, y1, ...]")
    edges: List[int] = Field(default_factory=list,
                             description="flat [i0, j0, i1, j1, ...]")

    @model_validator(mode="after")
    def _check_buffers(self):
        if len(self.nodes) % 2:
            raise ValueError("nodes buffer must hold x,y pairs")
        if len(self.edges) % 2:
            raise ValueError("edges buffer must hold index pairs")
        return self

    def to_graph(self) -> RoadGraph:
        vertices = [Point(self.nodes[2 * k], self.nodes[2 * k + 1])
                    for k in range(len(self.nodes) // 2)]
        edges = [(self.edges[2 * k], self.edges[2 * k + 1])
                 for k in range(len(self.edges) // 2)]
        g = RoadGraph(vertices, edges)
        try:
            g.validate()
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return g

    @classmethod
    def from_graph(cls, g: RoadGraph) -> "GraphModel":
        nodes: List[float] = []
        for p in g.vertices:
            nodes.extend((p.x, p.y))
        edges: List[int] = []
        for i, j in g.edges:
            edges.extend((i, j))
        return cls(nodes=nodes, edges=edges)


class RasterizeRequest(BaseModel):
    grid: FlatGridModel
    height: int = Field(gt=0)
    width: int = Field(gt=0)
    params: RasterParamsModel = Field(default_factory=RasterParamsModel)


class RasterizeResponse(BaseModel):
    height: int
    width: int
    values: List[float]


class BackwardRequest(RasterizeRequest):
    upstream: List[float]


class BackwardResponse(BaseModel):
    gradients: List[float] = Field(description="4 per cell: d_ax d_ay d_bx d_by")


class ReconstructParamsModel(BaseModel):
    tau_d: float = 2.0
    tau_a: float = 15.0
    neighbor_radius: int = 1

    def to_params(self) -> ReconstructParams:
        try:
            return ReconstructParams(self.tau_d, self.tau_a,
                                     self.neighbor_radius)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc


class ReconstructRequest(BaseModel):
    grid: FlatGridModel
    params: ReconstructParamsModel = Field(default_factory=ReconstructParamsModel)


class AplsParamsModel(BaseModel):
    control_point_spacing: float = 16.0
    snap_radius: float = 8.0


class TopoParamsModel(BaseModel):
    seed_interval: float = 16.0
    match_radius: float = 8.0
    propagation_radius: float = 300.0
    marble_interval: float = 5.0


class ScoresRequest(BaseModel):
    gt: GraphModel
    prop: GraphModel
    apls_params: AplsParamsModel = Field(default_factory=AplsParamsModel)
    topo_params: TopoParamsModel = Field(default_factory=TopoParamsModel)


class ScoresResponse(BaseModel):
    apls: float
    topo_precision: float
    topo_recall: float
    topo_f1: float


app = FastAPI(title="palis", version=__version__)


@app.get("/health")
def health():
    return {"status": "ok"}


@app.get("/version")
def version():
    return {"service": __version__, "format": FORMAT_VERSION}


@app.post("/rasterize", response_model=RasterizeResponse)
def rasterize(req: RasterizeRequest) -> RasterizeResponse:
    grid = req.grid.to_grid()
    try:
        mask = compose_soft_mask(grid, req.height, req.width, req.params.to_params())
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return RasterizeResponse(height=req.height, width=req.width,
                             values=[float(v) for v in mask.ravel()])


@app.post("/backward", response_model=BackwardResponse)
def backward_pass(req: BackwardRequest) -> BackwardResponse:
    import numpy as np

    grid = req.grid.to_grid()
    if len(req.upstream) != req.height * req.width:
        raise HTTPException(
            status_code=422,
            detail=f"upstream buffer has {len(req.upstream)} entries, "
                   f"expected {req.height * req.width}")
    if grid.height != req.height or grid.width != req.width:
        raise HTTPException(
            status_code=422,
            detail=f"grid covers {grid.width}x{grid.height}, "
                   f"requested {req.width}x{req.height}")
    upstream = np.array(req.upstream).reshape(req.height, req.width)
    params = req.params.to_params()
    p = grid.patch_size
    out = [0.0] * (4 * grid.rows * grid.cols)
    for (r, c, seg) in grid.i_cells():
        up = upstream[r * p:(r + 1) * p, c * p:(c + 1) * p]
        grad = backward(seg, grid.rect(r, c), params, up)
        k = 4 * (r * grid.cols + c)
        out[k:k + 4] = [grad.d_ax, grad.d_ay, grad.d_bx, grad.d_by]
    return BackwardResponse(gradients=out)


@app.post("/reconstruct", response_model=GraphModel)
def reconstruct(req: ReconstructRequest) -> GraphModel:
    grid = req.grid.to_grid()
    try:
        graph = reconstruct_graph(grid, req.params.to_params())
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return GraphModel.from_graph(graph)


@app.post("/scores", response_model=ScoresResponse)
def scores(req: ScoresRequest) -> ScoresResponse:
    gt = req.gt.to_graph()
    prop = req.prop.to_graph()
    a = AplsParamsModel.model_dump(req.apls_params)
    t = TopoParamsModel.model_dump(req.topo_params)
    try:
        apls_value = apls(gt, prop, AplsParams(**a))
        topo_score = topo(gt, prop, TopoParams(**t))
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return ScoresResponse(apls=apls_value, topo_precision=topo_score.precision,
                          topo_recall=topo_score.recall, topo_f1=topo_score.f1)
