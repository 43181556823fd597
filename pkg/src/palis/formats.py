"""File formats: graph and grid JSON documents, a binary float raster, an
8-bit grey-map mask, and deterministic SVG overlays.

All loaders re-validate type invariants and raise a distinct error kind for
malformed headers, out-of-range indices and truncated payloads.
"""

from __future__ import annotations

import base64
import json
import struct
import zlib
from typing import List, Optional

import numpy as np

from .codec import PatchClass, PatchGrid
from .geometry import LineSegment, Point
from .graph import RoadGraph

FORMAT_VERSION = 1
FLOAT_RASTER_MAGIC = b"PLSF"


class FormatError(Exception):
    """Base class for serialization errors."""


class MalformedHeaderError(FormatError):
    """Bad magic bytes, missing fields or a malformed document header."""


class OutOfRangeIndexError(FormatError):
    """An index or coordinate falls outside its valid range."""


class TruncatedPayloadError(FormatError):
    """The payload is shorter than the header promises."""


class InvariantViolationError(FormatError):
    """The document parses but violates a type invariant."""


def _round6(x: float) -> float:
    return round(float(x), 6)


# ---------------------------------------------------------------- graph files

def serialize_graph(g: RoadGraph, width: int, height: int) -> str:
    g.validate()
    doc = {
        "version": FORMAT_VERSION,
        "width": width,
        "height": height,
        "nodes": [[_round6(p.x), _round6(p.y)] for p in g.vertices],
        "edges": [[int(i), int(j)] for i, j in g.edges],
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_graph(text: str):
    """Returns (RoadGraph, width, height)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedHeaderError(f"not a valid JSON document: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedHeaderError("top level must be an object")
    for key in ("version", "width", "height", "nodes", "edges"):
        if key not in doc:
            raise MalformedHeaderError(f"missing field '{key}'")
    if doc["version"] != FORMAT_VERSION:
        raise MalformedHeaderError(f"unsupported version {doc['version']}")
    width, height = doc["width"], doc["height"]
    if not (isinstance(width, int) and isinstance(height, int)
            and width > 0 and height > 0):
        raise MalformedHeaderError("width/height must be positive integers")
    vertices = []
    for k, node in enumerate(doc["nodes"]):
        if not (isinstance(node, list) and len(node) == 2):
            raise MalformedHeaderError(f"node {k} must be an [x, y] pair")
        try:
            vertices.append(Point(float(node[0]), float(node[1])))
        except (TypeError, ValueError) as exc:
            raise InvariantViolationError(f"node {k}: {exc}") from exc
    edges = []
    for k, edge in enumerate(doc["edges"]):
        if not (isinstance(edge, list) and len(edge) == 2
                and all(isinstance(v, int) for v in edge)):
            raise MalformedHeaderError(f"edge {k} must be an [i, j] index pair")
        i, j = edge
        if not (0 <= i < len(vertices) and 0 <= j < len(vertices)):
            raise OutOfRangeIndexError(f"edge {k} references a missing node")
        edges.append((i, j))
    g = RoadGraph(vertices, edges)
    try:
        g.validate()
    except ValueError as exc:
        raise InvariantViolationError(str(exc)) from exc
    return g, width, height


def write_graph(path, g: RoadGraph, width: int, height: int) -> None:
    with open(path, "w") as f:
        f.write(serialize_graph(g, width, height))


def read_graph(path):
    with open(path) as f:
        return parse_graph(f.read())


# ----------------------------------------------------------------- grid files

_CLASS_NAMES = {PatchClass.I: "I", PatchClass.X: "X", PatchClass.T: "T"}
_CLASS_BY_NAME = {v: k for k, v in _CLASS_NAMES.items()}


def serialize_grid(grid: PatchGrid) -> str:
    grid.validate()
    cells = []
    for (r, c) in sorted(grid.cells):
        cls, seg = grid.cells[(r, c)]
        cell = {"row": r, "col": c, "class": _CLASS_NAMES[cls]}
        if seg is not None:
            cell["segment"] = [_round6(seg.a.x), _round6(seg.a.y),
                               _round6(seg.b.x), _round6(seg.b.y)]
        cells.append(cell)
    doc = {
        "version": FORMAT_VERSION,
        "patch_size": grid.patch_size,
        "width": grid.width,
        "height": grid.height,
        "cells": cells,
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_grid(text: str) -> PatchGrid:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedHeaderError(f"not a valid JSON document: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedHeaderError("top level must be an object")
    for key in ("version", "patch_size", "width", "height", "cells"):
        if key not in doc:
            raise MalformedHeaderError(f"missing field '{key}'")
    if doc["version"] != FORMAT_VERSION:
        raise MalformedHeaderError(f"unsupported version {doc['version']}")
    p, width, height = doc["patch_size"], doc["width"], doc["height"]
    if not (isinstance(p, int) and p > 0):
        raise MalformedHeaderError("patch_size must be a positive integer")
    if width % p or height % p:
        raise InvariantViolationError(
            f"patch size {p} does not divide {width}x{height}")
    grid = PatchGrid(p, height // p, width // p)
    for k, cell in enumerate(doc["cells"]):
        if not isinstance(cell, dict):
            raise MalformedHeaderError(f"cell {k} must be an object")
        try:
            r, c, name = cell["row"], cell["col"], cell["class"]
        except KeyError as exc:
            raise MalformedHeaderError(f"cell {k}: missing field {exc}") from exc
        if name not in _CLASS_BY_NAME:
            raise MalformedHeaderError(f"cell {k}: unknown class '{name}'")
        cls = _CLASS_BY_NAME[name]
        if not (0 <= r < grid.rows and 0 <= c < grid.cols):
            raise OutOfRangeIndexError(f"cell {k}: ({r}, {c}) outside the grid")
        seg = None
        if "segment" in cell:
            coords = cell["segment"]
            if not (isinstance(coords, list) and len(coords) == 4):
                raise MalformedHeaderError(
                    f"cell {k}: segment must be [x1, y1, x2, y2]")
            seg = LineSegment(Point(float(coords[0]), float(coords[1])),
                              Point(float(coords[2]), float(coords[3])))
        try:
            grid.set_cell(r, c, cls, seg)
        except ValueError as exc:
            raise InvariantViolationError(f"cell {k}: {exc}") from exc
    return grid


def write_grid(path, grid: PatchGrid) -> None:
    with open(path, "w") as f:
        f.write(serialize_grid(grid))


def read_grid(path) -> PatchGrid:
    with open(path) as f:
        return parse_grid(f.read())


# -------------------------------------------------------------- float rasters

def serialize_float_raster(values: np.ndarray) -> bytes:
    if values.ndim != 2:
        raise ValueError("raster must be 2-dimensional")
    h, w = values.shape
    header = FLOAT_RASTER_MAGIC + struct.pack("<III", w, h, 0)
    return header + values.astype("<f4").tobytes()


def parse_float_raster(data: bytes) -> np.ndarray:
    if len(data) < 16:
        raise TruncatedPayloadError("shorter than the 16-byte header")
    if data[:4] != FLOAT_RASTER_MAGIC:
        raise MalformedHeaderError(
            f"bad magic {data[:4]!r}, expected {FLOAT_RASTER_MAGIC!r}")
    w, h, reserved = struct.unpack("<III", data[4:16])
    if reserved != 0:
        raise MalformedHeaderError("reserved header word must be zero")
    expected = 16 + 4 * w * h
    if len(data) != expected:
        raise TruncatedPayloadError(
            f"payload is {len(data)} bytes, expected {expected}")
    return np.frombuffer(data[16:], dtype="<f4").reshape(h, w).astype(np.float64)


def write_float_raster(path, values: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(serialize_float_raster(values))


def read_float_raster(path) -> np.ndarray:
    with open(path, "rb") as f:
        return parse_float_raster(f.read())


# ----------------------------------------------------------------- byte masks

def serialize_byte_mask(values: np.ndarray) -> bytes:
    """Binary grey-map ('P5') export; float inputs are scaled by 255."""
    if values.ndim != 2:
        raise ValueError("mask must be 2-dimensional")
    if values.dtype != np.uint8:
        values = np.clip(np.rint(values * 255.0), 0, 255).astype(np.uint8)
    h, w = values.shape
    return f"P5\n{w} {h}\n255\n".encode() + values.tobytes()


def parse_byte_mask(data: bytes) -> np.ndarray:
    if not data.startswith(b"P5"):
        raise MalformedHeaderError("bad magic, expected 'P5'")
    fields: List[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MalformedHeaderError("incomplete grey-map header")
        fields.append(data[start:pos])
    try:
        w, h, maxval = (int(f) for f in fields)
    except ValueError as exc:
        raise MalformedHeaderError(f"non-numeric header field: {exc}") from exc
    if maxval != 255:
        raise MalformedHeaderError(f"max value must be 255, got {maxval}")
    pos += 1  # single whitespace byte after the max-value line
    payload = data[pos:]
    if len(payload) != w * h:
        raise TruncatedPayloadError(
            f"payload is {len(payload)} bytes, expected {w * h}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w)


def write_byte_mask(path, values: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(serialize_byte_mask(values))


def read_byte_mask(path) -> np.ndarray:
    with open(path, "rb") as f:
        return parse_byte_mask(f.read())


# ------------------------------------------------------------------------ SVG

_CLASS_TINTS = {PatchClass.I: "#4e9a06", PatchClass.X: "#cc0000",
                PatchClass.T: "#3465a4"}


def _png_gray(values: np.ndarray) -> bytes:
    """Minimal 8-bit grayscale PNG encoder (deterministic output)."""
    h, w = values.shape
    raw = b"".join(b"\x00" + values[i].tobytes() for i in range(h))

    def chunk(tag: bytes, body: bytes) -> bytes:
        return (struct.pack(">I", len(body)) + tag + body
                + struct.pack(">I", zlib.crc32(tag + body)))

    ihdr = struct.pack(">IIBBBBB", w, h, 8, 0, 0, 0, 0)
    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", ihdr)
            + chunk(b"IDAT", zlib.compress(raw, 6)) + chunk(b"IEND", b""))


def render_svg(g: RoadGraph, width: int, height: int,
               grid: Optional[PatchGrid] = None,
               mask: Optional[np.ndarray] = None) -> str:
    """Deterministic SVG overlay: edges as orange lines, junction vertices
    (degree >= 3) as red dots, optional patch tinting and soft-mask underlay."""
    g.validate()
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#1a1a1a"/>',
    ]
    if mask is not None:
        if mask.shape != (height, width):
            raise ValueError(f"mask shape {mask.shape}, canvas {(height, width)}")
        png = _png_gray(np.clip(np.rint(mask * 255.0), 0, 255).astype(np.uint8))
        uri = base64.b64encode(png).decode()
        parts.append(f'<image width="{width}" height="{height}" opacity="0.6" '
                     f'href="data:image/png;base64,{uri}"/>')
    if grid is not None:
        p = grid.patch_size
        for (r, c) in sorted(grid.cells):
            cls = grid.class_at(r, c)
            parts.append(f'<rect x="{c * p}" y="{r * p}" width="{p}" '
                         f'height="{p}" fill="{_CLASS_TINTS[cls]}" '
                         f'fill-opacity="0.25"/>')
    for i, j in g.edges:
        a, b = g.vertices[i], g.vertices[j]
        parts.append(f'<line x1="{a.x:.2f}" y1="{a.y:.2f}" x2="{b.x:.2f}" '
                     f'y2="{b.y:.2f}" stroke="#f57900" stroke-width="1.2"/>')
    deg = g.degrees()
    for v, p in enumerate(g.vertices):
        if deg[v] >= 3:
            parts.append(f'<circle cx="{p.x:.2f}" cy="{p.y:.2f}" r="2" '
                         f'fill="#cc0000"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
