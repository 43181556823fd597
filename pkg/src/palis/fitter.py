"""Direct optimization of per-patch segment endpoints.

Supports three supervision signals: a target centerline mask driven through
the soft rasterizer and Dice loss, and L1 regression against per-cell vector
labels in sorted (canonical endpoint order) or unsorted (arbitrary
orientation) form.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .codec import PatchGrid
from .geometry import LineSegment, PatchRect, Point
from .raster import (RasterParams, backward, compose_soft_mask, dice_backward,
                     dice_loss)

# Slack allowed before a mask-fit step counts as a loss increase and the
# step length is halved.
MONOTONE_SLACK = 1e-9


class Optimizer(enum.Enum):
    GRADIENT_DESCENT = "gd"
    MOMENTUM = "momentum"


class SupervisionMode(enum.Enum):
    UNSORTED = "unsorted"
    SORTED = "sorted"


@dataclass(frozen=True)
class FitConfig:
    learning_rate: float = 0.05  # step length in px per iteration
    max_iters: int = 500
    tol: float = 0.0
    optimizer: Optimizer = Optimizer.GRADIENT_DESCENT
    momentum: float = 0.9
    raster: RasterParams = field(default_factory=RasterParams)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.tol < 0:
            raise ValueError("tol must be >= 0")


@dataclass
class FitReport:
    loss_trace: List[float]
    initial_loss: float
    final_loss: float
    iterations: int
    endpoint_errors: Optional[Dict[Tuple[int, int], float]] = None

    @property
    def mean_endpoint_error(self) -> Optional[float]:
        if not self.endpoint_errors:
            return None
        return sum(self.endpoint_errors.values()) / len(self.endpoint_errors)


def canonicalize_segment(l: LineSegment) -> LineSegment:
    """Order endpoints so the first has smaller x (ties: smaller y)."""
    if (l.b.x, l.b.y) < (l.a.x, l.a.y):
        return l.swapped()
    return l


def l1_vector_loss(pred: LineSegment, label: LineSegment,
                   sorted_mode: bool) -> float:
    """Sum of absolute coordinate differences between two segments."""
    if sorted_mode:
        pred = canonicalize_segment(pred)
        label = canonicalize_segment(label)
    return (abs(pred.a.x - label.a.x) + abs(pred.a.y - label.a.y)
            + abs(pred.b.x - label.b.x) + abs(pred.b.y - label.b.y))


def segment_endpoint_error(l: LineSegment, ref: LineSegment) -> float:
    """Mean endpoint distance under the better of the two endpoint pairings."""
    direct = 0.5 * (l.a.distance_to(ref.a) + l.b.distance_to(ref.b))
    crossed = 0.5 * (l.a.distance_to(ref.b) + l.b.distance_to(ref.a))
    return min(direct, crossed)


def default_init_segment(rect: PatchRect) -> LineSegment:
    """Cell-centered horizontal segment of length p/2."""
    c = rect.center()
    h = rect.size / 4.0
    return LineSegment(Point(c.x - h, c.y), Point(c.x + h, c.y))


def _clamp_vec(vec: np.ndarray, rect: PatchRect) -> np.ndarray:
    out = vec.copy()
    out[0] = min(max(out[0], rect.x0), rect.x1)
    out[2] = min(max(out[2], rect.x0), rect.x1)
    out[1] = min(max(out[1], rect.y0), rect.y1)
    out[3] = min(max(out[3], rect.y0), rect.y1)
    return out


def _project_grad(g: np.ndarray, vec: np.ndarray,
                  rect: PatchRect) -> np.ndarray:
    """Zero gradient components blocked by the cell box so the descent
    direction stays feasible for endpoints sitting on a cell border."""
    lo = np.array([rect.x0, rect.y0, rect.x0, rect.y0])
    hi = np.array([rect.x1, rect.y1, rect.x1, rect.y1])
    out = g.copy()
    out[(vec <= lo) & (g > 0)] = 0.0
    out[(vec >= hi) & (g < 0)] = 0.0
    return out


def _seg_to_vec(seg: LineSegment) -> np.ndarray:
    return np.array([seg.a.x, seg.a.y, seg.b.x, seg.b.y])


def _vec_to_seg(vec: np.ndarray) -> LineSegment:
    return LineSegment(Point(float(vec[0]), float(vec[1])),
                       Point(float(vec[2]), float(vec[3])))


def _grid_with_segments(grid: PatchGrid,
                        vecs: Dict[Tuple[int, int], np.ndarray]) -> PatchGrid:
    out = PatchGrid(grid.patch_size, grid.rows, grid.cols, dict(grid.cells))
    for (r, c), vec in vecs.items():
        out.cells[(r, c)] = (grid.cells[(r, c)][0], _vec_to_seg(vec))
    return out


def _endpoint_errors(vecs, reference: PatchGrid):
    errors = {}
    for (r, c), vec in vecs.items():
        ref = reference.segment_at(r, c)
        if ref is not None:
            errors[(r, c)] = segment_endpoint_error(_vec_to_seg(vec), ref)
    return errors


def fit_palis(grid: PatchGrid, target: np.ndarray, cfg: FitConfig,
              reference: Optional[PatchGrid] = None
              ) -> Tuple[PatchGrid, FitReport]:
    """Optimize I-cell endpoints against a target centerline mask.

    Projected descent: after every step each endpoint is clamped back into
    its cell footprint.  The step is the configured length along the
    per-cell unit gradient direction; with plain gradient descent the length
    is halved whenever a step would increase the loss.
    """
    h, w = grid.height, grid.width
    if target.shape != (h, w):
        raise ValueError(f"target shape {target.shape}, grid covers {(h, w)}")
    cells = grid.i_cells()
    if not cells:
        loss = dice_loss(np.zeros((h, w)), target)
        return grid, FitReport([], loss, loss, 0,
                               _endpoint_errors({}, reference) if reference else None)

    p = grid.patch_size
    vecs = {(r, c): _seg_to_vec(seg) for (r, c, seg) in cells}
    rects = {(r, c): grid.rect(r, c) for (r, c, _) in cells}
    vel = {key: np.zeros(4) for key in vecs}
    params = cfg.raster

    def evaluate(current):
        soft = compose_soft_mask(_grid_with_segments(grid, current), h, w, params)
        return soft, dice_loss(soft, target)

    soft, loss = evaluate(vecs)
    initial_loss = loss
    lr = cfg.learning_rate
    trace: List[float] = []

    for _ in range(cfg.max_iters):
        pixel_grad = dice_backward(soft, target)
        grads = {}
        for (r, c) in vecs:
            rect = rects[(r, c)]
            up = pixel_grad[r * p:(r + 1) * p, c * p:(c + 1) * p]
            grads[(r, c)] = backward(_vec_to_seg(vecs[(r, c)]), rect, params,
                                     up).as_array()

        def step(length):
            new = {}
            for key, g in grads.items():
                if cfg.optimizer is Optimizer.MOMENTUM:
                    vel[key] = cfg.momentum * vel[key] - length * g
                    cand = vecs[key] + vel[key]
                else:
                    g = _project_grad(g, vecs[key], rects[key])
                    norm = float(np.linalg.norm(g))
                    direction = g / norm if norm > 1e-12 else np.zeros(4)
                    cand = vecs[key] - length * direction
                new[key] = _clamp_vec(cand, rects[key])
            return new

        new_vecs = step(lr)
        new_soft, new_loss = evaluate(new_vecs)
        if cfg.optimizer is Optimizer.GRADIENT_DESCENT:
            while new_loss > loss + MONOTONE_SLACK and lr > 1e-9:
                lr *= 0.5
                new_vecs = step(lr)
                new_soft, new_loss = evaluate(new_vecs)
            if new_loss > loss + MONOTONE_SLACK:
                trace.append(loss)
                break
            # recover the step length after a successful move so a single
            # hard iteration does not freeze progress for the rest of the fit
            lr = min(cfg.learning_rate, lr * 2.0)
        prev = loss
        vecs, soft, loss = new_vecs, new_soft, new_loss
        trace.append(loss)
        if abs(prev - loss) < cfg.tol:
            break

    fitted = _grid_with_segments(grid, vecs)
    errors = _endpoint_errors(vecs, reference) if reference else None
    return fitted, FitReport(trace, initial_loss, trace[-1] if trace else loss,
                             len(trace), errors)


def fit_vector_supervised(grid: PatchGrid, labels: PatchGrid,
                          mode: SupervisionMode, cfg: FitConfig
                          ) -> Tuple[PatchGrid, FitReport]:
    """Optimize I-cell endpoints under an L1 loss against per-cell labels.

    Coordinate-wise sign descent with the step clipped to the remaining
    difference (the L1 subgradient at zero is taken as zero).  In unsorted
    mode every label's orientation is re-randomized each iteration; in sorted
    mode both sides are canonicalized before the comparison.
    """
    cells = grid.i_cells()
    for (r, c, _) in cells:
        if labels.segment_at(r, c) is None:
            raise ValueError(f"label grid lacks a segment for cell ({r}, {c})")

    rng = np.random.default_rng(cfg.seed)
    vecs = {(r, c): _seg_to_vec(seg) for (r, c, seg) in cells}
    rects = {(r, c): grid.rect(r, c) for (r, c, _) in cells}
    label_vecs = {(r, c): _seg_to_vec(labels.segment_at(r, c))
                  for (r, c, _) in cells}

    def total_loss(current):
        out = 0.0
        for key, vec in current.items():
            out += l1_vector_loss(_vec_to_seg(vec), _vec_to_seg(label_vecs[key]),
                                  mode is SupervisionMode.SORTED)
        return out

    initial_loss = total_loss(vecs)
    loss = initial_loss
    trace: List[float] = []

    for _ in range(cfg.max_iters):
        for key in vecs:
            vec = vecs[key]
            label = label_vecs[key]
            if mode is SupervisionMode.SORTED:
                pv = _seg_to_vec(canonicalize_segment(_vec_to_seg(vec)))
                swap_pred = not np.array_equal(pv, vec)
                lv = _seg_to_vec(canonicalize_segment(_vec_to_seg(label)))
            else:
                pv = vec
                swap_pred = False
                lv = label if rng.random() < 0.5 else \
                    np.concatenate([label[2:], label[:2]])
            diff = pv - lv
            delta = np.sign(diff) * np.minimum(cfg.learning_rate, np.abs(diff))
            pv = pv - delta
            if swap_pred:
                pv = np.concatenate([pv[2:], pv[:2]])
            vecs[key] = _clamp_vec(pv, rects[key])
        prev = loss
        loss = total_loss(vecs)
        trace.append(loss)
        if abs(prev - loss) < cfg.tol:
            break

    fitted = _grid_with_segments(grid, vecs)
    errors = _endpoint_errors(vecs, labels)
    return fitted, FitReport(trace, initial_loss,
                             trace[-1] if trace else initial_loss,
                             len(trace), errors)


def perturbed_grid(grid: PatchGrid, amplitude: float, seed: int) -> PatchGrid:
    """Copy of grid with every I-cell endpoint coordinate shifted by a
    uniform offset in [-amplitude, amplitude], clamped to the cell."""
    rng = np.random.default_rng(seed)
    vecs = {}
    for (r, c, seg) in grid.i_cells():
        vec = _seg_to_vec(seg) + rng.uniform(-amplitude, amplitude, 4)
        vecs[(r, c)] = _clamp_vec(vec, grid.rect(r, c))
    return _grid_with_segments(grid, vecs)
