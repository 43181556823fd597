"""Desk-scale fitting studies: paired trials comparing supervision signals
and rasterizer settings on synthetic single-road scenes."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, Tuple

import numpy as np

from .codec import encode_graph
from .fitter import (FitConfig, SupervisionMode, fit_palis,
                     fit_vector_supervised, perturbed_grid)
from .geometry import Point
from .graph import RoadGraph
from .raster import RasterParams, compose_soft_mask
from .synth import _off_border


def straight_road_scene(seed: int, size: int = 64, patch_size: int = 8):
    """One straight horizontal road at a random off-border height."""
    rng = np.random.default_rng(seed)
    y = _off_border(float(rng.uniform(8, size - 8)), patch_size)
    g = RoadGraph([Point(0, y), Point(size, y)], [(0, 1)])
    grid = encode_graph(g, size, size, patch_size)
    return g, grid, size


@dataclass
class PairedTrialResult:
    errors_a: List[float]
    errors_b: List[float]

    @property
    def mean_a(self) -> float:
        return float(np.mean(self.errors_a))

    @property
    def mean_b(self) -> float:
        return float(np.mean(self.errors_b))


def projection_factor_study(n_trials: int = 50, seed: int = 0,
                            perturbation: float = 1.5,
                            cfg: FitConfig = FitConfig(max_iters=400, tol=1e-12)
                            ) -> PairedTrialResult:
    """Paired mask-supervised fits with and without the projection factor.

    Each arm generates its target with its own rasterizer settings, so the
    comparison isolates what the soft mask can pin down.  Returns per-trial
    mean endpoint errors for t_out=10 (a) and t_out=1 (b).
    """
    with_proj = replace(cfg, raster=RasterParams(t_out=10.0))
    without_proj = replace(cfg, raster=RasterParams(t_out=1.0))
    errors_a, errors_b = [], []
    for trial in range(n_trials):
        _, grid, size = straight_road_scene(seed * 1000 + trial)
        init = perturbed_grid(grid, perturbation, seed * 1000 + trial + 1)
        for arm_cfg, sink in ((with_proj, errors_a), (without_proj, errors_b)):
            target = compose_soft_mask(grid, size, size, arm_cfg.raster)
            _, report = fit_palis(init, target, arm_cfg, reference=grid)
            sink.append(report.mean_endpoint_error)
    return PairedTrialResult(errors_a, errors_b)


def supervision_study(n_trials: int = 100, seed: int = 0,
                      perturbation: float = 2.0) -> Dict[str, List[float]]:
    """Paired trials of unsorted / sorted vector labels vs mask supervision.

    Returns per-trial mean endpoint errors keyed by supervision name.
    """
    vec_cfg = FitConfig(learning_rate=0.05, max_iters=200, tol=0.0)
    mask_cfg = FitConfig(learning_rate=0.05, max_iters=400, tol=1e-12,
                         raster=RasterParams())
    out: Dict[str, List[float]] = {"unsorted": [], "sorted": [], "mask": []}
    for trial in range(n_trials):
        _, grid, size = straight_road_scene(seed * 1000 + trial)
        init = perturbed_grid(grid, perturbation, seed * 1000 + trial + 1)
        for mode, key in ((SupervisionMode.UNSORTED, "unsorted"),
                          (SupervisionMode.SORTED, "sorted")):
            _, report = fit_vector_supervised(
                init, grid, mode, replace(vec_cfg, seed=trial))
            out[key].append(report.mean_endpoint_error)
        target = compose_soft_mask(grid, size, size, mask_cfg.raster)
        _, report = fit_palis(init, target, mask_cfg, reference=grid)
        out["mask"].append(report.mean_endpoint_error)
    return out
