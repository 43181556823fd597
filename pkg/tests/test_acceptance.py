"""End-to-end acceptance checks.

Each test prints one PASS/FAIL line with its headline numbers so the whole
gate can be read off a single pytest -s run.  Tolerances are pinned in the
assertions.
"""

import math
import time

import numpy as np
import pytest

from palis.codec import PatchClass, PatchGrid, encode_graph
from palis.experiments import projection_factor_study, supervision_study
from palis.formats import (FormatError, InvariantViolationError,
                           MalformedHeaderError, OutOfRangeIndexError,
                           TruncatedPayloadError, parse_float_raster,
                           parse_graph, parse_grid, serialize_float_raster,
                           serialize_graph, serialize_grid)
from palis.geometry import LineSegment, PatchRect, Point
from palis.graph import RoadGraph
from palis.metrics import apls, topo
from palis.raster import (RasterParams, backward, rasterize_patch)
from palis.raster import _patch_fields
from palis.reconstruct import ReconstructParams, reconstruct_graph
from palis.synth import make_scene


def _report(name, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")


def seg(ax, ay, bx, by):
    return LineSegment(Point(ax, ay), Point(bx, by))


RECT = PatchRect(0, 0, 8)


class TestGradientCorrectness:
    def test_analytic_matches_finite_differences(self):
        """1000 random configurations, relative error < 1e-4, under 10 s."""
        rng = np.random.default_rng(42)
        params = RasterParams()
        h = 1e-4
        start = time.perf_counter()
        checked = 0
        worst = 0.0
        while checked < 1000:
            a = rng.uniform(0.2, 7.8, 2)
            b = rng.uniform(0.2, 7.8, 2)
            l = seg(*a, *b)
            if l.length < 0.3:
                continue
            # exclude configurations with a pixel within 1e-3 of the
            # projection-factor switch, where the response is one-sided
            _, _, _, s, _ = _patch_fields(l, RECT, 8)
            margin = min(float(np.min(np.abs(s))),
                         float(np.min(np.abs(s - 1.0))))
            if margin < 1e-3:
                continue
            upstream = rng.standard_normal((8, 8))
            grad = backward(l, RECT, params, upstream).as_array()
            vec = np.array([l.a.x, l.a.y, l.b.x, l.b.y])
            fd = np.zeros(4)
            for k in range(4):
                vp, vm = vec.copy(), vec.copy()
                vp[k] += h
                vm[k] -= h
                up = float(np.sum(upstream * rasterize_patch(
                    seg(*vp), RECT, params)))
                dn = float(np.sum(upstream * rasterize_patch(
                    seg(*vm), RECT, params)))
                fd[k] = (up - dn) / (2 * h)
            scale = max(1.0, float(np.max(np.abs(fd))))
            rel = float(np.max(np.abs(grad - fd))) / scale
            worst = max(worst, rel)
            checked += 1
        elapsed = time.perf_counter() - start
        ok = worst < 1e-4 and elapsed < 10.0
        _report("gradient correctness", ok,
                f"1000 configs, worst relative error {worst:.2e}, "
                f"{elapsed:.1f} s")
        assert worst < 1e-4
        assert elapsed < 10.0

    def test_dice_chain_gradient(self):
        """Composed loss gradient (rasterize -> dice) also checks out."""
        from palis.raster import compose_soft_mask, dice_backward, dice_loss

        grid = PatchGrid(8, 1, 1)
        grid.set_cell(0, 0, PatchClass.I, seg(1.2, 3.3, 6.8, 4.7))
        params = RasterParams()
        target = np.zeros((8, 8))
        target[4, 1:7] = 1.0

        def loss_at(vec):
            g2 = PatchGrid(8, 1, 1)
            g2.set_cell(0, 0, PatchClass.I, seg(*vec))
            return dice_loss(compose_soft_mask(g2, 8, 8, params), target)

        soft = compose_soft_mask(grid, 8, 8, params)
        upstream = dice_backward(soft, target)
        grad = backward(grid.segment_at(0, 0), RECT, params,
                        upstream).as_array()
        vec = np.array([1.2, 3.3, 6.8, 4.7])
        h = 1e-5
        for k in range(4):
            vp, vm = vec.copy(), vec.copy()
            vp[k] += h
            vm[k] -= h
            fd = (loss_at(vp) - loss_at(vm)) / (2 * h)
            assert grad[k] == pytest.approx(fd, abs=1e-6)


class TestRasterizerSpotValues:
    def test_three_pinned_values(self):
        """exp(0), exp(-0.5), exp(-5) at the documented configurations."""
        params = RasterParams()  # tau_inv=8, t_out=10, t_in=1
        on = rasterize_patch(seg(0.5, 3.5, 7.5, 3.5), RECT, params)[3, 2]
        lateral = rasterize_patch(seg(0.5, 3.5, 7.5, 3.5), RECT, params)[5, 2]
        beyond = rasterize_patch(seg(2.5, 3.5, 3.5, 3.5), RECT, params)[3, 5]
        vals = (on, lateral, beyond)
        expected = (math.exp(0.0), math.exp(-4.0 * 1.0 / 8.0),
                    math.exp(-4.0 * 10.0 / 8.0))
        ok = all(abs(v - e) < 1e-9 for v, e in zip(vals, expected))
        _report("rasterizer spot values", ok,
                f"on-segment {on:.9f}, d=2 t=1 {lateral:.9f}, "
                f"d=2 t=10 {beyond:.9f}")
        assert on == pytest.approx(1.0, abs=1e-9)
        assert lateral == pytest.approx(0.6065306597126334, abs=1e-9)
        assert beyond == pytest.approx(0.006737946999085467, abs=1e-9)


class TestProjectionFactorProperty:
    def test_fits_degrade_without_projection_factor(self):
        """50 paired fits: t_out=1 error strictly above t_out=10, < 2 min."""
        start = time.perf_counter()
        result = projection_factor_study(n_trials=50, seed=0)
        elapsed = time.perf_counter() - start
        ok = result.mean_a < result.mean_b and elapsed < 120.0
        _report("projection factor", ok,
                f"mean error t_out=10: {result.mean_a:.3f} px, "
                f"t_out=1: {result.mean_b:.3f} px, {elapsed:.0f} s")
        assert result.mean_a < result.mean_b
        assert elapsed < 120.0


class TestSupervisionOrdering:
    def test_unsorted_worst_mask_near_sorted(self):
        """100 paired trials: unsorted > sorted, mask within 1 px, < 5 min."""
        start = time.perf_counter()
        errors = supervision_study(n_trials=100, seed=0)
        elapsed = time.perf_counter() - start
        unsorted = float(np.mean(errors["unsorted"]))
        sorted_ = float(np.mean(errors["sorted"]))
        mask = float(np.mean(errors["mask"]))
        ok = unsorted > sorted_ and abs(mask - sorted_) <= 1.0 \
            and elapsed < 300.0
        _report("supervision ordering", ok,
                f"unsorted {unsorted:.3f} px, sorted {sorted_:.3f} px, "
                f"mask {mask:.3f} px, {elapsed:.0f} s")
        assert unsorted > sorted_
        assert abs(mask - sorted_) <= 1.0
        assert elapsed < 300.0


def _scene_suite():
    scenes = [("plus", 0), ("overpass", 0), ("grid", 0)]
    scenes += [("manhattan", k) for k in range(17)]
    return scenes


class TestRoundTripFidelity:
    def test_twenty_scenes(self):
        """Encode -> reconstruct, APLS and TOPO F1 >= 0.95, under 1 min."""
        start = time.perf_counter()
        params = ReconstructParams(tau_d=2.0, tau_a=15.0)
        worst_apls = 1.0
        worst_f1 = 1.0
        for name, s in _scene_suite():
            g, h, w = make_scene(name, seed=s)
            rec = reconstruct_graph(encode_graph(g, h, w, 8), params)
            worst_apls = min(worst_apls, apls(g, rec))
            worst_f1 = min(worst_f1, topo(g, rec).f1)
        elapsed = time.perf_counter() - start
        ok = worst_apls >= 0.95 and worst_f1 >= 0.95 and elapsed < 60.0
        _report("round-trip fidelity", ok,
                f"20 scenes, worst APLS {worst_apls:.3f}, "
                f"worst TOPO F1 {worst_f1:.3f}, {elapsed:.0f} s")
        assert worst_apls >= 0.95
        assert worst_f1 >= 0.95
        assert elapsed < 60.0


class TestThresholdRobustness:
    def test_tau_d_sweep(self):
        """APLS varies by < 0.05 across tau_d in {1, 2, 4}."""
        worst_spread = 0.0
        for name, s in [("plus", 0), ("overpass", 0), ("grid", 0),
                        ("manhattan", 0), ("manhattan", 1)]:
            g, h, w = make_scene(name, seed=s)
            grid = encode_graph(g, h, w, 8)
            scores = [apls(g, reconstruct_graph(
                grid, ReconstructParams(tau_d=tau_d)))
                for tau_d in (1.0, 2.0, 4.0)]
            worst_spread = max(worst_spread, max(scores) - min(scores))
        ok = worst_spread < 0.05
        _report("threshold robustness", ok,
                f"max APLS spread over tau_d sweep {worst_spread:.4f}")
        assert worst_spread < 0.05


class TestMetricIdentities:
    def test_identities_and_fork_enumeration(self):
        """apls(g,g)=1, topo(g,g)=(1,1,1) on 50 graphs; fork recall exact."""
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(50):
            n = int(rng.integers(3, 9))
            pts = rng.uniform(10, 200, size=(n, 2))
            verts = [Point(float(x), float(y)) for x, y in pts]
            edges = [(k, k + 1) for k in range(n - 1)]
            g = RoadGraph(verts, edges)
            worst = max(worst, abs(1.0 - apls(g, g)))
            score = topo(g, g)
            worst = max(worst,
                        abs(1.0 - score.precision), abs(1.0 - score.recall),
                        abs(1.0 - score.f1))
        gt = RoadGraph([Point(0, 0), Point(20, 0), Point(-20, 0),
                        Point(0, 20)], [(0, 1), (0, 2), (0, 3)])
        prop = RoadGraph([Point(0, 0), Point(20, 0), Point(-20, 0)],
                         [(0, 1), (0, 2)])
        score = topo(gt, prop)
        # exhaustive marble/hole enumeration: 49 holes, 25 marbles matched
        fork_err = abs(score.recall - 25.0 / 49.0)
        empty = apls(gt, RoadGraph())
        empty_topo = topo(gt, RoadGraph())
        ok = (worst < 1e-9 and fork_err < 1e-9 and empty == 0.0
              and empty_topo.f1 == 0.0)
        _report("metric identities", ok,
                f"50 identity checks worst dev {worst:.1e}, "
                f"fork recall dev {fork_err:.1e}")
        assert worst < 1e-9
        assert fork_err < 1e-9
        assert empty == 0.0
        assert (empty_topo.precision, empty_topo.recall) == (0.0, 0.0)


class TestFormatRoundTrips:
    def test_randomized_identity_and_rejection(self):
        """200 randomized round trips; malformed inputs raise the right kind."""
        rng = np.random.default_rng(11)
        failures = 0
        for trial in range(200):
            kind = trial % 3
            if kind == 0:
                n = int(rng.integers(2, 10))
                pts = [Point(float(x), float(y))
                       for x, y in rng.uniform(0, 64, (n, 2))]
                g = RoadGraph(pts, [(k, k + 1) for k in range(n - 1)])
                back, w, h = parse_graph(serialize_graph(g, 64, 64))
                if back.edges != g.edges or any(
                        abs(p.x - q.x) > 5e-7 or abs(p.y - q.y) > 5e-7
                        for p, q in zip(back.vertices, g.vertices)):
                    failures += 1
            elif kind == 1:
                grid = PatchGrid(8, 2, 2)
                for r in range(2):
                    for c in range(2):
                        roll = rng.random()
                        if roll < 0.4:
                            a = rng.uniform(0, 8, 2)
                            b = rng.uniform(0, 8, 2)
                            grid.set_cell(r, c, PatchClass.I,
                                          seg(c * 8 + a[0], r * 8 + a[1],
                                              c * 8 + b[0], r * 8 + b[1]))
                        elif roll < 0.55:
                            grid.set_cell(r, c, PatchClass.X)
                        elif roll < 0.7:
                            grid.set_cell(r, c, PatchClass.T)
                back = parse_grid(serialize_grid(grid))
                if set(back.cells) != set(grid.cells):
                    failures += 1
                for (r, c, s) in grid.i_cells():
                    t = back.segment_at(r, c)
                    if abs(t.a.x - s.a.x) > 5e-7 or abs(t.b.y - s.b.y) > 5e-7:
                        failures += 1
            else:
                h, w = (int(v) for v in rng.integers(1, 16, 2))
                values = rng.uniform(-10, 10, (h, w))
                back = parse_float_raster(serialize_float_raster(values))
                if not np.allclose(back, values, atol=1e-4):
                    failures += 1
        rejections = [
            (MalformedHeaderError, lambda: parse_graph("{ not json")),
            (MalformedHeaderError,
             lambda: parse_float_raster(b"XXXX" + b"\x00" * 28)),
            (TruncatedPayloadError,
             lambda: parse_float_raster(
                 serialize_float_raster(np.zeros((2, 2)))[:-1])),
            (OutOfRangeIndexError, lambda: parse_graph(
                '{"version": 1, "width": 8, "height": 8, '
                '"nodes": [[0, 0]], "edges": [[0, 5]]}')),
            (InvariantViolationError, lambda: parse_graph(
                '{"version": 1, "width": 8, "height": 8, '
                '"nodes": [[0, 0], [1, 1]], "edges": [[0, 0]]}')),
            (InvariantViolationError, lambda: parse_grid(
                '{"version": 1, "patch_size": 8, "width": 16, "height": 8, '
                '"cells": [{"row": 0, "col": 0, "class": "I"}]}')),
        ]
        wrong_kind = 0
        for expected, thunk in rejections:
            try:
                thunk()
                wrong_kind += 1
            except FormatError as exc:
                if type(exc) is not expected:
                    wrong_kind += 1
        ok = failures == 0 and wrong_kind == 0
        _report("format round-trips", ok,
                f"200 round trips, {failures} mismatches, "
                f"{wrong_kind} wrong rejection kinds")
        assert failures == 0
        assert wrong_kind == 0
