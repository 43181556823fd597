import numpy as np
import pytest

from palis.codec import PatchClass, PatchGrid
from palis.fitter import (FitConfig, Optimizer, SupervisionMode,
                          canonicalize_segment, default_init_segment,
                          fit_palis, fit_vector_supervised, l1_vector_loss,
                          perturbed_grid, segment_endpoint_error)
from palis.geometry import LineSegment, PatchRect, Point
from palis.raster import compose_soft_mask


def seg(ax, ay, bx, by):
    return LineSegment(Point(ax, ay), Point(bx, by))


def one_cell_grid(s):
    grid = PatchGrid(8, 1, 1)
    grid.set_cell(0, 0, PatchClass.I, s)
    return grid


def two_cell_road():
    grid = PatchGrid(8, 1, 2)
    grid.set_cell(0, 0, PatchClass.I, seg(0, 3.5, 8, 3.5))
    grid.set_cell(0, 1, PatchClass.I, seg(8, 3.5, 16, 3.5))
    return grid


class TestCanonicalize:
    def test_orders_by_x(self):
        out = canonicalize_segment(seg(5, 1, 2, 3))
        assert (out.a.x, out.b.x) == (2, 5)

    def test_tie_broken_by_y(self):
        out = canonicalize_segment(seg(2, 7, 2, 3))
        assert (out.a.y, out.b.y) == (3, 7)

    def test_idempotent(self):
        l = seg(1, 1, 6, 2)
        assert canonicalize_segment(canonicalize_segment(l)) == \
            canonicalize_segment(l)


class TestL1VectorLoss:
    def test_identical(self):
        l = seg(1, 2, 3, 4)
        assert l1_vector_loss(l, l, sorted_mode=True) == 0

    def test_reversed_label_sorted_is_zero(self):
        assert l1_vector_loss(seg(1, 2, 3, 4), seg(3, 4, 1, 2),
                              sorted_mode=True) == 0

    def test_reversed_label_unsorted_pays_full(self):
        # coordinates differ by |1-3|+|2-4| on each endpoint
        assert l1_vector_loss(seg(1, 2, 3, 4), seg(3, 4, 1, 2),
                              sorted_mode=False) == 8

    def test_plain_difference(self):
        assert l1_vector_loss(seg(0, 0, 1, 0), seg(0.5, 0, 1, 2),
                              sorted_mode=False) == pytest.approx(2.5)


class TestSegmentEndpointError:
    def test_orientation_insensitive(self):
        l = seg(0, 0, 4, 0)
        assert segment_endpoint_error(l, seg(4, 0, 0, 0)) == 0

    def test_mean_of_distances(self):
        # endpoints off by 1 and 3 under the direct pairing
        err = segment_endpoint_error(seg(0, 0, 4, 0), seg(0, 1, 4, 3))
        assert err == pytest.approx(2.0)


class TestDefaultInit:
    def test_centered_half_length(self):
        l = default_init_segment(PatchRect(0, 0, 8))
        assert (l.a.x, l.a.y, l.b.x, l.b.y) == (2, 4, 6, 4)

    def test_offset_cell(self):
        l = default_init_segment(PatchRect(2, 1, 8))
        assert (l.a.x, l.a.y, l.b.x, l.b.y) == (10, 20, 14, 20)


class TestFitPalis:
    def test_fixed_point(self):
        # initializing at the target leaves the loss at its minimum
        grid = two_cell_road()
        target = compose_soft_mask(grid, 8, 16, FitConfig().raster)
        fitted, report = fit_palis(grid, target, FitConfig(max_iters=5),
                                   reference=grid)
        assert report.initial_loss < 1e-6
        assert report.final_loss <= report.initial_loss + 1e-12
        assert report.mean_endpoint_error < 1e-6

    def test_recovers_perturbed_segments(self):
        grid = two_cell_road()
        target = compose_soft_mask(grid, 8, 16, FitConfig().raster)
        start = perturbed_grid(grid, 1.5, seed=3)
        cfg = FitConfig(learning_rate=0.05, max_iters=600, tol=1e-13)
        fitted, report = fit_palis(start, target, cfg, reference=grid)
        assert report.final_loss < report.initial_loss
        assert report.mean_endpoint_error < 0.35

    def test_zero_iterations_leave_grid_unchanged(self):
        grid = two_cell_road()
        target = compose_soft_mask(grid, 8, 16, FitConfig().raster)
        start = perturbed_grid(grid, 1.0, seed=1)
        fitted, report = fit_palis(start, target, FitConfig(max_iters=0))
        assert report.iterations == 0
        assert report.loss_trace == []
        for (r, c, s) in start.i_cells():
            assert fitted.segment_at(r, c) == s

    def test_trace_monotone_under_gradient_descent(self):
        grid = two_cell_road()
        target = compose_soft_mask(grid, 8, 16, FitConfig().raster)
        start = perturbed_grid(grid, 2.0, seed=7)
        _, report = fit_palis(start, target, FitConfig(max_iters=100))
        trace = [report.initial_loss] + report.loss_trace
        for prev, cur in zip(trace, trace[1:]):
            assert cur <= prev + 1e-9

    def test_endpoints_stay_in_cells(self):
        grid = two_cell_road()
        target = compose_soft_mask(grid, 8, 16, FitConfig().raster)
        start = perturbed_grid(grid, 3.0, seed=11)
        fitted, _ = fit_palis(start, target,
                              FitConfig(learning_rate=1.5, max_iters=50))
        for (r, c, s) in fitted.i_cells():
            rect = fitted.rect(r, c)
            for p in (s.a, s.b):
                assert rect.contains(p, tol=1e-9)

    def test_deterministic(self):
        grid = two_cell_road()
        target = compose_soft_mask(grid, 8, 16, FitConfig().raster)
        start = perturbed_grid(grid, 2.0, seed=5)
        _, r1 = fit_palis(start, target, FitConfig(max_iters=60))
        _, r2 = fit_palis(start, target, FitConfig(max_iters=60))
        assert r1.loss_trace == r2.loss_trace

    def test_momentum_also_reduces_loss(self):
        grid = two_cell_road()
        target = compose_soft_mask(grid, 8, 16, FitConfig().raster)
        start = perturbed_grid(grid, 1.5, seed=2)
        cfg = FitConfig(learning_rate=0.02, max_iters=300,
                        optimizer=Optimizer.MOMENTUM)
        _, report = fit_palis(start, target, cfg)
        assert report.final_loss < report.initial_loss

    def test_target_shape_rejected(self):
        with pytest.raises(ValueError):
            fit_palis(two_cell_road(), np.zeros((8, 8)), FitConfig())

    def test_empty_grid(self):
        grid = PatchGrid(8, 1, 1)
        fitted, report = fit_palis(grid, np.zeros((8, 8)), FitConfig())
        assert report.iterations == 0
        assert fitted.cells == {}


class TestFitVectorSupervised:
    def _setup(self, mode, iters=200, lr=0.05, seed=0):
        labels = two_cell_road()
        start = PatchGrid(8, 1, 2)
        for (r, c, _) in labels.i_cells():
            start.set_cell(r, c, PatchClass.I,
                           default_init_segment(start.rect(r, c)))
        cfg = FitConfig(learning_rate=lr, max_iters=iters, seed=seed)
        return fit_vector_supervised(start, labels, mode, cfg)

    def test_sorted_converges_exactly(self):
        fitted, report = self._setup(SupervisionMode.SORTED, iters=300)
        assert report.final_loss < 1e-9
        assert report.mean_endpoint_error < 1e-9

    def test_unsorted_stalls_above_sorted(self):
        _, sorted_report = self._setup(SupervisionMode.SORTED, iters=300)
        _, unsorted_report = self._setup(SupervisionMode.UNSORTED, iters=300)
        assert unsorted_report.mean_endpoint_error > \
            sorted_report.mean_endpoint_error

    def test_unsorted_flip_average_oracle(self):
        # with a single cell and a symmetric label the unsorted iteration
        # alternates between the two orientations; the endpoints drift toward
        # the average of the label's endpoints rather than the endpoints
        labels = one_cell_grid(seg(1, 4, 7, 4))
        start = one_cell_grid(seg(3, 4, 5, 4))
        cfg = FitConfig(learning_rate=0.5, max_iters=400, seed=0)
        fitted, report = fit_vector_supervised(start, labels,
                                               SupervisionMode.UNSORTED, cfg)
        out = fitted.segment_at(0, 0)
        mid_x = 0.5 * (1 + 7)
        assert abs(out.a.x - mid_x) < 1.5
        assert abs(out.b.x - mid_x) < 1.5
        assert report.mean_endpoint_error > 1.0

    def test_sorted_zero_iterations(self):
        labels = two_cell_road()
        fitted, report = fit_vector_supervised(
            labels, labels, SupervisionMode.SORTED, FitConfig(max_iters=0))
        assert report.iterations == 0
        assert report.final_loss == report.initial_loss == 0

    def test_seed_determinism(self):
        _, r1 = self._setup(SupervisionMode.UNSORTED, seed=9)
        _, r2 = self._setup(SupervisionMode.UNSORTED, seed=9)
        assert r1.loss_trace == r2.loss_trace

    def test_missing_label_rejected(self):
        start = two_cell_road()
        labels = PatchGrid(8, 1, 2)
        labels.set_cell(0, 0, PatchClass.I, seg(0, 3.5, 8, 3.5))
        with pytest.raises(ValueError):
            fit_vector_supervised(start, labels, SupervisionMode.SORTED,
                                  FitConfig())


class TestPerturbedGrid:
    def test_bounded_and_clamped(self):
        grid = two_cell_road()
        out = perturbed_grid(grid, 2.0, seed=0)
        for (r, c, s) in out.i_cells():
            ref = grid.segment_at(r, c)
            rect = grid.rect(r, c)
            for p, q in ((s.a, ref.a), (s.b, ref.b)):
                assert abs(p.x - q.x) <= 2.0 + 1e-9
                assert abs(p.y - q.y) <= 2.0 + 1e-9
                assert rect.contains(p, tol=1e-9)

    def test_zero_amplitude_identity(self):
        grid = two_cell_road()
        out = perturbed_grid(grid, 0.0, seed=0)
        for (r, c, s) in out.i_cells():
            assert s == grid.segment_at(r, c)


class TestFitConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            FitConfig(learning_rate=0)
        with pytest.raises(ValueError):
            FitConfig(max_iters=-1)
        with pytest.raises(ValueError):
            FitConfig(tol=-1e-3)

    def test_zero_iteration_budget_allowed(self):
        assert FitConfig(max_iters=0).max_iters == 0
