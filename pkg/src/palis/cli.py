"""Command-line front end: a thin client over the library modules.

Exit codes: 0 success, 1 usage error (including missing inputs), 2 format
error, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, codec, formats, metrics, reconstruct, synth
from .fitter import (FitConfig, SupervisionMode, default_init_segment,
                     fit_palis, fit_vector_supervised, perturbed_grid)
from .raster import RasterParams, compose_soft_mask

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_INVARIANT = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, EXIT_USAGE)


def _raster_params(args) -> RasterParams:
    return RasterParams(tau_inv=args.tau_inv, t_out=args.t_out, t_in=args.t_in)


def _add_raster_flags(p) -> None:
    p.add_argument("--tau-inv", dest="tau_inv", type=float, default=8.0,
                   help="sharpness factor (soft mask width)")
    p.add_argument("--t-out", dest="t_out", type=float, default=10.0,
                   help="projection factor beyond the segment extent")
    p.add_argument("--t-in", dest="t_in", type=float, default=1.0,
                   help="projection factor within the segment extent")


def _read_graph(path: str):
    return formats.read_graph(_require(path))


def _require(path: str) -> str:
    if not Path(path).exists():
        raise CliError(f"input file not found: {path}", EXIT_USAGE)
    return path


def cmd_synth(args) -> int:
    g, h, w = synth.make_scene(args.scene, args.seed)
    formats.write_graph(args.output, g, w, h)
    if args.mask:
        formats.write_byte_mask(args.mask, synth.centerline_mask(g, h, w))
    return EXIT_OK


def cmd_encode(args) -> int:
    g, w, h = _read_graph(args.graph)
    grid = codec.encode_graph(g, args.height or h, args.width or w,
                              args.patch_size)
    for line in grid.diagnostics:
        print(f"note: {line}", file=sys.stderr)
    formats.write_grid(args.output, grid)
    return EXIT_OK


def cmd_rasterize(args) -> int:
    grid = formats.read_grid(_require(args.grid))
    mask = compose_soft_mask(grid, grid.height, grid.width, _raster_params(args))
    formats.write_float_raster(args.output, mask)
    if args.preview:
        formats.write_byte_mask(args.preview, mask)
    return EXIT_OK


def cmd_fit(args) -> int:
    grid = formats.read_grid(_require(args.grid))
    cfg = FitConfig(learning_rate=args.lr, max_iters=args.iters, tol=args.tol,
                    raster=_raster_params(args), seed=args.seed)
    if args.init == "default":
        for (r, c, _) in grid.i_cells():
            grid.cells[(r, c)] = (codec.PatchClass.I,
                                  default_init_segment(grid.rect(r, c)))
    reference = formats.read_grid(_require(args.labels)) if args.labels else None
    if args.perturb > 0:
        grid = perturbed_grid(grid, args.perturb, args.seed)
    if args.supervision == "mask":
        if not args.target:
            raise CliError("mask supervision requires --target", EXIT_USAGE)
        target = formats.read_float_raster(_require(args.target))
        fitted, report = fit_palis(grid, target, cfg, reference=reference)
    else:
        if reference is None:
            raise CliError(f"{args.supervision} supervision requires --labels",
                           EXIT_USAGE)
        mode = SupervisionMode(args.supervision)
        fitted, report = fit_vector_supervised(grid, reference, mode, cfg)
    formats.write_grid(args.output, fitted)
    if args.log:
        with open(args.log, "w") as f:
            for i, loss in enumerate(report.loss_trace):
                f.write(f"{i + 1} {loss:.9f}\n")
    err = report.mean_endpoint_error
    print(f"iterations={report.iterations} final_loss={report.final_loss:.9f}"
          + (f" mean_endpoint_error={err:.6f}" if err is not None else ""))
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    grid = formats.read_grid(_require(args.grid))
    params = reconstruct.ReconstructParams(
        tau_d=args.tau_d, tau_a=args.tau_a,
        neighbor_radius=args.neighbor_radius)
    result = reconstruct.reconstruct_with_diagnostics(grid, params)
    for line in result.diagnostics:
        print(f"note: {line}", file=sys.stderr)
    formats.write_graph(args.output, result.graph, grid.width, grid.height)
    return EXIT_OK


def _score_lines(name: str, gt, prop, args):
    if name == "apls":
        params = metrics.AplsParams(args.control_spacing, args.snap_radius)
        value = metrics.apls(gt, prop, params)
        return [f"apls {value:.6f} control_point_spacing={params.control_point_spacing}"
                f" snap_radius={params.snap_radius}"]
    params = metrics.TopoParams(args.seed_interval, args.match_radius,
                                args.propagation_radius, args.marble_interval)
    score = metrics.topo(gt, prop, params)
    tail = (f"seed_interval={params.seed_interval}"
            f" match_radius={params.match_radius}"
            f" propagation_radius={params.propagation_radius}"
            f" marble_interval={params.marble_interval}")
    return [f"topo_precision {score.precision:.6f} {tail}",
            f"topo_recall {score.recall:.6f} {tail}",
            f"topo_f1 {score.f1:.6f} {tail}"]


def cmd_eval(args) -> int:
    gt, _, _ = _read_graph(args.gt)
    prop, _, _ = _read_graph(args.prop)
    lines = _score_lines(args.metric, gt, prop, args)
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.output:
        Path(args.output).write_text(text)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params = _raster_params(args)
    gt, w, h = _read_graph(args.graph)
    grid = codec.encode_graph(gt, h, w, args.patch_size)
    formats.write_grid(out / "encoded.grid.json", grid)
    target = compose_soft_mask(grid, h, w, params)
    formats.write_float_raster(out / "target.plsf", target)
    start = grid
    if args.init == "default":
        start = codec.PatchGrid(grid.patch_size, grid.rows, grid.cols,
                                dict(grid.cells))
        for (r, c, _) in start.i_cells():
            start.cells[(r, c)] = (codec.PatchClass.I,
                                   default_init_segment(start.rect(r, c)))
    if args.perturb > 0:
        start = perturbed_grid(start, args.perturb, args.seed)
    cfg = FitConfig(learning_rate=args.lr, max_iters=args.iters, tol=args.tol,
                    raster=params, seed=args.seed)
    fitted, report = fit_palis(start, target, cfg, reference=grid)
    formats.write_grid(out / "fitted.grid.json", fitted)
    with open(out / "fit.log", "w") as f:
        for i, loss in enumerate(report.loss_trace):
            f.write(f"{i + 1} {loss:.9f}\n")
    rec_params = reconstruct.ReconstructParams(tau_d=args.tau_d,
                                               tau_a=args.tau_a)
    recon = reconstruct.reconstruct_graph(fitted, rec_params)
    formats.write_graph(out / "reconstructed.graph.json", recon, w, h)
    lines = []
    lines += _score_lines("apls", gt, recon, args)
    lines += _score_lines("topo", gt, recon, args)
    (out / "scores.txt").write_text("\n".join(lines) + "\n")
    sys.stdout.write("\n".join(lines) + "\n")
    svg = formats.render_svg(recon, w, h, grid=fitted, mask=target)
    (out / "overlay.svg").write_text(svg)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _add_metric_flags(p) -> None:
    p.add_argument("--control-spacing", type=float, default=16.0)
    p.add_argument("--snap-radius", type=float, default=8.0)
    p.add_argument("--seed-interval", type=float, default=16.0)
    p.add_argument("--match-radius", type=float, default=8.0)
    p.add_argument("--propagation-radius", type=float, default=300.0)
    p.add_argument("--marble-interval", type=float, default=5.0)


def build_parser() -> _Parser:
    parser = _Parser(prog="palis", description=__doc__)
    parser.add_argument("--version", action="version",
                        version=f"palis {__version__} "
                                f"(format version {formats.FORMAT_VERSION})")
    parser.add_argument("--threads", type=int, default=0,
                        help="cap worker threads (0 = library default)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scene")
    p.add_argument("--scene", choices=synth.SCENE_NAMES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="graph file")
    p.add_argument("--mask", help="also write a centerline byte mask")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("encode", help="encode a graph into a patch grid")
    p.add_argument("graph")
    p.add_argument("--width", type=int, default=0,
                   help="override the width recorded in the graph file")
    p.add_argument("--height", type=int, default=0)
    p.add_argument("--patch-size", type=int, default=8)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("rasterize", help="render a grid into a soft mask")
    p.add_argument("grid")
    _add_raster_flags(p)
    p.add_argument("-o", "--output", required=True, help="float raster file")
    p.add_argument("--preview", help="also write an 8-bit preview mask")
    p.set_defaults(func=cmd_rasterize)

    p = sub.add_parser("fit", help="optimize grid segments against a target")
    p.add_argument("grid")
    p.add_argument("--target", help="target float raster (mask supervision)")
    p.add_argument("--labels", help="label grid (vector supervision/reference)")
    p.add_argument("--supervision", choices=("mask", "sorted", "unsorted"),
                   default="mask")
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--init", choices=("given", "default"), default="given")
    p.add_argument("--perturb", type=float, default=0.0,
                   help="perturb initial endpoints by up to this many px")
    p.add_argument("--seed", type=int, default=0)
    _add_raster_flags(p)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--log", help="line-delimited iteration/loss log")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("reconstruct", help="rebuild the road graph from a grid")
    p.add_argument("grid")
    p.add_argument("--tau-d", dest="tau_d", type=float, default=2.0)
    p.add_argument("--tau-a", dest="tau_a", type=float, default=15.0)
    p.add_argument("--neighbor-radius", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("eval", help="score a proposal graph against a reference")
    p.add_argument("gt")
    p.add_argument("prop")
    p.add_argument("--metric", choices=("apls", "topo"), required=True)
    _add_metric_flags(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("pipeline",
                       help="encode, rasterize, fit, reconstruct and score")
    p.add_argument("graph")
    p.add_argument("--patch-size", type=int, default=8)
    p.add_argument("--init", choices=("given", "default"), default="given")
    p.add_argument("--perturb", type=float, default=0.0)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau-d", dest="tau_d", type=float, default=2.0)
    p.add_argument("--tau-a", dest="tau_a", type=float, default=15.0)
    _add_raster_flags(p)
    _add_metric_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except formats.InvariantViolationError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except formats.FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
