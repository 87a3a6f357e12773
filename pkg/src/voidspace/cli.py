"""Command-line entry points: render, bench, serve.

Exit code 0 from `render` means an image was written.  VSS_THREADS caps the
data-parallel width of the interpolation kernels.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import VoidSpaceError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voidspace",
        description="Render vessel scenes with depth-cued void-space surfaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("render", help="render one frame from a JSON config")
    r.add_argument("config", help="path to the JSON render config")
    r.add_argument("--out", help="output PNG path (overrides config)")
    r.add_argument("--dump-layers", action="store_true",
                   help="also write AO/iso/region/height debug layers")
    r.add_argument("--width", type=int, help="override camera width (pixels)")
    r.add_argument("--height", type=int, help="override camera height (pixels)")
    r.add_argument("--stats", action="store_true",
                   help="print per-stage timing stats as JSON to stdout")

    b = sub.add_parser("bench", help="time the void-surface stages on a scene")
    b.add_argument("scene", help="OBJ-style mesh path")
    b.add_argument("--repeats", type=int, default=5)
    b.add_argument("--steps", default="1,3,5",
                   help="comma-separated sample strides (default 1,3,5)")
    b.add_argument("--presets", default="far,medium,close")
    b.add_argument("--width", type=int, default=1280)
    b.add_argument("--height", type=int, default=720)
    b.add_argument("--out", required=True, help="report JSON path")
    b.add_argument("--artifacts", action="store_true",
                   help="also compute per-step deviation vs step 1")

    s = sub.add_parser("serve", help="serve frames over HTTP for the viewer")
    s.add_argument("scene", help="OBJ-style mesh path")
    s.add_argument("--port", type=int, default=8787)
    s.add_argument("--static", default=None,
                   help="directory of viewer assets to serve at /")
    s.add_argument("--max-renders", type=int, default=2,
                   help="max concurrent renders (others queue FIFO)")
    return parser


def _cmd_render(args) -> int:
    from .pipeline import parse_config, render_frame

    cfg = parse_config(args.config)
    if args.out:
        cfg.output = args.out
    if args.dump_layers:
        cfg.dump_layers = True
    if (args.width or args.height) and cfg.camera is not None:
        from .geometry import Camera
        cfg.camera = Camera(cfg.camera.position, cfg.camera.target, cfg.camera.up,
                            cfg.camera.vfov_deg, cfg.camera.near, cfg.camera.far,
                            args.width or cfg.camera.width,
                            args.height or cfg.camera.height)
    if not cfg.output:
        cfg.output = str(Path(args.config).with_suffix(".png"))
    _, stats = render_frame(cfg)
    if args.stats:
        print(stats.to_json())
    else:
        print(f"wrote {cfg.output}", file=sys.stderr)
    return 0 if Path(cfg.output).exists() else 1


def _cmd_bench(args) -> int:
    from .bench import compare_step_artifacts, run_benchmark

    steps = tuple(int(s) for s in args.steps.split(",") if s.strip())
    presets = tuple(s.strip() for s in args.presets.split(",") if s.strip())
    report = run_benchmark(args.scene, presets=presets, steps=steps,
                           repeats=args.repeats, width=args.width, height=args.height)
    payload = report.to_dict()
    if args.artifacts:
        payload["step_artifacts"] = {
            str(k): v for k, v in compare_step_artifacts(
                args.scene, steps=steps, width=args.width, height=args.height).items()}
    Path(args.out).write_text(json.dumps(payload, indent=2))
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    from .service import serve

    serve(args.scene, port=args.port, static_dir=args.static,
          max_concurrent_renders=args.max_renders)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "render":
            return _cmd_render(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except VoidSpaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
