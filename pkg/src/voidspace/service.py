"""HTTP frame service: POST a viewpoint via query string, get a PNG back.

The scene is loaded once at startup and never mutated, so any number of
requests may read it concurrently.  Actual rendering is gated to a small
number of simultaneous frames (default 2); excess requests wait their turn
in FIFO order.  Identical request URLs produce byte-identical PNGs, which
makes responses cacheable by URL.

Endpoints:
    GET /healthz -> 200 "ok"
    GET /meta    -> JSON {bbox, vertex_count, has_attribute, defaults}
    GET /render?px=..&py=..&pz=..&tx=..&ty=..&tz=..&ux=..&uy=..&uz=..
               &fov=..&p=..&step=..&cmap=..&iso=..&ao=..&w=..&h=..
    GET /        -> viewer static assets when available
"""

from __future__ import annotations

import json
import mimetypes
import threading
from collections import deque
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qsl, urlparse

import numpy as np

from . import imgio
from .contours import label_void_spaces, trace_contours
from .cues import (ColorMapKind, CueConfig, ambient_occlusion, composite,
                   draw_isolines)
from .errors import StageError, VoidSpaceError
from .geometry import Camera, load_mesh
from .raster import rasterize
from .scene import normalize_depth
from .synthesis import IdwParams, interpolate_void_depth, reconstruct_normals

RENDER_DEFAULTS = {
    "fov": 45.0, "p": 2.0, "step": 1, "cmap": "pcd",
    "iso": 12, "ao": 1, "w": 640, "h": 480,
}


class FifoGate:
    """Counting gate that wakes waiters strictly in arrival order."""

    def __init__(self, limit: int):
        self._limit = max(1, int(limit))
        self._active = 0
        self._queue: deque[threading.Event] = deque()
        self._lock = threading.Lock()

    def acquire(self):
        with self._lock:
            if self._active < self._limit and not self._queue:
                self._active += 1
                return
            event = threading.Event()
            self._queue.append(event)
        event.wait()

    def release(self):
        with self._lock:
            if self._queue:
                self._queue.popleft().set()   # hand the slot over directly
            else:
                self._active -= 1

    def __enter__(self):
        self.acquire()
        return self

    def __exit__(self, *exc):
        self.release()


class SceneHost:
    """Immutable scene plus everything derived from it that requests need."""

    def __init__(self, scene_path, static_dir=None, max_concurrent_renders: int = 2):
        self.mesh = load_mesh(scene_path)
        lo, hi = self.mesh.bounds()
        self.bbox = (lo, hi)
        self.center = (lo + hi) * 0.5
        self.radius = max(float(np.linalg.norm(hi - lo)) * 0.5, 1e-6)
        self.static_dir = Path(static_dir) if static_dir else None
        self.gate = FifoGate(max_concurrent_renders)

    def meta(self) -> dict:
        lo, hi = self.bbox
        return {
            "bbox": {"min": list(lo), "max": list(hi)},
            "vertex_count": int(len(self.mesh.vertices)),
            "has_attribute": self.mesh.attribute is not None,
            "defaults": dict(RENDER_DEFAULTS),
        }

    def camera_for(self, position, target, up, fov, width, height) -> Camera:
        dist = float(np.linalg.norm(np.asarray(position) - self.center))
        near = max(dist - self.radius * 1.1, dist * 1e-3, 1e-6)
        far = max(dist + self.radius * 1.1, near * (1.0 + 1e-6))
        return Camera(np.asarray(position), np.asarray(target), np.asarray(up),
                      vfov_deg=fov, near=near, far=far, width=width, height=height)

    def render(self, params: dict) -> bytes:
        camera = self.camera_for(
            [params["px"], params["py"], params["pz"]],
            [params["tx"], params["ty"], params["tz"]],
            [params["ux"], params["uy"], params["uz"]],
            params["fov"], params["w"], params["h"])
        cues = CueConfig(colormap=ColorMapKind.parse(params["cmap"]),
                         iso_count=params["iso"],
                         ao_enabled=bool(params["ao"]))
        idw = IdwParams(params["p"], params["step"])

        # pipeline over the preloaded mesh (render_frame would re-read the file)
        with self.gate:
            try:
                depth = normalize_depth(rasterize(self.mesh, camera))
            except VoidSpaceError as exc:
                raise StageError("normalize", exc) from exc
            mask = depth.foreground
            try:
                vmap = label_void_spaces(mask, trace_contours(mask), depth)
                fieldmap = interpolate_void_depth(depth, vmap, idw)
                normals = reconstruct_normals(
                    fieldmap, 0.5 * max(fieldmap.width, fieldmap.height))
                iso = draw_isolines(fieldmap, cues.iso_count, cues.iso_width)
                ao = ambient_occlusion(fieldmap, cues)
                result = composite(depth, fieldmap, normals, iso, ao, cues)
            except VoidSpaceError as exc:
                raise StageError("render", exc) from exc
        return imgio.encode_png_rgba(result.rgba)


def _parse_render_params(query: str) -> dict:
    pairs = dict(parse_qsl(query, keep_blank_values=True))
    required_floats = ("px", "py", "pz", "tx", "ty", "tz", "ux", "uy", "uz")
    out = {}
    for key in required_floats:
        if key not in pairs:
            raise _BadParam(key, "missing camera parameter")
        out[key] = _as_float(key, pairs.pop(key))
    spec = {"fov": float, "p": float, "step": int, "iso": int, "ao": int,
            "w": int, "h": int, "cmap": str}
    for key, kind in spec.items():
        if key in pairs:
            raw = pairs.pop(key)
            out[key] = raw if kind is str else (
                _as_float(key, raw) if kind is float else _as_int(key, raw))
        else:
            out[key] = RENDER_DEFAULTS[key]
    if pairs:
        raise _BadParam(sorted(pairs)[0], "unknown parameter")
    if out["p"] <= 0:
        raise _BadParam("p", "power parameter must be > 0")
    if out["step"] < 1:
        raise _BadParam("step", "step must be >= 1")
    if out["iso"] < 0:
        raise _BadParam("iso", "iso must be >= 0")
    if out["w"] < 1 or out["h"] < 1:
        raise _BadParam("w" if out["w"] < 1 else "h", "image size must be >= 1")
    if not (0.0 < out["fov"] < 180.0):
        raise _BadParam("fov", "fov must be in (0, 180)")
    try:
        ColorMapKind.parse(out["cmap"])
    except VoidSpaceError:
        raise _BadParam("cmap", f"unknown colormap {out['cmap']!r}") from None
    return out


class _BadParam(Exception):
    def __init__(self, param: str, message: str):
        super().__init__(message)
        self.param = param


def _as_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise _BadParam(key, f"not a number: {raw!r}") from None


def _as_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise _BadParam(key, f"not an integer: {raw!r}") from None


class FrameRequestHandler(BaseHTTPRequestHandler):
    host: SceneHost = None  # injected by make_server
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send(self, code: int, body: bytes, content_type: str):
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, code: int, payload: dict):
        self._send(code, json.dumps(payload).encode(), "application/json")

    def do_GET(self):
        url = urlparse(self.path)
        route = url.path
        try:
            if route == "/healthz":
                self._send(200, b"ok", "text/plain")
            elif route == "/meta":
                self._send_json(200, self.host.meta())
            elif route == "/render":
                try:
                    params = _parse_render_params(url.query)
                except _BadParam as exc:
                    self._send_json(400, {"error": str(exc), "param": exc.param})
                    return
                try:
                    png = self.host.render(params)
                except StageError as exc:
                    self._send_json(500, {"error": str(exc), "stage": exc.stage})
                    return
                self._send(200, png, "image/png")
            else:
                self._serve_static(route)
        except BrokenPipeError:
            pass

    def _serve_static(self, route: str):
        if self.host.static_dir is None:
            if route == "/":
                self._send(200, b"<html><body><p>viewer assets not built; "
                                b"see /meta and /render</p></body></html>",
                           "text/html")
            else:
                self._send_json(404, {"error": f"no such route {route}"})
            return
        rel = "index.html" if route == "/" else route.lstrip("/")
        target = (self.host.static_dir / rel).resolve()
        if not str(target).startswith(str(self.host.static_dir.resolve())) \
                or not target.is_file():
            self._send_json(404, {"error": f"no such route {route}"})
            return
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        self._send(200, target.read_bytes(), ctype)


def make_server(scene_path, port: int = 8787, static_dir=None,
                max_concurrent_renders: int = 2) -> ThreadingHTTPServer:
    """Build (but do not start) the server; raises on scene or port problems."""
    host = SceneHost(scene_path, static_dir, max_concurrent_renders)
    handler = type("BoundHandler", (FrameRequestHandler,), {"host": host})
    return ThreadingHTTPServer(("0.0.0.0", port), handler)


def serve(scene_path, port: int = 8787, static_dir=None,
          max_concurrent_renders: int = 2):
    """Blocking entry point used by the CLI."""
    server = make_server(scene_path, port, static_dir, max_concurrent_renders)
    print(f"serving scene {scene_path} on http://0.0.0.0:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
