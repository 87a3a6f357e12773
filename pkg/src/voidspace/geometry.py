"""Cameras, triangle meshes, and the OBJ-style loader.

View-space convention used everywhere downstream: x right, y down (matching
image rows), z forward along the view axis.  Depth is the view-space z
coordinate, not Euclidean range, so a camera-facing plane has constant depth.
A normal pointing straight back at the camera is (0, 0, -1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MeshFormatError, ParameterError


def _unit(v: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ParameterError("zero-length vector cannot be normalized")
    return v / n


@dataclass
class Camera:
    position: np.ndarray
    target: np.ndarray
    up: np.ndarray
    vfov_deg: float = 45.0
    near: float = 0.1
    far: float = 100.0
    width: int = 640
    height: int = 480

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.target = np.asarray(self.target, dtype=np.float64)
        self.up = np.asarray(self.up, dtype=np.float64)
        if not (0.0 < self.vfov_deg < 180.0):
            raise ParameterError(f"vfov_deg must be in (0, 180), got {self.vfov_deg}")
        if not (self.near > 0.0 and self.far > self.near):
            raise ParameterError(f"need 0 < near < far, got near={self.near} far={self.far}")
        if self.width < 1 or self.height < 1:
            raise ParameterError("image dimensions must be at least 1x1")
        view = self.target - self.position
        if np.linalg.norm(view) == 0.0:
            raise ParameterError("camera target coincides with position")
        if np.linalg.norm(np.cross(view, self.up)) < 1e-12 * np.linalg.norm(view) * np.linalg.norm(self.up):
            raise ParameterError("up vector is parallel to the view direction")

    def basis(self) -> np.ndarray:
        """Rows (right, down, forward): world->view rotation."""
        forward = _unit(self.target - self.position)
        right = _unit(np.cross(forward, self.up))
        down = np.cross(forward, right)  # unit by construction, points image-down
        return np.stack([right, down, forward])

    def world_to_view(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=np.float64) - self.position) @ self.basis().T

    @property
    def aspect(self) -> float:
        return self.width / self.height

    def tan_half_fov(self) -> tuple[float, float]:
        ty = float(np.tan(np.deg2rad(self.vfov_deg) * 0.5))
        return ty * self.aspect, ty


@dataclass
class Mesh:
    vertices: np.ndarray                      # (N, 3) float64
    triangles: np.ndarray                     # (M, 3) int32
    attribute: np.ndarray | None = None       # (N,) scalar in [0, 1]

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        n = len(self.vertices)
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= n):
            bad = int(self.triangles.max())
            raise MeshFormatError(f"face index {bad} out of range for {n} vertices")
        if self.attribute is not None:
            self.attribute = np.asarray(self.attribute, dtype=np.float64).ravel()
            if len(self.attribute) != n:
                raise MeshFormatError(
                    f"attribute length {len(self.attribute)} != vertex count {n}"
                )
            if self.attribute.size and (self.attribute.min() < 0.0 or self.attribute.max() > 1.0):
                raise MeshFormatError("attribute values must lie in [0, 1]")

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if len(self.vertices) == 0:
            z = np.zeros(3)
            return z, z
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def vertex_normals(mesh: Mesh) -> np.ndarray:
    """Area-weighted smooth vertex normals (unit; (0,0,1) for isolated verts)."""
    normals = np.zeros_like(mesh.vertices)
    v = mesh.vertices
    t = mesh.triangles
    if len(t):
        face_n = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
        for k in range(3):
            np.add.at(normals, t[:, k], face_n)
    lens = np.linalg.norm(normals, axis=1)
    ok = lens > 1e-20
    normals[ok] /= lens[ok, None]
    normals[~ok] = (0.0, 0.0, 1.0)
    return normals


def load_mesh(path, attribute_path=None, triangulate_polygons: bool = True) -> Mesh:
    """Parse an OBJ-style file ('v' and 'f' records only).

    Faces with more than three vertices are fan-triangulated unless
    `triangulate_polygons` is False, in which case they are rejected.
    A per-vertex scalar sidecar (one decimal per line) is read from
    `attribute_path`, or from `<path>.attr` when that file exists.
    """
    path = Path(path)
    verts: list[tuple[float, float, float]] = []
    tris: list[tuple[int, int, int]] = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise MeshFormatError(f"{path}:{lineno}: vertex needs 3 coordinates")
            try:
                verts.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError as exc:
                raise MeshFormatError(f"{path}:{lineno}: bad vertex coordinate: {exc}") from exc
        elif tag == "f":
            idx = []
            for tok in parts[1:]:
                head = tok.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError as exc:
                    raise MeshFormatError(f"{path}:{lineno}: bad face index {tok!r}") from exc
                if i < 0:
                    i = len(verts) + 1 + i
                idx.append(i - 1)
            if len(idx) < 3:
                raise MeshFormatError(f"{path}:{lineno}: face needs at least 3 vertices")
            if len(idx) > 3 and not triangulate_polygons:
                raise MeshFormatError(f"{path}:{lineno}: non-triangle face rejected")
            for k in range(1, len(idx) - 1):
                tris.append((idx[0], idx[k], idx[k + 1]))
        # other record types (vn, vt, o, g, s, mtllib, ...) are ignored

    attribute = None
    if attribute_path is None:
        sidecar = path.with_suffix(path.suffix + ".attr")
        attribute_path = sidecar if sidecar.exists() else None
    if attribute_path is not None:
        attribute = _load_attribute(attribute_path, len(verts))

    try:
        return Mesh(np.array(verts, dtype=np.float64).reshape(-1, 3),
                    np.array(tris, dtype=np.int32).reshape(-1, 3),
                    attribute)
    except MeshFormatError as exc:
        raise MeshFormatError(f"{path}: {exc}") from exc


def _load_attribute(path, n_vertices: int) -> np.ndarray:
    values = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        body = line.strip()
        if not body:
            continue
        try:
            values.append(float(body))
        except ValueError as exc:
            raise MeshFormatError(f"{path}:{lineno}: bad scalar: {exc}") from exc
    if len(values) != n_vertices:
        raise MeshFormatError(
            f"{path}: {len(values)} scalars for {n_vertices} vertices"
        )
    return np.array(values, dtype=np.float64)
