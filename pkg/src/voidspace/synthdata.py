"""Procedural vessel-like geometry for tests, demos, and the bundled bench scene.

Nothing here is part of the rendering pipeline; it only manufactures input
meshes with the properties the pipeline cares about: tubular branches, gaps
between them, and a per-vertex scalar playing the role of a measured wall
parameter.
"""

from __future__ import annotations

import numpy as np

from .geometry import Mesh


def _frame(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors spanning the plane orthogonal to `direction`."""
    d = direction / np.linalg.norm(direction)
    helper = np.array([0.0, 0.0, 1.0]) if abs(d[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = np.cross(d, helper)
    u /= np.linalg.norm(u)
    v = np.cross(d, u)
    return u, v


def tube_mesh(path: np.ndarray, radii, n_sides: int = 10):
    """Open tube along a polyline; returns (vertices, triangles) arrays."""
    path = np.asarray(path, dtype=np.float64)
    k = len(path)
    radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (k,))
    angles = np.linspace(0.0, 2.0 * np.pi, n_sides, endpoint=False)
    ring_dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)

    verts = np.empty((k * n_sides, 3))
    for i in range(k):
        if i == 0:
            d = path[1] - path[0]
        elif i == k - 1:
            d = path[-1] - path[-2]
        else:
            d = path[i + 1] - path[i - 1]
        u, v = _frame(d)
        verts[i * n_sides:(i + 1) * n_sides] = (
            path[i] + radii[i] * (ring_dirs[:, :1] * u + ring_dirs[:, 1:] * v))

    tris = []
    for i in range(k - 1):
        a = i * n_sides
        b = (i + 1) * n_sides
        for j in range(n_sides):
            jn = (j + 1) % n_sides
            tris.append((a + j, b + j, b + jn))
            tris.append((a + j, b + jn, a + jn))
    return verts, np.array(tris, dtype=np.int32)


def two_tubes(depth_a: float = 4.0, depth_b: float = 8.0, span: float = 12.0,
              radius: float = 0.8, n_sides: int = 12) -> Mesh:
    """Two vertical tubes at different view depths, long enough to cross the frame."""
    ys = np.linspace(-span, span, 9)
    path_a = np.stack([np.full_like(ys, -1.8), ys, np.full_like(ys, depth_a)], axis=1)
    path_b = np.stack([np.full_like(ys, 1.8), ys, np.full_like(ys, depth_b)], axis=1)
    va, ta = tube_mesh(path_a, radius, n_sides)
    vb, tb = tube_mesh(path_b, radius, n_sides)
    verts = np.concatenate([va, vb])
    tris = np.concatenate([ta, tb + len(va)])
    attr = np.concatenate([np.zeros(len(va)), np.ones(len(vb))])
    return Mesh(verts, tris, attr)


def branching_tree(seed: int = 15, levels: int = 5, n_sides: int = 12,
                   rings_per_branch: int = 7) -> Mesh:
    """Random binary vessel tree spreading across x/y with depth variation in z.

    Tuned so the standard far/medium/close framings at 16:9 give no / one /
    several frame-border intersections with a handful of sizable void regions.
    The per-vertex attribute decays toward the leaves, mimicking a measured
    quantity falling off along the tree.
    """
    rng = np.random.default_rng(seed)
    all_verts, all_tris, all_attr = [], [], []
    offset = 0

    def grow(start, direction, length, radius, level):
        nonlocal offset
        direction = direction / np.linalg.norm(direction)
        ts = np.linspace(0.0, 1.0, rings_per_branch)
        u, v = _frame(direction)
        wob_u, wob_v = rng.uniform(-0.25, 0.25, size=2)
        bend = (np.sin(ts * np.pi)[:, None]
                * (wob_u * u + wob_v * v) * length * 0.4)
        path = start + ts[:, None] * direction * length + bend
        radii = np.linspace(radius, radius * 0.8, rings_per_branch)
        verts, tris = tube_mesh(path, radii, n_sides)
        all_verts.append(verts)
        all_tris.append(tris + offset)
        t_attr = 1.0 - (level + ts) / (levels + 1.0)
        all_attr.append(np.repeat(np.clip(t_attr, 0.0, 1.0), n_sides))
        offset += len(verts)
        end = path[-1]
        if level + 1 > levels:
            return
        for _ in range(2):
            ang = rng.uniform(0.35, 0.95)
            spin = rng.uniform(0.0, 2.0 * np.pi)
            axis_u, axis_v = _frame(direction)
            new_dir = (np.cos(ang) * direction
                       + np.sin(ang) * (np.cos(spin) * axis_u + np.sin(spin) * axis_v))
            new_dir[2] *= 0.5           # keep the tree roughly camera-facing
            grow(end, new_dir, length * 0.78, radius * 0.7, level + 1)

    grow(np.array([0.0, -10.0, 0.0]), np.array([0.0, 1.0, 0.05]), 8.5, 1.4, 0)
    verts = np.concatenate(all_verts)
    tris = np.concatenate(all_tris)
    attr = np.concatenate(all_attr)
    return Mesh(verts, tris, attr)


def write_obj(mesh: Mesh, path, attribute_path=None) -> None:
    """Write 'v'/'f' records; the scalar sidecar goes next to it when present."""
    lines = [f"v {x:.6f} {y:.6f} {z:.6f}" for x, y, z in mesh.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.triangles]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    if mesh.attribute is not None:
        if attribute_path is None:
            attribute_path = f"{path}.attr"
        with open(attribute_path, "w") as fh:
            fh.write("\n".join(f"{a:.6f}" for a in mesh.attribute) + "\n")
