"""Software triangle rasterizer producing linear view-space depth.

Nearest-hit z-buffer semantics with perspective-correct interpolation of the
optional per-vertex scalar and of smooth vertex normals.  Back-face culling
is off: vessel tubes may be open, and culling would punch holes into the
silhouette.  Ties in depth resolve to the earlier triangle, which keeps the
output independent of anything but the input ordering.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .geometry import Camera, Mesh, vertex_normals
from .scene import BACKGROUND_DEPTH, DepthImage


@njit(cache=True)
def _fill_triangles(sx, sy, vz, attr, nrm, width, height, tan_x, tan_y,
                    depth, attr_img, normal_img):
    for t in range(sx.shape[0]):
        x0, x1, x2 = sx[t, 0], sx[t, 1], sx[t, 2]
        y0, y1, y2 = sy[t, 0], sy[t, 1], sy[t, 2]
        area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        if area == 0.0:
            continue
        inv_area = 1.0 / area
        lo_x = int(max(0.0, np.floor(min(x0, x1, x2) - 0.5)))
        hi_x = int(min(width - 1.0, np.ceil(max(x0, x1, x2))))
        lo_y = int(max(0.0, np.floor(min(y0, y1, y2) - 0.5)))
        hi_y = int(min(height - 1.0, np.ceil(max(y0, y1, y2))))
        if lo_x > hi_x or lo_y > hi_y:
            continue
        iz0 = 1.0 / vz[t, 0]
        iz1 = 1.0 / vz[t, 1]
        iz2 = 1.0 / vz[t, 2]
        for iy in range(lo_y, hi_y + 1):
            py = iy + 0.5
            for ix in range(lo_x, hi_x + 1):
                px = ix + 0.5
                w0 = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
                w1 = (x0 - x2) * (py - y2) - (y0 - y2) * (px - x2)
                w2 = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)
                if not ((w0 >= 0.0 and w1 >= 0.0 and w2 >= 0.0)
                        or (w0 <= 0.0 and w1 <= 0.0 and w2 <= 0.0)):
                    continue
                l0 = w0 * inv_area
                l1 = w1 * inv_area
                l2 = w2 * inv_area
                inv_z = l0 * iz0 + l1 * iz1 + l2 * iz2
                if inv_z <= 0.0:
                    continue
                z = 1.0 / inv_z
                if z >= depth[iy, ix]:
                    continue
                depth[iy, ix] = z
                attr_img[iy, ix] = (l0 * attr[t, 0] * iz0 + l1 * attr[t, 1] * iz1
                                    + l2 * attr[t, 2] * iz2) * z
                nx = (l0 * nrm[t, 0, 0] * iz0 + l1 * nrm[t, 1, 0] * iz1
                      + l2 * nrm[t, 2, 0] * iz2) * z
                ny = (l0 * nrm[t, 0, 1] * iz0 + l1 * nrm[t, 1, 1] * iz1
                      + l2 * nrm[t, 2, 1] * iz2) * z
                nz = (l0 * nrm[t, 0, 2] * iz0 + l1 * nrm[t, 1, 2] * iz1
                      + l2 * nrm[t, 2, 2] * iz2) * z
                # orient toward the camera (two-sided surfaces)
                dx = (2.0 * px / width - 1.0) * tan_x
                dy = (2.0 * py / height - 1.0) * tan_y
                if nx * dx + ny * dy + nz > 0.0:
                    nx, ny, nz = -nx, -ny, -nz
                norm = np.sqrt(nx * nx + ny * ny + nz * nz)
                if norm > 1e-20:
                    normal_img[iy, ix, 0] = nx / norm
                    normal_img[iy, ix, 1] = ny / norm
                    normal_img[iy, ix, 2] = nz / norm
                else:
                    normal_img[iy, ix, 0] = 0.0
                    normal_img[iy, ix, 1] = 0.0
                    normal_img[iy, ix, 2] = -1.0


def _clip_axis_z(polys, z_min, z_max):
    """Sutherland-Hodgman clip of vertex-payload polygons to z_min <= z <= z_max."""
    out = []
    for poly in polys:
        for keep_ge, plane in ((True, z_min), (False, z_max)):
            clipped = []
            n = len(poly)
            for i in range(n):
                a = poly[i]
                b = poly[(i + 1) % n]
                za, zb = a[2], b[2]
                a_in = (za >= plane) if keep_ge else (za <= plane)
                b_in = (zb >= plane) if keep_ge else (zb <= plane)
                if a_in:
                    clipped.append(a)
                if a_in != b_in:
                    t = (plane - za) / (zb - za)
                    clipped.append(a + t * (b - a))
            poly = clipped
            if len(poly) < 3:
                poly = []
                break
        if poly:
            out.append(poly)
    return out


def rasterize(mesh: Mesh, camera: Camera) -> DepthImage:
    """Render the mesh into a DepthImage; a fully clipped mesh is all background."""
    w, h = camera.width, camera.height
    depth = np.full((h, w), BACKGROUND_DEPTH)
    attr_img = np.zeros((h, w))
    normal_img = np.zeros((h, w, 3))
    normal_img[:, :, 2] = -1.0

    if len(mesh.triangles):
        view = camera.world_to_view(mesh.vertices)
        normals_view = vertex_normals(mesh) @ camera.basis().T
        attr = mesh.attribute if mesh.attribute is not None else np.zeros(len(mesh.vertices))

        # payload per vertex: x, y, z, attr, nx, ny, nz
        payload = np.concatenate([view, attr[:, None], normals_view], axis=1)
        tri_payload = payload[mesh.triangles]                     # (M, 3, 7)

        z = tri_payload[:, :, 2]
        inside = (z >= camera.near).all(axis=1) & (z <= camera.far).all(axis=1)
        keep = [tri_payload[inside]]
        boundary = tri_payload[~inside & ~((z < camera.near).all(axis=1)
                                           | (z > camera.far).all(axis=1))]
        for polys in ([list(tri) for tri in boundary],):
            for poly in _clip_axis_z(polys, camera.near, camera.far):
                fan = np.stack([np.stack([poly[0], poly[k], poly[k + 1]])
                                for k in range(1, len(poly) - 1)])
                keep.append(fan)
        tris = np.concatenate([k for k in keep if len(k)], axis=0) if any(len(k) for k in keep) \
            else np.zeros((0, 3, 7))

        if len(tris):
            tan_x, tan_y = camera.tan_half_fov()
            vz = tris[:, :, 2]
            sx = (tris[:, :, 0] / (vz * tan_x) + 1.0) * 0.5 * w
            sy = (tris[:, :, 1] / (vz * tan_y) + 1.0) * 0.5 * h
            _fill_triangles(np.ascontiguousarray(sx), np.ascontiguousarray(sy),
                            np.ascontiguousarray(vz),
                            np.ascontiguousarray(tris[:, :, 3]),
                            np.ascontiguousarray(tris[:, :, 4:7]),
                            w, h, tan_x, tan_y, depth, attr_img, normal_img)

    background = ~np.isfinite(depth)
    depth[background] = BACKGROUND_DEPTH
    attribute = None if mesh.attribute is None else np.where(background, 0.0, attr_img)
    return DepthImage(depth, background, attribute, normal_img)
