"""Independent reference implementations used to check the package.

Everything here is deliberately written from scratch against the
underlying mathematics (dense polygon sums, area quadrature of the log
kernel, ray casting) and avoids the boundary-integral machinery under
test.
"""

import numpy as np


def fourier_vertices(c, center, n):
    """Boundary polygon vertices, recomputed from the series definition."""
    theta = 2.0 * np.pi * np.arange(n) / n
    x = np.full(n, float(center[0]))
    y = np.full(n, float(center[1]))
    for k, ck in enumerate(c, start=1):
        x += ck * np.cos(k * theta)
        y += ck * np.sin(k * theta)
    return np.column_stack([x, y])


def shoelace_moments(c, n):
    """Polygon area, first and second moments about the center."""
    v = fourier_vertices(c, (0.0, 0.0), n)
    x, y = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x, -1), np.roll(y, -1)
    cr = x * y1 - x1 * y
    area = 0.5 * np.sum(cr)
    fx = np.sum((x + x1) * cr) / 6.0
    fy = np.sum((y + y1) * cr) / 6.0
    mxx = np.sum((x * x + x * x1 + x1 * x1) * cr) / 12.0
    myy = np.sum((y * y + y * y1 + y1 * y1) * cr) / 12.0
    mxy = np.sum((x * y1 + 2 * x * y + 2 * x1 * y1 + x1 * y) * cr) / 24.0
    return area, np.array([fx, fy]), np.array([[mxx, mxy], [mxy, myy]])


def _subtriangle_barycenters(s):
    """Barycentric centroids of the s^2 congruent subtriangles of a triangle."""
    pts = []
    for i in range(s):
        for j in range(s - i):
            pts.append(((3 * i + 1) / (3 * s), (3 * j + 1) / (3 * s)))
            if j < s - i - 1:
                pts.append(((3 * i + 2) / (3 * s), (3 * j + 2) / (3 * s)))
    return np.asarray(pts)


def fan_quadrature_temp(c, center, q, point, n_edges=2000, n_sub=8):
    """Brute-force T(point) by area quadrature of the log kernel.

    The region is fan-triangulated from its center and each triangle is
    split into n_sub^2 congruent subtriangles evaluated at centroids.
    Second-order accurate; avoid points on or very near the boundary.
    """
    v = fourier_vertices(c, center, n_edges)
    ctr = np.asarray(center, dtype=float)
    e1 = v - ctr
    e2 = np.roll(v, -1, axis=0) - ctr
    bary = _subtriangle_barycenters(n_sub)
    tri_area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    sub_area = tri_area / (n_sub * n_sub)
    p = np.asarray(point, dtype=float)
    total = 0.0
    for k in range(0, n_edges, 256):
        sl = slice(k, min(k + 256, n_edges))
        pts = (ctr[None, None, :]
               + bary[None, :, 0, None] * e1[sl][:, None, :]
               + bary[None, :, 1, None] * e2[sl][:, None, :])
        d2 = np.sum((pts - p[None, None, :]) ** 2, axis=2)
        total += np.sum(0.5 * np.log(d2) * sub_area[sl][:, None])
    return -q / (2.0 * np.pi) * total


def ray_contains(c, center, point, n=512):
    """Even-odd containment via horizontal ray casting."""
    v = fourier_vertices(c, center, n)
    x, y = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x, -1), np.roll(y, -1)
    px, py = float(point[0]), float(point[1])
    cond = (y > py) != (y1 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x + (py - y) * (x1 - x) / np.where(y1 == y, np.inf, y1 - y)
    return bool(np.sum(cond & (xint > px)) % 2 == 1)


def point_source_temp(total_heat, center, point):
    """Far-field equivalent of a compact source: -(Q / 2 pi) log r."""
    r = np.hypot(point[0] - center[0], point[1] - center[1])
    return -total_heat / (2.0 * np.pi) * np.log(r)
