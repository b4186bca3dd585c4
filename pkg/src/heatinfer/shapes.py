"""Heater regions bounded by truncated Fourier series.

A heater boundary is traced by

    x(t) = x0 + sum_k c_k cos(k t),    y(t) = y0 + sum_k c_k sin(k t)

for t in [0, 2*pi), with real coefficients c_k. c_1 plays the role of a
basic radius; higher coefficients deform the circle. All geometric
quantities (boundary polygon, area, first/second moments) derive from
this parameterization.
"""

import math
from dataclasses import dataclass

import numpy as np


class DegenerateShapeError(ValueError):
    """Raised when a boundary encloses non-positive net area."""


@dataclass(frozen=True)
class HeaterShape:
    """Fourier-parameterized heater region.

    c       : real Fourier coefficients (c_1, c_2, ...); c_1 > 0
    center  : (x0, y0) position of the parameterization center
    """

    c: tuple
    center: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.c)
        center = (float(self.center[0]), float(self.center[1]))
        if len(c) == 0:
            raise ValueError("coefficient sequence must be non-empty")
        if not all(math.isfinite(v) for v in c + center):
            raise ValueError("coefficients and center must be finite")
        if c[0] <= 0.0:
            raise ValueError(f"c_1 must be positive, got {c[0]}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "center", center)

    def mirrored(self) -> "HeaterShape":
        """Reflection across the line y = 0.

        A real-coefficient boundary is symmetric about the horizontal
        axis through its own center, so the mirror image is the same
        shape translated to (x0, -y0).
        """
        return HeaterShape(self.c, (self.center[0], -self.center[1]))


@dataclass(frozen=True)
class BoundaryPolygon:
    """Closed boundary polygon; vertices in counterclockwise order.

    The last vertex connects implicitly back to the first.
    """

    vertices: np.ndarray  # (n, 2)


@dataclass(frozen=True)
class MomentData:
    """Area and moments of a heater region, taken about its center.

    area          : enclosed area A
    first_moment  : (Fx, Fy), integral of the position over the region
    second_moment : 2x2 tensor M_ij, integral of eta_i * eta_j
    """

    area: float
    first_moment: np.ndarray  # (2,)
    second_moment: np.ndarray  # (2, 2)

    @property
    def centroid_offset(self) -> np.ndarray:
        """Centroid position relative to the parameterization center."""
        return self.first_moment / self.area


# cos/sin tables keyed by (n, number of coefficients); shared across calls
_TRIG_TABLES: dict = {}


def _tables(n: int, n_coef: int):
    key = (n, n_coef)
    tab = _TRIG_TABLES.get(key)
    if tab is None:
        theta = 2.0 * np.pi * np.arange(n) / n
        ks = np.arange(1.0, n_coef + 1.0)
        tab = (np.cos(np.outer(theta, ks)), np.sin(np.outer(theta, ks)), ks)
        _TRIG_TABLES[key] = tab
    return tab


def boundary_nodes(shape: HeaterShape, n: int):
    """Boundary samples and analytic tangents at t_j = 2*pi*j/n.

    Returns (x, y, dx, dy) arrays of length n, where (dx, dy) is the
    derivative of the parameterization with respect to t.
    """
    c = np.asarray(shape.c)
    ct, st, ks = _tables(n, len(c))
    x = shape.center[0] + ct @ c
    y = shape.center[1] + st @ c
    kc = ks * c
    dx = -(st @ kc)
    dy = ct @ kc
    return x, y, dx, dy


def boundary_points(shape: HeaterShape, n: int = 128) -> BoundaryPolygon:
    """Polygon with vertices on the boundary at n equally spaced angles.

    Rejects n < 8: too coarse to represent the region reliably.
    """
    if n < 8:
        raise ValueError(f"n must be at least 8, got {n}")
    x, y, _, _ = boundary_nodes(shape, n)
    return BoundaryPolygon(np.column_stack([x, y]))


def moments(shape: HeaterShape, n: int = 256) -> MomentData:
    """Area and moments of the boundary polygon at resolution n.

    Uses the shoelace rule for the area and the exact polygon formulas
    for the first and second moments about (x0, y0). Converges to the
    continuous-curve values as n grows.
    """
    if n < 32:
        raise ValueError(f"n must be at least 32, got {n}")
    poly = boundary_points(shape, n)
    v = poly.vertices - np.asarray(shape.center)
    x, y = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x, -1), np.roll(y, -1)
    cr = x * y1 - x1 * y
    area = 0.5 * float(np.sum(cr))
    if area <= 0.0:
        raise DegenerateShapeError(f"boundary encloses non-positive area {area}")
    fx = float(np.sum((x + x1) * cr)) / 6.0
    fy = float(np.sum((y + y1) * cr)) / 6.0
    mxx = float(np.sum((x * x + x * x1 + x1 * x1) * cr)) / 12.0
    myy = float(np.sum((y * y + y * y1 + y1 * y1) * cr)) / 12.0
    mxy = float(np.sum((x * y1 + 2.0 * x * y + 2.0 * x1 * y1 + x1 * y) * cr)) / 24.0
    return MomentData(area, np.array([fx, fy]), np.array([[mxx, mxy], [mxy, myy]]))


def curve_moments(shape: HeaterShape, n: int = 64) -> MomentData:
    """Moments of the continuous Fourier region, about (x0, y0).

    Green's theorem turns each area integral into a closed boundary
    integral whose integrand is a trigonometric polynomial; the
    trapezoidal rule is then exact once n exceeds its degree (4J + 1
    for the second moments). Used by the far-field expansion, which
    needs moments free of polygon discretization error.
    """
    c = np.asarray(shape.c)
    if n <= 4 * len(c):
        raise ValueError(f"n must exceed 4*len(c) = {4 * len(c)}")
    ct, st, ks = _tables(n, len(c))
    x = ct @ c
    y = st @ c
    kc = ks * c
    dx = -(st @ kc)
    dy = ct @ kc
    w = 2.0 * np.pi / n
    area = 0.5 * float(np.sum(x * dy - y * dx)) * w
    if area <= 0.0:
        raise DegenerateShapeError(f"boundary encloses non-positive area {area}")
    fx = 0.5 * float(np.sum(x * x * dy)) * w
    fy = -0.5 * float(np.sum(y * y * dx)) * w
    mxx = float(np.sum(x ** 3 * dy)) / 3.0 * w
    myy = -float(np.sum(y ** 3 * dx)) / 3.0 * w
    mxy = 0.5 * float(np.sum(x * x * y * dy)) * w
    return MomentData(area, np.array([fx, fy]), np.array([[mxx, mxy], [mxy, myy]]))


def contains(shape: HeaterShape, point, n: int = 256) -> bool:
    """Even-odd (ray crossing) test against the boundary polygon.

    Points exactly on an edge count as inside.
    """
    v = boundary_points(shape, max(n, 8)).vertices
    px, py = float(point[0]), float(point[1])
    x, y = v[:, 0], v[:, 1]
    x1, y1 = np.roll(x, -1), np.roll(y, -1)

    # on-edge check: colinear with the edge and within its extent
    ex, ey = x1 - x, y1 - y
    wx, wy = px - x, py - y
    cross = ex * wy - ey * wx
    dot = ex * wx + ey * wy
    len2 = ex * ex + ey * ey
    scale = np.sqrt(np.maximum(len2, 1e-300))
    on_edge = (np.abs(cross) <= 1e-12 * np.maximum(scale, 1.0)) & (dot >= 0.0) & (dot <= len2)
    if bool(np.any(on_edge)):
        return True

    crosses = (y > py) != (y1 > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x + (py - y) * ex / np.where(ey == 0.0, np.inf, ey)
    return bool(np.sum(crosses & (xint > px)) % 2 == 1)
