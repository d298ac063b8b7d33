"""Planar regions used for bump supports, masks and the star polygon.

A region only needs a vectorized membership test; bump profiles measure
distances on the grid, so no analytic distance functions are required here
beyond segment arithmetic for the polygon gap computations.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

__all__ = ["DiscRegion", "StarPolygon", "StarRegion", "RegionDifference", "segment_gap"]


class Region:
    """Base class: subclasses implement contains(x, y) -> bool array."""

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class DiscRegion(Region):
    center: complex
    radius: float

    def contains(self, x, y):
        return (x - self.center.real) ** 2 + (y - self.center.imag) ** 2 <= self.radius**2


@dataclass(frozen=True)
class RegionDifference(Region):
    """Points of `keep` that are not in `remove` (remove taken closed)."""

    keep: Region
    remove: Region

    def contains(self, x, y):
        return self.keep.contains(x, y) & ~self.remove.contains(x, y)


@dataclass(frozen=True)
class StarPolygon:
    """2N-gon with long and short spokes alternating around a center.

    Vertex m (m = 1..2N, angles m*pi/N) sits at radius 7r for even m and r
    for odd m; arm tips at radius 6r are stored separately as guide points.
    The polygon is star-shaped about its center, so membership reduces to
    comparing |p - center| against the boundary radius in the direction of p.
    A shrink factor beta in [0, 1) rescales the polygon toward the center.
    """

    center: complex
    r: float
    n_arms: int
    outer_vertices: np.ndarray = field(init=False)  # z'_k, k = 1..N
    inner_vertices: np.ndarray = field(init=False)  # w_k,  k = 1..N
    arm_tips: np.ndarray = field(init=False)  # z_k,  k = 1..N

    def __post_init__(self):
        if self.n_arms < 2:
            raise ParameterError(f"need at least 2 arms, got {self.n_arms}")
        if not self.r > 0:
            raise ParameterError(f"star radius must be positive, got {self.r}")
        k = np.arange(1, self.n_arms + 1)
        object.__setattr__(
            self, "outer_vertices", self.center + 7 * self.r * np.exp(2j * np.pi * k / self.n_arms)
        )
        object.__setattr__(
            self, "inner_vertices", self.center + self.r * np.exp(1j * np.pi * (2 * k + 1) / self.n_arms)
        )
        object.__setattr__(
            self, "arm_tips", self.center + 6 * self.r * np.exp(2j * np.pi * k / self.n_arms)
        )

    def boundary_vertices(self, beta: float = 0.0) -> np.ndarray:
        """Boundary loop z'_1, w_1, z'_2, w_2, ..., z'_N, w_N of the beta-shrink."""
        loop = np.empty(2 * self.n_arms, dtype=complex)
        loop[0::2] = self.outer_vertices
        loop[1::2] = self.inner_vertices
        return self.center + (1.0 - beta) * (loop - self.center)

    def boundary_radius(self, theta: np.ndarray) -> np.ndarray:
        """Distance from the center to the unshrunk boundary along direction theta."""
        n = self.n_arms
        step = np.pi / n
        # vertex m at angle m*step with radius 7r (m even) or r (m odd)
        m0 = np.floor(np.asarray(theta, dtype=float) / step).astype(np.int64)
        a0 = m0 * step
        a1 = (m0 + 1) * step
        r0 = np.where(m0 % 2 == 0, 7.0 * self.r, self.r)
        r1 = np.where((m0 + 1) % 2 == 0, 7.0 * self.r, self.r)
        # ray t*e^{i theta} meets the chord between (a0, r0) and (a1, r1):
        # t = cross(P0, P1) / cross(e^{i theta}, P1 - P0)
        p0x, p0y = r0 * np.cos(a0), r0 * np.sin(a0)
        p1x, p1y = r1 * np.cos(a1), r1 * np.sin(a1)
        num = p0x * p1y - p0y * p1x
        dx, dy = p1x - p0x, p1y - p0y
        den = np.cos(theta) * dy - np.sin(theta) * dx
        return num / den

    def contains(self, x, y, beta: float = 0.0, interior: bool = False) -> np.ndarray:
        """Membership in the beta-shrink K^beta; interior=True tests strictly."""
        dx = np.asarray(x, dtype=float) - self.center.real
        dy = np.asarray(y, dtype=float) - self.center.imag
        rho = np.hypot(dx, dy)
        theta = np.mod(np.arctan2(dy, dx), 2 * np.pi)
        bound = (1.0 - beta) * self.boundary_radius(theta)
        return rho < bound if interior else rho <= bound

    def boundary_segments(self, beta: float = 0.0) -> np.ndarray:
        """(2N, 2) complex array of segment endpoints around the beta-shrink."""
        loop = self.boundary_vertices(beta)
        return np.stack([loop, np.roll(loop, -1)], axis=1)


class StarRegion(Region):
    """Region adapter for a shrink of a StarPolygon."""

    def __init__(self, star: StarPolygon, beta: float = 0.0, interior: bool = False):
        self.star = star
        self.beta = beta
        self.interior = interior

    def contains(self, x, y):
        return self.star.contains(x, y, beta=self.beta, interior=self.interior)


def _segment_distance(a0: complex, a1: complex, b0: complex, b1: complex) -> float:
    """Euclidean distance between segments [a0,a1] and [b0,b1]."""

    def pt_seg(p, q0, q1):
        d = q1 - q0
        dd = (d * d.conjugate()).real
        if dd == 0.0:
            return abs(p - q0)
        t = ((p - q0) * d.conjugate()).real / dd
        t = min(1.0, max(0.0, t))
        return abs(p - (q0 + t * d))

    def orient(p, q, r):
        return (q - p).real * (r - p).imag - (q - p).imag * (r - p).real

    # proper intersection means distance zero
    d1, d2 = orient(a0, a1, b0), orient(a0, a1, b1)
    d3, d4 = orient(b0, b1, a0), orient(b0, b1, a1)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return 0.0
    return min(pt_seg(a0, b0, b1), pt_seg(a1, b0, b1), pt_seg(b0, a0, a1), pt_seg(b1, a0, a1))


def segment_gap(segments_a: np.ndarray, segments_b: np.ndarray) -> float:
    """Minimum distance between two families of segments ((n, 2) complex each)."""
    best = np.inf
    for a0, a1 in segments_a:
        for b0, b1 in segments_b:
            d = _segment_distance(a0, a1, b0, b1)
            if d < best:
                best = d
    return best
