"""Sampled scalar fields on square lattices.

Two samplers are provided.  `sample_zero_boundary` draws the truncated
eigenfunction series of the zero-boundary field on the unit square: modes
sin(j pi x) sin(k pi y) scaled to unit Dirichlet norm under the
(1/2pi)-prefixed inner product (norm^2 of the raw mode is (j^2+k^2) pi / 8),
with independent standard-normal coefficients.  `sample_whole_plane_proxy`
embeds a window of half-side 1 centered at 0 in a pad_factor-times-larger
zero-boundary box, restricts, and subtracts the circle average at radius 1
about the window center so that average is pinned to zero.

Spectral truncation at `cutoff` doubles as the mollification: the vertex
values are the mollified field, no second smoothing pass is applied.
"""

from dataclasses import dataclass, replace
from enum import IntEnum
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .errors import GeometryError, ParameterError
from .geometry import Region
from .rng import mode_normals

__all__ = [
    "FieldKind",
    "FieldGrid",
    "BumpField",
    "sample_zero_boundary",
    "sample_whole_plane_proxy",
    "circle_average",
    "add_function",
    "make_bump",
]


class FieldKind(IntEnum):
    ZERO_BOUNDARY = 0
    WHOLE_PLANE_PROXY = 1


@dataclass(frozen=True)
class FieldGrid:
    """Scalar field sampled at the vertices of a square lattice.

    values[row, col] is the sample at origin + col*spacing + 1j*row*spacing
    (row-major from the lower-left corner).  Instances are immutable; the
    value array is marked read-only so grids can be shared across workers.
    """

    n: int
    spacing: float
    origin: complex
    values: np.ndarray
    kind: FieldKind
    cutoff: int
    seed: int
    notes: tuple = ()

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != (self.n, self.n):
            raise ParameterError(f"values must be {self.n}x{self.n}, got {v.shape}")
        if not np.isfinite(v).all():
            raise ParameterError("field values must all be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def side(self) -> float:
        return (self.n - 1) * self.spacing

    @property
    def center(self) -> complex:
        return self.origin + 0.5 * self.side * (1 + 1j)

    def axes(self):
        """x and y coordinates of the vertex columns and rows."""
        t = self.origin.real + self.spacing * np.arange(self.n)
        u = self.origin.imag + self.spacing * np.arange(self.n)
        return t, u

    def with_values(self, values: np.ndarray, note: str | None = None) -> "FieldGrid":
        notes = self.notes + ((note,) if note else ())
        return replace(self, values=values, notes=notes)


@dataclass(frozen=True)
class BumpField:
    """Deterministic plateau profile on the same lattice layout as FieldGrid.

    values equal `amplitude` on inner_region, 0 outside outer_region, and
    follow amplitude * (1 - 3t^2 + 2t^3) in between, where t is grid-measured
    Euclidean distance to the inner region normalized by the gap width.
    """

    n: int
    spacing: float
    origin: complex
    values: np.ndarray
    amplitude: float
    inner_region: Region
    outer_region: Region

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _sine_matrix(n: int, cutoff: int) -> np.ndarray:
    """sin(j pi t_i) for grid coordinates t_i = i/(n-1) and j = 1..cutoff."""
    t = np.arange(n) / (n - 1)
    return np.sin(np.pi * np.outer(t, np.arange(1, cutoff + 1)))


@lru_cache(maxsize=4)
def _sine_matrix_cached(n: int, cutoff: int) -> np.ndarray:
    m = _sine_matrix(n, cutoff)
    m.setflags(write=False)
    return m


def _sample_box_values(n: int, cutoff: int, seed: int) -> np.ndarray:
    """Truncated series on an n x n vertex grid over a square box.

    The Dirichlet normalization is scale invariant, so the box side never
    enters; callers attach spacing and origin.  Modes with index n-1 vanish
    at every vertex and are skipped without changing the sampled values.
    """
    j_eff = min(cutoff, n - 2)
    alpha = mode_normals(seed, j_eff)
    j = np.arange(1, j_eff + 1)
    jj, kk = np.meshgrid(j, j, indexing="ij")
    coeff = alpha / np.sqrt((jj**2 + kk**2) * np.pi / 8.0)
    s = _sine_matrix_cached(n, j_eff)
    # values[row, col] = sum_jk coeff[j,k] sin(j pi x_col) sin(k pi y_row)
    vals = s @ coeff.T @ s.T
    vals[0, :] = 0.0
    vals[-1, :] = 0.0
    vals[:, 0] = 0.0
    vals[:, -1] = 0.0
    return vals


def sample_zero_boundary(n: int, cutoff: int, seed: int) -> FieldGrid:
    """Zero-boundary sample on the unit square, spacing 1/(n-1).

    Requires n >= 8 and 1 <= cutoff <= n-1; cutoff >= n is refused rather
    than letting modes alias onto the grid.  Same seed gives bit-identical
    output.
    """
    if n < 8:
        raise ParameterError(f"grid side must be at least 8 vertices, got {n}")
    if cutoff < 1:
        raise ParameterError(f"cutoff must be positive, got {cutoff}")
    if cutoff >= n:
        raise ParameterError(
            f"cutoff {cutoff} >= n {n} would alias modes onto the lattice; refusing"
        )
    values = _sample_box_values(n, cutoff, seed)
    return FieldGrid(
        n=n,
        spacing=1.0 / (n - 1),
        origin=0j,
        values=values,
        kind=FieldKind.ZERO_BOUNDARY,
        cutoff=cutoff,
        seed=int(seed),
    )


def sample_whole_plane_proxy(n: int, pad_factor: int, cutoff: int, seed: int) -> FieldGrid:
    """Whole-plane stand-in on the window [-1, 1]^2, normalized at radius 1.

    A zero-boundary field is sampled on a box pad_factor times the window
    (same vertex spacing), the central n x n window is cut out, and the
    discretized circle average at radius 1 about the window center is
    subtracted.  `cutoff` refers to the spectral truncation of the padded
    box.  Restriction of the larger-box field to an interior window is the
    mutual-absolute-continuity surrogate for the whole-plane law.
    """
    if n < 8:
        raise ParameterError(f"grid side must be at least 8 vertices, got {n}")
    if pad_factor < 3:
        raise ParameterError(f"pad_factor must be at least 3, got {pad_factor}")
    n_big = pad_factor * (n - 1) + 1
    if cutoff < 1:
        raise ParameterError(f"cutoff must be positive, got {cutoff}")
    if cutoff >= n_big:
        raise ParameterError(
            f"cutoff {cutoff} >= padded side {n_big} would alias; refusing"
        )
    spacing = 2.0 / (n - 1)
    big = _sample_box_values(n_big, cutoff, seed)
    off = (n_big - n) // 2
    window = big[off : off + n, off : off + n].copy()
    origin = complex(-1.0, -1.0)
    grid = FieldGrid(
        n=n,
        spacing=spacing,
        origin=origin,
        values=window,
        kind=FieldKind.WHOLE_PLANE_PROXY,
        cutoff=cutoff,
        seed=int(seed),
    )
    pin = circle_average(grid, grid.center, 1.0)
    return replace(grid, values=window - pin)


def _interpolate(field: FieldGrid, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear interpolation; coordinates must lie within the closed domain."""
    u = (xs - field.origin.real) / field.spacing
    v = (ys - field.origin.imag) / field.spacing
    j0 = np.clip(np.floor(u).astype(np.int64), 0, field.n - 2)
    i0 = np.clip(np.floor(v).astype(np.int64), 0, field.n - 2)
    fu = u - j0
    fv = v - i0
    val = field.values
    return (
        val[i0, j0] * (1 - fv) * (1 - fu)
        + val[i0, j0 + 1] * (1 - fv) * fu
        + val[i0 + 1, j0] * fv * (1 - fu)
        + val[i0 + 1, j0 + 1] * fv * fu
    )


def circle_average(field: FieldGrid, z: complex, r: float) -> float:
    """Mean of the interpolated field over max(64, ceil(8 pi r / spacing))
    equispaced points on the circle of radius r about z.

    The circle must stay inside the closed grid domain (tolerance one part
    in 1e9 of the side, to absorb rounding of the domain extent).
    """
    if not r > 0:
        raise ParameterError(f"circle radius must be positive, got {r}")
    side = field.side
    tol = 1e-9 * max(1.0, side)
    x0, y0 = field.origin.real, field.origin.imag
    if (
        z.real - r < x0 - tol
        or z.real + r > x0 + side + tol
        or z.imag - r < y0 - tol
        or z.imag + r > y0 + side + tol
    ):
        raise GeometryError(
            f"circle of radius {r} about {z} exits the grid domain "
            f"[{x0}, {x0 + side}] x [{y0}, {y0 + side}]"
        )
    m = max(64, int(np.ceil(8 * np.pi * r / field.spacing)))
    theta = 2 * np.pi * np.arange(m) / m
    xs = z.real + r * np.cos(theta)
    ys = z.imag + r * np.sin(theta)
    return float(_interpolate(field, xs, ys).mean())


def _same_geometry(a, b) -> bool:
    return a.n == b.n and a.spacing == b.spacing and a.origin == b.origin


def add_function(field: FieldGrid, f) -> FieldGrid:
    """Pointwise sum of a field with another field or bump on the same lattice."""
    if not _same_geometry(field, f):
        raise GeometryError(
            f"grid geometry mismatch: ({field.n}, {field.spacing}, {field.origin})"
            f" vs ({f.n}, {f.spacing}, {f.origin})"
        )
    label = type(f).__name__
    amp = getattr(f, "amplitude", None)
    note = f"add:{label}" + (f"(amplitude={amp:g})" if amp is not None else "")
    return field.with_values(field.values + f.values, note=note)


def make_bump(geometry, inner_region: Region, outer_region: Region, amplitude: float) -> BumpField:
    """Smoothstep plateau: `amplitude` on inner_region, 0 outside outer_region.

    `geometry` is any object carrying n, spacing, origin (a FieldGrid works).
    Distances to the inner region are measured on the grid by an exact
    Euclidean distance transform and normalized by the measured gap between
    the inner region and the complement of the outer region; the profile is
    the reversed C1 smoothstep 1 - 3t^2 + 2t^3.  A nonpositive gap (regions
    touching or crossing at vertex resolution) is refused.
    """
    n, spacing, origin = geometry.n, geometry.spacing, geometry.origin
    xs = origin.real + spacing * np.arange(n)
    ys = origin.imag + spacing * np.arange(n)
    gx, gy = np.meshgrid(xs, ys)  # gx[row, col] = x_col, gy[row, col] = y_row
    in_inner = inner_region.contains(gx, gy)
    in_outer = outer_region.contains(gx, gy)
    if np.any(in_inner & ~in_outer):
        raise GeometryError("inner region is not contained in the outer region")
    dist_inner = ndimage.distance_transform_edt(~in_inner, sampling=spacing)
    outside = ~in_outer
    if in_inner.any() and outside.any():
        gap = float(dist_inner[outside].min())
        if gap <= 0.0:
            raise GeometryError("zero gap between inner and outer regions")
    else:
        gap = np.inf  # degenerate: no transition band on this grid
    t = np.clip(dist_inner / gap, 0.0, 1.0)
    profile = 1.0 - 3.0 * t**2 + 2.0 * t**3
    values = np.where(in_outer, amplitude * profile, 0.0)
    values[in_inner] = amplitude
    return BumpField(
        n=n,
        spacing=spacing,
        origin=origin,
        values=values,
        amplitude=float(amplitude),
        inner_region=inner_region,
        outer_region=outer_region,
    )
