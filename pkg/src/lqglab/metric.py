"""First-passage metric on the 8-connected lattice of a sampled field.

Vertex weight w(v) = exp(xi * h(v)) * spacing; the edge between 8-neighbors
u, v costs (w(u) + w(v))/2 times 1 for axis steps and sqrt(2) for diagonal
steps.  The endpoint average keeps the constant-shift identity
d_{h+M} = e^{xi M} d_h exact, which the tests lean on.

All queries run on a jitted binary-heap Dijkstra with deterministic
tie-breaking: the heap orders by (distance, vertex index) and predecessor
ties resolve to the smallest vertex index, so geodesics are a pure function
of their inputs.  Disconnected queries return math.inf rather than raising;
masked explorations legitimately disconnect.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import GeometryError, ParameterError
from .field import FieldGrid
from .params import LqgParams

__all__ = [
    "WeightedGrid",
    "GridPath",
    "build_metric",
    "distance",
    "set_distance",
    "diameter",
    "geodesic",
    "metric_ball",
    "distance_field",
    "separated_pair_infimum",
    "ring_vertices",
    "disc_vertices",
    "annulus_vertices",
    "min_edge_weight",
    "max_edge_along",
    "write_distance_csv",
    "write_path_csv",
]

_SQRT2 = float(np.sqrt(2.0))

# (drow, dcol, step length in cell units) for the 8 neighbors
_OFFSETS = np.array(
    [
        (-1, -1, _SQRT2),
        (-1, 0, 1.0),
        (-1, 1, _SQRT2),
        (0, -1, 1.0),
        (0, 1, 1.0),
        (1, -1, _SQRT2),
        (1, 0, 1.0),
        (1, 1, _SQRT2),
    ],
    dtype=np.float64,
)


@dataclass(frozen=True)
class WeightedGrid:
    """Immutable vertex-weighted lattice; safe for concurrent read queries."""

    n: int
    spacing: float
    origin: complex
    weight: np.ndarray
    params: LqgParams
    mask: np.ndarray | None = None

    def __post_init__(self):
        w = np.ascontiguousarray(self.weight, dtype=np.float64)
        if w.shape != (self.n, self.n):
            raise ParameterError(f"weight must be {self.n}x{self.n}, got {w.shape}")
        if not np.isfinite(w).all() or not (w > 0).all():
            raise ParameterError("vertex weights must be strictly positive and finite")
        w.setflags(write=False)
        object.__setattr__(self, "weight", w)
        if self.mask is not None:
            m = np.ascontiguousarray(self.mask, dtype=bool)
            if m.shape != (self.n, self.n):
                raise ParameterError("mask shape mismatch")
            m.setflags(write=False)
            object.__setattr__(self, "mask", m)

    def vertex_position(self, v) -> complex:
        r, c = v
        return self.origin + complex(c * self.spacing, r * self.spacing)


@dataclass(frozen=True)
class GridPath:
    """Ordered 8-neighbor vertex walk with its edge-weight length."""

    vertices: tuple
    length: float


def build_metric(field: FieldGrid, params: LqgParams, mask: np.ndarray | None = None) -> WeightedGrid:
    """Exponentiate the field into vertex weights exp(xi h) * spacing."""
    if not np.isfinite(field.values).all():
        raise ParameterError("field has non-finite values")
    weight = np.exp(params.xi * field.values) * field.spacing
    if not np.isfinite(weight).all():
        raise ParameterError("xi * field overflows the exponential weight range")
    return WeightedGrid(
        n=field.n,
        spacing=field.spacing,
        origin=field.origin,
        weight=weight,
        params=params,
        mask=mask,
    )


# --------------------------------------------------------------------------
# jitted sweeps


@njit(cache=True)
def _heap_swap_up(hd, hv, i):
    while i > 0:
        p = (i - 1) >> 1
        if hd[p] > hd[i] or (hd[p] == hd[i] and hv[p] > hv[i]):
            hd[p], hd[i] = hd[i], hd[p]
            hv[p], hv[i] = hv[i], hv[p]
            i = p
        else:
            break


@njit(cache=True)
def _heap_sift_down(hd, hv, size):
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        m = i
        if l < size and (hd[l] < hd[m] or (hd[l] == hd[m] and hv[l] < hv[m])):
            m = l
        if r < size and (hd[r] < hd[m] or (hd[r] == hd[m] and hv[r] < hv[m])):
            m = r
        if m == i:
            break
        hd[m], hd[i] = hd[i], hd[m]
        hv[m], hv[i] = hv[i], hv[m]
        i = m


@njit(cache=True)
def _sweep(weight, mask, sources, stop_radius, target_flag, target_mode):
    """Multi-source Dijkstra over the masked 8-lattice.

    target_mode: 0 none, 1 stop at first flagged pop, 2 stop once every
    flagged vertex is popped.  Vertices popped with distance > stop_radius
    terminate the sweep (their distance stays provisional).
    Returns (dist, pred, hit) with hit = flat index of the mode-1 pop.
    """
    n = weight.shape[0]
    nv = n * n
    dist = np.full(nv, np.inf)
    pred = np.full(nv, -1, dtype=np.int64)
    done = np.zeros(nv, dtype=np.uint8)
    n_targets = 0
    if target_mode == 2:
        for i in range(nv):
            if target_flag[i]:
                n_targets += 1
    cap = 4 * (sources.shape[0] + 64)
    hd = np.empty(cap)
    hv = np.empty(cap, dtype=np.int64)
    size = 0
    for si in range(sources.shape[0]):
        s = sources[si]
        if mask[s // n, s % n] and dist[s] != 0.0:
            dist[s] = 0.0
            hd[size] = 0.0
            hv[size] = s
            _heap_swap_up(hd, hv, size)
            size += 1
    hit = np.int64(-1)
    popped_targets = 0
    while size > 0:
        d = hd[0]
        v = hv[0]
        size -= 1
        hd[0] = hd[size]
        hv[0] = hv[size]
        _heap_sift_down(hd, hv, size)
        if done[v]:
            continue
        if d > stop_radius:
            break
        done[v] = 1
        if target_flag.shape[0] > 0 and target_flag[v]:
            if target_mode == 1:
                hit = v
                break
            if target_mode == 2:
                popped_targets += 1
                if popped_targets == n_targets:
                    break
        r = v // n
        c = v % n
        wv = weight[r, c]
        for k in range(8):
            rr = r + np.int64(_OFFSETS[k, 0])
            cc = c + np.int64(_OFFSETS[k, 1])
            if rr < 0 or rr >= n or cc < 0 or cc >= n:
                continue
            if not mask[rr, cc]:
                continue
            u = rr * n + cc
            if done[u]:
                continue
            nd = d + 0.5 * (wv + weight[rr, cc]) * _OFFSETS[k, 2]
            if nd < dist[u] or (nd == dist[u] and v < pred[u]):
                if nd < dist[u]:
                    dist[u] = nd
                    if size >= cap:
                        nhd = np.empty(cap * 2)
                        nhv = np.empty(cap * 2, dtype=np.int64)
                        nhd[:cap] = hd
                        nhv[:cap] = hv
                        hd = nhd
                        hv = nhv
                        cap *= 2
                    hd[size] = nd
                    hv[size] = u
                    _heap_swap_up(hd, hv, size)
                    size += 1
                pred[u] = v
    return dist, pred, hit


@njit(cache=True)
def _separated_scan(weight, mask, region, sources, zeta_cells_sq, stop_init):
    """Min d(source, w) over region vertices w with cell separation >= zeta.

    One early-terminated sweep per source; the first qualifying pop is that
    source's minimum, and the shared stop bound shrinks as better pairs are
    found.  Stamped buffers avoid per-source clears.
    """
    n = weight.shape[0]
    nv = n * n
    dist = np.empty(nv)
    pred_epoch = np.zeros(nv, dtype=np.int64)
    done_epoch = np.zeros(nv, dtype=np.int64)
    cap = 1024
    hd = np.empty(cap)
    hv = np.empty(cap, dtype=np.int64)
    best = stop_init
    for si in range(sources.shape[0]):
        epoch = si + 1
        s = sources[si]
        sr = s // n
        sc = s % n
        size = 0
        dist[s] = 0.0
        pred_epoch[s] = epoch
        hd[0] = 0.0
        hv[0] = s
        size = 1
        while size > 0:
            d = hd[0]
            v = hv[0]
            size -= 1
            hd[0] = hd[size]
            hv[0] = hv[size]
            _heap_sift_down(hd, hv, size)
            if done_epoch[v] == epoch:
                continue
            if d > best:
                break
            done_epoch[v] = epoch
            r = v // n
            c = v % n
            if region[v]:
                dr = r - sr
                dc = c - sc
                if dr * dr + dc * dc >= zeta_cells_sq:
                    if d < best:
                        best = d
                    break  # first qualifying pop is minimal for this source
            wv = weight[r, c]
            for k in range(8):
                rr = r + np.int64(_OFFSETS[k, 0])
                cc = c + np.int64(_OFFSETS[k, 1])
                if rr < 0 or rr >= n or cc < 0 or cc >= n:
                    continue
                if not mask[rr, cc]:
                    continue
                u = rr * n + cc
                if done_epoch[u] == epoch:
                    continue
                nd = d + 0.5 * (wv + weight[rr, cc]) * _OFFSETS[k, 2]
                if pred_epoch[u] != epoch or nd < dist[u]:
                    dist[u] = nd
                    pred_epoch[u] = epoch
                    if size >= cap:
                        nhd = np.empty(cap * 2)
                        nhv = np.empty(cap * 2, dtype=np.int64)
                        nhd[:cap] = hd
                        nhv[:cap] = hv
                        hd = nhd
                        hv = nhv
                        cap *= 2
                    hd[size] = nd
                    hv[size] = u
                    _heap_swap_up(hd, hv, size)
                    size += 1
    return best


# --------------------------------------------------------------------------
# vertex-set plumbing


def _effective_mask(wg: WeightedGrid, mask) -> np.ndarray:
    if mask is None:
        eff = np.ones((wg.n, wg.n), dtype=bool) if wg.mask is None else wg.mask.copy()
    else:
        m = np.asarray(mask, dtype=bool)
        if m.shape != (wg.n, wg.n):
            raise ParameterError("query mask shape mismatch")
        eff = m if wg.mask is None else (m & wg.mask)
    return np.ascontiguousarray(eff, dtype=bool)


def _as_flat_set(wg: WeightedGrid, vertices) -> np.ndarray:
    """Normalize a vertex collection (bool grid or iterable of (r, c)) to flat ids."""
    if isinstance(vertices, np.ndarray) and vertices.dtype == bool:
        if vertices.shape != (wg.n, wg.n):
            raise ParameterError("vertex-set mask shape mismatch")
        return np.flatnonzero(vertices.ravel()).astype(np.int64)
    flats = []
    for r, c in vertices:
        if not (0 <= r < wg.n and 0 <= c < wg.n):
            raise GeometryError(f"vertex ({r}, {c}) outside the {wg.n}x{wg.n} grid")
        flats.append(r * wg.n + c)
    return np.asarray(flats, dtype=np.int64)


def _check_admissible(wg, flats, mask, what):
    rows, cols = flats // wg.n, flats % wg.n
    if not mask[rows, cols].all():
        raise GeometryError(f"{what} contains vertices excluded by the mask")


_NO_TARGETS = np.zeros(0, dtype=np.uint8)


def distance_field(wg: WeightedGrid, sources, mask=None, stop_radius=np.inf, targets=None, target_mode=0):
    """Raw multi-source sweep; returns (dist grid, pred grid, hit flat id).

    Building block for the public queries and the experiment module.
    """
    eff = _effective_mask(wg, mask)
    src = _as_flat_set(wg, sources)
    if src.size == 0:
        raise ParameterError("empty source set")
    _check_admissible(wg, src, eff, "source set")
    tflag = _NO_TARGETS
    if targets is not None:
        tflag = np.zeros(wg.n * wg.n, dtype=np.uint8)
        tflag[_as_flat_set(wg, targets)] = 1
    dist, pred, hit = _sweep(wg.weight, eff, src, float(stop_radius), tflag, target_mode)
    return dist.reshape(wg.n, wg.n), pred.reshape(wg.n, wg.n), int(hit)


def distance(wg: WeightedGrid, a, b, mask=None) -> float:
    """Length of the shortest admissible 8-neighbor path from a to b.

    The sweep always starts from the smaller flat index, so d(a, b) and
    d(b, a) are the same floating-point number, not merely close.
    """
    eff = _effective_mask(wg, mask)
    fa = _as_flat_set(wg, [a])
    fb = _as_flat_set(wg, [b])
    _check_admissible(wg, fa, eff, "endpoint a")
    _check_admissible(wg, fb, eff, "endpoint b")
    if fa[0] == fb[0]:
        return 0.0
    src, dst = (fa, fb) if fa[0] <= fb[0] else (fb, fa)
    tflag = np.zeros(wg.n * wg.n, dtype=np.uint8)
    tflag[dst[0]] = 1
    dist_, _, hit = _sweep(wg.weight, eff, src, np.inf, tflag, 1)
    return float(dist_[dst[0]]) if hit >= 0 else np.inf


def set_distance(wg: WeightedGrid, set_a, set_b, mask=None) -> float:
    """min over a in A, b in B of distance(a, b), via one multi-source sweep."""
    eff = _effective_mask(wg, mask)
    fa = _as_flat_set(wg, set_a)
    fb = _as_flat_set(wg, set_b)
    if fa.size == 0 or fb.size == 0:
        raise ParameterError("set_distance requires nonempty vertex sets")
    _check_admissible(wg, fa, eff, "set A")
    _check_admissible(wg, fb, eff, "set B")
    tflag = np.zeros(wg.n * wg.n, dtype=np.uint8)
    tflag[fb] = 1
    dist_, _, hit = _sweep(wg.weight, eff, fa, np.inf, tflag, 1)
    return float(dist_.ravel()[hit]) if hit >= 0 else np.inf


def diameter(wg: WeightedGrid, vertex_set, mask=None) -> float:
    """Exact max pairwise distance within the set (paths per the given mask).

    Pruned farthest-point search: vertices are processed in decreasing
    distance from a central member, and processing stops once twice the
    current level cannot beat the best eccentricity found; every surviving
    pair is covered by a processed eccentricity, so the result is exact.
    """
    eff = _effective_mask(wg, mask)
    flats = _as_flat_set(wg, vertex_set)
    if flats.size == 0:
        raise ParameterError("diameter requires a nonempty vertex set")
    _check_admissible(wg, flats, eff, "vertex set")
    if flats.size == 1:
        return 0.0
    tflag = np.zeros(wg.n * wg.n, dtype=np.uint8)
    tflag[flats] = 1
    rows, cols = flats // wg.n, flats % wg.n
    cx, cy = rows.mean(), cols.mean()
    c = flats[np.argmin((rows - cx) ** 2 + (cols - cy) ** 2)]
    dist_, _, _ = _sweep(wg.weight, eff, np.array([c], dtype=np.int64), np.inf, tflag, 2)
    level = dist_[flats]
    if not np.isfinite(level).all():
        return np.inf
    lb = float(level.max())
    order = flats[np.argsort(-level, kind="stable")]
    level_sorted = np.sort(level)[::-1]
    for v, lv in zip(order, level_sorted):
        if v == c:
            continue
        if 2.0 * lv <= lb:
            break
        dv, _, _ = _sweep(wg.weight, eff, np.array([v], dtype=np.int64), np.inf, tflag, 2)
        ecc = dv[flats].max()
        if not np.isfinite(ecc):
            return np.inf
        lb = max(lb, float(ecc))
    return lb


def geodesic(wg: WeightedGrid, a, b, mask=None):
    """A shortest path realizing distance(a, b), or None if disconnected."""
    eff = _effective_mask(wg, mask)
    fa = _as_flat_set(wg, [a])
    fb = _as_flat_set(wg, [b])
    _check_admissible(wg, fa, eff, "endpoint a")
    _check_admissible(wg, fb, eff, "endpoint b")
    if fa[0] == fb[0]:
        return GridPath(vertices=(tuple(a),), length=0.0)
    tflag = np.zeros(wg.n * wg.n, dtype=np.uint8)
    tflag[fb[0]] = 1
    dist_, pred, hit = _sweep(wg.weight, eff, fa, np.inf, tflag, 1)
    if hit < 0:
        return None
    chain = []
    v = fb[0]
    while v >= 0:
        chain.append((int(v // wg.n), int(v % wg.n)))
        v = pred[v]
    chain.reverse()
    return GridPath(vertices=tuple(chain), length=float(dist_[fb[0]]))


def metric_ball(wg: WeightedGrid, center, s: float, mask=None) -> np.ndarray:
    """Boolean grid of admissible vertices with distance(center, v) < s."""
    if s < 0:
        raise ParameterError(f"ball radius must be nonnegative, got {s}")
    eff = _effective_mask(wg, mask)
    fc = _as_flat_set(wg, [center])
    _check_admissible(wg, fc, eff, "ball center")
    dist_, _, _ = _sweep(wg.weight, eff, fc, float(s), _NO_TARGETS, 0)
    return (dist_ < s).reshape(wg.n, wg.n) & eff


# --------------------------------------------------------------------------
# separated-pair infimum (events of the star experiment)


def min_edge_weight(wg: WeightedGrid, mask_a: np.ndarray, mask_b: np.ndarray | None = None, min_step: float = 0.0):
    """Minimum edge weight over 8-neighbor pairs (u in A, v in B).

    Only offsets whose Euclidean step length reaches min_step contribute.
    Returns inf when no qualifying pair exists.
    """
    if mask_b is None:
        mask_b = mask_a
    w = wg.weight
    n = wg.n
    best = np.inf
    for dr, dc, ell in _OFFSETS:
        step = ell * wg.spacing
        if step < min_step:
            continue
        dr, dc = int(dr), int(dc)
        # u ranges over rows/cols where u + (dr, dc) stays on the grid
        rows = slice(max(0, -dr), n - max(0, dr))
        cols = slice(max(0, -dc), n - max(0, dc))
        rows_b = slice(max(0, dr), n - max(0, -dr))
        cols_b = slice(max(0, dc), n - max(0, -dc))
        pair = mask_a[rows, cols] & mask_b[rows_b, cols_b]
        if pair.any():
            cand = float((0.5 * (w[rows, cols] + w[rows_b, cols_b]))[pair].min() * ell)
            if cand < best:
                best = cand
    return best


def separated_pair_infimum(
    wg: WeightedGrid,
    region: np.ndarray,
    zeta: float,
    mask=None,
    threshold: float | None = None,
    stride: int = 2,
):
    """inf of d(z, w) over region vertices with Euclidean separation >= zeta.

    Returns (value, certificate) with certificate one of:
      "witness"  an adjacent qualifying pair already sits below the threshold
                 (value is that pair's edge weight, an upper bound on the inf);
      "lower"    every admissible path between zeta-separated vertices costs
                 at least value >= threshold (step-count times minimum edge);
      "scan"     value is the minimum found over sweeps from a source
                 subsample of density 1/stride^2 (an upper estimate of the
                 true infimum, per the declared subsampling).

    With threshold=None the scan always runs (calibration mode).
    """
    if not zeta > 0:
        raise ParameterError(f"separation zeta must be positive, got {zeta}")
    eff = _effective_mask(wg, mask)
    reg = np.asarray(region, dtype=bool) & eff
    if not reg.any():
        raise ParameterError("empty region for separated-pair infimum")
    # upper bound from adjacent qualifying pairs inside the region
    ub = min_edge_weight(wg, reg, min_step=zeta)
    if threshold is not None:
        if ub < threshold:
            return ub, "witness"
        # any path between zeta-separated vertices makes >= ceil(zeta/step) moves
        steps = max(1, int(np.ceil(zeta / (_SQRT2 * wg.spacing))))
        floor = steps * min_edge_weight(wg, eff)
        if floor >= threshold:
            return floor, "lower"
    sub = np.zeros_like(reg)
    sub[::stride, ::stride] = True
    sources = np.flatnonzero((reg & sub).ravel()).astype(np.int64)
    if sources.size == 0:
        sources = np.flatnonzero(reg.ravel()).astype(np.int64)[:1]
    stop = ub if threshold is None else min(ub, float(threshold))
    zc = zeta / wg.spacing
    best = _separated_scan(wg.weight, eff, reg.ravel(), sources, zc * zc, stop)
    return float(min(ub, best)), "scan"


# --------------------------------------------------------------------------
# discretized circles, discs and annuli

def _vertex_radii(n: int, spacing: float, origin: complex, z: complex) -> np.ndarray:
    xs = origin.real + spacing * np.arange(n)
    ys = origin.imag + spacing * np.arange(n)
    return np.hypot(ys[:, None] - z.imag, xs[None, :] - z.real)


def ring_vertices(geom, z: complex, rho: float, width: float = 1.0) -> np.ndarray:
    """Discrete circle: vertices with |p - z| in [rho - width*spacing, rho].

    width=1 is the default one-cell band; certificates that must not be
    jumped by a diagonal step use width=1.5.
    """
    rad = _vertex_radii(geom.n, geom.spacing, geom.origin, z)
    return (rad >= rho - width * geom.spacing) & (rad <= rho)


def disc_vertices(geom, z: complex, rho: float, closed: bool = True) -> np.ndarray:
    rad = _vertex_radii(geom.n, geom.spacing, geom.origin, z)
    return rad <= rho if closed else rad < rho


def annulus_vertices(geom, z: complex, r_in: float, r_out: float) -> np.ndarray:
    """Open annulus r_in < |p - z| < r_out at vertex resolution."""
    rad = _vertex_radii(geom.n, geom.spacing, geom.origin, z)
    return (rad > r_in) & (rad < r_out)


def max_edge_along(wg: WeightedGrid, path: GridPath) -> float:
    """Largest single edge weight along a path (0 for single-vertex paths)."""
    best = 0.0
    for (r0, c0), (r1, c1) in zip(path.vertices, path.vertices[1:]):
        ell = 1.0 if (r0 == r1 or c0 == c1) else _SQRT2
        e = 0.5 * (wg.weight[r0, c0] + wg.weight[r1, c1]) * ell
        best = max(best, e)
    return best


# --------------------------------------------------------------------------
# CSV emitters

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_distance_csv(path, labels, matrix: np.ndarray) -> None:
    """Square distance matrix with a header row of vertex ids."""
    with open(path, "w", newline="\n") as fh:
        fh.write("id," + ",".join(str(l) for l in labels) + "\n")
        for label, row in zip(labels, matrix):
            fh.write(str(label) + "," + ",".join(_fmt(x) for x in row) + "\n")


def write_path_csv(path, grid_path: GridPath) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("row,col\n")
        for r, c in grid_path.vertices:
            fh.write(f"{r},{c}\n")
