"""Finite metric spaces: cliques, covering numbers, dimension estimates.

An (N, K)-clique is N points whose largest pairwise distance is at most K
times the smallest.  Covering counts use greedy set cover, an upper bound on
the true covering number; every downstream quantity is phrased against that
bound.  The dimension estimate is the least-squares slope of log covering
count against log(R/r) over a caller-supplied ladder of scale pairs.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import FormatError, ParameterError

__all__ = [
    "FiniteMetric",
    "CliqueReport",
    "AssouadEstimate",
    "DistortionProfile",
    "clique_ratio",
    "find_clique",
    "ramsey_refine",
    "covering_number",
    "doubling_constant",
    "nondoubling_witness",
    "assouad_estimate",
    "snowflake",
    "qs_distortion_profile",
    "read_distance_csv",
    "read_points_csv",
    "write_distance_matrix_csv",
]

EXACT_SEARCH_LIMIT = 14  # C(14, 7) subsets is still instant


@dataclass(frozen=True)
class FiniteMetric:
    """Point ids with a symmetric distance matrix; optionally coordinates."""

    ids: tuple
    dist: np.ndarray
    coords: np.ndarray | None = None

    def __post_init__(self):
        d = np.ascontiguousarray(self.dist, dtype=np.float64)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] != len(self.ids):
            raise ParameterError("distance matrix must be square and match ids")
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def from_points(cls, coords, ids=None) -> "FiniteMetric":
        pts = np.asarray(coords, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        diff = pts[:, None, :] - pts[None, :, :]
        d = np.sqrt((diff**2).sum(axis=-1))
        ids = tuple(range(len(pts))) if ids is None else tuple(ids)
        return cls(ids=ids, dist=d, coords=pts)

    def validate(self, triangle_tol: float = 1e-9) -> None:
        """Check the metric axioms; triangle inequality within triangle_tol."""
        d = self.dist
        n = d.shape[0]
        if np.any(np.diag(d) != 0.0):
            raise ParameterError("diagonal of a distance matrix must be exactly zero")
        if np.any(d != d.T):
            raise ParameterError("distance matrix must be exactly symmetric")
        off = ~np.eye(n, dtype=bool)
        if np.any(d[off] <= 0.0):
            raise ParameterError("off-diagonal distances must be positive")
        for k in range(n):
            if np.any(d > d[:, k, None] + d[None, k, :] + triangle_tol):
                raise ParameterError(f"triangle inequality fails through point {k}")


@dataclass(frozen=True)
class CliqueReport:
    indices: tuple
    n: int
    ratio: float
    k_target: float
    exact: bool


@dataclass(frozen=True)
class AssouadEstimate:
    scale_pairs: tuple
    counts: tuple
    alpha: float
    residual: float


@dataclass(frozen=True)
class DistortionProfile:
    """Binned upper envelope of image-distance ratios per source-ratio bin."""

    bin_edges: np.ndarray
    envelope: np.ndarray
    x_envelope: np.ndarray
    counts: np.ndarray

    def regularized(self) -> np.ndarray:
        """Monotone (nondecreasing) version of the envelope, NaN bins skipped."""
        out = self.envelope.copy()
        best = -np.inf
        for i, v in enumerate(out):
            if np.isnan(v):
                continue
            best = max(best, v)
            out[i] = best
        return out


def _pairwise(fm: FiniteMetric, idx) -> np.ndarray:
    sub = fm.dist[np.ix_(idx, idx)]
    return sub[np.triu_indices(len(idx), k=1)]


def clique_ratio(fm: FiniteMetric, subset) -> float:
    """max pairwise / min pairwise distance within the subset."""
    idx = list(subset)
    if len(idx) < 2:
        raise ParameterError("clique ratio needs at least two points")
    if len(set(idx)) != len(idx):
        raise ParameterError("subset contains repeated points")
    pair = _pairwise(fm, idx)
    dmin = pair.min()
    if dmin <= 0.0:
        raise ParameterError("degenerate subset: zero minimum pairwise distance")
    return float(pair.max() / dmin)


def _exact_clique_search(d: np.ndarray, n: int, k: float):
    """First size-n subset (lexicographic) with max/min ratio <= k, or None.

    Depth-first over index-ordered subsets, pruning as soon as the running
    max exceeds k times the running min (both can only get worse).
    """
    npts = d.shape[0]
    chosen: list[int] = []

    def extend(start: int, dmax: float, dmin: float):
        if len(chosen) == n:
            return True
        for cand in range(start, npts - (n - len(chosen)) + 1):
            if chosen:
                row = d[cand, chosen]
                ndmax = max(dmax, row.max())
                ndmin = min(dmin, row.min())
                if ndmin <= 0.0 or ndmax > k * ndmin:
                    continue
            else:
                ndmax, ndmin = 0.0, np.inf
            chosen.append(cand)
            if extend(cand + 1, ndmax, ndmin):
                return True
            chosen.pop()
        return False

    if extend(0, 0.0, np.inf):
        return list(chosen)
    return None


def _greedy_clique_search(d: np.ndarray, n: int, k: float):
    """Greedy growth from every seed plus swap improvement; sound, not complete."""
    npts = d.shape[0]

    def ratio_of(idx):
        sub = d[np.ix_(idx, idx)]
        vals = sub[np.triu_indices(len(idx), k=1)]
        mn = vals.min()
        return np.inf if mn <= 0 else vals.max() / mn

    best_idx, best_ratio = None, np.inf
    for seed in range(npts):
        current = [seed]
        while len(current) < n:
            cand_best, cand_key = None, (np.inf, np.inf)
            for cand in range(npts):
                if cand in current:
                    continue
                # rank by resulting ratio, then by spread, to keep growth tight
                key = (ratio_of(current + [cand]), d[cand, current].max())
                if key < cand_key:
                    cand_best, cand_key = cand, key
            current.append(cand_best)
        improved = True
        while improved:
            improved = False
            r0 = ratio_of(current)
            for pos in range(n):
                for cand in range(npts):
                    if cand in current:
                        continue
                    trial = current.copy()
                    trial[pos] = cand
                    if ratio_of(trial) < r0:
                        current, r0 = trial, ratio_of(trial)
                        improved = True
        r = ratio_of(current)
        if r < best_ratio:
            best_idx, best_ratio = sorted(current), r
    if best_ratio <= k:
        return best_idx
    return None


def find_clique(fm: FiniteMetric, n: int, k: float):
    """Size-n subset with ratio <= k; exact up to 14 points, else heuristic.

    The exact branch returns a subset iff one exists.  The heuristic branch
    is sound (whatever it reports is verified) but may miss.  Returns a
    CliqueReport or None.
    """
    if n < 2:
        raise ParameterError(f"clique size must be at least 2, got {n}")
    if not k > 1.0:
        raise ParameterError(f"clique ratio bound must exceed 1, got {k}")
    if n > len(fm):
        raise ParameterError(f"requested {n} points from a {len(fm)}-point metric")
    exact = len(fm) <= EXACT_SEARCH_LIMIT
    idx = (_exact_clique_search if exact else _greedy_clique_search)(fm.dist, n, k)
    if idx is None:
        return None
    ratio = clique_ratio(fm, idx)
    assert ratio <= k  # both branches only report verified subsets
    return CliqueReport(indices=tuple(idx), n=n, ratio=ratio, k_target=float(k), exact=exact)


def ramsey_refine(fm: FiniteMetric, clique, k: float) -> CliqueReport:
    """Extract a (3, sqrt(k))-clique from a (>=6, k)-clique.

    Pairs are two-colored by d <= sqrt(k) * min distance; six points force a
    monochromatic triangle (R(3,3) = 6), and either color class has ratio at
    most sqrt(k).
    """
    idx = list(clique)
    if len(idx) < 6:
        raise ParameterError(
            f"refinement needs at least 6 points to guarantee a triangle, got {len(idx)}"
        )
    ratio = clique_ratio(fm, idx)
    if ratio > k:
        raise ParameterError(f"input subset has ratio {ratio} > k = {k}")
    pair = _pairwise(fm, idx)
    dmin = pair.min()
    cut = np.sqrt(k) * dmin
    for tri in combinations(range(len(idx)), 3):
        a, b, c = (idx[t] for t in tri)
        ds = (fm.dist[a, b], fm.dist[a, c], fm.dist[b, c])
        small = [x <= cut for x in ds]
        if all(small) or not any(small):
            out = (a, b, c)
            return CliqueReport(
                indices=out,
                n=3,
                ratio=clique_ratio(fm, out),
                k_target=float(np.sqrt(k)),
                exact=True,
            )
    raise AssertionError("unreachable: 6 points always contain a monochromatic triangle")


def covering_number(fm: FiniteMetric, center: int, big_r: float, small_r: float) -> int:
    """Greedy upper bound on covering B(center, R) by open small_r-balls.

    Ball centers range over all points of the space; ties in the greedy
    choice resolve to the smallest index, so the count is deterministic.
    """
    if not (0.0 < small_r < big_r):
        raise ParameterError(f"need 0 < r < R, got r={small_r}, R={big_r}")
    ball = np.flatnonzero(fm.dist[center] < big_r)
    if ball.size == 0:
        return 0
    # candidates beyond R + r cannot touch the ball
    cand = np.flatnonzero(fm.dist[center] < big_r + small_r)
    cover = fm.dist[np.ix_(cand, ball)] < small_r
    gains = cover.sum(axis=1)
    uncovered = np.ones(ball.size, dtype=bool)
    count = 0
    while uncovered.any():
        best = int(np.argmax(gains))  # argmax takes the first maximum
        if gains[best] == 0:
            raise AssertionError("unreachable: every point covers itself")
        newly = cover[best] & uncovered
        gains = gains - cover[:, newly].sum(axis=1)
        uncovered &= ~newly
        count += 1
    return count


def doubling_constant(fm: FiniteMetric, centers, scales) -> int:
    """max over sampled (x, R) of the half-radius covering bound."""
    centers = list(centers)
    scales = list(scales)
    if not centers or not scales:
        raise ParameterError("doubling constant needs nonempty centers and scales")
    if len(fm) == 1:
        return 1
    return max(covering_number(fm, x, r, r / 2.0) for x in centers for r in scales)


def nondoubling_witness(fm: FiniteMetric, center: int, big_r: float) -> CliqueReport:
    """Half-radius packing of B(center, R): the non-doubling-to-clique step.

    Starting from the center, repeatedly picks the smallest-index ball point
    not yet within R/2 of a chosen point.  Chosen points pairwise satisfy
    R/2 <= d < 2R, a (size, 4)-clique.
    """
    ball = np.flatnonzero(fm.dist[center] < big_r)
    chosen = [center]
    while True:
        covered = (fm.dist[np.ix_(chosen, ball)] < big_r / 2.0).any(axis=0)
        remaining = ball[~covered]
        if remaining.size == 0:
            break
        chosen.append(int(remaining[0]))
    if len(chosen) < 2:
        raise ParameterError("ball holds a single point; no packing to extract")
    ratio = clique_ratio(fm, chosen)
    if ratio >= 4.0:
        raise AssertionError("packing construction must yield ratio < 4")
    return CliqueReport(indices=tuple(chosen), n=len(chosen), ratio=ratio, k_target=4.0, exact=True)


def _farthest_point_sample(fm: FiniteMetric, count: int) -> list[int]:
    chosen = [0]
    while len(chosen) < min(count, len(fm)):
        gap = fm.dist[chosen].min(axis=0)
        nxt = int(np.argmax(gap))
        if gap[nxt] <= 0:
            break
        chosen.append(nxt)
    return chosen


def assouad_estimate(fm: FiniteMetric, scale_pairs, centers=None) -> AssouadEstimate:
    """Least-squares exponent of log max-center covering count vs log(R/r).

    Needs at least three scale pairs whose R/r ratios span a decade.  The
    default center set is a farthest-point sample of at most 8 points.
    """
    pairs = [(float(r_big), float(r_small)) for r_big, r_small in scale_pairs]
    if len(pairs) < 3:
        raise ParameterError("need at least 3 scale pairs")
    for r_big, r_small in pairs:
        if not (0.0 < r_small < r_big):
            raise ParameterError(f"scale pair ({r_big}, {r_small}) is not 0 < r < R")
    ratios = np.array([rb / rs for rb, rs in pairs])
    if ratios.max() / ratios.min() < 10.0:
        raise ParameterError("scale grid is degenerate: R/r must span at least one decade")
    if centers is None:
        centers = _farthest_point_sample(fm, 8)
    counts = [
        max(covering_number(fm, x, rb, rs) for x in centers) for rb, rs in pairs
    ]
    x = np.log(ratios)
    y = np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return AssouadEstimate(
        scale_pairs=tuple(pairs), counts=tuple(counts), alpha=float(slope), residual=residual
    )


def snowflake(fm: FiniteMetric, beta: float) -> FiniteMetric:
    """Replace d by d^beta for beta in (0, 1); concavity preserves the axioms."""
    if not (0.0 < beta < 1.0):
        raise ParameterError(f"snowflake exponent must lie in (0, 1), got {beta}")
    return FiniteMetric(ids=fm.ids, dist=fm.dist**beta, coords=None)


def qs_distortion_profile(
    fm_x: FiniteMetric,
    fm_y: FiniteMetric,
    correspondence,
    triple_samples: int,
    seed: int,
    n_bins: int = 24,
) -> DistortionProfile:
    """Empirical three-point distortion envelope of a correspondence.

    Samples triples (x, y, z), bins them by d_X(x,y)/d_X(x,z) on a geometric
    grid, and records the largest image ratio d_Y(fx,fy)/d_Y(fx,fz) per bin.
    Any valid distortion modulus must dominate this envelope.
    """
    f = np.asarray(list(correspondence), dtype=np.int64)
    n = len(fm_x)
    if len(fm_y) != n or f.shape != (n,) or not np.array_equal(np.sort(f), np.arange(n)):
        raise ParameterError("correspondence must be a bijection between the point sets")
    if n < 3:
        raise ParameterError("distortion profile needs at least 3 points")
    if triple_samples < 1:
        raise ParameterError("triple_samples must be positive")
    rng = np.random.default_rng(seed)
    xs = np.empty(0, dtype=np.int64)
    ys = np.empty(0, dtype=np.int64)
    zs = np.empty(0, dtype=np.int64)
    while xs.size < triple_samples:
        need = triple_samples - xs.size
        cand = rng.integers(0, n, size=(3, max(need * 2, 16)))
        ok = (cand[0] != cand[1]) & (cand[0] != cand[2]) & (cand[1] != cand[2])
        xs = np.concatenate([xs, cand[0, ok][:need]])
        ys = np.concatenate([ys, cand[1, ok][:need]])
        zs = np.concatenate([zs, cand[2, ok][:need]])
    rx = fm_x.dist[xs, ys] / fm_x.dist[xs, zs]
    ry = fm_y.dist[f[xs], f[ys]] / fm_y.dist[f[xs], f[zs]]
    lo, hi = rx.min(), rx.max()
    if lo == hi:
        edges = np.array([lo * (1 - 1e-12), hi * (1 + 1e-12)])
    else:
        edges = np.geomspace(lo, hi, n_bins + 1)
        edges[0] *= 1 - 1e-12
        edges[-1] *= 1 + 1e-12
    which = np.clip(np.searchsorted(edges, rx, side="right") - 1, 0, len(edges) - 2)
    nb = len(edges) - 1
    envelope = np.full(nb, np.nan)
    x_env = np.full(nb, np.nan)
    counts = np.zeros(nb, dtype=np.int64)
    for b in range(nb):
        sel = which == b
        counts[b] = sel.sum()
        if counts[b]:
            envelope[b] = ry[sel].max()
            x_env[b] = rx[sel].max()
    return DistortionProfile(bin_edges=edges, envelope=envelope, x_envelope=x_env, counts=counts)


# --------------------------------------------------------------------------
# CSV interchange

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_clique_csv(path, report: CliqueReport | None, size: int, k_target: float) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("found,size,ratio,k_target,exact,indices\n")
        if report is None:
            fh.write(f"0,{size},,{_fmt(k_target)},,\n")
        else:
            idx = "|".join(str(i) for i in report.indices)
            fh.write(
                f"1,{report.n},{_fmt(report.ratio)},{_fmt(report.k_target)},"
                f"{int(report.exact)},{idx}\n"
            )


def write_assouad_csv(path, est: AssouadEstimate) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("kind,R,r,count,alpha,residual\n")
        for (rb, rs), count in zip(est.scale_pairs, est.counts):
            fh.write(f"pair,{_fmt(rb)},{_fmt(rs)},{count},,\n")
        fh.write(f"fit,,,,{_fmt(est.alpha)},{_fmt(est.residual)}\n")


def write_profile_csv(path, profile: DistortionProfile) -> None:
    reg = profile.regularized()
    with open(path, "w", newline="\n") as fh:
        fh.write("bin_lo,bin_hi,count,max_x_ratio,envelope,envelope_monotone\n")
        for b in range(len(profile.counts)):
            fh.write(
                f"{_fmt(profile.bin_edges[b])},{_fmt(profile.bin_edges[b + 1])},"
                f"{profile.counts[b]},{_fmt(profile.x_envelope[b])},"
                f"{_fmt(profile.envelope[b])},{_fmt(reg[b])}\n"
            )


def write_distance_matrix_csv(path, fm: FiniteMetric) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("id," + ",".join(str(i) for i in fm.ids) + "\n")
        for label, row in zip(fm.ids, fm.dist):
            fh.write(str(label) + "," + ",".join(_fmt(x) for x in row) + "\n")


def read_distance_csv(path) -> FiniteMetric:
    """Square header-tagged distance matrix; validates the metric axioms."""
    with open(path, "r") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise FormatError("empty distance matrix file (offset 0)")
    header = lines[0].split(",")
    if header[0] != "id":
        raise FormatError("distance matrix header must start with 'id' (offset 0)")
    ids = tuple(header[1:])
    n = len(ids)
    if len(lines) != n + 1:
        raise FormatError(f"expected {n} data rows after the header, found {len(lines) - 1}")
    rows = []
    for ln_no, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != n + 1:
            raise FormatError(f"row {ln_no} has {len(parts) - 1} values, expected {n}")
        try:
            rows.append([float(x) for x in parts[1:]])
        except ValueError as exc:
            raise FormatError(f"row {ln_no}: {exc}") from None
    fm = FiniteMetric(ids=ids, dist=np.asarray(rows))
    fm.validate()
    return fm


def read_points_csv(path) -> FiniteMetric:
    """Rows id,x,y (flexible dimension): builds the Euclidean metric."""
    with open(path, "r") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("id,"):
        raise FormatError("points file must start with an 'id,...' header (offset 0)")
    ids, pts = [], []
    for ln_no, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) < 2:
            raise FormatError(f"row {ln_no} has no coordinates")
        ids.append(parts[0])
        try:
            pts.append([float(x) for x in parts[1:]])
        except ValueError as exc:
            raise FormatError(f"row {ln_no}: {exc}") from None
    return FiniteMetric.from_points(np.asarray(pts), ids=tuple(ids))
