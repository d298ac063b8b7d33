"""Field sampling, circle averages, bumps, and the LQGF container."""

import numpy as np
import numpy.testing as npt
import pytest

from lqglab import (
    DiscRegion,
    FieldGrid,
    FieldKind,
    GeometryError,
    ParameterError,
    add_function,
    circle_average,
    make_bump,
    make_params,
    read_lqgf,
    sample_whole_plane_proxy,
    sample_zero_boundary,
    write_lqgf,
)
from lqglab.errors import FormatError
from lqglab.rng import mode_normals


# ---------------------------------------------------------------- params

def test_params_critical_gamma():
    p = make_params(2.0, 4.0)
    assert p.q == 2.0
    assert p.xi == 0.5


def test_params_arithmetic():
    p = make_params(1.0, 2.5)
    assert p.q == 2.5
    assert p.xi == pytest.approx(0.4, abs=0)


def test_params_sqrt83():
    p = make_params(np.sqrt(8.0 / 3.0), 4.0)
    assert p.xi == pytest.approx(0.408248, abs=1e-6)
    assert p.q == pytest.approx(2.041241, abs=1e-6)


@pytest.mark.parametrize("gamma,d_gamma", [(0.0, 4.0), (2.5, 4.0), (-1.0, 4.0), (1.0, 2.0), (1.0, 1.5)])
def test_params_domain(gamma, d_gamma):
    with pytest.raises(ParameterError):
        make_params(gamma, d_gamma)


@pytest.mark.parametrize("gamma", [0.3, 0.9, 1.5, 1.99, 2.0])
def test_params_q_lower_bound(gamma):
    q = make_params(gamma, 4.0).q
    if gamma == 2.0:
        assert q == 2.0
    else:
        assert q > 2.0


def test_params_idempotent():
    assert make_params(1.3, 3.3) == make_params(1.3, 3.3)


# ---------------------------------------------------------------- sampling

def eigensum_cov(n, cutoff, va, vb):
    """Oracle: truncated covariance of vertex values on the unit square."""
    j = np.arange(1, cutoff + 1)
    jj, kk = np.meshgrid(j, j, indexing="ij")
    norm = np.sqrt((jj**2 + kk**2) * np.pi / 8.0)

    def mode_at(v):
        r, c = v
        x, y = c / (n - 1), r / (n - 1)
        return np.outer(np.sin(np.pi * j * x), np.sin(np.pi * j * y)).T / norm

    return float((mode_at(va) * mode_at(vb)).sum())


def test_zero_boundary_deterministic():
    a = sample_zero_boundary(64, 32, 7)
    b = sample_zero_boundary(64, 32, 7)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, sample_zero_boundary(64, 32, 8).values)


def test_zero_boundary_ring_is_zero():
    f = sample_zero_boundary(32, 16, 3)
    assert np.all(f.values[0] == 0) and np.all(f.values[-1] == 0)
    assert np.all(f.values[:, 0] == 0) and np.all(f.values[:, -1] == 0)


def test_cutoff_refinement_extends_draws():
    small = mode_normals(99, 8)
    big = mode_normals(99, 16)
    assert np.array_equal(small, big[:8, :8])


@pytest.mark.parametrize("cutoff", [0, 64, 70])
def test_cutoff_domain(cutoff):
    with pytest.raises(ParameterError):
        sample_zero_boundary(64, cutoff, 1)


def test_center_variance_matches_eigensum():
    n, cutoff, m = 32, 16, 1000
    v = (13, 20)
    vals = np.array([sample_zero_boundary(n, cutoff, s).values[v] for s in range(m)])
    oracle = eigensum_cov(n, cutoff, v, v)
    se = oracle * np.sqrt(2.0 / (m - 1))
    assert abs(np.var(vals) - oracle) < 5 * se


def test_covariance_matches_eigensum_at_fixed_pairs():
    n, cutoff, m = 32, 16, 1000
    pairs = [((13, 20), (20, 8)), ((5, 5), (6, 6)), ((16, 16), (16, 17)),
             ((8, 24), (24, 8)), ((10, 10), (22, 22))]
    fields = np.stack([sample_zero_boundary(n, cutoff, s).values for s in range(m)])
    for va, vb in pairs:
        emp = np.cov(fields[:, va[0], va[1]], fields[:, vb[0], vb[1]])[0, 1]
        oracle = eigensum_cov(n, cutoff, va, vb)
        va_va = eigensum_cov(n, cutoff, va, va)
        vb_vb = eigensum_cov(n, cutoff, vb, vb)
        se = np.sqrt((va_va * vb_vb + oracle**2) / m)
        assert abs(emp - oracle) < 5 * se


def test_proxy_normalization_and_determinism():
    f = sample_whole_plane_proxy(64, 4, 60, 3)
    g = sample_whole_plane_proxy(64, 4, 60, 3)
    assert np.array_equal(f.values, g.values)
    assert f.kind is FieldKind.WHOLE_PLANE_PROXY
    assert abs(circle_average(f, f.center, 1.0)) < 1e-10


def test_proxy_parameter_domain():
    with pytest.raises(ParameterError):
        sample_whole_plane_proxy(64, 2, 32, 1)
    with pytest.raises(ParameterError):
        sample_whole_plane_proxy(4, 4, 2, 1)


def test_proxy_increment_variance_matches_quadrature_oracle():
    """Empirical Var[h_{1/4} - h_{1/2}] against the exact truncated eigensum.

    The oracle evaluates the same quadrature functional on each mode, so
    this isolates sampling correctness from truncation bias (the log-ratio
    anchor itself is an acceptance check at full size).
    """
    n, pad, cutoff, m = 64, 4, 100, 400
    spacing = 2.0 / (n - 1)
    n_big = pad * (n - 1) + 1
    big_side = 2.0 * pad
    j = np.arange(1, cutoff + 1)
    jj, kk = np.meshgrid(j, j, indexing="ij")
    norm = np.sqrt((jj**2 + kk**2) * np.pi / 8.0)
    off = ((n_big - n) // 2) * spacing

    def mode_circle_avg(radius):
        count = max(64, int(np.ceil(8 * np.pi * radius / spacing)))
        th = 2 * np.pi * np.arange(count) / count
        # window center sits at off + 1 in big-box coordinates
        xs = (off + 1.0 + radius * np.cos(th)) / big_side
        ys = (off + 1.0 + radius * np.sin(th)) / big_side
        sx = np.sin(np.pi * np.outer(j, xs))
        sy = np.sin(np.pi * np.outer(j, ys))
        return (sx @ sy.T) / count / norm

    functional = mode_circle_avg(0.25) - mode_circle_avg(0.5)
    oracle = float((functional**2).sum())
    incs = []
    for seed in range(m):
        f = sample_whole_plane_proxy(n, pad, cutoff, seed)
        incs.append(circle_average(f, f.center, 0.25) - circle_average(f, f.center, 0.5))
    emp = np.var(incs, ddof=1)
    se = oracle * np.sqrt(2.0 / (m - 1))
    assert abs(emp - oracle) < 5 * se
    # truncation keeps the oracle near the log-ratio target even at this size
    assert oracle == pytest.approx(np.log(2.0), rel=0.2)


# ---------------------------------------------------------------- circle averages

def constant_field(n, value, spacing=1.0, origin=0j):
    return FieldGrid(
        n=n, spacing=spacing, origin=origin,
        values=np.full((n, n), float(value)), kind=FieldKind.ZERO_BOUNDARY,
        cutoff=1, seed=0,
    )


def test_circle_average_constant():
    f = constant_field(32, 2.5)
    assert circle_average(f, complex(15, 15), 4.0) == 2.5


def test_circle_average_linearity():
    f = sample_zero_boundary(32, 16, 1)
    g = sample_zero_boundary(32, 16, 2)
    z, r = 0.5 + 0.5j, 0.3
    both = add_function(f, g)
    lhs = circle_average(both, z, r)
    rhs = circle_average(f, z, r) + circle_average(g, z, r)
    assert abs(lhs - rhs) < 1e-12


def test_circle_average_domain_check():
    f = sample_zero_boundary(32, 16, 1)
    with pytest.raises(GeometryError):
        circle_average(f, 0.9 + 0.5j, 0.2)


# ---------------------------------------------------------------- add_function

def test_add_zero_identity():
    f = sample_zero_boundary(32, 16, 5)
    z = constant_field(32, 0.0, spacing=f.spacing, origin=f.origin)
    assert np.array_equal(add_function(f, z).values, f.values)


def test_add_then_subtract():
    f = sample_zero_boundary(32, 16, 5)
    g = sample_zero_boundary(32, 16, 6)
    neg = g.with_values(-g.values)
    back = add_function(add_function(f, g), neg)
    npt.assert_allclose(back.values, f.values, atol=1e-12)


def test_add_geometry_mismatch():
    f = sample_zero_boundary(32, 16, 5)
    g = sample_zero_boundary(64, 16, 5)
    with pytest.raises(GeometryError):
        add_function(f, g)


def test_add_bump_bounded_increase():
    f = sample_zero_boundary(33, 16, 5)
    bump = make_bump(f, DiscRegion(0.5 + 0.5j, 0.15), DiscRegion(0.5 + 0.5j, 0.35), 2.0)
    g = add_function(f, bump)
    diff = g.values - f.values
    tol = 1e-12 * (1.0 + np.abs(f.values).max())  # rounding of (f + b) - f
    assert diff.min() >= -tol and diff.max() <= 2.0 + tol


# ---------------------------------------------------------------- bumps

def test_bump_plateau_and_support():
    f = constant_field(65, 0.0, spacing=1 / 64, origin=0j)
    inner = DiscRegion(0.5 + 0.5j, 0.15)
    outer = DiscRegion(0.5 + 0.5j, 0.4)
    bump = make_bump(f, inner, outer, 3.0)
    xs = np.arange(65) / 64
    gx, gy = np.meshgrid(xs, xs)
    assert np.all(bump.values[inner.contains(gx, gy)] == 3.0)
    assert np.all(bump.values[~outer.contains(gx, gy)] == 0.0)
    assert bump.values.min() >= 0.0 and bump.values.max() <= 3.0


def test_bump_midpoint_profile():
    f = constant_field(129, 0.0, spacing=1 / 128, origin=0j)
    bump = make_bump(f, DiscRegion(0.5 + 0.5j, 0.1), DiscRegion(0.5 + 0.5j, 0.3), 1.0)
    # vertex nearest the gap midpoint along the +x ray from the center;
    # oracle = reversed smoothstep at that vertex's analytic normalized distance
    col = int(round(0.7 * 128))
    t = (col / 128 - 0.5 - 0.1) / 0.2
    oracle = 1.0 - 3.0 * t**2 + 2.0 * t**3
    mid = bump.values[64, col]
    assert oracle == pytest.approx(0.5, abs=0.05)
    assert mid == pytest.approx(oracle, rel=0.10)


def test_bump_adjacent_difference_bound():
    f = constant_field(129, 0.0, spacing=1 / 128, origin=0j)
    amp = 2.0
    bump = make_bump(f, DiscRegion(0.5 + 0.5j, 0.1), DiscRegion(0.5 + 0.5j, 0.3), amp)
    gap = 0.2
    bound = 2.0 * amp * (1 / 128) / gap
    assert np.abs(np.diff(bump.values, axis=0)).max() <= bound + 1e-12
    assert np.abs(np.diff(bump.values, axis=1)).max() <= bound + 1e-12


def test_bump_rejects_uncontained_regions():
    f = constant_field(33, 0.0, spacing=1 / 32, origin=0j)
    with pytest.raises(GeometryError):
        make_bump(f, DiscRegion(0.5 + 0.5j, 0.4), DiscRegion(0.5 + 0.5j, 0.2), 1.0)


def test_bump_negative_amplitude_range():
    f = constant_field(65, 0.0, spacing=1 / 64, origin=0j)
    bump = make_bump(f, DiscRegion(0.5 + 0.5j, 0.1), DiscRegion(0.5 + 0.5j, 0.3), -1.5)
    assert bump.values.min() >= -1.5 and bump.values.max() <= 0.0


# ---------------------------------------------------------------- LQGF

def test_lqgf_round_trip_bit_exact(tmp_path):
    f = sample_whole_plane_proxy(32, 4, 30, 123)
    path = tmp_path / "f.lqgf"
    write_lqgf(f, path)
    g = read_lqgf(path)
    assert np.array_equal(f.values, g.values)
    assert (g.n, g.spacing, g.origin, g.kind, g.cutoff, g.seed) == (
        f.n, f.spacing, f.origin, f.kind, f.cutoff, f.seed,
    )
    path2 = tmp_path / "g.lqgf"
    write_lqgf(g, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_lqgf_bad_magic(tmp_path):
    f = sample_zero_boundary(16, 8, 1)
    path = tmp_path / "f.lqgf"
    write_lqgf(f, path)
    data = bytearray(path.read_bytes())
    data[0:4] = b"NOPE"
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError, match="offset 0"):
        read_lqgf(path)


def test_lqgf_bad_version(tmp_path):
    f = sample_zero_boundary(16, 8, 1)
    path = tmp_path / "f.lqgf"
    write_lqgf(f, path)
    data = bytearray(path.read_bytes())
    data[4] = 9
    path.write_bytes(bytes(data))
    with pytest.raises(FormatError, match="offset 4"):
        read_lqgf(path)


def test_lqgf_truncated_payload(tmp_path):
    f = sample_zero_boundary(16, 8, 1)
    path = tmp_path / "f.lqgf"
    write_lqgf(f, path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(FormatError):
        read_lqgf(path)
