"""Star construction: geometry, events, located points, trials, scans."""

import dataclasses
import math

import numpy as np
import pytest

from lqglab import (
    FieldGrid,
    FieldKind,
    ParameterError,
    ResolutionError,
    StarConfig,
    annulus_scan,
    build_metric,
    build_star,
    default_config,
    distance,
    evaluate_events,
    locate_star_points,
    make_params,
    monte_carlo,
    star_trial,
    zeta_of_epsilon,
)
from lqglab.field import add_function, make_bump
from lqglab.geometry import DiscRegion, RegionDifference, StarRegion
from lqglab.metric import ring_vertices, set_distance
from lqglab.rng import derive_seed
from lqglab.star import scan_geometry

XI = make_params(np.sqrt(8.0 / 3.0), 4.0).xi


def flat_field(n=129, value=0.0):
    """Constant field on the window [-1, 1]^2 (odd n keeps 0 on the lattice)."""
    return FieldGrid(
        n=n, spacing=2.0 / (n - 1), origin=complex(-1, -1),
        values=np.full((n, n), float(value)), kind=FieldKind.WHOLE_PLANE_PROXY,
        cutoff=1, seed=0,
    )


def small_config(**overrides):
    base = dict(grid_n=129, cutoff=64, seed=1, r=0.12, z0=0j)
    base.update(overrides)
    return StarConfig(**base)


def ray_casting_contains(star, beta, x, y):
    """Independent even-odd membership oracle for the shrunk polygon."""
    loop = star.boundary_vertices(beta)
    inside = False
    n = len(loop)
    for i in range(n):
        x0, y0 = loop[i].real, loop[i].imag
        x1, y1 = loop[(i + 1) % n].real, loop[(i + 1) % n].imag
        if (y0 > y) != (y1 > y):
            t = (y - y0) / (y1 - y0)
            if x < x0 + t * (x1 - x0):
                inside = not inside
    return inside


# ---------------------------------------------------------------- geometry

def test_star_vertices_match_formulas():
    star = build_star(StarConfig(n_arms=5, z0=0j, r=0.1, grid_n=64, cutoff=8))
    scaled = star.arm_tips / 0.1
    assert scaled[0] == pytest.approx(6 * np.exp(2j * np.pi / 5), rel=1e-12)
    assert abs(scaled[0] - (1.854 + 5.706j)) < 0.01
    assert star.outer_vertices[2] / 0.1 == pytest.approx(7 * np.exp(2j * np.pi * 3 / 5), rel=1e-12)
    assert star.inner_vertices[0] / 0.1 == pytest.approx(np.exp(1j * np.pi * 3 / 5), rel=1e-12)


def test_star_shrink_identity_and_nesting():
    star = build_star(small_config(n_arms=5))
    assert np.allclose(star.boundary_vertices(0.0)[0::2], star.outer_vertices)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-0.9, 0.9, size=(400, 2))
    inner = star.contains(pts[:, 0], pts[:, 1], beta=0.3)
    outer = star.contains(pts[:, 0], pts[:, 1], beta=0.1)
    assert np.all(outer[inner])  # K^0.3 subset of K^0.1


def test_star_center_is_interior():
    star = build_star(small_config(n_arms=3))
    for beta in (0.0, 0.3, 0.7, 0.99):
        assert star.contains(np.array([0.0]), np.array([0.0]), beta=beta, interior=True)[0]


def test_star_membership_matches_ray_casting():
    star = build_star(small_config(n_arms=5))
    rng = np.random.default_rng(5)
    pts = rng.uniform(-0.9, 0.9, size=(500, 2))
    for beta in (0.0, 0.025):
        mine = star.contains(pts[:, 0], pts[:, 1], beta=beta)
        for (x, y), got in zip(pts, mine):
            rho = math.hypot(x, y)
            bound = (1 - beta) * star.boundary_radius(np.array([math.atan2(y, x) % (2 * math.pi)]))[0]
            if abs(rho - bound) < 1e-9:
                continue  # boundary grazing: oracle and test disagree only here
            assert got == ray_casting_contains(star, beta, x, y)


# ---------------------------------------------------------------- zeta

def test_zeta_positive_and_monotone():
    star = build_star(small_config(n_arms=5))
    z1 = zeta_of_epsilon(star, 0.03)
    z2 = zeta_of_epsilon(star, 0.06)
    assert 0 < z1 < z2


def test_zeta_verified_against_boundary_samples():
    star = build_star(small_config(n_arms=4))
    eps = 0.05
    zeta = zeta_of_epsilon(star, eps)
    segs_half = star.boundary_segments(beta=eps / 2)
    segs_quarter = star.boundary_segments(beta=eps / 4)

    def point_to_segs(p):
        best = np.inf
        for a, b in segs_quarter:
            d = b - a
            t = ((p - a) * d.conjugate()).real / (d * d.conjugate()).real
            t = min(1.0, max(0.0, t))
            best = min(best, abs(p - (a + t * d)))
        return best

    for a, b in segs_half:
        for t in np.linspace(0, 1, 40):
            p = a + t * (b - a)
            assert point_to_segs(p) >= 2 * zeta - 1e-6 * star.r


# ---------------------------------------------------------------- events

def test_events_constant_field_a1():
    cfg = small_config(c1=1e6, eta=0.01, t=1.0, c2=10.0)
    wg = build_metric(flat_field(), make_params(cfg.gamma, cfg.d_gamma))
    ev = evaluate_events(wg, cfg, build_star(cfg))
    assert ev.a1  # both clauses hold once the budget is generous
    assert np.isfinite(ev.d_rings) and ev.d_rings > 0
    assert np.isfinite(ev.a1_inf) and ev.a1_inf > 0


def test_events_psi_scaling_and_ring_distance():
    # a deep valley along the +x arm pins the ring-to-ring geodesic inside
    # the star, where the outward bump vanishes
    cfg = small_config(n_arms=4)
    params = make_params(cfg.gamma, cfg.d_gamma)
    star = build_star(cfg)
    base = flat_field()
    vals = base.values.copy()
    ys = base.origin.imag + base.spacing * np.arange(base.n)
    vals[np.abs(ys) <= 0.01, :] = -3.0
    base = base.with_values(vals)
    m_out = 2.0
    psi = make_bump(
        base,
        RegionDifference(DiscRegion(cfg.z0, 7 * cfg.r), StarRegion(star, beta=cfg.epsilon / 2)),
        RegionDifference(DiscRegion(cfg.z0, 8 * cfg.r), StarRegion(star, beta=cfg.epsilon)),
        m_out,
    )
    wg0 = build_metric(base, params)
    wg1 = build_metric(add_function(base, psi), params)
    ev0 = evaluate_events(wg0, cfg, star, exact_infima=True)
    ev1 = evaluate_events(wg1, cfg, star, exact_infima=True)
    factor = ev1.e_inf / ev0.e_inf
    assert 1.0 - 1e-9 <= factor <= np.exp(XI * m_out) * (1 + 1e-12)
    assert ev1.d_rings == ev0.d_rings


def test_central_diameter_nonincreasing_in_m_in():
    cfg = small_config(n_arms=5, grid_n=97, seed=2)
    params = make_params(cfg.gamma, cfg.d_gamma)
    rng = np.random.default_rng(12)
    base = flat_field(97).with_values(rng.normal(scale=0.5, size=(97, 97)))
    star = build_star(cfg)
    from lqglab.metric import diameter, disc_vertices

    diams = []
    for m_in in (0.0, 1.5, 3.0):
        sigma = make_bump(
            base,
            DiscRegion(cfg.z0, (2 - cfg.u / 2) * cfg.r),
            DiscRegion(cfg.z0, 2 * cfg.r),
            -m_in,
        )
        wg = build_metric(add_function(base, sigma), params)
        diams.append(diameter(wg, disc_vertices(wg, cfg.z0, 2 * cfg.r)))
    assert diams[0] >= diams[1] >= diams[2]


def test_e_flag_monotone_in_m_out():
    cfg = default_config(128, seed=31)
    flags = []
    for m in (0.0, cfg.m_out / 2.0, cfg.m_out):
        res = star_trial(dataclasses.replace(cfg, m_out=m))
        flags.append(res.events.e_eta)
    assert flags == sorted(flags)  # False <= True ordering


def test_event_inclusion_g_in_e():
    mc = monte_carlo(default_config(128, seed=77), trials=6, workers=1)
    for res in mc.results:
        if res.events.g:
            assert res.events.e_eta
    assert mc.counts["g"] <= mc.counts["e_eta"]


# ---------------------------------------------------------------- locate

def test_locate_zero_field_symmetry_n4():
    cfg = small_config(n_arms=4)
    wg = build_metric(flat_field(), make_params(cfg.gamma, cfg.d_gamma))
    star = build_star(cfg)
    points, positions, max_edge, failure = locate_star_points(wg, cfg, star)
    assert failure is None and len(points) == 4
    gx = np.array([p.real for p in positions])
    gy = np.array([p.imag for p in positions])
    assert np.all(np.hypot(gx, gy) > 2 * cfg.r)
    assert np.all(star.contains(gx, gy, beta=2 * cfg.epsilon))
    # quarter-turn symmetry up to one lattice cell
    rotated = [complex(-p.imag, p.real) for p in positions]
    for q in rotated:
        assert min(abs(q - p) for p in positions) <= np.sqrt(2) * wg.spacing + 1e-12
    assert max_edge > 0


def test_locate_crossing_bracket():
    cfg = small_config(n_arms=5)
    wg = build_metric(flat_field(), make_params(cfg.gamma, cfg.d_gamma))
    star = build_star(cfg)
    ring2 = ring_vertices(wg, cfg.z0, 2 * cfg.r)
    ring5 = ring_vertices(wg, cfg.z0, 5 * cfg.r)
    d_rings = set_distance(wg, ring2, ring5)
    points, _, max_edge, failure = locate_star_points(wg, cfg, star)
    assert failure is None
    for vertex in points:
        d_here = set_distance(wg, [vertex], ring2)
        assert d_rings <= d_here <= d_rings + max_edge + 1e-12


# ---------------------------------------------------------------- trials

def test_trial_success_postconditions():
    cfg = default_config(128, seed=424242)
    res = star_trial(dataclasses.replace(cfg, seed=derive_seed(cfg.seed, 0)))
    assert res.success and res.events.g
    assert res.ratio <= (1 + cfg.delta) * (1 + res.allowance)
    # independent re-scoring of the pairwise distances on the trial metric
    params = make_params(cfg.gamma, cfg.d_gamma)
    from lqglab.field import sample_whole_plane_proxy

    field = sample_whole_plane_proxy(cfg.grid_n, cfg.pad_factor, cfg.cutoff, res.seed)
    star = build_star(cfg)
    psi = make_bump(
        field,
        RegionDifference(DiscRegion(cfg.z0, 7 * cfg.r), StarRegion(star, beta=cfg.epsilon / 2)),
        RegionDifference(DiscRegion(cfg.z0, 8 * cfg.r), StarRegion(star, beta=cfg.epsilon)),
        cfg.m_out,
    )
    sigma = make_bump(
        field,
        DiscRegion(cfg.z0, (2 - cfg.u / 2) * cfg.r),
        DiscRegion(cfg.z0, 2 * cfg.r),
        -cfg.m_in,
    )
    wg = build_metric(add_function(add_function(field, sigma), psi), params)
    pair = [
        distance(wg, res.points[i], res.points[j])
        for i in range(len(res.points))
        for j in range(i + 1, len(res.points))
    ]
    assert max(pair) / min(pair) == pytest.approx(res.ratio, rel=1e-12)
    # crossing lower bound on an E-flagged trial
    assert min(pair) >= 2 * res.d_rings - 2 * (res.allowance * res.d_rings / 2) - 1e-12


def test_trial_failure_is_reported_not_raised():
    # an over-tight ratio bound cannot fail a trial, but a missing crossing can;
    # force it by shrinking the arms to nothing via a tiny radius at coarse grid
    cfg = StarConfig(grid_n=64, cutoff=32, seed=3, r=0.02, z0=0j)
    try:
        res = star_trial(cfg)
    except ResolutionError:
        return  # also a documented outcome at this scale
    if not res.success:
        assert res.failure is None or isinstance(res.failure, str)


def test_resolution_error_carries_hint():
    cfg = StarConfig(grid_n=16, cutoff=8, seed=1, r=0.05, z0=0j)
    with pytest.raises(ResolutionError) as err:
        star_trial(cfg)
    assert err.value.min_grid_n is not None and err.value.min_grid_n > 16


# ---------------------------------------------------------------- scan

def test_scan_depth1_reduces_to_trial():
    cfg = default_config(128, seed=99)
    scan = annulus_scan(555, cfg, max_depth=1)
    direct = star_trial(dataclasses.replace(cfg, seed=derive_seed(555, 1)))
    rec = scan.trials[0]
    assert rec.result.seed == direct.seed
    assert rec.result.success == direct.success
    assert rec.result.ratio == direct.ratio
    center, r_k = scan_geometry(1)
    assert rec.center == center and rec.r_scale == r_k


def test_scan_resolution_stop_is_reported():
    cfg = StarConfig(grid_n=16, cutoff=8, seed=1, r=0.05, z0=0j)
    scan = annulus_scan(1, cfg, max_depth=3)
    assert scan.first_success_depth is None
    assert scan.trials == ()
    assert scan.resolution_note and "depth 1" in scan.resolution_note


def test_scan_success_geometry():
    cfg = default_config(128, seed=2024)
    scan = annulus_scan(777, cfg, max_depth=3)
    for rec in scan.trials:
        if rec.result.success:
            k = rec.depth
            inner, outer = 2.0 ** (-2 * k - 1), 2.0 ** (-2 * k)
            assert abs(rec.center) - 8 * rec.r_scale > inner
            assert abs(rec.center) + 8 * rec.r_scale < outer
            for p in rec.points_xy:
                assert abs(p - rec.center) <= 8 * rec.r_scale
                assert inner < abs(p) < outer
    if scan.first_success_depth is not None:
        assert scan.trials[-1].result.success


# ---------------------------------------------------------------- monte carlo

def test_monte_carlo_counts_and_determinism():
    cfg = default_config(128, seed=5150)
    a = monte_carlo(cfg, trials=4, workers=1)
    b = monte_carlo(cfg, trials=4, workers=2)
    assert a.counts == b.counts
    assert a.ratios == b.ratios
    assert all(0 <= v <= 4 for v in a.counts.values())
    for key in ("a1", "e_eta", "f", "g", "success"):
        assert 0.0 <= a.frequency(key) <= 1.0
    seeds = [r.seed for r in a.results]
    assert seeds == [derive_seed(cfg.seed, i) for i in range(4)]


# ---------------------------------------------------------------- config validation

@pytest.mark.parametrize(
    "kw",
    [
        dict(n_arms=1),
        dict(delta=0.0),
        dict(delta=1.0),
        dict(epsilon=1 / 14),
        dict(epsilon=0.0),
        dict(u=0.0),
        dict(u=2.0),
        dict(eta=0.0),
        dict(m_out=-1.0),
        dict(r=0.2),  # 8r > 1 exits the window
        dict(z0=0.5 + 0j, r=0.12),
    ],
)
def test_config_validation(kw):
    with pytest.raises(ParameterError):
        small_config(**kw)
