import math

import numpy as np
import pytest

from diskwalk.analysis import (
    disk_grid,
    epsilon_x,
    escape_rate,
    geometric_checkpoints,
    grid_log_distances,
    lil_report,
    lil_scan_path,
    clt_report,
    oscillation_check,
    oscillation_oracle,
    omega_extremes,
    sandwich_check,
    step_law_moments,
    uniform_escape_rate,
    walk_omega,
    z_rate_report,
)
from diskwalk.errors import NotApplicableError, PreconditionError
from diskwalk.geometry import poincare_distance
from diskwalk.laws import InverseCdfTable, PaperTriangular, Triangular, UniformX
from diskwalk.walk import EnsembleConfig, run_ensemble

LOG3 = math.log(3.0)


def point_mass(x):
    return InverseCdfTable(((0, x), (1, x)))


# -- moments -------------------------------------------------------------------

def test_uniform_moments():
    m = step_law_moments(UniformX())
    assert m.mean == pytest.approx(0.0, abs=1e-10)
    assert m.var == pytest.approx(math.pi ** 2 / 3, abs=1e-9)
    assert m.error <= 1e-6 and not m.divergent
    assert epsilon_x(m) == 0
    mean, var, err = m
    assert var == m.var


def test_triangular_mean_matches_sampling():
    # independent oracle: numpy's triangular sampler
    rng = np.random.default_rng(0)
    for law in (PaperTriangular(), Triangular(0.21)):
        x = rng.triangular(-1, law.mode, 1, size=2_000_000)
        mc = np.mean(np.log1p(x) - np.log1p(-x))
        m = step_law_moments(law)
        assert m.mean == pytest.approx(mc, abs=0.005)
        assert epsilon_x(m) == 1


def test_point_mass_moments():
    m = step_law_moments(point_mass(0.0))
    assert (m.mean, m.var) == (0.0, 0.0) and isinstance(m.mean, float)
    m = step_law_moments(point_mass(0.5))
    assert m.mean == pytest.approx(LOG3) and m.var == pytest.approx(0.0, abs=1e-15)
    assert epsilon_x(step_law_moments(point_mass(-0.5))) == -1


# -- escape rates --------------------------------------------------------------

def test_deterministic_step_escape_rate():
    z0 = 0.3 + 0.4j
    d0 = poincare_distance(0, z0)
    for n in (10, 1000, 100_000):
        cfg = EnsembleConfig(1, n, 0, n, point_mass(0.5), z0=z0)
        r = escape_rate(run_ensemble(cfg), point_mass(0.5), d0=d0)
        assert r.omega_rate == pytest.approx(LOG3, rel=1e-12)
        assert abs(r.distance_rate - r.omega_rate) <= d0 / n + 1e-12
        assert r.expected_rate == pytest.approx(LOG3)
        assert r.epsilon_x == 1
    assert r.busemann_rate == pytest.approx(-LOG3, abs=1e-4)
    assert r.euclid_log_rate == pytest.approx(-LOG3, abs=1e-4)


def test_negative_drift_uses_antipode():
    law = point_mass(-0.5)
    r = escape_rate(run_ensemble(EnsembleConfig(1, 1000, 0, 1000, law)), law)
    assert r.epsilon_x == -1
    assert r.busemann_rate == pytest.approx(-LOG3, abs=1e-12)
    assert r.euclid_log_rate == pytest.approx(-LOG3, abs=1e-3)


def test_rates_finite_far_out():
    law = point_mass(0.9)
    r = escape_rate(run_ensemble(EnsembleConfig(1, 10 ** 6, 0, 10 ** 6, law)), law)
    assert all(math.isfinite(v) for v in (r.busemann_rate, r.distance_rate, r.euclid_log_rate))
    # 10^6 summed steps: rounding accumulates to ~1e-12 relative
    assert r.distance_rate == pytest.approx(math.log(19), rel=1e-10)


def test_escape_rate_not_applicable():
    law = UniformX()
    with pytest.raises(NotApplicableError):
        escape_rate(run_ensemble(EnsembleConfig(1, 10, 0)), law)
    with pytest.raises(NotApplicableError):
        uniform_escape_rate(law, n=10)


def test_escape_rate_needs_a_step():
    law = point_mass(0.5)
    with pytest.raises(PreconditionError):
        escape_rate(run_ensemble(EnsembleConfig(1, 0, 0, law=law)), law)


# -- uniform rates -------------------------------------------------------------

def test_disk_grid_respects_delta():
    pts = disk_grid(0.1, 100)
    assert pts.size >= 100
    assert np.all(np.abs(pts) <= 1 + 1e-15)
    assert np.all(np.abs(pts - 1) >= 0.1) and np.all(np.abs(pts + 1) >= 0.1)
    assert np.any(np.abs(np.abs(pts) - 1) < 1e-12)


def test_grid_log_distances_match_cartesian():
    pts = disk_grid(0.2, 50)
    inner = pts[np.abs(pts) < 0.99]
    omega = 0.7
    x = math.tanh(omega / 2)
    img = (inner + x) / (1 + x * inner)
    assert np.allclose(grid_log_distances(inner, omega, 1), np.log(np.abs(img - 1)), atol=1e-12)
    assert np.allclose(grid_log_distances(inner, omega, -1), np.log(np.abs(img + 1)), atol=1e-12)


def test_uniform_rate_is_a_sup():
    law = PaperTriangular()
    rate, per_point = uniform_escape_rate(law, 0.1, 100, 2000, seed=1, return_grid=True)
    assert rate == per_point.max()
    assert np.all(rate >= per_point)
    assert rate == uniform_escape_rate(law, 0.1, 100, 2000, seed=1)


def test_walk_omega_matches_ensemble():
    law = PaperTriangular()
    assert walk_omega(law, 777, 4) == run_ensemble(EnsembleConfig(1, 777, 4, 777, law)).blocks[0].omega[-1]


# -- Z-walk --------------------------------------------------------------------

def test_z_rate_at_p_one_equals_u_rate():
    law = PaperTriangular()
    n = 20_000
    u = escape_rate(run_ensemble(EnsembleConfig(1, n, 3, n, law)), law)
    z = z_rate_report(EnsembleConfig(1, n, 3, law=law, p=1.0, tau0=0.0, varsigma0=0.0))
    for k in ("n", "busemann_rate", "distance_rate", "euclid_log_rate", "epsilon_x", "expected_rate",
              "omega_rate"):
        assert getattr(u, k) == getattr(z, k)


def test_z_rate_uniform_in_tau0():
    law = PaperTriangular()
    rates = [z_rate_report(EnsembleConfig(1, 100_000, 3, law=law, p=0.5, tau0=t, varsigma0=0.0))
             .euclid_log_rate for t in (-2.0, -1.0, 0.0, 1.0, 2.0)]
    assert max(rates) - min(rates) <= 0.005


def test_sandwich_holds_on_z_records():
    cfg = EnsembleConfig(2, 3000, 6, law=PaperTriangular(), p=0.5)
    for b in run_ensemble(cfg, "z").blocks:
        for eps in (1, -1):
            ok, worst = sandwich_check(b, eps)
            assert ok, worst
    ok, _ = sandwich_check(list(b), 1)
    assert ok


# -- CLT -----------------------------------------------------------------------

def test_clt_guards():
    with pytest.raises(PreconditionError):
        clt_report(PaperTriangular(), 1000, 100, seed=0)


def test_clt_tables_are_consistent():
    rep = clt_report(UniformX(), 200, 2000, thresholds=(0.1, 0.5, 1.0, 2.0), seed=2, z0=0.2 + 0.1j)
    assert 0.0 <= rep.ks_statistic <= 1.0
    for row in rep.table:
        assert 0.0 <= row.p_plus <= 1.0 and 0.0 <= row.p_minus <= 1.0
        assert row.p_plus + row.p_minus <= 1.0 + 1e-12
        assert row.target == pytest.approx(0.5 * math.erfc(row.s / rep.sigma / math.sqrt(2)))
    assert rep.sigma == pytest.approx(math.pi / math.sqrt(3))
    assert rep.as_dict()["table"][0]["s"] == 0.1


# -- oscillation ---------------------------------------------------------------

def test_oscillation_zero_steps():
    rep = oscillation_check(point_mass(0.0), 1000, seed=0)
    assert rep.max_omega == 0.0 and rep.min_omega == 0.0
    assert rep.sign_changes == 0 and not rep.passed
    assert rep.oracle_probability == 0.0


def test_oscillation_drift_not_applicable():
    with pytest.raises(NotApplicableError):
        oscillation_check(PaperTriangular(), 100, seed=0)


def test_omega_extremes_across_chunks():
    g = np.array([1.0, -3.0, 4.0, -1.0, -2.0])
    whole = omega_extremes([g])
    split = omega_extremes([g[:2], g[2:3], np.array([]), g[3:]])
    assert whole == split == (2.0, -2.0, 3)


def test_oscillation_oracle_monotone():
    s = math.pi / math.sqrt(3)
    ps = [oscillation_oracle(a, s, 100_000) for a in (10, 50, 200, 2000)]
    assert ps == sorted(ps, reverse=True)
    assert 0.0 <= ps[-1] <= ps[0] <= 1.0


# -- LIL -----------------------------------------------------------------------

def test_geometric_checkpoints():
    assert geometric_checkpoints(12_345, 1000).tolist() == [1000, 2000, 5000, 10_000, 12_345]


def test_lil_alternating_steps_vanish():
    c, n = 2.0, 200_000
    tau = np.tile([c, 0.0], n // 2)
    vs = np.zeros(n)
    cps = lil_scan_path([(tau[:70_001], vs[:70_001]), (tau[70_001:], vs[70_001:])],
                        geometric_checkpoints(n, 1000), burn_in=1000)
    dists = [cp.dist for cp in cps]
    assert max(dists) <= c / math.sqrt(2 * 1000 * math.log(math.log(1000)))
    assert dists[-1] < 0.003
    # the running sup never exceeds its value at the burn-in scale
    assert cps[-1].sup_dist == pytest.approx(c / math.sqrt(2 * 1001 * math.log(math.log(1001))))


def test_lil_sups_nondecreasing_and_pairs_agree():
    rep = lil_report(UniformX(), 200_000, seed=3, z0=0.3 + 0.4j)
    for k in ("sup_bplus", "sup_bminus", "sup_dist"):
        seq = [getattr(c, k) for c in rep.checkpoints]
        assert seq == sorted(seq)
    assert rep.pairs_ok
    for c in rep.checkpoints:
        assert c.sup_dist >= abs(c.dist)
    assert rep.paper_phi_ratio == pytest.approx(rep.ratio / math.sqrt(math.pi))
    phi = lil_report(UniformX(), 200_000, "paper", seed=3, z0=0.3 + 0.4j)
    assert phi.ratio == rep.paper_phi_ratio


def test_lil_guards():
    with pytest.raises(PreconditionError):
        lil_report(UniformX(), 5000, seed=0)
    with pytest.raises(PreconditionError):
        lil_report(PaperTriangular(), 10_000, seed=0)


def test_lil_z_walk_scale():
    rep = lil_report(UniformX(), 10_000, seed=1, kind="z", p=0.25)
    assert rep.scale == pytest.approx(rep.sigma * 0.5)
