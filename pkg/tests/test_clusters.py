import numpy as np
import pytest
from numpy.testing import assert_allclose

from thzgbsm.analysis import asa, k_factor, rms_ds
from thzgbsm.clusters import (
    apply_in_cluster_k, build_drop, composite_asa, composite_rms_ds,
    extract_drop_stats, gen_delays, gen_powers, gen_xpr_and_phases,
    geometry_for, place_user, rescale_azimuth, rescale_delays,
    rescale_zenith)
from thzgbsm.params import load_params


# --- link geometry ---

def test_geometry_for_broadside():
    p = load_params("office", "los", "measured")  # bs 3.0 m, user 1.5 m
    g = geometry_for(p, 10.0, 0.0)
    assert g.d2_m == pytest.approx(10.0)
    assert g.d3_m == pytest.approx(np.hypot(10.0, 1.5))
    assert g.aod_los_deg == pytest.approx(0.0)
    assert g.aoa_los_deg == pytest.approx(-180.0)
    # downtilt at the base station, uptilt seen by the user
    assert g.zod_los_deg > 90.0
    assert g.zoa_los_deg < 90.0
    assert g.zod_los_deg == pytest.approx(180.0 - g.zoa_los_deg)


def test_geometry_quadrant():
    p = load_params("office", "los", "measured")
    g = geometry_for(p, 3.0, 3.0)
    assert g.aod_los_deg == pytest.approx(45.0)
    assert g.aoa_los_deg == pytest.approx(-135.0)


def test_place_user_respects_annulus():
    p = load_params("umi", "los", "measured")  # annulus 10..100 m
    rng = np.random.default_rng(0)
    r = []
    for _ in range(500):
        g = place_user(p, rng)
        r.append(g.d2_m)
    r = np.asarray(r)
    assert r.min() >= 10.0 and r.max() <= 100.0
    # area-uniform placement: r^2 is uniform on [r0^2, r1^2]
    u = (r**2 - 100.0) / (10000.0 - 100.0)
    assert abs(np.mean(u) - 0.5) < 0.04


# --- delays and powers ---

def test_gen_delays_sorted_and_zero_based():
    rng = np.random.default_rng(1)
    d = gen_delays(8, 20e-9, 3.0, rng)
    assert d[0] == 0.0
    assert np.all(np.diff(d) >= 0)
    assert d.shape == (8,)


def test_gen_powers_exponential_profile_no_shadowing():
    # two clusters 10 ns apart, r_tau=2, DS=10 ns: power ratio exp(-1/2)
    d = np.array([0.0, 10e-9])
    p, w = gen_powers(d, 10e-9, 2.0, 0.0, np.random.default_rng(0))
    assert w == 0.0
    assert p.sum() == pytest.approx(1.0)
    assert p[1] / p[0] == pytest.approx(np.exp(-0.5), rel=1e-12)


def test_gen_powers_los_weight():
    d = np.array([0.0, 5e-9, 9e-9])
    k_lin = 10.0 ** (6.0 / 10.0)
    p, w = gen_powers(d, 10e-9, 3.0, 0.0, np.random.default_rng(0),
                      k_linear=k_lin)
    assert w == pytest.approx(k_lin / (k_lin + 1.0))
    assert p.sum() == pytest.approx(1.0)


def test_in_cluster_k_fractions():
    fr = apply_in_cluster_k(np.array([1.0]), 4, 0.0)
    assert_allclose(fr[0], [0.25, 0.25, 0.25, 0.25])
    fr1 = apply_in_cluster_k(np.array([1.0]), 1, 25.0)
    assert_allclose(fr1[0], [1.0])
    kappa = 10.0 ** 1.349
    fr3 = apply_in_cluster_k(np.array([0.5, 0.5]), 3, 13.49)
    assert fr3.shape == (2, 3)
    assert fr3[0, 0] == pytest.approx(kappa / (kappa + 2.0))
    assert fr3[0, 1] == pytest.approx(1.0 / (kappa + 2.0))
    assert_allclose(fr3.sum(axis=1), 1.0)


def test_xpr_and_phases_shapes():
    xpr, ph = gen_xpr_and_phases(3, 4, 10.0, 4.0, np.random.default_rng(2))
    assert xpr.shape == (3, 4)
    assert ph.shape == (3, 4, 4)
    assert np.all(xpr > 0)
    assert np.all((ph >= -np.pi) & (ph < np.pi))


# --- per-drop rescaling ---

def test_rescale_delays_hits_target_exactly():
    d = np.array([0.0, 7e-9, 30e-9])
    p = np.array([0.6, 0.3, 0.1])
    out = rescale_delays(d, p, 0.0, 25e-9)
    assert composite_rms_ds(out, p, 0.0) == pytest.approx(25e-9, rel=1e-12)
    # a direct tap at zero delay keeps the scaling exact
    out2 = rescale_delays(d, p, 0.7, 4e-9)
    assert composite_rms_ds(out2, p, 0.7) == pytest.approx(4e-9, rel=1e-12)


def test_composite_asa_includes_direct_ray():
    # ray powers carry the (1 - w) scattered share, as ray_powers() returns
    ang = np.array([30.0, -30.0])
    scattered = np.array([0.5, 0.5])
    no_los = composite_asa(ang, scattered, 0.0, 0.0)
    w = 0.9
    with_los = composite_asa(ang, scattered * (1 - w), w, 0.0)
    assert with_los < no_los
    w = 1.0 - 1e-12
    assert composite_asa(ang, scattered * (1 - w), w, 0.0) == pytest.approx(
        0.0, abs=1e-3)


def test_rescale_azimuth_reachable_target():
    rng = np.random.default_rng(4)
    ang = rng.uniform(-40.0, 40.0, 12)
    pw = rng.uniform(0.2, 1.0, 12)
    out = rescale_azimuth(ang, pw, 0.0, 10.0, 25.0)
    assert composite_asa(out, pw, 0.0, 10.0) == pytest.approx(25.0, abs=1e-6)
    assert np.all(out >= -180.0) and np.all(out < 180.0)


def test_rescale_azimuth_shrinks_too():
    ang = np.array([-120.0, -60.0, 40.0, 170.0])
    pw = np.ones(4)
    out = rescale_azimuth(ang, pw, 0.0, 0.0, 5.0)
    assert composite_asa(out, pw, 0.0, 0.0) == pytest.approx(5.0, abs=1e-6)


def test_rescale_azimuth_unreachable_clamps_at_rician_limit():
    """With 95% of power in the direct ray the spread cannot exceed
    sqrt(1 - (2w-1)^2) radians, reached with all scatter antipodal."""
    w = 0.95
    cap = np.degrees(np.sqrt(1.0 - (2 * w - 1.0) ** 2))
    ang = np.array([5.0, -3.0, 12.0])
    pw = np.array([0.4, 0.4, 0.2]) * (1 - w)
    out = rescale_azimuth(ang, pw, w, 0.0, 40.0)
    got = composite_asa(out, pw, w, 0.0)
    assert got == pytest.approx(cap, abs=0.05)


def test_rescale_azimuth_degenerate_input_unchanged():
    ang = np.array([20.0, 20.0])
    pw = np.array([1.0, 2.0])
    out = rescale_azimuth(ang, pw, 0.0, 20.0, 30.0)
    assert_allclose(out, ang)


def test_rescale_zenith_target_and_range():
    ang = np.array([85.0, 95.0, 100.0])
    pw = np.array([1.0, 1.0, 1.0])
    out = rescale_zenith(ang, pw, 0.0, 90.0, 3.0)
    from thzgbsm.analysis import zenith_spread
    assert zenith_spread(out, pw) == pytest.approx(3.0, abs=1e-9)
    assert np.all((out >= 0.0) & (out <= 180.0))


# --- whole drops ---

def test_build_drop_power_closure():
    p = load_params("office", "los", "measured")
    cs = build_drop(p, np.random.default_rng(0))
    total = cs.los_weight + cs.ray_powers().sum()
    assert total == pytest.approx(1.0, abs=1e-12)
    assert cs.powers.sum() == pytest.approx(1.0, abs=1e-12)
    assert cs.n_clusters == p.clusters.count
    assert cs.n_rays == p.clusters.rays


def test_build_drop_reproducible():
    p = load_params("umi", "nlos", "measured")
    a = build_drop(p, np.random.default_rng(11))
    b = build_drop(p, np.random.default_rng(11))
    assert_allclose(a.delays_s, b.delays_s)
    assert_allclose(a.aoa_deg, b.aoa_deg)
    assert_allclose(a.phases, b.phases)


def test_build_drop_roundtrip_ds_k_exact():
    p = load_params("office", "los", "measured")
    for seed in range(5):
        cs = build_drop(p, np.random.default_rng(seed))
        ext = extract_drop_stats(cs)
        assert ext["ds_s"] == pytest.approx(cs.lsp["ds_s"], rel=1e-9)
        assert ext["k_db"] == pytest.approx(cs.lsp["k_db"], abs=1e-9)


def test_build_drop_roundtrip_asa_capped():
    p = load_params("umi", "los", "measured")
    for seed in range(5):
        cs = build_drop(p, np.random.default_rng(seed))
        ext = extract_drop_stats(cs)
        w = cs.los_weight
        cap = np.degrees(np.sqrt(max(1.0 - (2 * w - 1.0) ** 2, 0.0)))
        want = min(cs.lsp["asa_deg"], cap)
        assert ext["asa_deg"] == pytest.approx(want, rel=0.02)


def test_build_drop_nlos_has_no_direct():
    p = load_params("office", "nlos", "measured")
    cs = build_drop(p, np.random.default_rng(3))
    assert cs.los_weight == 0.0
    assert "k_db" not in extract_drop_stats(cs)


def test_build_drop_forced_k():
    p = load_params("umi", "los", "measured")
    meds = []
    for k in (0.0, 10.0, 20.0):
        ext = [extract_drop_stats(build_drop(p, np.random.default_rng(s),
                                             k_db_override=k))["k_db"]
               for s in range(30)]
        meds.append(np.median(ext))
    assert meds[0] < meds[1] < meds[2]
    assert meds[1] == pytest.approx(10.0, abs=1e-6)


def test_build_drop_angles_wrapped():
    p = load_params("office", "nlos", "measured")
    cs = build_drop(p, np.random.default_rng(8))
    for a in (cs.aoa_deg, cs.aod_deg):
        assert np.all(a >= -180.0) and np.all(a < 180.0)
    for z in (cs.zoa_deg, cs.zod_deg):
        assert np.all((z >= 0.0) & (z <= 180.0))


def test_build_drop_lognormal_count_mode():
    p = load_params("office", "los", "measured")
    counts = {build_drop(p, np.random.default_rng(s),
                         cluster_count_mode="lognormal").n_clusters
              for s in range(40)}
    assert min(counts) >= 1
    assert len(counts) > 1  # actually random


def test_mpc_arrays_layout():
    p = load_params("umi", "los", "measured")
    cs = build_drop(p, np.random.default_rng(2))
    cols = cs.mpc_arrays()
    n = cs.n_clusters * cs.n_rays + 1
    assert cols["delay_s"].shape == (n,)
    assert cols["power"].sum() == pytest.approx(1.0, abs=1e-12)
    # direct tap leads: zero excess delay, cluster label 0
    assert cols["delay_s"][0] == 0.0
    assert cols["cluster"][0] == 0
    assert cols["power"][0] == pytest.approx(cs.los_weight)
    assert np.max(cols["cluster"]) == cs.n_clusters


def test_extract_matches_reference_estimators():
    p = load_params("office", "los", "measured")
    cs = build_drop(p, np.random.default_rng(21))
    cols = cs.mpc_arrays()
    ext = extract_drop_stats(cs)
    assert ext["ds_s"] == pytest.approx(
        rms_ds(cols["delay_s"], cols["power"]), rel=1e-12)
    assert ext["asa_deg"] == pytest.approx(
        asa(cols["aoa_deg"], cols["power"]), rel=1e-12)
    assert ext["k_db"] == pytest.approx(k_factor(cols["power"]), abs=1e-9)
