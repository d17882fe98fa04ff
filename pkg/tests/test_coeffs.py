import dataclasses

import numpy as np
import pytest
from numpy.testing import assert_allclose

from thzgbsm.clusters import build_drop
from thzgbsm.coeffs import (
    AntennaArray, ChannelRealization, assemble_cir, cir_to_ctf,
    isotropic_horizontal, isotropic_vertical, los_coeff, nlos_ray_coeff,
    single_antenna, spherical_unit, ura)
from thzgbsm.params import load_params

LAM = 299792458.0 / 100e9


def test_spherical_unit_axes():
    assert_allclose(spherical_unit(0.0, 0.0), [0.0, 0.0, 1.0], atol=1e-12)
    assert_allclose(spherical_unit(90.0, 0.0), [1.0, 0.0, 0.0], atol=1e-12)
    assert_allclose(spherical_unit(90.0, 90.0), [0.0, 1.0, 0.0], atol=1e-12)
    assert_allclose(spherical_unit(180.0, 45.0), [0.0, 0.0, -1.0], atol=1e-12)


def test_spherical_unit_is_unit_norm():
    rng = np.random.default_rng(0)
    for _ in range(50):
        v = spherical_unit(rng.uniform(0, 180), rng.uniform(-180, 180))
        assert np.linalg.norm(v) == pytest.approx(1.0)


def test_ura_layout():
    arr = ura(2, 3, 0.5 * LAM)
    assert arr.positions_m.shape == (6, 3)
    # panel lies in the y-z plane
    assert_allclose(arr.positions_m[:, 0], 0.0, atol=1e-15)
    # centered
    assert_allclose(arr.positions_m.mean(axis=0), 0.0, atol=1e-15)
    # nearest-neighbour spacing
    d01 = np.linalg.norm(arr.positions_m[0] - arr.positions_m[1])
    assert d01 == pytest.approx(0.5 * LAM)


def test_single_antenna():
    arr = single_antenna()
    assert arr.positions_m.shape == (1, 3)
    assert_allclose(arr.positions_m, 0.0)


def test_los_coeff_phase_oracles():
    rx = single_antenna()
    tx = single_antenna()
    h1 = los_coeff(0.0, 90.0, 180.0, 90.0, LAM, rx, tx, LAM)
    assert h1.shape == (1, 1)
    assert h1[0, 0] == pytest.approx(1.0 + 0.0j, abs=1e-12)
    h2 = los_coeff(0.0, 90.0, 180.0, 90.0, LAM / 2, rx, tx, LAM)
    assert h2[0, 0] == pytest.approx(-1.0 + 0.0j, abs=1e-12)


def test_los_coeff_horizontal_polarization_sign():
    rx = single_antenna(pattern=isotropic_horizontal)
    tx = single_antenna(pattern=isotropic_horizontal)
    h = los_coeff(0.0, 90.0, 180.0, 90.0, LAM, rx, tx, LAM)
    # pure horizontal links through the minus branch of the 2x2 identity-like
    # polarization coupling
    assert h[0, 0] == pytest.approx(-1.0 + 0.0j, abs=1e-12)


def test_nlos_ray_pure_copolar_when_xpr_infinite():
    rx = single_antenna()
    tx = single_antenna()
    phases = np.zeros(4)
    h = nlos_ray_coeff(1.0, 10.0, 90.0, -40.0, 90.0, 1e12, phases,
                       rx, tx, LAM)
    assert h[0, 0] == pytest.approx(1.0 + 0.0j, abs=1e-5)


def test_nlos_ray_power_is_pattern_independent_of_phase():
    rx = single_antenna()
    tx = single_antenna()
    rng = np.random.default_rng(1)
    for _ in range(10):
        phases = rng.uniform(-np.pi, np.pi, 4)
        h = nlos_ray_coeff(0.7, 33.0, 80.0, 12.0, 100.0, 10.0, phases,
                           rx, tx, LAM)
        assert abs(h[0, 0]) == pytest.approx(np.sqrt(0.7), rel=1e-9)


def test_steering_reciprocity_transpose():
    """Swapping the two arrays transposes the per-ray matrix."""
    rx = ura(2, 2, 0.5 * LAM, name="a")
    tx = ura(1, 3, 0.5 * LAM, name="b")
    phases = np.array([0.3, -1.0, 2.2, 0.7])
    h_ab = nlos_ray_coeff(1.0, 25.0, 75.0, -130.0, 95.0, 8.0, phases, rx, tx, LAM)
    h_ba = nlos_ray_coeff(1.0, -130.0, 95.0, 25.0, 75.0, 8.0,
                          phases[[0, 2, 1, 3]], tx, rx, LAM)
    assert_allclose(h_ba, h_ab.T, atol=1e-12)


def _drop(scenario="office", condition="nlos", seed=0):
    p = load_params(scenario, condition, "measured")
    return p, build_drop(p, np.random.default_rng(seed))


def test_assemble_cir_simplified_tap_count():
    p, cs = _drop("office", "nlos")
    rx = single_antenna()
    tx = single_antenna()
    cr = assemble_cir(cs, rx, tx, p.wavelength_m, mode="thz-simplified")
    assert cr.amps.shape[0] == cs.n_clusters
    assert cr.delays_s.shape == (cs.n_clusters,)
    assert np.all(np.diff(cr.delays_s) >= 0)

    p2, cs2 = _drop("office", "los", seed=4)
    cr2 = assemble_cir(cs2, rx, tx, p2.wavelength_m, mode="thz-simplified")
    assert cr2.amps.shape[0] == cs2.n_clusters + 1
    assert cr2.delays_s[0] == 0.0


def test_assemble_cir_standard_splits_two_strongest():
    # the canonical 20-ray layout expands the two strongest clusters into
    # three delay taps each
    p = load_params("office", "nlos", "3gpp")
    cs = build_drop(p, np.random.default_rng(0))
    rx = single_antenna()
    tx = single_antenna()
    cr = assemble_cir(cs, rx, tx, p.wavelength_m, mode="standard")
    assert cr.amps.shape[0] == cs.n_clusters + 4
    # few-ray drops degrade gracefully instead of emitting empty taps
    pm, csm = _drop("office", "nlos")  # 5 rays per cluster
    crm = assemble_cir(csm, rx, tx, pm.wavelength_m, mode="standard")
    assert crm.amps.shape[0] == csm.n_clusters


def test_standard_and_simplified_conserve_power():
    for seed in range(4):
        p, cs = _drop("office", "nlos", seed=seed)
        rx = single_antenna()
        tx = single_antenna()
        a = assemble_cir(cs, rx, tx, p.wavelength_m, mode="thz-simplified")
        b = assemble_cir(cs, rx, tx, p.wavelength_m, mode="standard")
        assert b.total_power() == pytest.approx(a.total_power(), rel=1e-12)


def test_total_tap_power_unity_exact_with_one_ray_per_cluster():
    # no within-cluster cross terms, so the budget closes exactly
    p = load_params("umi", "los", "measured")
    p1 = dataclasses.replace(p, clusters=dataclasses.replace(p.clusters, rays=1))
    for seed in range(5):
        cs = build_drop(p1, np.random.default_rng(seed))
        cr = assemble_cir(cs, single_antenna(), single_antenna(),
                          p1.wavelength_m)
        assert cr.total_power() == pytest.approx(1.0, abs=1e-12)


def test_total_tap_power_unity_in_expectation():
    # coherent ray sums fluctuate per drop but average to the unit budget
    p = load_params("umi", "los", "measured")
    vals = []
    for seed in range(150):
        cs = build_drop(p, np.random.default_rng(seed))
        cr = assemble_cir(cs, single_antenna(), single_antenna(),
                          p.wavelength_m)
        vals.append(cr.total_power())
    assert np.mean(vals) == pytest.approx(1.0, abs=0.01)
    assert np.std(vals) < 0.05


def test_assemble_cir_array_shapes():
    p, cs = _drop("office", "los", seed=1)
    rx = ura(2, 2, 0.5 * p.wavelength_m)
    tx = ura(4, 4, 0.5 * p.wavelength_m)
    cr = assemble_cir(cs, rx, tx, p.wavelength_m)
    t, u, s = cr.amps.shape[0], cr.amps.shape[1], cr.amps.shape[2]
    assert (u, s) == (4, 16)


def _tap_cr(delays, amp_per_tap):
    t = len(delays)
    amps = np.asarray(amp_per_tap, dtype=complex).reshape(t, 1, 1, 1)
    return ChannelRealization(delays_s=np.asarray(delays, dtype=float),
                              amps=amps, wavelength_m=LAM,
                              t_s=np.array([0.0]))


def test_cir_to_ctf_flat_for_single_zero_tap():
    cr = _tap_cr([0.0], [1.0])
    f = np.linspace(-0.5e9, 0.5e9, 16)
    h = cir_to_ctf(cr, f)
    assert h.shape == (16, 1, 1, 1)
    assert_allclose(h, 1.0, atol=1e-12)


def test_cir_to_ctf_linear_phase_slope():
    tau = 1e-9
    cr = _tap_cr([tau], [1.0])
    f = np.array([0.0, 1e8, 2e8])
    h = cir_to_ctf(cr, f)[:, 0, 0, 0]
    assert_allclose(np.angle(h), -2 * np.pi * f * tau, atol=1e-9)


def test_cir_to_ctf_two_tap_nulls():
    delta = 2e-9
    cr = _tap_cr([0.0, delta], [1.0, 1.0])
    null_freqs = np.array([1.0, 3.0, 5.0]) / (2 * delta)
    h = cir_to_ctf(cr, null_freqs)[:, 0, 0, 0]
    assert_allclose(np.abs(h), 0.0, atol=1e-9)
