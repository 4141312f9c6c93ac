# SPDX-License-Identifier: Apache-2.0
import numpy as np
import pytest

import mcbf


def unicast_setup(N=8, seed=3):
    cfg = mcbf.SystemConfig.uniform(3, 1, N)
    return cfg, mcbf.gen_channels(cfg, seed)


def test_config_roundtrip():
    cfg = mcbf.SystemConfig.uniform(2, 3, 16, 6.0)
    assert cfg.k_tot == 6
    assert cfg.K == [3, 3]
    np.testing.assert_allclose(cfg.gamma(), np.full(6, 10 ** 0.6))
    back = mcbf.SystemConfig.from_json(cfg.to_json())
    assert back.N == 16 and back.gamma_db == cfg.gamma_db


def test_channels_are_numpy():
    cfg = mcbf.SystemConfig.uniform(2, 2, 6)
    ch = mcbf.gen_channels(cfg, 1)
    assert ch.groups == 2 and ch.antennas == 6
    assert ch.H[0].shape == (6, 2) and ch.H[0].dtype == np.complex128
    assert ch.stacked().shape == (6, 4)
    again = mcbf.gen_channels(cfg, 1)
    np.testing.assert_array_equal(ch.H[1], again.H[1])


def test_solve_qos_meets_targets():
    cfg = mcbf.SystemConfig.uniform(2, 2, 8)
    ch = mcbf.gen_channels(cfg, 4)
    res = mcbf.solve_qos(ch, cfg, "opt-sca")
    s = mcbf.sinr(res["w"], ch, cfg.sigma2)
    assert np.all(s >= cfg.gamma() * (1 - 1e-6))
    assert res["power"] == pytest.approx(mcbf.total_power(res["w"]))


def test_unicast_methods_agree_with_reference():
    cfg, ch = unicast_setup(N=50)
    ref = mcbf.unicast_reference(ch, cfg.gamma(), cfg.sigma2)
    for method in ("opt-sdr", "opt-sca"):
        res = mcbf.solve_qos(ch, cfg, method)
        assert res["power"] == pytest.approx(ref["power"], rel=1e-3)


def test_fixed_point_matches_unicast_dual():
    cfg, ch = unicast_setup()
    lam, residual, _ = mcbf.fixed_point_lambda(ch, cfg.gamma(), tol=1e-12, max_iter=5000)
    ref = mcbf.unicast_reference(ch, cfg.gamma(), cfg.sigma2)
    assert residual <= 1e-12
    np.testing.assert_allclose(lam, ref["lambda"], rtol=1e-6)


def test_asymptotic_lambda_spot_value():
    lam = mcbf.asymptotic_lambda(np.ones(15), np.full(15, 10.0), 256)
    assert lam[0] == pytest.approx(1 / 116)


def test_mmf_power_and_ratio():
    cfg = mcbf.SystemConfig.uniform(2, 2, 8)
    ch = mcbf.gen_channels(cfg, 5)
    res = mcbf.solve_mmf(ch, cfg, "qos2mmf-sca")
    assert mcbf.total_power(res["w"]) == pytest.approx(cfg.P)
    assert res["t_star"] == pytest.approx(mcbf.min_sinr_ratio(res["w"], ch, cfg.gamma(), cfg.sigma2))
    ub = mcbf.solve_mmf(ch, cfg, "upper-bound")["t_star"]
    assert ub >= res["t_star"] * (1 - 1e-3)


def test_bench_csv_is_reproducible():
    cfg = mcbf.SystemConfig.uniform(2, 2, 8)
    kw = dict(methods=["opt-sdr", "opt-sca"], values=[6, 8], trials=2, workers=1, timing=False)
    a = mcbf.bench("qos", cfg, **kw)
    b = mcbf.bench("qos", cfg, **kw)
    assert a == b
    assert len(a.strip().splitlines()) == 1 + 2 * 2 * 2


def test_validate_subset():
    checks = mcbf.validate(only=["qos.power_identity"])
    assert checks
    assert all(ok for ok, _, _ in checks.values())


def test_errors_surface_as_mcbf_error():
    cfg = mcbf.SystemConfig.uniform(2, 2, 8)
    with pytest.raises(mcbf.Error):
        mcbf.asymptotic_lambda(np.ones(15), np.full(15, 10.0), 100)
    with pytest.raises(mcbf.Error):
        mcbf.solve_qos(mcbf.gen_channels(cfg, 1), cfg, "bogus")
    with pytest.raises(mcbf.Error):
        mcbf.SystemConfig.from_json("{}")
