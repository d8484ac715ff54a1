import json

import numpy as np
import pytest

from wgqed.fitting import (
    FitResult,
    MaxIterations,
    ScenarioForward,
    SingularJacobian,
    apply_params,
    fit_spectrum,
)
from wgqed.geometry import DriveSpec, Geometry, RateSet

GEOM = Geometry.from_separation(18.6, 1.0, 6.4)


def forward_48(rabi=8.7, kind="psd", port="transmission"):
    grid = 4.8 + np.linspace(-60, 60, 241) * 1e-3
    rates = RateSet.uniform(2, 13.0, 1.2, 1.8)
    return ScenarioForward((4.8, 4.8), GEOM, rates, DriveSpec(4.8, rabi), grid, kind=kind, port=port)


def forward_64(rabi):
    grid = 6.4 + np.concatenate([np.linspace(-80, -3, 78), np.linspace(-3, 3, 121)[1:-1], np.linspace(3, 80, 78)]) * 1e-3
    rates = RateSet.uniform(2, 26.0, 0.18, 0.2)
    return ScenarioForward((6.4, 6.4), GEOM, rates, DriveSpec(6.4, rabi), grid, port="reflection")


NAMES = ["gamma_nr", "gamma_phi"]
TRUTH = {"gamma_nr": 1.2, "gamma_phi": 1.8}


def test_recovery_from_perturbed_start():
    fwd = forward_48()
    data = 3.0 * fwd(TRUTH) + 0.01
    res = fit_spectrum(data, fwd, NAMES, [2.4, 3.6])
    assert res.params["gamma_nr"] == pytest.approx(1.2, rel=1e-3)
    assert res.params["gamma_phi"] == pytest.approx(1.8, rel=1e-3)
    assert res.scale == pytest.approx(3.0, rel=1e-6)
    assert res.offset == pytest.approx(0.01, abs=1e-8)
    assert res.residual_norm <= res.initial_residual_norm


def test_fixed_point():
    fwd = forward_48()
    res = fit_spectrum(fwd(TRUTH), fwd, NAMES, [1.2, 1.8])
    assert res.params == pytest.approx(TRUTH, rel=1e-9)
    assert res.scale == pytest.approx(1.0, rel=1e-9)
    assert res.offset == pytest.approx(0.0, abs=1e-12)
    assert res.iterations <= 2


@pytest.mark.parametrize("c", [0.01, 7.0])
def test_scale_equivariance(c):
    fwd = forward_48()
    data = fwd({"gamma_nr": 1.0, "gamma_phi": 2.2})
    a = fit_spectrum(data, fwd, NAMES, [1.5, 1.5])
    b = fit_spectrum(c * data, fwd, NAMES, [1.5, 1.5])
    assert b.params == pytest.approx(a.params, rel=1e-6)
    assert b.scale == pytest.approx(c * a.scale, rel=1e-6)


def test_elastic_fit():
    fwd = forward_48(rabi=8.7, kind="T")
    data = fwd(TRUTH)
    res = fit_spectrum(data, fwd, NAMES, [0.6, 3.0], fit_scale=False, fit_offset=False)
    assert res.params == pytest.approx(TRUTH, rel=1e-4)


def test_joint_fit_shares_parameters():
    fwds = [forward_48(15.0), forward_48(5.0)]
    data = [2.0 * fwds[0](TRUTH), 0.5 * fwds[1](TRUTH)]
    res = fit_spectrum(data, fwds, NAMES, [2.4, 3.6])
    assert res.params == pytest.approx(TRUTH, rel=1e-4)
    assert res.scales == pytest.approx([2.0, 0.5], rel=1e-6)


@pytest.mark.parametrize("gamma_nr", [0.18, 0.38, 0.58])
def test_drift_band_at_64(gamma_nr):
    for rabi in (5.0, 10.0):
        fwd = forward_64(rabi)
        data = fwd({"gamma_nr": gamma_nr})
        res = fit_spectrum(data, fwd, ["gamma_nr"], [0.4])
        assert 0.18 - 1e-6 <= res.params["gamma_nr"] <= 0.58 + 1e-6
        assert res.params["gamma_nr"] == pytest.approx(gamma_nr, rel=1e-3)


def test_fit_spread_shrinks_with_averaging():
    fwd = forward_48(5.0)
    clean = fwd(TRUTH)
    rng = np.random.default_rng(0)
    spreads = []
    for n_avg in (100, 1600):
        est = []
        for _ in range(25):
            noisy = clean * (1 + rng.standard_normal(clean.size) / np.sqrt(n_avg))
            est.append(fit_spectrum(noisy, fwd, NAMES, [1.2, 1.8]).params["gamma_phi"])
        spreads.append(np.std(est))
    assert spreads[0] / spreads[1] == pytest.approx(4.0, rel=0.35)


def test_singular_jacobian():
    x = np.linspace(-5, 5, 50)

    def fwd(p):
        return 1.0 / (1 + (x / (p["a"] + p["b"])) ** 2)

    data = fwd({"a": 1.0, "b": 1.0})
    with pytest.raises(SingularJacobian) as info:
        fit_spectrum(data, fwd, ["a", "b"], [1.5, 1.0], fit_scale=False, fit_offset=False)
    d = info.value.null_direction
    assert abs(d["a"] + d["b"]) < 1e-3


def test_max_iterations():
    fwd = forward_48()
    with pytest.raises(MaxIterations):
        fit_spectrum(fwd(TRUTH), fwd, NAMES, [5.0, 0.1], max_nfev=2)


def test_bad_inputs():
    fwd = forward_48()
    data = fwd(TRUTH)
    with pytest.raises(ValueError):
        fit_spectrum(data, fwd, NAMES, [1.0])
    with pytest.raises(ValueError):
        fit_spectrum(data, fwd, NAMES, [-1.0, 1.0])
    with pytest.raises(ValueError):
        fit_spectrum(data[:10], fwd, NAMES, [1.0, 1.0])


def test_apply_params():
    r = RateSet.uniform(2, 13, 1.0, 1.0)
    out = apply_params(r, {"gamma_nr": 2.0, "gamma_phi[1]": 3.0})
    assert out.gamma_nr == (2.0, 2.0) and out.gamma_phi == (1.0, 3.0)
    with pytest.raises(KeyError):
        apply_params(r, {"bogus": 1.0})


def test_result_json(tmp_path):
    fwd = forward_48()
    res = fit_spectrum(fwd(TRUTH), fwd, NAMES, [1.3, 1.7])
    assert isinstance(res, FitResult)
    res.to_json(tmp_path / "r.json")
    back = json.loads((tmp_path / "r.json").read_text())
    assert set(back["params"]) == set(NAMES)
    assert np.array(back["covariance"]).shape == (2, 2)
