import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wgqed.geometry import DriveSpec, Geometry, RateSet, build_effective_model
from wgqed.scattering import (
    CSV_COLUMNS,
    sweep_elastic,
    t_min,
    transmission_reflection,
    weak_drive_transmission,
)

SINGLE = Geometry((0.0,), 18.6)


def single(f_d, rabi, g1=26.0, nr=0.0, phi=0.0, f_q=6.4):
    return build_effective_model([f_q], SINGLE, RateSet.uniform(1, g1, nr, phi), DriveSpec(f_d, rabi))


@settings(max_examples=50, deadline=None)
@given(g1=st.floats(1, 50), nr=st.floats(0, 10), phi=st.floats(0, 10))
def test_t_min_closed_form(g1, nr, phi):
    p = transmission_reflection(single(6.4, 1e-5 * g1, g1, nr, phi))
    assert abs(p.t - t_min(g1, nr, phi)) < 1e-8


def test_weak_drive_lorentzian():
    g1, nr, phi = 20.0, 1.0, 0.5
    for delta in np.linspace(-60, 60, 25):
        p = transmission_reflection(single(6.4 - delta * 1e-3, 1e-5 * g1, g1, nr, phi))
        assert abs(p.t - weak_drive_transmission(delta, g1, nr, phi)) < 1e-8


@pytest.mark.parametrize("x", [1e-3, 1e-4])
def test_linear_response_correction_is_quadratic(x):
    # leading saturation correction to t is 2 (Omega/gamma_1)^2 on resonance
    for g1, nr, phi in [(26.0, 0.0, 0.0), (13.0, 1.2, 1.8)]:
        p = transmission_reflection(single(6.4, x * g1, g1, nr, phi))
        assert abs(p.t - t_min(g1, nr, phi)) <= 2.01 * x**2


def test_saturation():
    T = [transmission_reflection(single(6.4, r)).T for r in (1e-3, 10, 100, 1000)]
    assert np.all(np.diff(T) > 0)
    assert T[-1] > 0.99


def test_single_qubit_energy_conservation():
    for delta in np.linspace(-80, 80, 17):
        p = transmission_reflection(single(6.4 + delta * 1e-3, 1e-3))
        assert abs(p.T + p.R - 1) < 1e-6
    assert transmission_reflection(single(6.4, 1e-3)).R == pytest.approx(1, abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(
    g1=st.floats(1, 40), nr=st.floats(0, 5), phi=st.floats(0, 5),
    delta=st.floats(-100, 100), rabi=st.floats(0.01, 100),
)
def test_passivity(g1, nr, phi, delta, rabi):
    p = transmission_reflection(single(6.4 + delta * 1e-3, rabi, g1, nr, phi))
    assert p.T + p.R <= 1 + 1e-9


def test_two_qubit_three_quarter_total_reflection():
    geom = Geometry.from_separation(18.6, 1.0, 6.4)
    m = build_effective_model([4.8, 4.8], geom, RateSet.uniform(2, 13), DriveSpec(4.8, 1e-4))
    p = transmission_reflection(m)
    assert p.T + p.R == pytest.approx(1, abs=1e-6)


def test_two_qubit_detuned_pair_reflects():
    # a detuned ideal pair at d = lambda reflects fully at each qubit frequency
    geom = Geometry.from_separation(18.6, 1.0, 6.4)
    m = build_effective_model([6.38, 6.42], geom, RateSet.uniform(2, 26), DriveSpec(6.38, 1e-4))
    p = transmission_reflection(m)
    assert p.R > 0.9
    assert p.T + p.R == pytest.approx(1, abs=1e-6)


def test_far_detuned_partner_decouples():
    geom = Geometry.from_separation(18.6, 1.0, 6.4)
    rates = RateSet((26.0, 26.0), (0.3, 0.3), (0.2, 0.2))
    f_d = 6.39
    one = transmission_reflection(single(f_d, 1e-3, 26.0, 0.3, 0.2))
    devs = []
    for offset in (1.0, 10.0, 100.0):
        m = build_effective_model([6.4, 6.4 + offset], geom, rates, DriveSpec(f_d, 1e-3))
        pair = transmission_reflection(m)
        devs.append(max(abs(pair.t - one.t), abs(pair.r - one.r)))
    # influence of the partner falls off as 1/detuning
    assert devs[0] / devs[1] == pytest.approx(10, rel=0.05)
    assert devs[1] / devs[2] == pytest.approx(10, rel=0.05)
    assert devs[2] < 1e-4


def test_continuity_in_rabi():
    t = [transmission_reflection(single(6.39, r, 13, 1.2, 1.8)).t for r in np.linspace(1, 2, 101)]
    assert np.abs(np.diff(t)).max() < 0.01


def test_zero_drive_rejected():
    with pytest.raises(ValueError):
        transmission_reflection(single(6.4, 0.0))


def test_sweep_grid_and_csv(tmp_path):
    geom = Geometry.from_separation(18.6, 1.0, 6.4)
    rates = RateSet.uniform(2, 26, 0.18, 0.2)
    freqs = np.linspace(6.3, 6.5, 21)

    def model_at(f, v):
        if v > 1:
            raise ValueError("out of range")
        return build_effective_model([6.4, 6.4 + 0.01 * v], geom, rates, DriveSpec(f, 7.5))

    sweep = sweep_elastic(model_at, freqs, [0.0, 0.5, 2.0], workers=2, chunk=8)
    assert sweep.t.shape == (3, 21)
    assert np.all(np.isnan(sweep.t[2])) and len(sweep.errors) == 21
    ref = transmission_reflection(model_at(freqs[4], 0.5))
    assert sweep.t[1, 4] == pytest.approx(ref.t, abs=1e-12)
    path = tmp_path / "s.csv"
    sweep.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 1 + 3 * 21


def test_sweep_records_degenerate_points():
    geom = Geometry.from_separation(18.6, 1.0, 6.4)
    rates = RateSet.uniform(2, 26)
    sweep = sweep_elastic(lambda f, v: build_effective_model([6.4, 6.4], geom, rates, DriveSpec(f, 1.0)), [6.4])
    assert (0, 0) in sweep.errors and "not unique" in sweep.errors[(0, 0)]


def test_empty_sweep_rejected():
    with pytest.raises(ValueError):
        sweep_elastic(lambda f, v: None, [])
