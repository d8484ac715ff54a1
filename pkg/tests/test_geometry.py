import numpy as np
import pytest
from hypothesis import given, strategies as st

from wgqed.geometry import (
    DriveSpec,
    Geometry,
    RateSet,
    build_effective_model,
    correlated_decay,
    exchange_rate,
)
from wgqed.operators import basis_state, dark_state, lowering

rate = st.floats(0.0, 100.0)
frac = st.floats(-3.0, 3.0)


def test_rate_examples():
    g = 26.0
    assert exchange_rate(g, g, 1.0) == pytest.approx(0, abs=1e-12)
    assert abs(exchange_rate(g, g, 0.75)) == pytest.approx(g / 2)
    assert exchange_rate(g, g, 0.75) == pytest.approx(-g / 2)
    assert exchange_rate(g, g, 0.5) == pytest.approx(0, abs=1e-12)
    assert correlated_decay(g, g, 1.0) == pytest.approx(g)
    assert correlated_decay(g, g, 0.75) == pytest.approx(0, abs=1e-12)
    assert correlated_decay(g, g, 0.25) == pytest.approx(0, abs=1e-12)


def test_negative_rates_rejected():
    with pytest.raises(ValueError):
        exchange_rate(-1, 1, 0.3)
    with pytest.raises(ValueError):
        correlated_decay(1, -1, 0.3)


@given(g=rate, x=frac)
def test_equal_rate_identity(g, x):
    lhs = correlated_decay(g, g, x) ** 2 + (2 * exchange_rate(g, g, x)) ** 2
    assert lhs == pytest.approx(g**2, rel=1e-12, abs=1e-12)


@given(a=rate, b=rate, x=frac, k=st.integers(-4, 4))
def test_periodic(a, b, x, k):
    assert exchange_rate(a, b, x + k) == pytest.approx(exchange_rate(a, b, x), abs=1e-9)
    assert correlated_decay(a, b, x + k) == pytest.approx(correlated_decay(a, b, x), abs=1e-9)


def test_dark_state_annihilated():
    jump = (lowering(0, 2) + lowering(1, 2)) / np.sqrt(2)
    np.testing.assert_allclose(jump @ dark_state(), 0, atol=1e-15)


def test_basis_ordering():
    # qubit 0 is the most significant factor
    assert np.allclose(lowering(0, 2) @ basis_state("eg"), basis_state("gg"))
    assert np.allclose(lowering(1, 2) @ basis_state("ge"), basis_state("gg"))


def test_single_qubit_reduction():
    m = build_effective_model([6.4], Geometry((0.0,), 18.6), RateSet.uniform(1, 26, 0.1, 0.2), DriveSpec(6.41, 2.0))
    assert m.exchange.shape == (1, 1) and m.exchange[0, 0] == 0
    assert m.dissipator[0, 0] == pytest.approx(26.1)
    assert m.detunings[0] == pytest.approx(10.0)
    h = m.hamiltonian()
    assert np.allclose(h, [[0, 0], [0, -10]] + 0.5 * 2.0 * np.array([[0, 1], [1, 0]]))


def test_d_lambda_model():
    geom = Geometry.from_separation(18.6, 1.0, 6.4)
    m = build_effective_model([6.4, 6.4], geom, RateSet.uniform(2, 26), DriveSpec(6.4, 1.0))
    assert np.exp(1j * m.phases[1]) == pytest.approx(np.exp(1j * m.phases[0]))
    np.testing.assert_allclose(m.dissipator, 26 * np.ones((2, 2)), atol=1e-12)
    assert np.linalg.matrix_rank(m.dissipator, tol=1e-9) == 1
    assert m.exchange[0, 1] == pytest.approx(0, abs=1e-12)


def test_three_quarter_lambda_model():
    geom = Geometry.from_separation(18.6, 1.0, 6.4)  # dispersion gives 3/4 at 4.8 GHz
    assert geom.d_over_lambda(4.8) == pytest.approx(0.75)
    m = build_effective_model([4.8, 4.8], geom, RateSet.uniform(2, 13), DriveSpec(4.8, 1.0))
    assert m.phases[1] - m.phases[0] == pytest.approx(1.5 * np.pi)
    assert abs(m.exchange[0, 1]) == pytest.approx(6.5)
    np.testing.assert_allclose(m.dissipator, np.diag([13, 13]), atol=1e-12)


@given(
    g=st.lists(st.floats(0.1, 50), min_size=2, max_size=2),
    nr=st.lists(st.floats(0, 5), min_size=2, max_size=2),
    x=st.floats(0.05, 3.0),
    f=st.floats(4.0, 7.0),
)
def test_model_invariants(g, nr, x, f):
    geom = Geometry.from_separation(18.6, x, 6.0)
    m = build_effective_model([6.0, 6.1], geom, RateSet(g, nr, (0, 0)), DriveSpec(f, 3.0))
    assert np.allclose(m.dissipator, m.dissipator.T)
    assert np.allclose(m.exchange, m.exchange.T) and np.all(np.diag(m.exchange) == 0)
    radiative = m.dissipator - np.diag(nr)
    assert np.linalg.eigvalsh(radiative).min() > -1e-9
    h = m.hamiltonian()
    assert np.allclose(h, h.conj().T)


def test_right_port_phases():
    geom = Geometry((0.0, 5.0), 20.0)
    assert geom.phases(6.0, "right") == pytest.approx([np.pi / 2, 0.0])
    with pytest.raises(ValueError):
        geom.phases(6.0, "top")


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        build_effective_model([6.4], Geometry((0.0, 1.0), 18.6), RateSet.uniform(2, 1), DriveSpec(6.4, 1))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        Geometry((0.0,), -1.0)
    with pytest.raises(ValueError):
        RateSet((1.0,), (-0.1,), (0.0,))
    with pytest.raises(ValueError):
        DriveSpec(6.4, -1.0)
