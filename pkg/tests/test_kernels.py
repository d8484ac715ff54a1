import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import random_model
from wgqed import _kernels
from wgqed.lindblad import liouvillian_batch, model_coefficients, steady_state, superoperator_basis, trace_row
from wgqed.operators import vec

numba_only = pytest.mark.skipif(_kernels.assemble_numba is None, reason="numba not importable")


@pytest.fixture
def batch(rng):
    models = [random_model(rng) for _ in range(16)]
    return models, liouvillian_batch(models)


@numba_only
def test_assemble_twins(batch):
    models, _ = batch
    coeffs = np.array([model_coefficients(m) for m in models])
    basis = superoperator_basis(2)
    np.testing.assert_allclose(_kernels.assemble_numba(coeffs, basis), _kernels.assemble_numpy(coeffs, basis), atol=1e-12)


@numba_only
def test_steady_state_twins(batch):
    _, Ls = batch
    row = trace_row(4)
    np.testing.assert_allclose(_kernels.steady_state_numba(Ls, row), _kernels.steady_state_numpy(Ls, row), atol=1e-12)


@numba_only
def test_resolvent_twins(batch):
    _, Ls = batch
    L = Ls[0]
    rho = steady_state(L)
    Lp = L - np.abs(L).max() * np.outer(vec(rho), trace_row(4))
    seed = np.arange(16, dtype=complex)
    w = np.ones(16, dtype=complex)
    f = np.linspace(-50, 50, 101)
    np.testing.assert_allclose(_kernels.resolvent_numba(Lp, seed, w, f), _kernels.resolvent_numpy(Lp, seed, w, f), rtol=1e-10)


def test_resolvent_chunking(monkeypatch, batch):
    _, Ls = batch
    L = Ls[1] - 100 * np.eye(16)
    seed = np.ones(16, dtype=complex)
    f = np.linspace(-5, 5, 37)
    full = _kernels.resolvent_numpy(L, seed, seed, f)
    monkeypatch.setattr(_kernels, "_CHUNK_BYTES", 16 * 16 * 16 * 5)
    np.testing.assert_allclose(_kernels.resolvent_numpy(L, seed, seed, f), full, rtol=1e-12)


@pytest.mark.parametrize("flag, expected", [("0", "numpy"), ("1", "numba")])
def test_env_flag_selects_backend(flag, expected):
    if expected == "numba" and _kernels.assemble_numba is None:
        pytest.skip("numba not importable")
    env = {**os.environ, "WGQED_NUMBA": flag}
    out = subprocess.run(
        [sys.executable, "-c", "from wgqed import _kernels; print(_kernels.backend())"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == expected
