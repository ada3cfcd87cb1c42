import math

import numpy as np
import pytest

import geophase as gp


def test_initial_state_is_normalized():
    p = gp.ModelParams()
    grid = gp.Grid2D.square(128, 20.0)
    psi = gp.initial_state(p, grid)
    assert psi.psi1.shape == (128, 128)
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    x0, y0 = gp.initial_center(p)
    assert x0 == pytest.approx(-2 * 0.1 / (p.mass * p.omega_x**2))
    assert y0 == 0.0


def test_propagation_keeps_norm_and_energy():
    p = gp.ModelParams()
    grid = gp.Grid2D.square(128, 20.0)
    psi = gp.initial_state(p, grid)
    prop = gp.SplitOperator(p, grid, 0.25)
    e0 = prop.observables(psi).energy
    prop.advance(psi, 200)
    obs = prop.observables(psi)
    assert obs.norm == pytest.approx(1.0, abs=1e-10)
    assert obs.energy == pytest.approx(e0, rel=1e-4)
    minus, plus = gp.adiabatic_populations(p, psi)
    assert minus + plus == pytest.approx(obs.norm, abs=1e-12)


def test_components_round_trip_through_numpy():
    grid = gp.Grid2D.square(64, 20.0)
    psi = gp.SpinorField(grid)
    a = np.arange(64 * 64, dtype=complex).reshape(64, 64) * (1 + 2j)
    psi.psi1 = a
    assert np.array_equal(psi.psi1, a)
    with pytest.raises(ValueError):
        psi.psi2 = np.zeros((32, 32), dtype=complex)


def test_constant_latitude_solid_angle():
    for theta in (math.pi / 6, math.pi / 3, math.pi / 2, 2 * math.pi / 3):
        phi = np.linspace(0.0, 2 * math.pi, 512, endpoint=False)
        image = np.stack(
            [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.full_like(phi, np.cos(theta))],
            axis=1,
        )
        gamma = gp.bloch_loop_phase(image.tolist())
        assert abs(gp.wrap_pi(gamma - gp.constant_latitude_phase(theta))) < 1e-3


def test_config_errors_map_to_value_error():
    c = gp.parse_config("[grid]\nn = 128\n")
    assert c.n_x == 128
    assert len(c.hash()) == 64
    with pytest.raises(gp.ConfigError):
        gp.parse_config("[grid]\nbogus = 1\n")
    with pytest.raises(ValueError):
        gp.parse_config("[propagator]\ndt = -1\n").validate()


def test_precision_diagnostic(tmp_path):
    c = gp.parse_config("[grid]\nn = 128\n")
    rho, samples, excluded = gp.diagnose_precision(c, tmp_path / "p.csv")
    assert rho > 0.9
    assert samples > 500 and excluded > 0
    assert (tmp_path / "p.csv").exists()
