import json

import numpy as np
import pytest

import kgap

SMALL = {"velocity_half_width": 4.0, "n_velocity": 6}


def test_config_defaults_and_errors():
    cfg = kgap.config()
    assert cfg["n_velocity"] == 10
    assert cfg["y_m0"] > max(4 * cfg["s"], 1)
    with pytest.raises(ValueError, match="n_velocity"):
        kgap.config({"n_velocity": 7})
    with pytest.raises(ValueError, match="bogus"):
        kgap.config({"bogus": 1})


def test_maxwellian_mass():
    h = 2 * 8.0 / 16
    mu = kgap.maxwellian(8.0, 16)
    assert mu.shape == (16**3,)
    assert abs(mu.sum() * h**3 - 1) < 1e-7
    assert kgap.nodes(8.0, 16).shape == (16**3, 3)


def test_collision_equilibrium_and_conservation():
    mu = kgap.maxwellian(4.0, 6)
    v = kgap.nodes(4.0, 6)
    q0 = kgap.collision(mu, mu, SMALL)
    assert np.abs(q0).max() < 1e-10
    f = mu * (1 + 0.3 * v[:, 0])
    q = kgap.collision(f, f, SMALL)
    inv = np.column_stack([np.ones(len(v)), v, (v**2).sum(1)])
    assert np.abs(inv.T @ q).max() < 1e-10 * np.abs(q).max() * len(v)


def test_constants_suite_is_deterministic():
    a = kgap.verify("constants")
    b = kgap.verify("constants")
    assert a["schema"] == kgap.SCHEMA
    assert a["pass"]
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_spectrum_small_grid():
    out = kgap.spectrum(SMALL)
    assert out["gap"] > 0
    assert sum(out["cluster"]) == 5
    assert out["reports"][0]["pass"]


def test_evolve_linear_small_grid():
    out = kgap.evolve(dict(SMALL, t_end=1.0, initial="homogeneous"))
    y = np.array(out["y_norm"])
    assert y[-1] < y[0]
    assert out["moment_drift"] < 1e-10
