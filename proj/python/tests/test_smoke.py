import cmath
import math
from pathlib import Path

import numpy as np
import pytest

import wormlab

CONFIG = Path(__file__).resolve().parents[2] / "configs" / "model.json"


def test_alpha_at_zero():
    assert abs(wormlab.alpha_coefficient(0.0) + 2.0) <= 1e-12


def test_flat_levi_coefficient():
    worm = wormlab.WormConfig()
    for t in (-0.3, 0.0, 0.2):
        mu, nu = wormlab.levi_coefficients(worm, 0.1, t)
        assert mu == pytest.approx(8 * (1 - math.cos(t)), abs=1e-8)
        assert abs(nu) <= 1e-10


def test_scan_and_negative_control():
    assert wormlab.pseudoconvexity_scan(wormlab.WormConfig(), 41, 41)["passed"]
    bad = wormlab.pseudoconvexity_scan(wormlab.WormConfig(sigma=0.05), 41, 41)
    assert not bad["passed"] and bad["violations"] > 0


def test_invalid_worm_raises():
    with pytest.raises(ValueError):
        wormlab.WormConfig(M=2.0)


def test_shooting_closed_form():
    for z in (0.3 + 0.2j, 2.0 - 0.5j):
        assert abs(wormlab.shoot(z) - cmath.sin(2 * z) / z) <= 1e-8 * abs(cmath.sin(2 * z) / z)


def test_zeros_and_exceptional_set():
    cert = wormlab.locate_zeros([0.5, 5.0, -1.0, 1.0])
    assert cert["winding"] == cert["zero_count"] == 3
    for k, z in enumerate(cert["zeros"], start=1):
        assert abs(z["zeta"] - k * math.pi / 2) <= 1e-8
    s = wormlab.exceptional_sobolev(0.0, 6.0)
    assert np.allclose(s, [0.5 + k * math.pi / 2 for k in (1, 2, 3)], atol=1e-6)
    assert wormlab.exceptional_sobolev(0.0, 2.0) == []


def test_mellin_gamma_oracle():
    t = np.array(wormlab.mellin_nodes(1e-16, 60.0, 1024))
    f = (t * np.exp(-t)).astype(complex)
    F = wormlab.mellin_at(1e-16, 60.0, f, 0.0, 1.0)
    assert abs(F) ** 2 == pytest.approx(math.pi / math.sinh(math.pi), rel=1e-6)
    d = wormlab.mellin_defects(1e-16, 60.0, f)
    assert max(d.values()) <= 1e-6


def test_lambda_symbol():
    for s in (1.0, 4.5):
        for tau in (0.0, 1.0, 10.0, 100.0):
            assert abs(wormlab.lambda_conjugation_symbol(s, tau) + s - s / (1 + tau * tau)) <= 1e-14


def test_trace_sweep_is_seeded():
    a = wormlab.lemma2_sweep(trials=20, n=401, seed=3)
    b = wormlab.lemma2_sweep(trials=20, n=401, seed=3, jobs=2)
    assert a == b
    assert a["violations"] == 0


def test_config_round_trip():
    cfg = wormlab.load_config(CONFIG, ["seed=11"])
    assert cfg["seed"] == 11
    assert wormlab.config_hash(str(CONFIG), ["jobs=4"]) == wormlab.config_hash(str(CONFIG))
    with pytest.raises(wormlab.ConfigError):
        wormlab.load_config(CONFIG, ["spectrum.nope=1"])
