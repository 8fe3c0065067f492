import json
import math

import numpy as np
import pytest

from nhtransport import config as cfg
from nhtransport.errors import ConfigurationError
from nhtransport.export import write_csv, write_json, write_pgm, write_trajectory
from nhtransport.model import LatticeParams, build_chain
from nhtransport.propagator import InitialCondition, evolve


@pytest.mark.parametrize(
    "text, value",
    [("pi/4", math.pi / 4), ("-pi/2", -math.pi / 2), ("0.5*pi", math.pi / 2), ("pi", math.pi), (0.3, 0.3), ("1.5", 1.5)],
)
def test_parse_angle(text, value):
    assert cfg.parse_angle(text) == pytest.approx(value)


@pytest.mark.parametrize("bad", ["tau", True, None, "pi/"])
def test_parse_angle_rejects(bad):
    with pytest.raises(ConfigurationError):
        cfg.parse_angle(bad)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigurationError):
        cfg.validate_keys({"kapa": 0.3}, "spread")
    with pytest.raises(ConfigurationError):
        cfg.validate_keys({"points": 10}, "spread")
    with pytest.raises(ConfigurationError):
        cfg.validate_keys({"disorder": {"kind": "uniform", "width": 1}}, "spread")
    cfg.validate_keys({"points": 10, "kappa": 0.1}, "band")


def test_lattice_params_defaults_and_overrides():
    p = cfg.lattice_params({})
    assert (p.kappa, p.rho, p.gamma) == (0.3, 1.0, 0.6) and p.phi == pytest.approx(math.pi / 4)
    q = cfg.lattice_params({"phi": "pi/2", "phi_prime": 0, "kappa": 0})
    assert q.delta_phi == pytest.approx(math.pi / 4) and q.kappa == 0
    with pytest.raises(ConfigurationError):
        cfg.lattice_params({"rho": "one"})


def test_auxiliary_block():
    assert cfg.auxiliary_params({}) is None
    aux = cfg.auxiliary_params({"epsilon": 0.1, "sigma": 1.0, "u_site": [0.0, -30.0]})
    assert aux.u_site == -30j
    with pytest.raises(ConfigurationError):
        cfg.auxiliary_params({"epsilon": 0.1})
    with pytest.raises(ConfigurationError):
        cfg.auxiliary_params({"epsilon": 0.1, "sigma": 1.0, "u_site": -30})


def test_disorder_block_defaults():
    assert cfg.disorder_block({}) == {"kind": "clean"}
    assert cfg.disorder_block({"disorder": {"kind": "uniform"}}) == {"kind": "uniform", "delta": 1.0, "seed": 0}
    assert cfg.disorder_block({"disorder": {"kind": "uniform", "seed": 4}}, 9)["seed"] == 9
    d = cfg.disorder_block({"disorder": {"kind": "defect_pair"}})
    assert d == {"kind": "defect_pair", "v0": 1.0, "n1": -20, "n2": 0}
    with pytest.raises(ConfigurationError):
        cfg.disorder_block({"disorder": {"kind": "gaussian"}})


def test_number_validation():
    assert cfg.number({}, "x", 3) == 3
    assert cfg.number({"x": 4.0}, "x", integer=True) == 4
    with pytest.raises(ConfigurationError):
        cfg.number({"x": 4.5}, "x", integer=True)
    with pytest.raises(ConfigurationError):
        cfg.number({"x": -1}, "x", minimum=0)
    with pytest.raises(ConfigurationError):
        cfg.number({"x": True}, "x")


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError):
        cfg.load_config(bad)
    arr = tmp_path / "arr.json"
    arr.write_text("[1, 2]")
    with pytest.raises(ConfigurationError):
        cfg.load_config(arr)
    with pytest.raises(ConfigurationError):
        cfg.load_config(tmp_path / "missing.json")
    assert cfg.load_config(None) == {}


def test_csv_dialect(tmp_path):
    path = write_csv(tmp_path / "a.csv", ["t", "x"], [[0.0, 1.5], [1.0, -2e-30]])
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "t,x"
    assert lines[1] == "0.000000000000e+00,1.500000000000e+00"
    assert np.allclose(np.loadtxt(path, delimiter=",", skiprows=1), [[0, 1.5], [1, -2e-30]])


def test_pgm(tmp_path):
    path = write_pgm(tmp_path / "a.pgm", np.array([[0.0, 0.5], [1.0, 0.25]]))
    assert path.read_text() == "P2\n2 2\n255\n0 128\n255 64\n"
    zero = write_pgm(tmp_path / "z.pgm", np.zeros((1, 3)))
    assert zero.read_text().splitlines()[-1] == "0 0 0"


def test_json_handles_numpy(tmp_path):
    path = write_json(tmp_path / "a.json", {"b": np.arange(3), "a": np.float64(0.5), "c": 1 - 2j, "d": np.bool_(True)})
    data = json.loads(path.read_text())
    assert data == {"a": 0.5, "b": [0, 1, 2], "c": [1.0, -2.0], "d": True}
    assert path.read_text().index('"a"') < path.read_text().index('"b"')


def test_trajectory_export(tmp_path):
    p = LatticeParams(0.3, 1, 0.6, 0.2)
    tr = evolve(build_chain(p, size=21), InitialCondition.single_site(0), 2.0, sample_every=10)
    files = write_trajectory(tmp_path, "run", tr, p.as_dict())
    table = np.loadtxt(tmp_path / files["amplitudes"], delimiter=",", skiprows=1)
    assert table.shape == (len(tr), 22)
    assert np.allclose(table[:, 1:], np.abs(tr.main_amplitudes()), atol=1e-12)
    meta = json.loads((tmp_path / files["metadata"]).read_text())
    assert set(meta) >= {"params", "dt", "samples", "edge_touch", "log_norm_series"}
    pgm = (tmp_path / files["heatmap"]).read_text().splitlines()
    assert pgm[1] == f"21 {len(tr)}"
