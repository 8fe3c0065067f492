import math

import numpy as np
import pytest

from nhtransport.errors import ConfigurationError, NumericalError
from nhtransport.model import LatticeParams, SiteField, build_chain
from nhtransport.observables import (
    count_pulses,
    probabilities,
    probe_trace,
    scatter_report,
    spread_metrics,
)
from nhtransport.propagator import InitialCondition, Trajectory, evolve, min_lattice_size

NH = LatticeParams(0.3, 1.0, 0.6, math.pi / 4)
HERM = LatticeParams(0.0, 1.0, 0.0, math.pi / 4)


def test_single_site_start():
    tr = evolve(build_chain(NH, size=41), InitialCondition.single_site(3), 0.0)
    m = spread_metrics(tr)
    assert m.sigma[0] == 0.0 and m.mean[0] == 3.0


def test_sigma_definition():
    tr = evolve(build_chain(NH, size=61), InitialCondition.single_site(0), 5.0, sample_every=20)
    w = probabilities(tr)
    assert np.allclose(w.sum(axis=1), 1.0)
    m = spread_metrics(tr)
    n = tr.sites
    assert np.allclose(m.sigma**2, w @ n**2 - (w @ n) ** 2)
    assert m.table().shape == (len(tr), 4)
    assert m.at(2.5) == np.argmin(np.abs(tr.times - 2.5))


def test_hermitian_ballistic_sigma():
    size = min_lattice_size(HERM, 50.0, 20)
    tr = evolve(build_chain(HERM, size=size), InitialCondition.single_site(0), 50.0, sample_every=50)
    m = spread_metrics(tr)
    sel = tr.times >= 5
    assert np.allclose(m.sigma[sel], math.sqrt(2) * tr.times[sel], rtol=0.02)


def test_non_hermitian_sigma_slope():
    size = min_lattice_size(NH, 40.0, 20)
    tr = evolve(build_chain(NH, size=size), InitialCondition.single_site(0), 40.0, sample_every=20)
    m = spread_metrics(tr)
    k = m.at(40.0)
    slope = (m.sigma[k] - m.sigma[m.at(35.0)]) / (tr.times[k] - tr.times[m.at(35.0)])
    assert slope == pytest.approx(math.sqrt(2), rel=0.10)


def test_metrics_gamma_invariant():
    out = []
    for gamma in (0.0, 1.5):
        p = LatticeParams(0.3, 1, gamma, 0.3)
        tr = evolve(build_chain(p, size=80), InitialCondition.single_site(0), 8.0, dt=0.01, sample_every=100)
        out.append(spread_metrics(tr))
    assert np.allclose(out[0].sigma, out[1].sigma, atol=1e-10)
    assert np.allclose(out[0].mean, out[1].mean, atol=1e-10)


def test_zero_state_is_an_error():
    tr = Trajectory(np.zeros(1), np.zeros((1, 4), complex), np.zeros(1), np.arange(4) - 2, 4)
    with pytest.raises(NumericalError):
        spread_metrics(tr)


class TestPulses:
    def test_counts_separated_maxima(self):
        t = np.linspace(0, 100, 1001)
        trace = np.exp(-((t - 20) ** 2) / 4) + 0.5 * np.exp(-((t - 50) ** 2) / 4) + 0.05 * np.exp(-((t - 80) ** 2) / 4)
        assert count_pulses(trace, 0.1) == 2
        assert count_pulses(trace, 0.01) == 3

    def test_ripple_is_not_a_pulse(self):
        t = np.linspace(0, 40, 801)
        trace = np.exp(-((t - 20) ** 2) / 20) * (1 + 0.01 * np.cos(8 * t))
        assert count_pulses(trace, 0.1) == 1

    def test_empty_trace(self):
        assert count_pulses(np.zeros(5)) == 0


def packet_run(params, defects, n0, q0, t, size=601):
    u = SiteField.defect_pair(size, *defects) if defects else SiteField.clean(size)
    op = build_chain(params, u)
    return evolve(op, InitialCondition.gaussian(n0, 10.0, q0), t, sample_every=20)


class TestScatter:
    def test_free_propagation(self):
        tr = packet_run(HERM, None, -60, -math.pi / 2, 120.0)
        r = scatter_report(tr, -20, 0)
        assert r.direction == "right" and r.probe_site == 40
        assert r.transmitted == pytest.approx(1.0, abs=1e-6)
        assert r.reflected < 1e-6 and r.echoes == 1 and r.complete

    def test_fractions_bounded(self):
        tr = packet_run(HERM, (1.0, -20, 0), -60, -math.pi / 2, 120.0)
        r = scatter_report(tr, -20, 0)
        assert r.transmitted + r.reflected + r.resident <= 1 + 1e-9
        assert r.reflected > 0.05 and r.echoes >= 2

    def test_incomplete_run_flagged(self):
        tr = packet_run(HERM, (1.0, -20, 0), -60, -math.pi / 2, 20.0)
        assert not scatter_report(tr, -20, 0).complete

    def test_mirror_symmetry(self):
        # phi -> -phi together with n -> -n swaps left and right incidence
        p, pm = LatticeParams(0, 1, 0, 0.3), LatticeParams(0, 1, 0, -0.3)
        a = packet_run(p, (1.0, -20, 0), -60, -math.pi / 2, 100.0)
        b = packet_run(pm, (1.0, 0, 20), 60, math.pi / 2, 100.0)
        ra, rb = scatter_report(a, -20, 0), scatter_report(b, 0, 20)
        assert ra.direction == "right" and rb.direction == "left"
        for key in ("transmitted", "reflected", "resident"):
            assert getattr(ra, key) == pytest.approx(getattr(rb, key), abs=1e-8)
        assert ra.echoes == rb.echoes

    def test_bad_inputs(self):
        tr = packet_run(HERM, None, -60, -math.pi / 2, 1.0, size=201)
        with pytest.raises(ConfigurationError):
            scatter_report(tr, 0, -20)
        with pytest.raises(ConfigurationError):
            scatter_report(tr, -80, 0)
        with pytest.raises(ConfigurationError):
            probe_trace(tr, 5000)
