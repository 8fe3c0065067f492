"""Property-based checks of the structural invariants."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from nhtransport.ensemble import draw_disorder, member_seed
from nhtransport.model import (
    AuxiliaryParams,
    LatticeParams,
    SiteField,
    build_chain,
    build_zigzag,
    effective_params,
    gauge_shift,
    tune_auxiliary_energy,
)
from nhtransport.propagator import StateVector, evolve
from nhtransport.spectrum import dispersion_chain, dispersion_zigzag, saddle_constants

angle = st.floats(-math.pi, math.pi)
params = st.builds(
    LatticeParams,
    kappa=st.floats(0.0, 1.0),
    rho=st.floats(0.0, 2.0),
    gamma=st.floats(0.0, 2.0),
    phi=angle,
)
nh_params = st.builds(
    LatticeParams,
    kappa=st.floats(0.01, 1.0),
    rho=st.floats(0.0, 2.0),
    gamma=st.floats(0.0, 2.0),
    phi=angle,
)


@given(params, angle)
def test_dispersion_closed_form(p, q):
    d = dispersion_chain(q, p)
    ref = complex(2 * p.rho * math.cos(q + p.phi), -p.gamma - 2 * p.kappa * math.cos(2 * q))
    assert abs(d.e - ref) < 1e-14 * max(1.0, abs(ref))


@given(params, angle)
def test_derivatives_match_finite_differences(p, q):
    h = 1e-5
    d, hi, lo = dispersion_chain(q, p), dispersion_chain(q + h, p), dispersion_chain(q - h, p)
    scale = max(abs(d.de), abs(d.d2e), p.rho + p.kappa, 1e-12)
    # cancellation error of the differences grows with |E|, not with the derivatives
    assert abs((hi.e - lo.e) / (2 * h) - d.de) < 1e-6 * scale + 1e-10 * abs(d.e)
    assert abs((hi.e - 2 * d.e + lo.e) / h**2 - d.d2e) < 1e-3 * scale + 1e-5 * abs(d.e)


@given(nh_params)
def test_saddle_constants_closed_form(p):
    sc = saddle_constants(p)
    s, c = math.sin(p.phi), math.cos(p.phi)
    assert abs(sc.de1 + 2 * p.rho * c) < 1e-14
    assert abs(sc.de2 - 2 * p.rho * c) < 1e-14
    assert abs(sc.d2e1 - (-8j * p.kappa + 2 * p.rho * s)) < 1e-14
    assert abs(sc.e1 - (-2 * p.rho * s - 1j * (p.gamma - 2 * p.kappa))) < 1e-14
    assert math.isclose(abs(sc.d2e1), abs(sc.d2e2), rel_tol=1e-14)
    assert math.isclose(abs(sc.d2e1) ** 2, 64 * p.kappa**2 + 4 * p.rho**2 * s**2, rel_tol=1e-12, abs_tol=1e-14)


@given(params, angle, st.floats(-math.pi / 2, math.pi / 2))
def test_zigzag_bands_depend_on_flux_difference(p, chi, q):
    a = dispersion_zigzag(q, p)
    b = dispersion_zigzag(q, gauge_shift(p, chi))
    assert abs(a[0] - b[0]) < 1e-12 and abs(a[1] - b[1]) < 1e-12


@given(st.floats(-2, 2), st.floats(0.01, 2), st.floats(0.1, 5))
def test_tuned_elimination(eps, kappa, sigma):
    u = tune_auxiliary_energy(eps, kappa, sigma)
    eff = effective_params(AuxiliaryParams(eps, sigma, u))
    assert abs(eff.kappa_eff + 1j * kappa) < 1e-14 * max(1.0, abs(eps) + sigma**2 / abs(u))
    assert u.imag < 0


@settings(max_examples=30, deadline=None)
@given(params, st.integers(0, 2**32))
def test_zigzag_chain_equivalence(p, seed):
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1, 1, 24)
    va, vb = SiteField(u).to_sublattices()
    x = rng.normal(size=24) + 1j * rng.normal(size=24)
    assert np.max(np.abs(build_zigzag(p, va, vb, 12).rhs(x) - build_chain(p, u).rhs(x))) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2), angle, st.integers(0, 2**32))
def test_hermitian_limit(rho, phi, seed):
    rng = np.random.default_rng(seed)
    op = build_chain(LatticeParams(0.0, rho, 0.0, phi), rng.uniform(-1, 1, 20))
    x, y = (rng.normal(size=20) + 1j * rng.normal(size=20) for _ in range(2))
    assert abs(np.vdot(x, op.apply(y)) - np.vdot(op.apply(x), y)) < 1e-12


@settings(max_examples=15, deadline=None)
@given(nh_params, st.integers(0, 2**32))
def test_evolution_is_linear(p, seed):
    rng = np.random.default_rng(seed)
    op = build_chain(p, size=30)
    x, y = (rng.normal(size=30) + 1j * rng.normal(size=30) for _ in range(2))
    a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
    big = 1 << 40
    ex, ey, exy = (evolve(op, v, 2.0, sample_every=big).physical() for v in (x, y, a * x + b * y))
    scale = max(np.max(np.abs(exy)), 1e-300)
    assert np.max(np.abs(exy - (a * ex + b * ey))) < 1e-9 * scale * (1 + abs(a) + abs(b))


@given(st.floats(1e-3, 1e3), st.floats(-50, 50))
def test_state_rescaling_keeps_observables(s, log_scale):
    v = StateVector(np.array([0.3 + 1j, -2.0, 0.5j]), log_scale)
    r = v.rescaled(s)
    assert math.isclose(r.log_norm, v.log_norm, rel_tol=1e-12, abs_tol=1e-12)
    assert np.allclose(r.normalized(), v.normalized(), atol=1e-14)


@given(st.integers(0, 2**64 - 1), st.floats(0.0, 5.0), st.integers(1, 200))
def test_disorder_strictly_inside(seed, delta, size):
    v = draw_disorder(seed, size, delta).values
    if delta == 0:
        assert not np.any(v)
    else:
        assert np.all(np.abs(v) < delta)


@given(st.integers(0, 2**64 - 1), st.integers(0, 10_000))
def test_member_seeds_fit_u64(base, k):
    assert 0 <= member_seed(base, k) < 2**64
