"""Fast invariant suite behind the ``check`` subcommand."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import jv

from .asymptotics import bloch_integral
from .model import (
    AuxiliaryParams,
    LatticeParams,
    SiteField,
    build_chain,
    build_zigzag,
    effective_params,
    gauge_shift,
    tune_auxiliary_energy,
)
from .propagator import InitialCondition, evolve
from .spectrum import dispersion_chain, finite_spectrum


def spectral_distance(a, b) -> float:
    """Largest deviation after optimally pairing two eigenvalue multisets."""
    cost = np.abs(np.subtract.outer(a, b))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def _dispersion_fd(rng):
    worst = 0.0
    for _ in range(100):
        p = LatticeParams(rng.uniform(0, 1), rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(-np.pi, np.pi))
        q = rng.uniform(-np.pi, np.pi)
        h = 1e-5
        d = dispersion_chain(q, p)
        hi, lo = dispersion_chain(q + h, p), dispersion_chain(q - h, p)
        fd1 = (hi.e - lo.e) / (2 * h)
        fd2 = (hi.de - lo.de) / (2 * h)
        scale = max(abs(d.de), abs(d.d2e), p.rho + p.kappa, 1e-300)
        worst = max(worst, abs(fd1 - d.de) / scale, abs(fd2 - d.d2e) / scale)
    return worst < 1e-6, f"max scaled FD error {worst:.2e}"


def _zigzag_chain(rng):
    p = LatticeParams(0.3, 1.0, 0.6, 0.7)
    u = rng.uniform(-1, 1, 40)
    va, vb = SiteField(u).to_sublattices()
    zz = build_zigzag(p, va, vb, 20)
    ch = build_chain(p, u)
    x = rng.normal(size=(10, 40)) + 1j * rng.normal(size=(10, 40))
    err = float(np.max(np.abs(zz.rhs(x) - ch.rhs(x))))
    return err < 1e-12, f"max elementwise difference {err:.2e}"


def _hermitian_limit(rng):
    p = LatticeParams(0.0, 1.0, 0.0, 0.9)
    op = build_chain(p, rng.uniform(-1, 1, 30))
    x, y = (rng.normal(size=30) + 1j * rng.normal(size=30) for _ in range(2))
    err = abs(np.vdot(x, op.apply(y)) - np.vdot(op.apply(x), y))
    return bool(err < 1e-12), f"|<x,Hy> - <Hx,y>| = {err:.2e}"


def _gauge_spectrum(rng):
    p = LatticeParams(0.3, 1.0, 0.6, math.pi / 4)
    u = rng.uniform(-1, 1, 40)
    va, vb = SiteField(u).to_sublattices()
    ref = finite_spectrum(build_zigzag(p, va, vb, 20))
    worst = max(
        spectral_distance(ref, finite_spectrum(build_zigzag(gauge_shift(p, chi), va, vb, 20)))
        for chi in (0.3, math.pi / 4, 2.0)
    )
    return worst < 1e-10, f"max eigenvalue shift {worst:.2e}"


def _tuned_auxiliary(rng):
    worst = 0.0
    for _ in range(20):
        eps, kappa, sigma = rng.uniform(-1, 1), rng.uniform(0.05, 1), rng.uniform(0.5, 5)
        eff = effective_params(AuxiliaryParams(eps, sigma, tune_auxiliary_energy(eps, kappa, sigma)))
        worst = max(worst, abs(eff.kappa_eff + 1j * kappa))
    return worst < 1e-14, f"max |kappa_eff + i kappa| = {worst:.2e}"


def _bessel(rng):
    op = build_chain(LatticeParams(0, 1, 0, 0), size=81)
    tr = evolve(op, InitialCondition.single_site(0), 1.0, dt=0.005, sample_every=1000)
    err = float(np.max(np.abs(np.abs(tr.physical()) - np.abs(jv(tr.sites, 2.0)))))
    return err < 1e-8, f"max | |c_n| - |J_n(2)| | = {err:.2e}"


def _gamma_gauge(rng):
    base = []
    for gamma in (0.0, 0.6, 2.0):
        op = build_chain(LatticeParams(0.3, 1, gamma, math.pi / 4), size=120)
        tr = evolve(op, InitialCondition.single_site(0), 10.0, dt=0.01, sample_every=100)
        base.append(tr.amps)
    err = max(float(np.max(np.abs(b - base[0]))) for b in base[1:])
    return err < 1e-9, f"max normalized difference {err:.2e}"


def _bloch_oracle(rng):
    p = LatticeParams(0.3, 1, 0.6, math.pi / 4)
    op = build_chain(p, size=120)
    tr = evolve(op, InitialCondition.single_site(0), 5.0, dt=0.005, sample_every=10**6)
    c = bloch_integral(tr.sites, 5.0, p)
    err = float(np.max(np.abs(tr.amps[-1] - c / np.linalg.norm(c))))
    return err < 1e-7, f"max normalized difference {err:.2e}"


CHECKS = {
    "dispersion_finite_differences": _dispersion_fd,
    "zigzag_chain_equivalence": _zigzag_chain,
    "hermitian_limit": _hermitian_limit,
    "gauge_invariant_spectrum": _gauge_spectrum,
    "tuned_auxiliary_energy": _tuned_auxiliary,
    "bessel_single_site": _bessel,
    "gamma_gauge_invariance": _gamma_gauge,
    "bloch_integral_oracle": _bloch_oracle,
}


def run_all(seed: int = 0) -> list[tuple[str, bool, str]]:
    rng = np.random.default_rng(seed)
    return [(name, *fn(rng)) for name, fn in CHECKS.items()]
