"""Seeded disorder ensembles with order-fixed averaging."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .model import LatticeParams, SiteField, build_chain, build_zigzag
from .observables import spread_metrics
from .propagator import DEFAULT_COURANT, InitialCondition, evolve

_MASK64 = (1 << 64) - 1


class EnsembleError(RuntimeError):
    def __init__(self, seed: int, index: int, cause: Exception):
        super().__init__(f"ensemble member {index} (seed {seed}) failed: {cause}")
        self.seed = seed
        self.index = index


def mix64(x: int) -> int:
    """SplitMix64 finaliser."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def member_seed(base_seed: int, k: int) -> int:
    return mix64(base_seed + (k + 1) * 0x9E3779B97F4A7C15)


def draw_disorder(seed: int, size: int, delta: float) -> SiteField:
    """i.i.d. uniform potential strictly inside ``(-delta, delta)`` (Philox stream)."""
    if delta < 0:
        raise ConfigurationError("delta must be >= 0")
    rng = np.random.Generator(np.random.Philox(key=seed & _MASK64))
    # 53-bit lattice midpoints keep the draw off both endpoints
    u = (rng.integers(0, 1 << 53, size=size, dtype=np.int64) + 0.5) / float(1 << 53)
    values = delta * (2.0 * u - 1.0)
    # subnormal delta: the product can round onto the endpoint
    inner = np.nextafter(delta, 0.0)
    values = np.clip(values, -inner, inner)
    return SiteField.uniform_disorder(values, delta, seed)


@dataclass(frozen=True)
class SpreadScenario:
    """One single-site (or Gaussian) spreading run on a disordered lattice."""

    params: LatticeParams
    size: int = 400
    t_max: float = 100.0
    sample_dt: float = 1.0
    dt: float | None = None
    init: InitialCondition = field(default_factory=InitialCondition.single_site)
    representation: str = "chain"

    def step(self, delta: float) -> float:
        """Time step shared by all members (worst-case disorder amplitude)."""
        p = self.params
        if self.dt is not None:
            return self.dt
        return DEFAULT_COURANT / (p.gamma + 2 * p.kappa + 2 * p.rho + delta)

    def grid(self, delta: float) -> tuple[float, int]:
        dt = self.step(delta)
        nsteps = max(1, int(math.ceil(self.t_max / dt - 1e-9)))
        dt = self.t_max / nsteps
        return dt, max(1, int(round(self.sample_dt / dt)))

    def operator(self, potential: SiteField):
        if self.representation == "chain":
            return build_chain(self.params, potential, self.size)
        if self.representation == "zigzag":
            va, vb = potential.to_sublattices()
            return build_zigzag(self.params, va, vb, self.size // 2)
        raise ConfigurationError(f"unknown representation {self.representation!r}")

    def run(self, potential: SiteField, delta: float = 0.0):
        dt, every = self.grid(delta)
        return evolve(self.operator(potential), self.init, self.t_max, dt, every, warn_edges=False)


@dataclass(frozen=True)
class EnsembleSpec:
    realizations: int
    base_seed: int
    delta: float
    scenario: SpreadScenario

    def __post_init__(self):
        if self.realizations < 1:
            raise ConfigurationError("need at least one realization")
        if self.delta < 0:
            raise ConfigurationError("delta must be >= 0")
        if not 0 <= self.base_seed <= _MASK64:
            raise ConfigurationError("base_seed must be an unsigned 64-bit integer")

    @property
    def seeds(self) -> list[int]:
        return [member_seed(self.base_seed, k) for k in range(self.realizations)]


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    times: np.ndarray
    sigma_mean: np.ndarray
    sigma_stderr: np.ndarray
    sigmas: np.ndarray
    seeds: list[int]
    edge_touches: int

    def at(self, t: float) -> float:
        return float(self.sigma_mean[np.argmin(np.abs(self.times - t))])


def _member(spec: EnsembleSpec, k: int, seed: int):
    try:
        field_ = draw_disorder(seed, spec.scenario.size, spec.delta)
        traj = spec.scenario.run(field_, spec.delta)
    except Exception as exc:  # noqa: BLE001 - re-raised with the seed attached
        raise EnsembleError(seed, k, exc) from exc
    return traj.times, spread_metrics(traj).sigma, traj.edge_touch


def run_ensemble(spec: EnsembleSpec, threads: int = 1) -> EnsembleResult:
    """Run all members and average ``sigma(t)`` in realization order."""
    seeds = spec.seeds
    jobs = list(enumerate(seeds))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda job: _member(spec, *job), jobs))
    else:
        results = [_member(spec, k, s) for k, s in jobs]
    times = results[0][0]
    sigmas = np.vstack([r[1] for r in results])
    mean = np.zeros_like(times)
    for row in sigmas:
        mean += row
    mean /= len(sigmas)
    if len(sigmas) > 1:
        stderr = sigmas.std(axis=0, ddof=1) / np.sqrt(len(sigmas))
    else:
        stderr = np.zeros_like(mean)
    return EnsembleResult(times, mean, stderr, sigmas, seeds, sum(bool(r[2]) for r in results))
