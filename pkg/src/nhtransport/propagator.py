"""Fixed-step RK4 propagation with overflow-free log-scale bookkeeping."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import rk4_run
from .errors import ConfigurationError, NumericalError
from .model import LatticeParams, site_indices

log = logging.getLogger(__name__)

EDGE_THRESHOLD = 1e-8
STABILITY_LIMIT = 0.1
DEFAULT_COURANT = 0.05


@dataclass(frozen=True)
class InitialCondition:
    """Single-site or Gaussian excitation on the (main) chain sites.

    Site labels are signed; ``n0 = 0`` is the lattice centre unless an
    explicit offset is given to :meth:`vector`.
    """

    kind: str = "single_site"
    n0: int = 0
    w0: float | None = None
    q0: float = 0.0

    def __post_init__(self):
        if self.kind not in ("single_site", "gaussian"):
            raise ConfigurationError(f"unknown initial condition {self.kind!r}")
        if self.kind == "gaussian" and (self.w0 is None or self.w0 <= 0):
            raise ConfigurationError("gaussian width w0 must be > 0")

    @classmethod
    def single_site(cls, n0: int = 0) -> InitialCondition:
        return cls("single_site", int(n0))

    @classmethod
    def gaussian(cls, n0: int, w0: float, q0: float) -> InitialCondition:
        return cls("gaussian", int(n0), float(w0), float(q0))

    def vector(self, size: int, offset: int | None = None) -> np.ndarray:
        n = site_indices(size, offset)
        if self.kind == "single_site":
            psi = (n == self.n0).astype(complex)
            if not psi.any():
                raise ConfigurationError(f"site {self.n0} outside the lattice")
            return psi
        psi = np.exp(-((n - self.n0) ** 2) / self.w0**2 + 1j * self.q0 * n)
        return psi / np.linalg.norm(psi)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes with a separate log-magnitude: physical = amps * exp(log_scale)."""

    amps: np.ndarray
    log_scale: float = 0.0
    time: float = 0.0

    def physical(self) -> np.ndarray:
        return self.amps * math.exp(self.log_scale)

    @property
    def log_norm(self) -> float:
        """``ln P`` with ``P = sum |c_n|^2``."""
        return 2.0 * (self.log_scale + math.log(np.linalg.norm(self.amps)))

    def normalized(self) -> np.ndarray:
        return self.amps / np.linalg.norm(self.amps)

    def rescaled(self, s: float) -> StateVector:
        return StateVector(self.amps * s, self.log_scale - math.log(s), self.time)


@dataclass(eq=False)
class Trajectory:
    """Sampled evolution.

    ``amps`` rows are unit-norm states ``p(t)`` over the full operator space;
    ``log_norm`` is ``ln P(t)``.  ``sites`` are the signed labels of the first
    ``main_size`` entries (the physical chain sites).
    """

    times: np.ndarray
    amps: np.ndarray
    log_norm: np.ndarray
    sites: np.ndarray
    main_size: int
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.times.size

    @property
    def edge_touch(self) -> bool:
        return bool(self.meta.get("edge_touch", False))

    def main_amplitudes(self) -> np.ndarray:
        """``p_n(t)`` renormalised over the main lattice sites only."""
        main = self.amps[:, : self.main_size]
        with np.errstate(invalid="ignore", divide="ignore"):
            return main / np.linalg.norm(main, axis=1, keepdims=True)

    def physical(self, k: int = -1) -> np.ndarray:
        return self.amps[k] * math.exp(0.5 * self.log_norm[k])

    def state(self, k: int = -1) -> StateVector:
        return StateVector(self.amps[k].copy(), 0.5 * float(self.log_norm[k]), float(self.times[k]))


def default_dt(op) -> float:
    return DEFAULT_COURANT / op.rate_bound()


def min_lattice_size(params: LatticeParams, t_final: float, margin: int) -> int:
    """Chain length keeping both wavefronts ``margin`` sites from the edges."""
    if margin < 0:
        raise ConfigurationError("margin must be >= 0")
    v_max = 2 * params.rho + 4 * params.kappa
    return int(math.ceil(2 * v_max * t_final)) + 2 * margin


def _initial_state(op, init, offset):
    if isinstance(init, StateVector):
        psi = np.asarray(init.amps, dtype=complex)
        log0, t0 = init.log_scale, init.time
    elif isinstance(init, InitialCondition):
        psi = init.vector(op.main_size, offset)
        log0, t0 = 0.0, 0.0
    else:
        psi = np.asarray(init, dtype=complex)
        log0, t0 = 0.0, 0.0
    if psi.ndim != 1 or psi.size not in (op.main_size, op.size):
        raise ConfigurationError(f"initial state has {psi.size} entries, operator has {op.size}")
    if psi.size != op.size:
        psi = np.concatenate([psi, np.zeros(op.size - psi.size, complex)])
    return psi.copy(), log0, t0


def _generator_arrays(op):
    g = (-1j * op.core_hamiltonian()).tocsr()
    g.sort_indices()
    return (
        np.ascontiguousarray(g.indptr, dtype=np.int64),
        np.ascontiguousarray(g.indices, dtype=np.int64),
        np.ascontiguousarray(g.data, dtype=np.complex128),
    )


def evolve(op, init, t_final: float, dt: float | None = None, sample_every: int = 1,
           offset: int | None = None, meta: dict | None = None, warn_edges: bool = True) -> Trajectory:
    """Integrate ``i dx/dt = H x`` with classical RK4 at fixed step.

    ``init`` is an :class:`InitialCondition`, a :class:`StateVector` or a raw
    amplitude array (main sites or full operator space).  The step is shrunk
    so that ``t_final`` is hit exactly; samples are taken every
    ``sample_every`` steps plus the final step.
    """
    if t_final < 0:
        raise ConfigurationError("t_final must be >= 0")
    if sample_every < 1:
        raise ConfigurationError("sample_every must be >= 1")
    bound = op.rate_bound()
    if dt is None:
        dt = DEFAULT_COURANT / bound if bound > 0 else 0.1
    if dt <= 0:
        raise ConfigurationError("dt must be > 0")
    if dt * bound > STABILITY_LIMIT * (1 + 1e-12):
        raise ConfigurationError(
            f"dt={dt:g} violates stability bound dt*{bound:g} <= {STABILITY_LIMIT}"
        )
    if not math.isfinite(t_final / dt) or t_final / dt > 1e12:
        raise ConfigurationError(f"dt={dt:g} is too small for t_final={t_final:g}")
    psi, log0, t0 = _initial_state(op, init, offset)
    peak = np.max(np.abs(psi))
    if not np.isfinite(peak) or peak == 0:
        raise NumericalError("initial state is zero or non-finite")
    psi /= peak
    log0 += math.log(peak)

    nsteps = int(math.ceil(t_final / dt - 1e-9)) if t_final > 0 else 0
    dt_eff = t_final / nsteps if nsteps else dt
    rows = 1 + nsteps // sample_every + (1 if nsteps % sample_every else 0)
    samples = np.empty((rows, op.size), np.complex128)
    logs = np.empty(rows)
    indptr, indices, data = _generator_arrays(op)
    filled = rk4_run(indptr, indices, data, psi, dt_eff, -op.gamma, nsteps, sample_every, samples, logs)
    if filled < 0:
        raise NumericalError(f"state became non-finite or zero at step {-filled} (t={-filled * dt_eff:g})")
    assert filled == rows

    steps = np.minimum(np.arange(rows) * sample_every, nsteps)
    times = t0 + steps * dt_eff
    norms = np.linalg.norm(samples, axis=1)
    amps = samples / norms[:, None]
    log_norm = 2.0 * (log0 + logs + np.log(norms))

    edge_amp = float(np.max(np.abs(amps[:, list(op.edge_sites)])))
    edge_touch = edge_amp > EDGE_THRESHOLD
    if edge_touch and warn_edges:
        log.warning("wavefront reached the lattice edge (|p| = %.3g)", edge_amp)
    info = {
        "dt": dt_eff,
        "steps": nsteps,
        "sample_every": sample_every,
        "samples": rows,
        "edge_touch": edge_touch,
        "edge_amplitude": edge_amp,
        "rate_bound": bound,
    }
    if meta:
        info.update(meta)
    return Trajectory(times, amps, log_norm, site_indices(op.main_size, offset), op.main_size, info)


def convergence_check(op, init, t_final: float, dt: float, offset: int | None = None) -> float:
    """Max-norm difference of final main-lattice states at ``dt`` and ``dt/2``."""
    big = 1 << 40
    coarse = evolve(op, init, t_final, dt, sample_every=big, offset=offset)
    fine = evolve(op, init, t_final, dt / 2, sample_every=big, offset=offset)
    a = coarse.main_amplitudes()[-1]
    b = fine.main_amplitudes()[-1]
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))
