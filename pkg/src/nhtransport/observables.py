"""Norm, spread and defect-scattering diagnostics of a trajectory."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import ConfigurationError, NumericalError


@dataclass(frozen=True, eq=False)
class SpreadMetrics:
    """Per-sample ``ln P``, first moment and standard deviation of ``|p_n|^2``."""

    time: np.ndarray
    norm_log: np.ndarray
    mean: np.ndarray
    sigma: np.ndarray

    def at(self, t: float) -> int:
        """Index of the sample closest to ``t``."""
        return int(np.argmin(np.abs(self.time - t)))

    def table(self) -> np.ndarray:
        return np.column_stack([self.time, self.norm_log, self.mean, self.sigma])


@dataclass(frozen=True)
class ScatterReport:
    transmitted: float
    reflected: float
    resident: float
    echoes: int
    direction: str
    probe_site: int
    complete: bool


def probabilities(traj) -> np.ndarray:
    p = traj.main_amplitudes()
    if not np.all(np.isfinite(p)):
        raise NumericalError("trajectory contains a zero-norm or non-finite state")
    return np.abs(p) ** 2


def spread_metrics(traj) -> SpreadMetrics:
    w = probabilities(traj)
    n = traj.sites.astype(float)
    mean = w @ n
    var = w @ n**2 - mean**2
    return SpreadMetrics(traj.times.copy(), traj.log_norm.copy(), mean, np.sqrt(np.maximum(var, 0.0)))


def _direction(traj, n1, n2):
    w0 = probabilities(traj)[0]
    start = w0 @ traj.sites
    if start < n1:
        return "right"
    if start > n2:
        return "left"
    raise ConfigurationError("packet starts between the defects; pass direction explicitly")


def probe_trace(traj, site: int) -> np.ndarray:
    idx = np.flatnonzero(traj.sites == site)
    if idx.size == 0:
        raise ConfigurationError(f"probe site {site} outside the lattice")
    return np.abs(traj.main_amplitudes()[:, idx[0]])


def count_pulses(trace: np.ndarray, threshold: float = 0.1) -> int:
    """Number of separated maxima above ``threshold * max(trace)``.

    Two maxima count as separate pulses only when the trace dips between them
    by at least the same fraction of the global maximum.
    """
    top = float(np.max(trace)) if trace.size else 0.0
    if top == 0.0:
        return 0
    peaks, _ = find_peaks(trace, height=threshold * top, prominence=threshold * top)
    return int(peaks.size)


def scatter_report(traj, n1: int, n2: int, pulse_threshold: float = 0.1, w0: float = 10.0,
                   direction: str | None = None, probe: int | None = None) -> ScatterReport:
    """Split the final probability into reflected / resident / transmitted parts.

    ``direction`` is the propagation direction of the incident packet; by
    default it is inferred from the initial centre of mass relative to
    ``[n1, n2]``.  Echoes are counted in the amplitude trace at a probe site
    ``4 w0`` beyond the far defect.
    """
    if n1 > n2:
        raise ConfigurationError("need n1 <= n2")
    if direction is None:
        direction = _direction(traj, n1, n2)
    if direction not in ("left", "right"):
        raise ConfigurationError("direction must be 'left' or 'right'")
    n = traj.sites
    w = probabilities(traj)[-1]
    behind, ahead = (n < n1, n > n2) if direction == "right" else (n > n2, n < n1)
    resident = float(w[(n >= n1) & (n <= n2)].sum())
    if probe is None:
        probe = int(round(n2 + 4 * w0)) if direction == "right" else int(round(n1 - 4 * w0))
    trace = probe_trace(traj, probe)
    top = float(trace.max())
    complete = bool(top > 0 and trace[-1] < 0.5 * top and int(np.argmax(trace)) < trace.size - 1)
    return ScatterReport(
        transmitted=float(w[ahead].sum()),
        reflected=float(w[behind].sum()),
        resident=resident,
        echoes=count_pulses(trace, pulse_threshold),
        direction=direction,
        probe_site=probe,
        complete=complete,
    )
