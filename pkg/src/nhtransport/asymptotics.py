"""Exact Bloch-integral solution of the clean chain and its two-packet asymptotics."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .model import LatticeParams
from .spectrum import SaddleConstants, dispersion_chain

log = logging.getLogger(__name__)

DEFAULT_PANELS = 1024


@dataclass(frozen=True)
class AsymptoticPacket:
    """One Gaussian term of the steepest-descent expansion at time ``t``."""

    q_c: float
    e: complex
    de: complex
    d2e: complex
    t: float

    @property
    def weight(self) -> complex:
        return np.sqrt(1.0 / (2j * np.pi * self.d2e * self.t))

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        t = self.t
        return (
            self.weight
            * np.exp(1j * self.q_c * n - 1j * self.e * t)
            * np.exp(-((n - self.de * t) ** 2) / (2j * self.d2e * t))
        )


def bloch_integral(n, t: float, params: LatticeParams, panels: int = DEFAULT_PANELS, potential=None):
    """``c_n(t)`` for the clean chain after single-site excitation at ``n = 0``.

    Periodic trapezoid rule over ``[-pi, pi)``; converges spectrally once
    ``panels`` exceeds the spread of the wavefront.
    """
    if potential is not None and np.any(np.asarray(getattr(potential, "values", potential))):
        raise ConfigurationError("Bloch integral holds for the clean lattice only")
    if panels < 64:
        raise ConfigurationError("need at least 64 quadrature panels")
    q = -np.pi + 2 * np.pi * np.arange(panels) / panels
    e = dispersion_chain(q, params).e
    n = np.asarray(n)
    phase = np.exp(-1j * e * t)
    return np.exp(1j * np.multiply.outer(n, q)) @ phase / panels


def packets(t: float, sc: SaddleConstants) -> tuple[AsymptoticPacket, AsymptoticPacket]:
    if t <= 0:
        raise ConfigurationError("asymptotic form requires t > 0")
    return (
        AsymptoticPacket(sc.q1, sc.e1, sc.de1, sc.d2e1, t),
        AsymptoticPacket(sc.q2, sc.e2, sc.de2, sc.d2e2, t),
    )


def asymptotic_amplitude(n, t: float, sc: SaddleConstants):
    """Sum of the two dispersive Gaussian packets centred at ``E'_{1,2} t``."""
    p1, p2 = packets(t, sc)
    return p1(n) + p2(n)


def _peak_position(n, a):
    """Parabolic interpolation of the discrete argmax of ``a``."""
    k = int(np.argmax(a))
    if 0 < k < a.size - 1:
        y0, y1, y2 = a[k - 1], a[k], a[k + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        return n[k] + shift
    return float(n[k])


def track_peak(traj, direction: str, origin: float = 0.0) -> np.ndarray:
    """Sub-site peak position of ``|p_n|`` on one side of ``origin`` per sample."""
    if direction not in ("left", "right"):
        raise ConfigurationError("direction must be 'left' or 'right'")
    n = traj.sites
    side = n > origin if direction == "right" else n < origin
    amps = np.abs(traj.main_amplitudes())[:, side]
    return np.array([_peak_position(n[side], row) for row in amps])


def group_velocity_fit(traj, direction: str, origin: float = 0.0) -> float:
    """Slope of the tracked peak over the second half of the run.

    Returns NaN when the packet has not separated from the origin by more
    than four widths by the final sample (e.g. ``phi`` near ``pi/2``).
    """
    times = traj.times
    if times.size < 4:
        log.warning("too few samples for a velocity fit")
        return float("nan")
    x = track_peak(traj, direction, origin)
    late = times >= 0.5 * times[-1]
    slope = np.polyfit(times[late], x[late], 1)[0]

    n = traj.sites
    side = n > origin if direction == "right" else n < origin
    w = np.abs(traj.main_amplitudes()[-1, side]) ** 2
    ns = n[side]
    mean = w @ ns / w.sum()
    width = np.sqrt(w @ (ns - mean) ** 2 / w.sum())
    if abs(slope) * times[-1] <= 4 * width:
        log.warning("packet not separated from origin: |v| t = %.3g, width = %.3g", abs(slope) * times[-1], width)
        return float("nan")
    return float(slope)
