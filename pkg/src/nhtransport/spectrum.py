"""Complex band structure of the chain and the zigzag minibands."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ResourceError
from .model import LatticeParams

MAX_DENSE_SIZE = 2048
REFINE_MAX_SIZE = 128


@dataclass(frozen=True)
class DispersionPoint:
    """``E(q)`` and its first two derivatives; fields broadcast with ``q``."""

    q: np.ndarray | float
    e: np.ndarray | complex
    de: np.ndarray | complex
    d2e: np.ndarray | complex


@dataclass(frozen=True)
class SaddleConstants:
    q1: float
    q2: float
    e1: complex
    e2: complex
    de1: complex
    de2: complex
    d2e1: complex
    d2e2: complex

    @property
    def group_velocities(self) -> tuple[float, float]:
        return self.de1.real, self.de2.real


def dispersion_chain(q, params: LatticeParams) -> DispersionPoint:
    """Extended-zone dispersion ``-i g - 2 i k cos 2q + 2 rho cos(q + dphi)``."""
    q = np.asarray(q, dtype=float)
    k, r, g, phi = params.kappa, params.rho, params.gamma, params.delta_phi
    e = -1j * g - 2j * k * np.cos(2 * q) + 2 * r * np.cos(q + phi)
    de = 4j * k * np.sin(2 * q) - 2 * r * np.sin(q + phi)
    d2e = 8j * k * np.cos(2 * q) - 2 * r * np.cos(q + phi)
    if q.ndim == 0:
        return DispersionPoint(float(q), complex(e), complex(de), complex(d2e))
    return DispersionPoint(q, e, de, d2e)


def dispersion_zigzag(q, params: LatticeParams):
    """Two minibands ``E_+(q)``, ``E_-(q)`` over the reduced zone."""
    q = np.asarray(q, dtype=float)
    k, r, g = params.kappa, params.rho, params.gamma
    common = -1j * g - 2j * k * np.cos(2 * q)
    split = 2 * r * np.cos(q + params.delta_phi)
    return common + split, common - split


def saddle_constants(params: LatticeParams) -> SaddleConstants:
    """Expansion constants at ``q = +-pi/2`` where ``Im E`` peaks.

    The energies keep their imaginary part ``2 kappa - gamma``; it vanishes
    only for ``gamma = 2 kappa``.
    """
    if params.kappa <= 0:
        raise ConfigurationError(
            "kappa = 0: no imaginary-part selection, two-packet asymptotics invalid"
        )
    q1, q2 = np.pi / 2, -np.pi / 2
    p1 = dispersion_chain(q1, params)
    p2 = dispersion_chain(q2, params)
    return SaddleConstants(q1, q2, p1.e, p2.e, p1.de, p2.de, p1.d2e, p2.d2e)


def q_grid(points: int = 512, zone: str = "extended") -> np.ndarray:
    half = np.pi if zone == "extended" else np.pi / 2
    return np.linspace(-half, half, points)


def band_table(params: LatticeParams, points: int = 512) -> np.ndarray:
    """Rows ``q, Re E, Im E, Re E', Im E', Re E'', Im E''`` over the extended zone."""
    if points < 2:
        raise ConfigurationError("q grid needs at least two points")
    d = dispersion_chain(q_grid(points), params)
    return np.column_stack([d.q, d.e.real, d.e.imag, d.de.real, d.de.imag, d.d2e.real, d.d2e.imag])


def _refine_eigenpairs(h: np.ndarray, ev: np.ndarray, vecs: np.ndarray, iterations: int = 4) -> np.ndarray:
    """Newton refinement of simple eigenpairs with extended-precision residuals.

    Non-normal lattices have eigenvalue condition numbers of 1e4 or more, so
    plain LAPACK eigenvalues scatter at the 1e-11..1e-10 level between exactly
    similar matrices.  Each correction solves the bordered system in double
    precision while the residual is formed in ``clongdouble``.
    """
    n = h.shape[0]
    hl = h.astype(np.clongdouble)
    out = ev.astype(np.clongdouble)
    for j in range(n):
        x = vecs[:, j].astype(np.clongdouble)
        k = int(np.argmax(np.abs(vecs[:, j])))
        x /= x[k]
        lam = out[j]
        for _ in range(iterations):
            r = hl @ x - lam * x
            a = h - complex(lam) * np.eye(n)
            a[:, k] = -x.astype(complex)
            try:
                z = np.linalg.solve(a, -r.astype(complex))
            except np.linalg.LinAlgError:
                break
            step = z[k]
            z[k] = 0.0
            x += z.astype(np.clongdouble)
            lam += np.clongdouble(step)
            if abs(step) <= 1e-18 * max(1.0, abs(complex(lam))):
                break
        out[j] = lam
    return out.astype(complex)


def finite_spectrum(op, refine: bool | None = None) -> np.ndarray:
    """Eigenvalues of a finite lattice operator, sorted by (Re, Im).

    ``refine`` (default: on up to ``REFINE_MAX_SIZE`` sites) polishes each
    eigenvalue so that exactly similar operators give matching spectra to
    well below 1e-10 despite non-normality.
    """
    if op.size > MAX_DENSE_SIZE:
        raise ResourceError(f"dense eigensolve capped at {MAX_DENSE_SIZE} sites, got {op.size}")
    h = op.to_dense()
    if refine is None:
        refine = op.size <= REFINE_MAX_SIZE
    if refine:
        ev, vecs = np.linalg.eig(h)
        ev = _refine_eigenpairs(h, ev, vecs)
    else:
        ev = np.linalg.eigvals(h)
    return ev[np.lexsort((ev.imag, ev.real))]
