"""Lattice Hamiltonians for the non-Hermitian zigzag ladder.

Three equivalent pictures are supported:

* the two-sublattice zigzag lattice with amplitudes ``a_n``, ``b_n``;
* the same lattice realised with lossy auxiliary sites ``A_n``, ``B_n``
  between neighbouring sites of each sublattice;
* the linear chain ``c_{2n} = a_n``, ``c_{2n+1} = b_n`` with nearest
  (``rho exp(+-i phi)``) and next-nearest (``-i kappa``) hopping.

All operators act on the last axis of an array and expose the Hamiltonian
``H`` (``i dx/dt = H x``) as well as the time derivative ``rhs(x) = -i H x``.
The zigzag operator uses the interleaved chain ordering ``(a_0, b_0, a_1,
b_1, ...)`` so that states can be compared elementwise with the chain.
Boundaries are open: couplings to sites outside the lattice are dropped.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError


@dataclass(frozen=True)
class LatticeParams:
    """Physical couplings of the zigzag lattice.

    ``phi_prime`` defaults to ``-phi``, the convention under which the chain
    phase ``delta_phi = (phi - phi_prime) / 2`` equals ``phi``.
    """

    kappa: float = 0.0
    rho: float = 1.0
    gamma: float = 0.0
    phi: float = 0.0
    phi_prime: float | None = None

    def __post_init__(self):
        if self.phi_prime is None:
            object.__setattr__(self, "phi_prime", -self.phi)
        for name in ("kappa", "rho", "gamma", "phi", "phi_prime"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ConfigurationError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.kappa < 0 or self.rho < 0:
            raise ConfigurationError("kappa and rho are magnitudes and must be >= 0")

    @property
    def delta_phi(self) -> float:
        return 0.5 * (self.phi - self.phi_prime)

    @property
    def dissipative(self) -> bool:
        return self.gamma >= 2.0 * self.kappa

    @property
    def hermitian(self) -> bool:
        return self.kappa == 0.0 and self.gamma == 0.0

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class AuxiliaryParams:
    epsilon: float
    sigma: float
    u_site: complex

    @property
    def lossy(self) -> bool:
        return complex(self.u_site).imag < 0

    @property
    def elimination_ratio(self) -> float:
        """``|U| / sigma``; adiabatic elimination needs this to be large."""
        return abs(self.u_site) / self.sigma if self.sigma else np.inf


class EffectiveParams(NamedTuple):
    kappa_eff: complex
    delta: complex
    residual: float


def tune_auxiliary_energy(epsilon: float, kappa: float, sigma: float) -> complex:
    """Auxiliary site energy that turns the eliminated hopping into ``-i kappa``."""
    if sigma <= 0:
        raise ConfigurationError("sigma must be > 0")
    denom = epsilon**2 + kappa**2
    if denom == 0:
        raise ZeroDivisionError("epsilon and kappa cannot both vanish")
    return sigma**2 * complex(epsilon, -kappa) / denom


def effective_params(aux: AuxiliaryParams) -> EffectiveParams:
    """Hopping, on-site shift and ``sigma/|U|`` after eliminating the lossy sites."""
    u = complex(aux.u_site)
    if u == 0:
        raise ZeroDivisionError("auxiliary site energy must be non-zero")
    s2u = aux.sigma**2 / u
    return EffectiveParams(aux.epsilon - s2u, -2.0 * s2u, aux.sigma / abs(u))


def gauge_shift(params: LatticeParams, chi: float) -> LatticeParams:
    """Shift both plaquette phases by ``chi``; ``delta_phi`` is unchanged."""
    return dataclasses.replace(params, phi=params.phi + chi, phi_prime=params.phi_prime + chi)


# ---------------------------------------------------------------------------
# on-site potentials


@dataclass(frozen=True, eq=False)
class SiteField:
    """Real on-site potential together with a description of how it was made."""

    values: np.ndarray
    kind: str = "custom"
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise ConfigurationError("site field must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("site field contains non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @classmethod
    def clean(cls, size: int) -> SiteField:
        return cls(np.zeros(size), "clean")

    @classmethod
    def uniform_disorder(cls, values, delta: float, seed: int | None = None) -> SiteField:
        values = np.asarray(values, dtype=float)
        if delta < 0:
            raise ConfigurationError("disorder half-width must be >= 0")
        if delta > 0 and np.any(np.abs(values) >= delta):
            raise ConfigurationError("disorder values must lie strictly inside (-delta, delta)")
        if delta == 0 and np.any(values != 0):
            raise ConfigurationError("delta = 0 disorder must vanish")
        return cls(values, "uniform_disorder", {"delta": float(delta), "seed": seed})

    @classmethod
    def defect_pair(cls, size: int, v0: float, n1: int, n2: int, offset: int | None = None) -> SiteField:
        """Two equal defects at signed sites ``n1``, ``n2`` (array index = n + offset)."""
        if offset is None:
            offset = size // 2
        if n1 == n2:
            raise ConfigurationError("defect sites must differ")
        values = np.zeros(size)
        for n in (n1, n2):
            i = n + offset
            if not 0 <= i < size:
                raise ConfigurationError(f"defect site {n} outside the lattice")
            values[i] = v0
        return cls(values, "defect_pair", {"v0": float(v0), "n1": int(n1), "n2": int(n2), "offset": int(offset)})

    @property
    def is_clean(self) -> bool:
        return not np.any(self.values)

    def to_sublattices(self) -> tuple[SiteField, SiteField]:
        """Split a chain potential into the ``(V^A, V^B)`` zigzag potentials."""
        if self.values.size % 2:
            raise ConfigurationError("chain field must have even length to split into sublattices")
        a, b = split_sublattices(self.values)
        return SiteField(a, self.kind, dict(self.info)), SiteField(b, self.kind, dict(self.info))


def interleave(a, b) -> np.ndarray:
    """Chain amplitudes ``c`` from sublattice amplitudes (last axis)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ConfigurationError("sublattice arrays must have equal shape")
    out = np.empty(a.shape[:-1] + (2 * a.shape[-1],), dtype=np.result_type(a, b))
    out[..., 0::2] = a
    out[..., 1::2] = b
    return out


def split_sublattices(c) -> tuple[np.ndarray, np.ndarray]:
    c = np.asarray(c)
    return c[..., 0::2], c[..., 1::2]


def site_indices(size: int, offset: int | None = None) -> np.ndarray:
    """Signed site labels ``n`` for array positions ``0..size-1``."""
    if offset is None:
        offset = size // 2
    return np.arange(size) - offset


def _as_values(field_or_array, size: int, label: str) -> np.ndarray:
    if field_or_array is None:
        return np.zeros(size)
    values = field_or_array.values if isinstance(field_or_array, SiteField) else np.asarray(field_or_array, float)
    if values.shape != (size,):
        raise ConfigurationError(f"{label} has length {values.size}, expected {size}")
    return values


# ---------------------------------------------------------------------------
# operators


class LatticeOperator:
    """Common behaviour of all lattice Hamiltonians.

    Subclasses provide ``size``, ``gamma``, ``main_size``, ``edge_sites``,
    ``apply`` and ``hamiltonian``.  ``gamma`` is the uniform loss contained in
    the diagonal; the propagator integrates ``H + i gamma`` and folds the
    factor ``exp(-gamma t)`` into the log-scale exactly.
    """

    size: int
    gamma: float
    main_size: int
    edge_sites: tuple[int, ...]

    def apply(self, x):
        raise NotImplementedError

    def hamiltonian(self) -> sp.csr_matrix:
        raise NotImplementedError

    def rhs(self, x):
        """Time derivative ``dx/dt = -i H x``."""
        return -1j * self.apply(x)

    __call__ = rhs

    def to_dense(self) -> np.ndarray:
        return self.hamiltonian().toarray()

    def core_hamiltonian(self) -> sp.csr_matrix:
        h = self.hamiltonian().tolil(copy=True)
        h.setdiag(h.diagonal() + 1j * self.gamma)
        return h.tocsr()

    def rate_bound(self) -> float:
        """Gershgorin bound on the spectral radius of ``H``."""
        h = self.hamiltonian()
        return float(np.max(np.asarray(abs(h).sum(axis=1)).ravel()))


@dataclass(frozen=True, eq=False)
class ChainOperator(LatticeOperator):
    """Banded (five-point) chain Hamiltonian applied matrix-free."""

    size: int
    diag: np.ndarray
    nn_fwd: complex
    nn_bwd: complex
    nnn: complex
    gamma: float = 0.0
    boundary: str = "open"

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=complex)
        if diag.shape != (self.size,):
            raise ConfigurationError("diagonal length does not match size")
        diag.flags.writeable = False
        object.__setattr__(self, "diag", diag)

    @property
    def main_size(self) -> int:
        return self.size

    @property
    def edge_sites(self) -> tuple[int, ...]:
        return (0, self.size - 1)

    def apply(self, x):
        x = np.asarray(x)
        if x.shape[-1] != self.size:
            raise ConfigurationError(f"state has {x.shape[-1]} sites, operator has {self.size}")
        y = self.diag * x
        y[..., :-1] += self.nn_fwd * x[..., 1:]
        y[..., 1:] += self.nn_bwd * x[..., :-1]
        y[..., :-2] += self.nnn * x[..., 2:]
        y[..., 2:] += self.nnn * x[..., :-2]
        return y

    def hamiltonian(self) -> sp.csr_matrix:
        n = self.size
        diagonals = [self.diag]
        offsets = [0]
        if n > 1:
            diagonals += [np.full(n - 1, self.nn_fwd), np.full(n - 1, self.nn_bwd)]
            offsets += [1, -1]
        if n > 2:
            diagonals += [np.full(n - 2, self.nnn), np.full(n - 2, self.nnn)]
            offsets += [2, -2]
        return sp.diags(diagonals, offsets, shape=(n, n), format="csr", dtype=complex)


@dataclass(frozen=True, eq=False)
class SparseOperator(LatticeOperator):
    """Hamiltonian stored as a CSR matrix (zigzag and auxiliary-site pictures)."""

    matrix: sp.csr_matrix
    gamma: float
    main_size: int
    edge_sites: tuple[int, ...]
    layout: str

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x):
        x = np.asarray(x)
        if x.shape[-1] != self.size:
            raise ConfigurationError(f"state has {x.shape[-1]} sites, operator has {self.size}")
        return (self.matrix @ x.reshape(-1, self.size).T).T.reshape(x.shape)

    def hamiltonian(self) -> sp.csr_matrix:
        return self.matrix


def build_chain(params: LatticeParams, u=None, size: int | None = None) -> ChainOperator:
    """Linear chain with ``-i kappa`` next-nearest and ``rho e^{+-i dphi}`` nearest hopping."""
    if size is None:
        if u is None:
            raise ConfigurationError("size or potential required")
        size = len(u.values) if isinstance(u, SiteField) else len(u)
    if size < 1:
        raise ConfigurationError("chain needs at least one site")
    values = _as_values(u, size, "potential")
    dphi = params.delta_phi
    return ChainOperator(
        size=size,
        diag=-1j * params.gamma + values,
        nn_fwd=params.rho * np.exp(1j * dphi),
        nn_bwd=params.rho * np.exp(-1j * dphi),
        nnn=-1j * params.kappa,
        gamma=params.gamma,
    )


def _zigzag_triplets(cells, hop, shift, params, va, vb):
    """COO entries of the zigzag Hamiltonian in interleaved ordering."""
    rows, cols, vals = [], [], []

    def add(r, c, v):
        rows.append(r)
        cols.append(c)
        vals.append(v)

    rho = params.rho
    t_in = rho * np.exp(1j * params.phi)
    t_out = rho * np.exp(1j * params.phi_prime)
    onsite = -1j * params.gamma + shift
    for n in range(cells):
        ia, ib = 2 * n, 2 * n + 1
        add(ia, ia, onsite + va[n])
        add(ib, ib, onsite + vb[n])
        for m in (n - 1, n + 1):
            if 0 <= m < cells:
                add(ia, 2 * m, hop)
                add(ib, 2 * m + 1, hop)
        add(ia, ib, t_in)
        add(ib, ia, np.conj(t_in))
        if n >= 1:
            add(ia, 2 * (n - 1) + 1, t_out)
        if n + 1 < cells:
            add(ib, 2 * (n + 1), np.conj(t_out))
    return rows, cols, vals


def _zigzag(params, va, vb, cells, hop, shift, layout) -> SparseOperator:
    if cells < 2:
        raise ConfigurationError("zigzag lattice needs at least 2 cells")
    va = _as_values(va, cells, "V^A")
    vb = _as_values(vb, cells, "V^B")
    rows, cols, vals = _zigzag_triplets(cells, hop, shift, params, va, vb)
    n = 2 * cells
    h = sp.csr_matrix((np.asarray(vals, complex), (rows, cols)), shape=(n, n))
    return SparseOperator(h, params.gamma, n, (0, n - 1), layout)


def build_zigzag(params: LatticeParams, va=None, vb=None, cells: int = 2) -> SparseOperator:
    """Two-sublattice zigzag Hamiltonian with ``-i kappa`` intra-sublattice hopping."""
    return _zigzag(params, va, vb, cells, -1j * params.kappa, 0.0, "zigzag")


def build_effective(params: LatticeParams, aux: AuxiliaryParams, va=None, vb=None, cells: int = 2) -> SparseOperator:
    """Zigzag lattice with the hopping and shift left after adiabatic elimination.

    ``params.kappa`` is ignored; the intra-sublattice hopping is ``kappa_eff``.
    """
    eff = effective_params(aux)
    return _zigzag(params, va, vb, cells, eff.kappa_eff, eff.delta, "effective")


def build_auxiliary(params: LatticeParams, aux: AuxiliaryParams, va=None, vb=None, cells: int = 2) -> SparseOperator:
    """Zigzag lattice with explicit lossy auxiliary sites.

    State layout: ``[a_0, b_0, ..., a_{M-1}, b_{M-1}, A_0..A_M, B_0..B_M]``.
    ``A_n`` sits between ``a_{n-1}`` and ``a_n``; the two end sites ``A_0`` and
    ``A_M`` give every main site two auxiliary neighbours, so eliminating them
    reproduces :func:`build_effective` including the boundary cells.
    ``params.kappa`` is ignored; intra-sublattice hopping is ``aux.epsilon``.
    """
    if not aux.lossy:
        raise ConfigurationError("auxiliary sites must be lossy: Im(U) < 0")
    if cells < 2:
        raise ConfigurationError("zigzag lattice needs at least 2 cells")
    va = _as_values(va, cells, "V^A")
    vb = _as_values(vb, cells, "V^B")
    rows, cols, vals = _zigzag_triplets(cells, aux.epsilon, 0.0, params, va, vb)
    main = 2 * cells
    base_a = main
    base_b = main + cells + 1
    u = complex(aux.u_site)
    s = aux.sigma
    for k in range(cells + 1):
        for base, sub in ((base_a, 0), (base_b, 1)):
            ik = base + k
            rows.append(ik)
            cols.append(ik)
            vals.append(u)
            for n in (k, k - 1):
                if 0 <= n < cells:
                    im = 2 * n + sub
                    rows += [ik, im]
                    cols += [im, ik]
                    vals += [s, s]
    n = main + 2 * (cells + 1)
    h = sp.csr_matrix((np.asarray(vals, complex), (rows, cols)), shape=(n, n))
    return SparseOperator(h, params.gamma, main, (0, main - 1), "auxiliary")
