"""Compiled RK4 stepping loop over a CSR generator."""

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def _csr_matvec(indptr, indices, data, x, out):
    for i in range(out.size):
        acc = 0j
        for k in range(indptr[i], indptr[i + 1]):
            acc += data[k] * x[indices[k]]
        out[i] = acc


@numba.njit(cache=True, nogil=True)
def rk4_run(indptr, indices, data, psi, dt, decay, nsteps, sample_every, samples, log_scales):
    """Advance ``psi`` in place under ``d psi/dt = G psi + decay * psi``.

    ``G`` is the CSR matrix (indptr, indices, data).  The uniform ``decay``
    rate is folded into the log-scale exactly.  After every step the state is
    rescaled to unit max-amplitude.  Row ``k`` of ``samples`` receives the
    state after ``k * sample_every`` steps (row 0: the input, last row: the
    final step).  Returns the number of filled rows, or ``-step`` when the
    state became non-finite or vanished at ``step``.
    """
    n = psi.size
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    tmp = np.empty(n, np.complex128)
    log_scale = 0.0
    filled = 0
    samples[0, :] = psi
    log_scales[0] = 0.0
    filled = 1
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(1, nsteps + 1):
        _csr_matvec(indptr, indices, data, psi, k1)
        for i in range(n):
            tmp[i] = psi[i] + half * k1[i]
        _csr_matvec(indptr, indices, data, tmp, k2)
        for i in range(n):
            tmp[i] = psi[i] + half * k2[i]
        _csr_matvec(indptr, indices, data, tmp, k3)
        for i in range(n):
            tmp[i] = psi[i] + dt * k3[i]
        _csr_matvec(indptr, indices, data, tmp, k4)
        peak = 0.0
        for i in range(n):
            v = psi[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            psi[i] = v
            a = v.real * v.real + v.imag * v.imag
            if not np.isfinite(a):
                return -step
            if a > peak:
                peak = a
        if peak == 0.0:
            return -step
        peak = np.sqrt(peak)
        inv = 1.0 / peak
        for i in range(n):
            psi[i] *= inv
        log_scale += np.log(peak) + decay * dt
        if step % sample_every == 0 or step == nsteps:
            samples[filled, :] = psi
            log_scales[filled] = log_scale
            filled += 1
    return filled
