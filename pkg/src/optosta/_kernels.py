"""RK4 stepping kernels for ``dA/dt = -i M(t) A`` with 3x3 complex ``M``.

``mats`` holds the generator at half-step nodes: ``mats[2k]`` at the start of
step ``k``, ``mats[2k+1]`` at its midpoint and ``mats[2k+2]`` at its end.
Both kernels return ``(states, n_done)``; ``n_done < len(h)`` means a
non-finite state appeared after step ``n_done``.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


@njit(cache=True)
def _rhs(m, v, out):
    for i in range(3):
        acc = m[i, 0] * v[0] + m[i, 1] * v[1] + m[i, 2] * v[2]
        out[i] = complex(acc.imag, -acc.real)  # -1j * acc


@njit(cache=True)
def rk4_numba(mats, h, psi0):
    n = h.shape[0]
    states = np.empty((n + 1, 3), dtype=np.complex128)
    psi = psi0.copy()
    states[0] = psi
    k1 = np.empty(3, dtype=np.complex128)
    k2 = np.empty(3, dtype=np.complex128)
    k3 = np.empty(3, dtype=np.complex128)
    k4 = np.empty(3, dtype=np.complex128)
    tmp = np.empty(3, dtype=np.complex128)
    for k in range(n):
        dt = h[k]
        _rhs(mats[2 * k], psi, k1)
        for i in range(3):
            tmp[i] = psi[i] + 0.5 * dt * k1[i]
        _rhs(mats[2 * k + 1], tmp, k2)
        for i in range(3):
            tmp[i] = psi[i] + 0.5 * dt * k2[i]
        _rhs(mats[2 * k + 1], tmp, k3)
        for i in range(3):
            tmp[i] = psi[i] + dt * k3[i]
        _rhs(mats[2 * k + 2], tmp, k4)
        ok = True
        for i in range(3):
            psi[i] = psi[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not (np.isfinite(psi[i].real) and np.isfinite(psi[i].imag)):
                ok = False
        if not ok:
            return states, k
        states[k + 1] = psi
    return states, n


def rk4_numpy(mats, h, psi0):
    # overflow is reported through n_done, not as a warning
    with np.errstate(over="ignore", invalid="ignore"):
        return _rk4_numpy(mats, h, psi0)


def _rk4_numpy(mats, h, psi0):
    n = h.shape[0]
    states = np.empty((n + 1, 3), dtype=np.complex128)
    psi = np.array(psi0, dtype=np.complex128)
    states[0] = psi
    gen = -1j * mats
    for k in range(n):
        dt = h[k]
        m0, mh, m1 = gen[2 * k], gen[2 * k + 1], gen[2 * k + 2]
        k1 = m0 @ psi
        k2 = mh @ (psi + 0.5 * dt * k1)
        k3 = mh @ (psi + 0.5 * dt * k2)
        k4 = m1 @ (psi + dt * k3)
        psi = psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(psi)):
            return states, k
        states[k + 1] = psi
    return states, n


def rk4(mats, h, psi0, use_numba=None):
    """Dispatch to the selected backend (``OPTOSTA_DISABLE_NUMBA``)."""
    if use_numba is None:
        use_numba = USE_NUMBA
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    h = np.ascontiguousarray(h, dtype=np.float64)
    psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)
    if use_numba:
        return rk4_numba(mats, h, psi0)
    return rk4_numpy(mats, h, psi0)
