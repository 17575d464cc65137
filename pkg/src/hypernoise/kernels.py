"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The public names (``jacobi_eigh``, ``correlation_table``) bind to the numba
versions when JIT is available and to the numpy versions otherwise; both
variants stay importable so benchmarks and tests can compare them.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit
from .constants import JACOBI_MAX_SWEEPS, JACOBI_OFFDIAG_TOL

# E(theta, delta) sign pattern over the HH, HV, VH, VV outcomes.
_PARITY = np.array([1.0, -1.0, -1.0, 1.0])


# ---------------------------------------------------------------- Jacobi eigh


@njit
def _jacobi_loops(a, tol, max_sweeps):
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += a[i, j].real ** 2 + a[i, j].imag ** 2
    scale = max(1.0, np.sqrt(scale))
    sweeps = 0
    while sweeps < max_sweeps:
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += a[i, j].real ** 2 + a[i, j].imag ** 2
        if np.sqrt(2.0 * off) <= tol * scale:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                ph = apq / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                sph = s * ph
                sphc = s * ph.conjugate()
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - sphc * akq
                    a[k, q] = sph * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - sph * aqk
                    a[q, k] = sphc * apk + c * aqk
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - sphc * vkq
                    v[k, q] = sph * vkp + c * vkq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    return w, v, sweeps


def _jacobi_vectorized(a, tol, max_sweeps):
    a = np.array(a, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(1.0, float(np.linalg.norm(a)))
    iu = np.triu_indices(n, 1)
    sweeps = 0
    while sweeps < max_sweeps:
        if np.sqrt(2.0) * np.linalg.norm(a[iu]) <= tol * scale:
            break
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                ph = apq / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = np.copysign(1.0, tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                g = np.array([[c, s * ph], [-s * np.conj(ph), c]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ g
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    return np.diagonal(a).real.copy(), v, sweeps


def _sorted(w, v, sweeps):
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order], sweeps


def jacobi_eigh_numba(a, tol=JACOBI_OFFDIAG_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    return _sorted(*_jacobi_loops(np.ascontiguousarray(a, dtype=np.complex128), tol, max_sweeps))


def jacobi_eigh_numpy(a, tol=JACOBI_OFFDIAG_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    return _sorted(*_jacobi_vectorized(a, tol, max_sweeps))


# -------------------------------------------------------- correlation tables


@njit
def _corr_table_loops(rho, thetas, deltas):
    """E[i, j] for rotation angles (thetas[i], deltas[j]) on a 4x4 state."""
    ni = thetas.shape[0]
    nj = deltas.shape[0]
    out = np.empty((ni, nj))
    m = np.empty((4, 4))
    for i in range(ni):
        ca = np.cos(thetas[i])
        sa = np.sin(thetas[i])
        for j in range(nj):
            cb = np.cos(deltas[j])
            sb = np.sin(deltas[j])
            ra = ((ca, -sa), (sa, ca))
            rb = ((cb, -sb), (sb, cb))
            for x in range(4):
                for y in range(4):
                    m[x, y] = ra[x >> 1][y >> 1] * rb[x & 1][y & 1]
            e = 0.0
            for k in range(4):
                sign = 1.0 if (k == 0 or k == 3) else -1.0
                acc = 0.0
                for x in range(4):
                    mkx = m[k, x]
                    if mkx == 0.0:
                        continue
                    for y in range(4):
                        acc += mkx * m[k, y] * rho[x, y].real
                e += sign * acc
            out[i, j] = e
    return out


def _rotations(angles):
    c, s = np.cos(angles), np.sin(angles)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def _corr_table_vectorized(rho, thetas, deltas):
    ra = _rotations(np.asarray(thetas, dtype=float))
    rb = _rotations(np.asarray(deltas, dtype=float))
    # m[i, j] = R(theta_i) (x) R(delta_j), shape (ni, nj, 4, 4)
    m = np.einsum("iac,jbd->ijabcd", ra, rb).reshape(len(ra), len(rb), 4, 4)
    probs = np.einsum("ijkx,xy,ijky->ijk", m, np.asarray(rho), m).real
    return probs @ _PARITY


def correlation_table_numba(rho, thetas, deltas):
    # Rotations are real, so only Re(rho) reaches the diagonal of R rho R^T.
    return _corr_table_loops(
        np.ascontiguousarray(rho, dtype=np.complex128),
        np.ascontiguousarray(thetas, dtype=np.float64),
        np.ascontiguousarray(deltas, dtype=np.float64),
    )


def correlation_table_numpy(rho, thetas, deltas):
    return _corr_table_vectorized(rho, thetas, deltas)


if HAVE_NUMBA:
    jacobi_eigh = jacobi_eigh_numba
    correlation_table = correlation_table_numba
else:
    jacobi_eigh = jacobi_eigh_numpy
    correlation_table = correlation_table_numpy
