"""Environment-dilated unitary version of the path-conditioned noise.

Each polarization qubit gets its own environment qubit starting in |0>.
The coupled register is ordered (path1, path2, pol1, env1, pol2, env2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import KrausSet, _check_p, kraus_bit_flip, path_projectors, verify_cptp
from .constants import DILATION_CPTP_TOL
from .matcore import (
    PHOTON_LAYOUT,
    DensityMatrix,
    LayoutError,
    SubsystemLayout,
    as_matrix,
    is_unitary,
    partial_trace,
    permute,
)

COUPLED_LAYOUT = SubsystemLayout.of(
    ("path1", 2), ("path2", 2), ("pol1", 2), ("env1", 2), ("pol2", 2), ("env2", 2)
)


@dataclass(frozen=True, eq=False)
class DilatedUnitary:
    """Unitary on system (x) environment, system factor most significant."""

    mat: np.ndarray
    sys_dim: int
    env_dim: int
    p: float | None = None
    kraus_origin: KrausSet | None = None

    def __post_init__(self):
        m = as_matrix(self.mat)
        if m.shape[0] != self.sys_dim * self.env_dim:
            raise ValueError("unitary size does not match system and environment dims")
        if not is_unitary(m, 1e-10):
            raise ValueError("dilation is not unitary")
        object.__setattr__(self, "mat", m)


def _complete_columns(first_cols, total):
    basis = [c / np.linalg.norm(c) for c in first_cols.T]
    extra = []
    for k in range(total):
        if len(basis) + len(extra) == total:
            break
        v = np.zeros(total, dtype=complex)
        v[k] = 1.0
        for _ in range(2):
            for b in basis + extra:
                v = v - np.vdot(b, v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            extra.append(v / norm)
    return extra


def dilate(s: KrausSet) -> DilatedUnitary:
    """Stinespring unitary with U|psi>|0> = sum_a K_a|psi>|a>."""
    dev = verify_cptp(s)
    if dev > DILATION_CPTP_TOL:
        raise ValueError(
            f"cannot dilate a non trace-preserving Kraus set (completeness deviation {dev:.3e})"
        )
    d, n = s.dim, len(s)
    total = d * n
    u = np.zeros((total, total), dtype=complex)
    k = s.stacked()
    for j in range(d):
        for i in range(d):
            u[i * n : (i + 1) * n, j * n] = k[:, i, j]
    fixed = u[:, [j * n for j in range(d)]]
    extra = _complete_columns(fixed, total)
    free = [c for c in range(total) if c % n != 0]
    for col, v in zip(free, extra):
        u[:, col] = v
    return DilatedUnitary(u, d, n, s.p, s)


# Printed bit-flip dilation. Its rows/columns run over |0H>, |0V>, |1H>, |1V>
# (environment factor leading); read that way it reproduces the bit-flip
# channel exactly. Read system-first it would be a bit-phase flip instead.
_BITFLIP_ENV_FIRST = (
    ("a", 0, 0, "b"),
    (0, "a", "b", 0),
    (0, "-b", "a", 0),
    ("-b", 0, 0, "a"),
)
_SWAP = np.eye(4)[[0, 2, 1, 3]]


def bitflip_dilation_paper(p) -> DilatedUnitary:
    """Bit-flip dilation, returned in system-first order |H0>, |H1>, |V0>, |V1>."""
    p = _check_p(p)
    vals = {"a": np.sqrt(1 - p), "b": np.sqrt(p), "-b": -np.sqrt(p), 0: 0.0}
    env_first = np.array([[vals[x] for x in row] for row in _BITFLIP_ENV_FIRST], dtype=complex)
    return DilatedUnitary(_SWAP @ env_first @ _SWAP, 2, 2, p, kraus_bit_flip(p))


def printed_matrix(u: DilatedUnitary) -> np.ndarray:
    """``u`` in the printed environment-first ordering."""
    return _SWAP @ u.mat @ _SWAP


def reduced_channel(u: DilatedUnitary, rho: DensityMatrix) -> DensityMatrix:
    """Tr_env[U (rho (x) |0><0|) U^dag]."""
    if rho.dim != u.sys_dim:
        raise ValueError(f"state dim {rho.dim} does not match system dim {u.sys_dim}")
    env0 = np.zeros((u.env_dim, u.env_dim), dtype=complex)
    env0[0, 0] = 1.0
    joint = u.mat @ np.kron(rho.mat, env0) @ u.mat.conj().T
    layout = SubsystemLayout.of(("sys", u.sys_dim), ("env", u.env_dim))
    out = partial_trace(DensityMatrix(joint, layout), ["sys"])
    return DensityMatrix(out.mat, rho.layout)


def controlled_unitary(u: DilatedUnitary) -> np.ndarray:
    if u.mat.shape != (4, 4):
        raise ValueError(f"controlled unitary needs a 4x4 qubit dilation, got {u.mat.shape}")
    pp = path_projectors()
    ux, i4 = u.mat, np.eye(4)
    total = (
        np.kron(pp.p00, np.kron(ux, ux))
        + np.kron(pp.p01, np.kron(ux, i4))
        + np.kron(pp.p10, np.kron(i4, ux))
        + np.kron(pp.p11, np.kron(i4, i4))
    )
    return as_matrix(total)


def couple_environment(rho: DensityMatrix) -> DensityMatrix:
    if rho.layout != PHOTON_LAYOUT:
        raise LayoutError(
            f"expected layout {list(PHOTON_LAYOUT.labels)}, got {list(rho.layout.labels)}"
        )
    env0 = np.zeros((4, 4), dtype=complex)
    env0[0, 0] = 1.0
    layout = SubsystemLayout(PHOTON_LAYOUT.factors + (("env1", 2), ("env2", 2)))
    joint = DensityMatrix(np.kron(rho.mat, env0), layout)
    return permute(joint, COUPLED_LAYOUT.labels)


def evolve(rho: DensityMatrix, p, unitary: DilatedUnitary | None = None) -> DensityMatrix:
    """Coupled 64-dim state after the controlled dilation acts."""
    u = controlled_unitary(unitary if unitary is not None else bitflip_dilation_paper(p))
    c = couple_environment(rho)
    return DensityMatrix(u @ c.mat @ u.conj().T, c.layout)


def evolve_and_reduce(rho: DensityMatrix, p, unitary: DilatedUnitary | None = None):
    """Returns (polarization state, path state), each a two-qubit DensityMatrix."""
    out = evolve(rho, p, unitary)
    return partial_trace(out, ("pol1", "pol2")), partial_trace(out, ("path1", "path2"))
