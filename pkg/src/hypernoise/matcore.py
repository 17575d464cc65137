"""Dense complex matrices with labelled tensor factors.

Matrices are plain ``numpy`` complex arrays. Basis index of
``|p1 p2 x1 x2>`` is ``8*p1 + 4*p2 + 2*x1 + x2`` with H -> 0, V -> 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from . import kernels
from .constants import (
    EIG_INPUT_TOL,
    HERMITIAN_TOL,
    MAX_DIM,
    PSD_TOL,
    TRACE_TOL,
)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

H, V = 0, 1


class LayoutError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


def as_matrix(a) -> np.ndarray:
    """Copy ``a`` into an immutable square complex128 matrix."""
    m = _frozen(a)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def max_abs(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def is_hermitian(m, tol=HERMITIAN_TOL) -> bool:
    return max_abs(m - np.conj(m).T) <= tol


def is_unitary(m, tol=1e-10) -> bool:
    m = np.asarray(m)
    return max_abs(np.conj(m).T @ m - np.eye(m.shape[0])) <= tol


def kron(a, b) -> np.ndarray:
    return _frozen(np.kron(a, b))


def kron_all(*mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return _frozen(out)


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered ``(label, dim)`` tensor factors, first factor most significant."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(lab), int(d)) for lab, d in self.factors)
        labels = [lab for lab, _ in factors]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate subsystem labels in {labels}")
        if any(d < 1 for _, d in factors):
            raise LayoutError(f"subsystem dims must be positive: {factors}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, *factors) -> "SubsystemLayout":
        return cls(tuple(factors))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.factors)

    @property
    def dim(self) -> int:
        return prod(self.dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(
                f"unknown subsystem label {label!r}; layout has {list(self.labels)}"
            ) from None

    def subset(self, labels) -> "SubsystemLayout":
        keep = {self.labels[self.index(lab)] for lab in labels}
        return SubsystemLayout(tuple(f for f in self.factors if f[0] in keep))


POL_LABELS = ("pol1", "pol2")
PATH_LABELS = ("path1", "path2")
PHOTON_LAYOUT = SubsystemLayout.of(("pol1", 2), ("pol2", 2), ("path1", 2), ("path2", 2))
POL_LAYOUT = SubsystemLayout.of(("pol1", 2), ("pol2", 2))
PATH_LAYOUT = SubsystemLayout.of(("path1", 2), ("path2", 2))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    mat: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self):
        m = as_matrix(self.mat)
        object.__setattr__(self, "mat", m)
        if m.shape[0] != self.layout.dim:
            raise LayoutError(
                f"matrix dim {m.shape[0]} does not match layout dim {self.layout.dim}"
            )
        if m.shape[0] > MAX_DIM:
            raise ValueError(f"dimension {m.shape[0]} exceeds supported maximum {MAX_DIM}")
        asym = max_abs(m - m.conj().T)
        if asym > HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian (max asymmetry {asym:.3e})")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr:.15g} != 1")
        if not _psd_within(m, PSD_TOL):
            lo = hermitian_eigenvalues(m)[0]
            raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def purity(self) -> float:
        return float(np.trace(self.mat @ self.mat).real)

    def trace(self) -> complex:
        return complex(np.trace(self.mat))


def _psd_within(m, slack):
    # Cholesky of the shifted matrix succeeds iff min eigenvalue > -slack.
    try:
        np.linalg.cholesky(_hermitize(m) + slack * np.eye(m.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


def density(mat, layout=None) -> DensityMatrix:
    """Wrap a matrix as a state; default layout is a chain of qubits."""
    m = as_matrix(mat)
    if layout is None:
        n = int(round(np.log2(m.shape[0])))
        if 2**n != m.shape[0]:
            layout = SubsystemLayout.of(("sys", m.shape[0]))
        else:
            layout = SubsystemLayout(tuple((f"q{i + 1}", 2) for i in range(n)))
    return DensityMatrix(m, layout)


def pure(ket, layout=None) -> DensityMatrix:
    ket = np.asarray(ket, dtype=complex).reshape(-1)
    return density(np.outer(ket, ket.conj()), layout)


def _tensor_view(m, layout):
    d = layout.dims
    return np.asarray(m).reshape(d + d)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out every factor of ``rho`` whose label is not in ``keep``."""
    layout = rho.layout
    keep_idx = sorted(layout.index(lab) for lab in keep)
    drop_idx = [i for i in range(len(layout.factors)) if i not in keep_idx]
    n = len(layout.factors)
    t = _tensor_view(rho.mat, layout)
    perm = keep_idx + drop_idx
    t = t.transpose(perm + [n + i for i in perm])
    dk = prod(layout.dims[i] for i in keep_idx)
    dd = prod(layout.dims[i] for i in drop_idx)
    t = t.reshape(dk, dd, dk, dd)
    red = np.einsum("ajbj->ab", t)
    # The kept factors' own ordering is restored by sorted keep_idx.
    return DensityMatrix(_hermitize(red), layout.subset(layout.labels[i] for i in keep_idx))


def _hermitize(m):
    return 0.5 * (m + np.conj(m).T)


def partial_transpose(rho, subsystem: str, layout: SubsystemLayout | None = None) -> np.ndarray:
    """Transpose the ``subsystem`` factor of ``rho``.

    ``rho`` is a DensityMatrix, or a raw matrix when ``layout`` is given (the
    result of a partial transpose is generally not a state).
    """
    if layout is None:
        layout, mat = rho.layout, rho.mat
    else:
        mat = np.asarray(rho)
    k = layout.index(subsystem)
    n = len(layout.factors)
    t = _tensor_view(mat, layout)
    axes = list(range(2 * n))
    axes[k], axes[n + k] = axes[n + k], axes[k]
    return _frozen(t.transpose(axes).reshape(layout.dim, layout.dim))


def permute(rho: DensityMatrix, order) -> DensityMatrix:
    """Reorder tensor factors of ``rho`` to the label order ``order``."""
    layout = rho.layout
    order = list(order)
    if sorted(order) != sorted(layout.labels):
        raise LayoutError(f"permutation {order} does not match layout {list(layout.labels)}")
    perm = [layout.index(lab) for lab in order]
    n = len(perm)
    t = _tensor_view(rho.mat, layout).transpose(perm + [n + i for i in perm])
    new = SubsystemLayout(tuple(layout.factors[i] for i in perm))
    return DensityMatrix(t.reshape(rho.dim, rho.dim), new)


def hermitian_eigh(m):
    """Ascending eigenvalues and eigenvectors (columns) via cyclic Jacobi."""
    m = np.asarray(m, dtype=complex)
    asym = max_abs(m - m.conj().T)
    if asym > EIG_INPUT_TOL:
        raise NotHermitianError(f"matrix is not Hermitian: max asymmetry {asym:.3e}")
    w, v, _ = kernels.jacobi_eigh(_hermitize(m))
    return w, v


def hermitian_eigenvalues(m) -> np.ndarray:
    return hermitian_eigh(m)[0]


def trace_norm(m) -> float:
    return float(np.sum(np.abs(hermitian_eigenvalues(m))))


def _basis_ket(p1, p2, x1, x2):
    k = np.zeros(16, dtype=complex)
    k[8 * p1 + 4 * p2 + 2 * x1 + x2] = 1.0
    return k


def make_state(kind: str) -> DensityMatrix:
    """Noiseless ``hyperentangled`` or reference ``entangled`` photon pair.

    Both carry the polarization triplet (|HV> + |VH>)/sqrt2. The
    hyperentangled pair is also in (|00> + |11>)/sqrt2 over the paths; the
    entangled pair sits on path |01>.
    """
    if kind in ("hyperentangled", "he"):
        ket = 0.5 * (
            _basis_ket(H, V, 0, 0)
            + _basis_ket(H, V, 1, 1)
            + _basis_ket(V, H, 0, 0)
            + _basis_ket(V, H, 1, 1)
        )
    elif kind in ("entangled", "e"):
        ket = (_basis_ket(H, V, 0, 1) + _basis_ket(V, H, 0, 1)) / np.sqrt(2.0)
    else:
        raise ValueError(f"unknown state kind {kind!r}; expected 'entangled' or 'hyperentangled'")
    return pure(ket, PHOTON_LAYOUT)


def bell_triplet() -> DensityMatrix:
    """(|HV> + |VH>)/sqrt2 on the two polarization qubits."""
    ket = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2.0)
    return pure(ket, POL_LAYOUT)


def polarization_part(rho: DensityMatrix) -> DensityMatrix:
    return partial_trace(rho, POL_LABELS)
