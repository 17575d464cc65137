"""Single-photon Kraus sets and the path-conditioned two-photon channel.

Element order inside every set is fixed: noise elements first, the element
that tends to the identity as p -> 0 last.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .constants import CPTP_TOL
from .matcore import I2, X, Z, DensityMatrix, as_matrix, max_abs

KINDS = ("bitflip", "depolarizing", "phasedamping")


class NotCPTPError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class KrausSet:
    elements: tuple
    kind: str = "custom"
    p: float = 0.0

    def __post_init__(self):
        els = tuple(as_matrix(k) for k in self.elements)
        if not els:
            raise ValueError("a Kraus set needs at least one element")
        dims = {k.shape[0] for k in els}
        if len(dims) != 1:
            raise ValueError(f"Kraus elements have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def stacked(self) -> np.ndarray:
        return np.stack(self.elements)


def _check_p(p):
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise level p must lie in [0, 1], got {p}")
    return p


def kraus_bit_flip(p) -> KrausSet:
    p = _check_p(p)
    return KrausSet((np.sqrt(p) * X, np.sqrt(1 - p) * I2), "bitflip", p)


def kraus_depolarizing(p) -> KrausSet:
    p = _check_p(p)
    w = np.sqrt(p / 4)
    # third element is the listed [[0, i], [-i, 0]], i.e. -Y
    minus_y = np.array([[0, 1j], [-1j, 0]])
    return KrausSet(
        (w * X, w * Z, w * minus_y, np.sqrt(1 - 3 * p / 4) * I2), "depolarizing", p
    )


def kraus_phase_damping(p) -> KrausSet:
    p = _check_p(p)
    return KrausSet(
        (np.diag([0.0, np.sqrt(p)]), np.diag([1.0, np.sqrt(1 - p)])), "phasedamping", p
    )


_BUILDERS = {
    "bitflip": kraus_bit_flip,
    "depolarizing": kraus_depolarizing,
    "phasedamping": kraus_phase_damping,
}


def kraus_set(kind: str, p) -> KrausSet:
    try:
        return _BUILDERS[kind](p)
    except KeyError:
        raise ValueError(f"unknown noise kind {kind!r}; expected one of {KINDS}") from None


def verify_cptp(s: KrausSet, tol=None) -> float:
    """Max-abs deviation of sum_i K_i^dag K_i from the identity.

    ``tol`` is accepted for call-site symmetry; comparison is the caller's job.
    """
    k = s.stacked()
    total = np.einsum("nji,njk->ik", k.conj(), k)
    return max_abs(total - np.eye(s.dim))


def compose_two_photon(s: KrausSet) -> KrausSet:
    if s.dim != 2:
        raise ValueError(f"two-photon composition needs qubit elements, got dim {s.dim}")
    els = tuple(np.kron(a, b) for a, b in product(s.elements, repeat=2))
    return KrausSet(els, s.kind, s.p)


@dataclass(frozen=True, eq=False)
class PathProjectors:
    p00: np.ndarray
    p01: np.ndarray
    p10: np.ndarray
    p11: np.ndarray

    def as_tuple(self):
        return (self.p00, self.p01, self.p10, self.p11)


def path_projectors() -> PathProjectors:
    mats = []
    for idx in range(4):
        m = np.zeros((4, 4), dtype=complex)
        m[idx, idx] = 1.0
        mats.append(as_matrix(m))
    return PathProjectors(*mats)


def controlled_kraus(s: KrausSet) -> KrausSet:
    """Noise on the polarization of whichever photon sits in path 0.

    Output acts on (pol1, pol2, path1, path2) and has 2n + n^2 + 1 elements.
    """
    if s.dim != 2:
        raise ValueError(f"controlled noise needs qubit Kraus elements, got dim {s.dim}")
    dev = verify_cptp(s)
    if dev > CPTP_TOL:
        raise NotCPTPError(f"input Kraus set is not trace preserving (deviation {dev:.3e})")
    pp = path_projectors()
    els = [np.kron(np.kron(k, I2), pp.p01) for k in s.elements]
    els += [np.kron(np.kron(I2, k), pp.p10) for k in s.elements]
    els += [np.kron(k2, pp.p00) for k2 in compose_two_photon(s).elements]
    els.append(np.kron(np.eye(4), pp.p11))
    out = KrausSet(tuple(els), s.kind, s.p)
    dev = verify_cptp(out)
    if dev > CPTP_TOL:
        raise NotCPTPError(f"controlled Kraus set fails completeness (deviation {dev:.3e})")
    return out


def apply_channel(s: KrausSet, rho: DensityMatrix) -> DensityMatrix:
    if s.dim != rho.dim:
        raise ValueError(f"Kraus dim {s.dim} does not match state dim {rho.dim}")
    k = s.stacked()
    out = np.einsum("nij,jk,nlk->il", k, rho.mat, k.conj())
    return DensityMatrix(out, rho.layout)


def noisy_state(kind: str, p, rho: DensityMatrix) -> DensityMatrix:
    """Controlled noise of ``kind`` at level ``p`` applied to a photon-pair state."""
    return apply_channel(controlled_kraus(kraus_set(kind, p)), rho)
