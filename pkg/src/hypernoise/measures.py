"""Negativity, the triplet witness, and CHSH machinery."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .matcore import (
    DensityMatrix,
    I2,
    X,
    Y,
    Z,
    as_matrix,
    kron_all,
    partial_transpose,
    trace_norm,
)

# outcome order HH, HV, VH, VV
_PARITY = np.array([1.0, -1.0, -1.0, 1.0])

COARSE_RESOLUTION = 181
REFINE_ITERS = 4
REFINE_POINTS = 21
REFINE_CANDIDATES = 4

GENERATOR = "numpy.random.PCG64"

# values closer than this count as ties; ties keep the earliest cell
TIE_TOL = 1e-12


def negativity(rho: DensityMatrix, subsystem: str) -> float:
    val = 0.5 * (trace_norm(partial_transpose(rho, subsystem)) - 1.0)
    return max(val, 0.0)


def witness_operator() -> np.ndarray:
    """W = (II - XX - YY + ZZ)/2 = I - 2|psi+><psi+|, psi+ = (|HV> + |VH>)/sqrt2."""
    w = 0.5 * (
        kron_all(I2, I2) - kron_all(X, X) - kron_all(Y, Y) + kron_all(Z, Z)
    )
    return as_matrix(w)


_WITNESS_TERMS = ((0.5, I2), (-0.5, X), (-0.5, Y), (0.5, Z))


def _check4(rho):
    if rho.dim != 4:
        raise ValueError(f"expected a two-qubit (4x4) state, got dim {rho.dim}")


def witness_expectation(rho4: DensityMatrix, mode: str = "direct") -> float:
    _check4(rho4)
    if mode == "direct":
        return float(np.trace(rho4.mat @ witness_operator()).real)
    if mode == "pauli_decomposition":
        # four local correlators <s (x) s>, each measurable with product settings
        return float(
            sum(w * np.trace(rho4.mat @ np.kron(s, s)).real for w, s in _WITNESS_TERMS)
        )
    raise ValueError(f"unknown witness mode {mode!r}")


def rotation(theta) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return as_matrix([[c, -s], [s, c]])


def _rotated(rho4, theta, delta):
    m = np.kron(rotation(theta), rotation(delta))
    return m @ rho4.mat @ m.conj().T


def outcome_probabilities(rho4: DensityMatrix, theta, delta) -> np.ndarray:
    """P_HH, P_HV, P_VH, P_VV after rotating the state by (theta, delta)."""
    _check4(rho4)
    p = np.clip(np.diagonal(_rotated(rho4, theta, delta)).real, 0.0, None)
    return p / p.sum()


def correlation_E(rho4: DensityMatrix, theta, delta) -> float:
    _check4(rho4)
    probs = np.diagonal(_rotated(rho4, theta, delta)).real
    return float(probs @ _PARITY)


def correlation_E_projectors(rho4: DensityMatrix, theta, delta) -> float:
    """Same value, measured with rotated projectors on the unrotated state."""
    _check4(rho4)
    m = np.kron(rotation(theta), rotation(delta))
    total = 0.0
    for k, sign in enumerate(_PARITY):
        proj = np.zeros((4, 4), dtype=complex)
        proj[k, k] = 1.0
        total += sign * np.trace(m.conj().T @ proj @ m @ rho4.mat).real
    return float(total)


@dataclass(frozen=True)
class AngleSettings:
    theta: float
    delta: float
    theta_p: float
    delta_p: float

    def __post_init__(self):
        if not np.all(np.isfinite([self.theta, self.delta, self.theta_p, self.delta_p])):
            raise ValueError("CHSH angles must be finite")

    def reduced(self) -> "AngleSettings":
        return AngleSettings(*(float(np.mod(a, np.pi)) for a in self.as_tuple()))

    def as_tuple(self):
        return (self.theta, self.delta, self.theta_p, self.delta_p)


def chsh_S(rho4: DensityMatrix, a: AngleSettings) -> float:
    E = correlation_E
    return (
        E(rho4, a.theta, a.delta)
        - E(rho4, a.theta, a.delta_p)
        + E(rho4, a.theta_p, a.delta)
        + E(rho4, a.theta_p, a.delta_p)
    )


@dataclass(frozen=True, eq=False)
class GridResult:
    theta_p_axis: np.ndarray
    delta_p_axis: np.ndarray
    s_values: np.ndarray  # s_values[i, j] at (theta_p_axis[i], delta_p_axis[j])
    theta: float
    delta: float
    noise: str | None = None
    p: float | None = None
    state: str | None = None
    meta: dict = field(default_factory=dict)

    def argmax(self):
        i, j = np.unravel_index(np.argmax(self.s_values), self.s_values.shape)
        return float(self.s_values[i, j]), float(self.theta_p_axis[i]), float(self.delta_p_axis[j])


def _s_table(rho, theta, delta, tp_axis, dp_axis):
    mat = rho.mat
    e0 = kernels.correlation_table(mat, [theta], [delta])[0, 0]
    e_td = kernels.correlation_table(mat, [theta], dp_axis)[0]
    e_pd = kernels.correlation_table(mat, tp_axis, [delta])[:, 0]
    e_pp = kernels.correlation_table(mat, tp_axis, dp_axis)
    return e0 - e_td[None, :] + e_pd[:, None] + e_pp


def chsh_grid(rho4: DensityMatrix, theta, delta, resolution=COARSE_RESOLUTION) -> GridResult:
    _check4(rho4)
    if resolution < 2:
        raise ValueError("grid resolution must be at least 2")
    axis = np.linspace(0.0, np.pi, int(resolution))
    s = _s_table(rho4, theta, delta, axis, axis)
    return GridResult(axis, axis.copy(), s, float(theta), float(delta))


def _first_max(s):
    return int(np.flatnonzero(s.ravel() >= s.max() - TIE_TOL)[0])


def _candidates(s, k):
    first = _first_max(s)
    rest = [int(i) for i in np.argsort(-s, axis=None, kind="stable") if i != first]
    return [first] + rest[: k - 1]


def _window(center, step, points):
    return center + np.linspace(-step, step, points)


def chsh_max(
    rho4: DensityMatrix,
    theta,
    delta,
    resolution=COARSE_RESOLUTION,
    refine_iters=REFINE_ITERS,
):
    """Max of S over (theta', delta') in [0, pi]^2 at fixed (theta, delta).

    Coarse grid scan, then the best few cells are each refined by repeatedly
    shrinking a grid around the incumbent by a factor of ten. Only a strictly
    better value moves the incumbent, so flat landscapes keep the first cell.
    """
    grid = chsh_grid(rho4, theta, delta, resolution)
    s = grid.s_values
    step = np.pi / (resolution - 1)
    best = None
    for idx in _candidates(s, REFINE_CANDIDATES):
        i, j = np.unravel_index(idx, s.shape)
        val, tp, dp = float(s[i, j]), grid.theta_p_axis[i], grid.delta_p_axis[j]
        h = step
        for _ in range(refine_iters):
            tax = _window(tp, h, REFINE_POINTS)
            dax = _window(dp, h, REFINE_POINTS)
            local = _s_table(rho4, theta, delta, tax, dax)
            li, lj = np.unravel_index(np.argmax(local), local.shape)
            if local[li, lj] > val + TIE_TOL:
                val, tp, dp = float(local[li, lj]), tax[li], dax[lj]
            h /= 10.0
        if best is None or val > best[0] + TIE_TOL:
            best = (val, tp, dp)
    val, tp, dp = best
    return val, float(np.mod(tp, np.pi)), float(np.mod(dp, np.pi))


def _s4(rho4, ta, da, tpa, dpa):
    """S over all combinations of four axes, shape (len ta, len da, len tpa, len dpa)."""
    thetas = np.concatenate([ta, tpa])
    deltas = np.concatenate([da, dpa])
    e = kernels.correlation_table(rho4.mat, thetas, deltas)
    nt, nd = len(ta), len(da)
    e_ab = e[:nt, :nd]
    e_abp = e[:nt, nd:]
    e_apb = e[nt:, :nd]
    e_apbp = e[nt:, nd:]
    return (
        e_ab[:, :, None, None]
        - e_abp[:, None, None, :]
        + e_apb.T[None, :, :, None]
        + e_apbp[None, None, :, :]
    )


def chsh_global_max(rho4: DensityMatrix, resolution=37, refine_iters=6):
    """Max of S over all four angles; returns (S, AngleSettings)."""
    _check4(rho4)
    axis = np.linspace(0.0, np.pi, int(resolution))
    s = _s4(rho4, axis, axis, axis, axis)
    idx = np.unravel_index(_first_max(s), s.shape)
    val = float(s[idx])
    angles = np.array([axis[i] for i in idx])
    h = np.pi / (resolution - 1)
    pts = 11
    for _ in range(refine_iters):
        axes = [_window(a, h, pts) for a in angles]
        local = _s4(rho4, *axes)
        li = np.unravel_index(np.argmax(local), local.shape)
        if local[li] > val + TIE_TOL:
            val = float(local[li])
            angles = np.array([ax[i] for ax, i in zip(axes, li)])
        h /= 5.0
    return val, AngleSettings(*angles).reduced()


@dataclass(frozen=True)
class CoincidenceCounts:
    c_hh: int
    c_hv: int
    c_vh: int
    c_vv: int
    n_total: int
    seed: int

    def __post_init__(self):
        if self.c_hh + self.c_hv + self.c_vh + self.c_vv != self.n_total:
            raise ValueError("coincidence counts do not sum to n_total")

    def estimate(self) -> float:
        return (self.c_hh + self.c_vv - self.c_hv - self.c_vh) / self.n_total


def simulate_coincidences(rho4: DensityMatrix, theta, delta, n: int, seed: int):
    """Sample ``n`` joint polarization outcomes; returns (counts, E estimate)."""
    if n < 1:
        raise ValueError("number of coincidences must be positive")
    if seed < 0:
        raise ValueError("seed must be an unsigned integer")
    probs = outcome_probabilities(rho4, theta, delta)
    rng = np.random.Generator(np.random.PCG64(seed))
    c = rng.multinomial(int(n), probs)
    counts = CoincidenceCounts(*(int(x) for x in c), n_total=int(n), seed=int(seed))
    return counts, counts.estimate()
