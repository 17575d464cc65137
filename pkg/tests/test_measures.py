import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from hypernoise import channels as ch
from hypernoise import matcore as mc
from hypernoise import measures as ms
import oracles as orc
from conftest import P_GRID

TSIRELSON = 2 * np.sqrt(2)


def pol(m):
    return mc.DensityMatrix(m, mc.POL_LAYOUT)


def reduced(kind, p, state):
    return mc.polarization_part(
        ch.noisy_state(kind, p, mc.make_state("entangled" if state == "e" else "hyperentangled"))
    )


@pytest.fixture(scope="module")
def mixed():
    return pol(np.eye(4) / 4)


@pytest.fixture(scope="module")
def hh():
    return pol(orc.proj(orc.ket(0, 0)))


# ---- negativity


def test_negativity_examples(bell, hh, he):
    assert ms.negativity(bell, "pol1") == pytest.approx(0.5, abs=1e-12)
    assert ms.negativity(hh, "pol1") == pytest.approx(0.0, abs=1e-12)
    r = reduced("bitflip", 0.5, "he")
    assert orc.negativity_2q(r.mat) == pytest.approx(0.25, abs=1e-12)
    assert ms.negativity(r, "pol1") == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(mc.LayoutError):
        ms.negativity(bell, "path1")


def test_negativity_of_full_he_state(he):
    # per-degree-of-freedom and joint photon1:photon2 values
    assert ms.negativity(mc.partial_trace(he, mc.POL_LABELS), "pol1") == pytest.approx(0.5, abs=1e-12)
    assert ms.negativity(mc.partial_trace(he, mc.PATH_LABELS), "path1") == pytest.approx(0.5, abs=1e-12)
    joint = mc.permute(he, ["pol1", "path1", "pol2", "path2"])
    pt = mc.partial_transpose(
        mc.partial_transpose(joint, "pol1"), "path1", layout=joint.layout
    )
    assert 0.5 * (mc.trace_norm(pt) - 1) == pytest.approx(1.5, abs=1e-12)


@pytest.mark.parametrize("kind", ch.KINDS)
@pytest.mark.parametrize("state", ["e", "he"])
def test_negativity_zero_iff_ppt(kind, state):
    for p in P_GRID[::5]:
        r = reduced(kind, p, state)
        n = ms.negativity(r, "pol1")
        lo = np.linalg.eigvalsh(mc.partial_transpose(r, "pol1"))[0]
        assert (n <= 1e-12) == (lo >= -1e-10)


CLOSED = {
    ("bitflip", "e"): lambda p: abs(1 - 2 * p) / 2,
    ("bitflip", "he"): lambda p: 0.5 - p * (1 - p),
    ("depolarizing", "e"): lambda p: max(0.0, 0.5 - 0.75 * p),
    ("depolarizing", "he"): lambda p: 0.5 * ((1 - 0.75 * p) ** 2 + 3 * p * p / 16),
    ("phasedamping", "e"): lambda p: np.sqrt(1 - p) / 2,
    ("phasedamping", "he"): lambda p: (2 - p) / 4,
}


@pytest.mark.parametrize("kind,state", sorted(CLOSED))
def test_closed_forms_confirmed_by_oracle(kind, state):
    for p in P_GRID:
        oracle = orc.negativity_2q(orc.reduced_noisy(kind, p, state))
        assert oracle == pytest.approx(CLOSED[kind, state](p), abs=1e-12)


@pytest.mark.parametrize("kind,state", sorted(CLOSED))
def test_pipeline_matches_closed_forms(kind, state):
    for p in P_GRID:
        assert ms.negativity(reduced(kind, p, state), "pol1") == pytest.approx(
            CLOSED[kind, state](p), abs=1e-10
        )


# ---- witness


def test_witness_operator():
    w = ms.witness_operator()
    pauli = 0.5 * (np.eye(4) - np.kron(orc.X, orc.X) - np.kron(orc.Y, orc.Y) + np.kron(orc.Z, orc.Z))
    assert mc.max_abs(w - pauli) <= 1e-15
    printed = 0.5 * np.array([[1, 0, 0, 0], [0, 0, -1, 0], [0, -1, 0, 0], [0, 0, 0, 1]])
    assert mc.max_abs(w - 2 * printed) <= 1e-15
    assert mc.is_hermitian(w)
    np.testing.assert_allclose(np.linalg.eigvalsh(w), [-1, 1, 1, 1], atol=1e-14)
    # sign structure of the printed matrix is preserved
    assert np.all(np.sign(np.diag(w).real) == np.sign(np.diag(printed)))


def test_witness_examples(bell, mixed):
    assert ms.witness_expectation(bell) == pytest.approx(-1.0, abs=1e-12)
    assert ms.witness_expectation(mixed) == pytest.approx(0.5, abs=1e-12)
    r = reduced("bitflip", 0.5, "e")
    assert ms.witness_expectation(r) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        ms.witness_expectation(mc.make_state("entangled"))
    with pytest.raises(ValueError, match="mode"):
        ms.witness_expectation(bell, "tomography")


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_witness_modes_agree(seed):
    r = pol(orc.random_density(4, np.random.default_rng(seed)))
    a = ms.witness_expectation(r, "direct")
    b = ms.witness_expectation(r, "pauli_decomposition")
    assert a == pytest.approx(b, abs=1e-12)


def test_witness_soundness_on_separable_states(rng):
    worst = min(
        ms.witness_expectation(pol(orc.random_separable(rng)), "pauli_decomposition")
        for _ in range(1000)
    )
    assert worst >= -1e-10


@pytest.mark.parametrize("kind", ch.KINDS)
@pytest.mark.parametrize("state", ["e", "he"])
def test_witness_implies_negativity(kind, state):
    for p in P_GRID:
        r = reduced(kind, p, state)
        if ms.witness_expectation(r) < -1e-8:
            assert ms.negativity(r, "pol1") > 0


# ---- rotations and correlations


def test_rotation():
    np.testing.assert_allclose(ms.rotation(0.0), np.eye(2), atol=1e-15)
    h = np.array([1, 0])
    assert abs(abs((ms.rotation(np.pi / 2) @ h)[1]) - 1) <= 1e-15
    a, b = 0.37, -1.21
    np.testing.assert_allclose(ms.rotation(a) @ ms.rotation(b), ms.rotation(a + b), atol=1e-15)
    assert mc.is_unitary(ms.rotation(2.2), 1e-15)


def _triplet_E_symbolic():
    t, d = sp.symbols("theta delta", real=True)
    r = lambda a: sp.Matrix([[sp.cos(a), -sp.sin(a)], [sp.sin(a), sp.cos(a)]])  # noqa: E731
    m = sp.kronecker_product(r(t), r(d))
    psi = sp.Matrix([0, 1, 1, 0]) / sp.sqrt(2)
    amp = m * psi
    e = amp[0] ** 2 - amp[1] ** 2 - amp[2] ** 2 + amp[3] ** 2
    return t, d, sp.simplify(sp.expand_trig(e + sp.cos(2 * (t + d))))


def test_triplet_correlation_closed_form(bell, rng):
    t, d, residual = _triplet_E_symbolic()
    assert residual == 0
    for th, de in rng.uniform(-np.pi, np.pi, size=(20, 2)):
        assert ms.correlation_E(bell, th, de) == pytest.approx(-np.cos(2 * (th + de)), abs=1e-12)


def test_correlation_examples(bell, hh):
    assert ms.correlation_E(bell, 0, 0) == pytest.approx(-1.0, abs=1e-15)
    assert ms.correlation_E(hh, 0, 0) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        ms.correlation_E(mc.make_state("entangled"), 0, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-7, 7), st.floats(-7, 7))
def test_rotate_state_equals_rotate_projectors(seed, th, de):
    r = pol(orc.random_density(4, np.random.default_rng(seed)))
    e = ms.correlation_E(r, th, de)
    assert e == pytest.approx(ms.correlation_E_projectors(r, th, de), abs=1e-12)
    assert -1 - 1e-12 <= e <= 1 + 1e-12


# ---- CHSH


def test_chsh_collapsed_settings(bell):
    assert ms.chsh_S(bell, ms.AngleSettings(0, 0, 0, 0)) == pytest.approx(-2.0, abs=1e-12)


def test_separable_never_violates(hh):
    g = ms.chsh_grid(hh, np.pi / 4, np.pi / 2, 61)
    assert np.max(np.abs(g.s_values)) <= 2 + 1e-9


def test_angle_settings():
    a = ms.AngleSettings(-0.5, 4.0, np.pi, 0.1).reduced()
    assert all(0 <= x < np.pi for x in a.as_tuple())
    with pytest.raises(ValueError):
        ms.AngleSettings(np.inf, 0, 0, 0)


def test_grid_corner_resolution(bell):
    g = ms.chsh_grid(bell, 0.3, 1.1, 2)
    assert g.s_values.shape == (2, 2)
    for i, tp in enumerate((0, np.pi)):
        for j, dp in enumerate((0, np.pi)):
            assert g.s_values[i, j] == pytest.approx(
                ms.chsh_S(bell, ms.AngleSettings(0.3, 1.1, tp, dp)), abs=1e-12
            )
    with pytest.raises(ValueError):
        ms.chsh_grid(bell, 0, 0, 1)


def test_grid_matches_chsh_S(bell, rng):
    g = ms.chsh_grid(bell, np.pi / 4, np.pi / 2, 19)
    for i, j in rng.integers(0, 19, size=(10, 2)):
        a = ms.AngleSettings(np.pi / 4, np.pi / 2, g.theta_p_axis[i], g.delta_p_axis[j])
        assert g.s_values[i, j] == pytest.approx(ms.chsh_S(bell, a), abs=1e-12)


def test_grid_periodicity(rng):
    r = reduced("depolarizing", 0.3, "he")
    axis = np.linspace(0, np.pi, 37)
    base = ms._s_table(r, 0.4, 1.3, axis, axis)
    wrapped = ms._s_table(r, 0.4, 1.3, axis + np.pi, axis + np.pi)
    np.testing.assert_allclose(base, wrapped, atol=1e-12)


def test_noiseless_grid_extremum(bell):
    # dense closed-form oracle E = -cos(2(theta + delta))
    th, de = np.pi / 4, np.pi / 2
    ax = np.linspace(0, np.pi, 2881)
    E = lambda a, b: -np.cos(2 * (a + b))  # noqa: E731
    dense = E(th, de) - E(th, ax)[None, :] + E(ax, de)[:, None] + E(ax[:, None], ax[None, :])
    g = ms.chsh_grid(bell, th, de)
    assert np.max(g.s_values) == pytest.approx(dense.max(), abs=1e-9)
    assert dense.max() == pytest.approx(3 * np.sqrt(3) / 2, abs=1e-9)
    assert np.max(np.abs(g.s_values)) <= TSIRELSON + 1e-9
    val, tp, dp = ms.chsh_max(bell, th, de)
    assert val == pytest.approx(3 * np.sqrt(3) / 2, abs=1e-9)


def test_global_max_noiseless(bell):
    val, a = ms.chsh_global_max(bell)
    assert val == pytest.approx(TSIRELSON, abs=1e-6)
    assert val <= TSIRELSON + 1e-9
    assert ms.chsh_S(bell, a) == pytest.approx(val, abs=1e-9)


def test_max_of_maximally_mixed(mixed):
    assert ms.chsh_max(mixed, np.pi / 2, np.pi / 4) == (0.0, 0.0, 0.0)
    val, a = ms.chsh_global_max(mixed)
    assert val == 0.0 and a.as_tuple() == (0.0, 0.0, 0.0, 0.0)


def test_phase_damped_entangled_saturates():
    r = reduced("phasedamping", 1.0, "e")
    val, tp, dp = ms.chsh_max(r, np.pi / 2, np.pi / 4)
    assert val == pytest.approx(2.0, abs=1e-6)
    assert 0 <= tp <= np.pi and 0 <= dp <= np.pi
    gval, _ = ms.chsh_global_max(r)
    assert gval == pytest.approx(2.0, abs=1e-6)


@pytest.mark.parametrize("kind", ch.KINDS)
def test_refined_max_not_below_grid(kind):
    r = reduced(kind, 0.37, "he")
    g = ms.chsh_grid(r, np.pi / 2, np.pi / 4)
    val, tp, dp = ms.chsh_max(r, np.pi / 2, np.pi / 4)
    assert val >= g.s_values.max()
    assert ms.chsh_S(r, ms.AngleSettings(np.pi / 2, np.pi / 4, tp, dp)) == pytest.approx(val, abs=1e-12)


@pytest.mark.parametrize("kind", ch.KINDS)
def test_tsirelson_on_artifact_states(kind):
    for p in P_GRID[::10]:
        for s in ("e", "he"):
            g = ms.chsh_grid(reduced(kind, p, s), np.pi / 4, np.pi / 2, 37)
            assert np.max(np.abs(g.s_values)) <= TSIRELSON + 1e-9


# ---- coincidences


def test_coincidences_deterministic_outcome():
    hv = pol(orc.proj(orc.ket(0, 1)))
    counts, e = ms.simulate_coincidences(hv, 0, 0, 1234, 9)
    assert (counts.c_hh, counts.c_hv, counts.c_vh, counts.c_vv) == (0, 1234, 0, 0)
    assert e == -1


def test_coincidences_bell_all_anticorrelated(bell):
    counts, e = ms.simulate_coincidences(bell, 0, 0, 10**6, 3)
    assert counts.c_hh == counts.c_vv == 0
    assert e == -1.0


def test_coincidences_reproducible(bell):
    a = ms.simulate_coincidences(bell, np.pi / 8, 3 * np.pi / 8, 5000, 42)
    b = ms.simulate_coincidences(bell, np.pi / 8, 3 * np.pi / 8, 5000, 42)
    c = ms.simulate_coincidences(bell, np.pi / 8, 3 * np.pi / 8, 5000, 43)
    assert a == b
    assert a[0] != c[0]
    assert a[0].c_hh + a[0].c_hv + a[0].c_vh + a[0].c_vv == 5000


def test_coincidences_validation(bell):
    with pytest.raises(ValueError):
        ms.simulate_coincidences(bell, 0, 0, 0, 1)
    with pytest.raises(ValueError):
        ms.CoincidenceCounts(1, 1, 1, 1, n_total=5, seed=0)
