import math
import warnings

import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, settings
from hypothesis import strategies as st

from qdpairs import (
    ModelParams,
    QdLevel,
    build_basis,
    build_h0,
    cubic_shifts,
    diagonalize_manifolds,
    g_minus,
    transition_table,
)
from qdpairs.dressed import LABEL_ORDER, dressed_states

from conftest import gauge_fixed_amplitude

G, XR, XL, B = QdLevel.G, QdLevel.X_R, QdLevel.X_L, QdLevel.B

couplings = st.tuples(
    st.floats(0.05, 30), st.floats(0.05, 30), st.floats(0.5, 300)
)


def shifts_of(p):
    _, states = dressed_states(p)
    return {s.label: s.energy_shift for s in states}


def triplet_block_oracle(g, g_B, delta_B):
    """Brute-force eigenvalues of the (N_R, N_L) = (1, 1) block, built by hand.

    Order: |G,1,1>, |X_R,0,1>, |X_L,1,0>, |B,0,0>.
    """
    h = np.zeros((4, 4), dtype=complex)
    h[0, 1] = h[0, 2] = 1j * g
    h[1, 3] = h[2, 3] = 1j * g_B
    h = h + h.conj().T
    h[3, 3] = -delta_B
    return np.linalg.eigvalsh(h)


# -- cubic ------------------------------------------------------------------

def test_cubic_reference_values():
    # independent oracle: numpy companion-matrix roots of x^3 - x^2 - 4x + 2 (p = q = 2)
    frozen = (-27.204097539724962, 7.060251298067409, 35.143846241657556)
    oracle = np.sort(np.roots([1.0, -1.0, -4.0, 2.0]).real) * 15.0
    np.testing.assert_allclose(oracle, frozen, rtol=1e-12)
    np.testing.assert_allclose(cubic_shifts(15.0, 15.0, 15.0), frozen, rtol=1e-12)


def test_cubic_uncoupled():
    np.testing.assert_allclose(cubic_shifts(0.0, 0.0, 15.0), (0.0, 0.0, 15.0), atol=1e-12)


def test_cubic_rejects_nonpositive_binding():
    with pytest.raises(ValueError):
        cubic_shifts(1.0, 1.0, 0.0)


@given(couplings)
def test_cubic_vieta_and_ordering(c):
    g, g_B, delta_B = c
    a1, a2, a3 = cubic_shifts(g, g_B, delta_B)
    assert a1 + a2 + a3 == pytest.approx(delta_B, rel=1e-10, abs=1e-10)
    assert a1 < 0 < a2 < delta_B < a3
    assert a1 < -math.sqrt(2) * g < a2 < math.sqrt(2) * g < a3


@settings(max_examples=100)
@given(couplings)
def test_cubic_matches_brute_force_block(c):
    g, g_B, delta_B = c
    a = np.array(cubic_shifts(g, g_B, delta_B))
    ev = triplet_block_oracle(g, g_B, delta_B)
    # the singlet sits at exactly zero; drop it and compare -a with the rest
    ev = np.delete(ev, np.argmin(np.abs(ev)))
    scale = np.max(np.abs(a))
    np.testing.assert_allclose(np.sort(-a), ev, rtol=0, atol=1e-10 * scale)


# -- diagonalization --------------------------------------------------------

def test_thirteen_labeled_states(basis2):
    states = diagonalize_manifolds(build_h0(basis2, ModelParams(g=3, g_B=4, delta_B=5)), basis2)
    assert [s.label for s in states] == list(LABEL_ORDER)
    assert [s.manifold for s in states] == [0] + [1] * 4 + [2] * 8


def test_needs_two_photon_truncation():
    basis = build_basis(1)
    with pytest.raises(ValueError):
        diagonalize_manifolds(build_h0(basis, ModelParams(g=1)), basis)


def test_bare_states():
    with pytest.warns(UserWarning, match="degenerate"):
        s = shifts_of(ModelParams(delta_B=15.0))
    assert s.pop("T3") == pytest.approx(-15.0)
    assert all(abs(v) < 1e-14 for v in s.values())


@settings(max_examples=20, deadline=None)
@given(couplings)
def test_spectral_structure(c):
    g, g_B, delta_B = c
    s = shifts_of(ModelParams(g=g, g_B=g_B, delta_B=delta_B))
    for lab in ("R", "L"):
        assert s[f"{lab}+"] == pytest.approx(g, rel=1e-10)
        assert s[f"{lab}-"] == pytest.approx(-g, rel=1e-10)
        assert s[f"{lab}{lab}+"] == pytest.approx(math.sqrt(2) * g, rel=1e-10)
        assert s[f"{lab}{lab}-"] == pytest.approx(-math.sqrt(2) * g, rel=1e-10)
    assert abs(s["S"]) <= 1e-10
    a = cubic_shifts(g, g_B, delta_B)
    for j in (1, 2, 3):
        assert -s[f"T{j}"] == pytest.approx(a[j - 1], rel=1e-10, abs=1e-10 * max(map(abs, a)))


def test_singlet_zero_by_brute_force(rng):
    for _ in range(10):
        g, g_B, delta_B = rng.uniform(0.1, 30, 3)
        ev = triplet_block_oracle(g, g_B, delta_B)
        assert np.min(np.abs(ev)) <= 1e-10 * max(g, g_B, delta_B)
        assert abs(shifts_of(ModelParams(g=g, g_B=g_B, delta_B=delta_B))["S"]) <= 1e-10


def test_state_vectors_orthonormal_and_confined(basis2):
    p = ModelParams(g=7.0, g_B=11.0, delta_B=3.0)
    states = diagonalize_manifolds(build_h0(basis2, p), basis2)
    for m in (0, 1, 2):
        vecs = np.array([s.vector for s in states if s.manifold == m]).T
        np.testing.assert_allclose(vecs.conj().T @ vecs, np.eye(vecs.shape[1]), atol=1e-10)
        inside = [i for i in range(basis2.dim) if sum(basis2.excitations(i)) == m]
        outside = np.delete(vecs, inside, axis=0)
        assert np.max(np.abs(outside), initial=0.0) <= 1e-12


def test_phase_convention_is_reproducible(basis2):
    p = ModelParams(g=5.0, g_B=9.0, delta_B=20.0)
    s1 = diagonalize_manifolds(build_h0(basis2, p), basis2)
    s2 = diagonalize_manifolds(build_h0(basis2, p), basis2)
    for a, b in zip(s1, s2):
        np.testing.assert_array_equal(a.vector, b.vector)
        k = int(np.argmax(np.abs(a.vector) >= np.abs(a.vector).max() - 1e-9))
        assert a.vector[k].imag == 0 and a.vector[k].real > 0


def test_shifts_relative_to_eps0(basis2):
    p = ModelParams(eps0=400.0, g=2.0, g_B=3.0, delta_B=4.0)
    states = diagonalize_manifolds(build_h0(basis2, p), basis2, eps0=p.eps0)
    ref = shifts_of(p.replace(eps0=0.0))
    for s in states:
        assert s.energy_shift == pytest.approx(ref[s.label], abs=1e-9)


# -- transition amplitudes --------------------------------------------------

def brute_one_excitation(g, sign):
    """Hand-built eigenvector of the {|G,1,0>, |X_R,0,0>} block."""
    h = np.array([[0, 1j * g], [-1j * g, 0]])
    w, v = np.linalg.eigh(h)
    return v[:, 1 if sign > 0 else 0]


def test_known_amplitudes(basis2):
    p = ModelParams(g=4.0, g_B=6.0, delta_B=9.0)
    _, states = dressed_states(p)
    t = transition_table(states, basis2)
    r_plus = brute_one_excitation(4.0, +1)
    # <G,0,0| a_R |R+> = amplitude of |G,1,0> in |R+>
    assert abs(t.gamma("G0", "R+", "R")) == pytest.approx(abs(r_plus[0]), abs=1e-12)
    assert abs(t.gamma("G0", "R+", "R")) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    # a_L |S> = |X_R,0,0>/sqrt(2), overlap with |R+> on its |X_R,0,0> amplitude
    assert abs(t.gamma("R+", "S", "L")) == pytest.approx(abs(r_plus[1]) / math.sqrt(2), abs=1e-12)
    assert abs(t.gamma("R+", "S", "L")) == pytest.approx(0.5, abs=1e-12)
    # polarization selection
    assert t.gamma("G0", "R+", "L") == 0
    assert t.gamma("L+", "RR+", "R") == 0
    assert t.gamma("G0", "S", "R") == 0  # not adjacent


def test_amplitude_bound(basis2):
    _, states = dressed_states(ModelParams(g=13.0, g_B=2.0, delta_B=40.0))
    arr = transition_table(states, basis2).as_array()
    assert np.max(np.abs(arr)) <= math.sqrt(basis2.n_max)


@settings(max_examples=15, deadline=None)
@given(couplings, st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
def test_mirror_and_phase_invariance(c, phi, phi_B):
    g, g_B, delta_B = c
    basis = build_basis(2)
    p = ModelParams(g=g, g_B=g_B, delta_B=delta_B)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        _, s0 = dressed_states(p)
        _, s1 = dressed_states(p.replace(g_phase=phi, g_B_phase=phi_B))
    t0 = transition_table(s0, basis)
    t1 = transition_table(s1, basis)
    mirror = {"RR+": "LL+", "RR-": "LL-", "S": "S", "T1": "T1", "T2": "T2", "T3": "T3"}
    for sign in "+-":
        for m, mm in mirror.items():
            assert abs(t0.gamma(f"R{sign}", m, "R")) == pytest.approx(
                abs(t0.gamma(f"L{sign}", mm, "L")), abs=1e-10)
            assert abs(t0.gamma(f"L{sign}", m, "R")) == pytest.approx(
                abs(t0.gamma(f"R{sign}", mm, "L")), abs=1e-10)
    for a, b in zip(s0, s1):
        assert a.energy_shift == pytest.approx(b.energy_shift, abs=1e-10)
    np.testing.assert_allclose(np.abs(t0.as_array()), np.abs(t1.as_array()), atol=1e-10)


# -- g_minus ----------------------------------------------------------------

def test_g_minus_closed_form():
    assert g_minus(15.0, 0.0) == 0.0
    assert g_minus(0.0, 15.0) == pytest.approx(15.0)
    assert g_minus(15.0, 15.0) == pytest.approx((math.sqrt(225 + 3600) - 15) / 4)
    assert g_minus(15.0, 15.0) == pytest.approx(11.71, abs=0.005)


@pytest.mark.parametrize("delta_B", [7.0, 15.0, 150.0])
def test_g_minus_is_zero_of_lower_branch_t1_amplitude(delta_B):
    # the T1 amplitude into the one-excitation L state vanishes only on the
    # lower-energy member of the doublet: the zero requires a1 = -2g
    def amp(g):
        p = ModelParams(g=g, g_B=15.0, delta_B=delta_B)
        return gauge_fixed_amplitude(p, "L-", "T1", "R", (G, 0, 1), (B, 0, 0))

    gm = g_minus(delta_B, 15.0)
    root = scipy.optimize.brentq(amp, 0.5 * gm, 1.5 * gm, xtol=1e-12)
    assert root == pytest.approx(gm, abs=1e-8)
    a1 = cubic_shifts(gm, 15.0, delta_B)[0]
    assert a1 == pytest.approx(-2 * gm, rel=1e-10)


def test_upper_branch_t1_amplitude_never_vanishes(basis2):
    # <L+| a_R |T1> = 0 would need a1 = +2g, but a1 < 0
    for g in np.linspace(0.5, 40, 60):
        _, states = dressed_states(ModelParams(g=g, g_B=15.0, delta_B=15.0))
        assert abs(transition_table(states, basis2).gamma("L+", "T1", "R")) > 0.3
