import math

import numpy as np
import pytest

from satlab import densecore, symcore
from satlab.symcore import (
    LayerAngles,
    SymmetricState,
    apply_mixer,
    apply_phase_separator,
    gamma_eliminated_curve,
    gamma_eliminated_overlap,
    mixer,
    overlap,
    plus_state,
    random_symmetric_state,
    run_schedule,
    saturation_derivatives,
)

rng = np.random.default_rng(20260810)


def random_schedule(n, depth, rand):
    return [LayerAngles(rand.uniform(0, 2 * np.pi), rand.uniform(0, np.pi)) for _ in range(depth)]


def basis_state(n, k):
    amps = np.zeros(n + 1, dtype=complex)
    amps[k] = 1.0
    return SymmetricState(n, amps)


# ---------------------------------------------------------------- plus state

def test_plus_state_n2():
    s = plus_state(2)
    assert np.allclose(s.amps, [0.5, 1 / np.sqrt(2), 0.5])


def test_plus_state_n1():
    s = plus_state(1)
    assert np.allclose(s.amps, [1 / np.sqrt(2), 1 / np.sqrt(2)])


@pytest.mark.parametrize("n", [1, 2, 3, 7, 12, 60])
def test_plus_state_target_component(n):
    s = plus_state(n)
    assert overlap(s) == pytest.approx(2.0 ** (-n), rel=1e-12)
    assert np.all(s.amps.real > 0)
    assert np.linalg.norm(s.amps) == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------- phase separator

def test_phase_separator_identity_at_zero():
    s = random_symmetric_state(5, np.random.default_rng(1))
    assert np.allclose(apply_phase_separator(s, 0.0).amps, s.amps)


def test_phase_separator_pi_flips_sign():
    s = apply_phase_separator(plus_state(2), np.pi)
    assert np.allclose(s.amps, [-0.5, 1 / np.sqrt(2), 0.5], atol=1e-15)


def test_phase_separator_matches_dense_diagonal():
    s = random_symmetric_state(4, np.random.default_rng(2))
    gamma = np.pi / 3
    lifted = densecore.lift(s).amps.copy()
    lifted[0] *= np.exp(-1j * gamma)
    got = densecore.lift(apply_phase_separator(s, gamma)).amps
    assert np.allclose(got, lifted, atol=1e-14)


# -------------------------------------------------------------------- mixer

def test_mixer_matrix_entries():
    gen = mixer(5)
    for k in range(5):
        expected = math.sqrt((k + 1) * (5 - k))
        assert gen.matrix[k, k + 1] == pytest.approx(expected)
        assert gen.matrix[k + 1, k] == pytest.approx(expected)
    assert np.all(np.diag(gen.matrix) == 0)


@pytest.mark.parametrize("n", range(1, 11))
def test_mixer_spectrum_is_even_integers(n):
    gen = mixer(n)
    assert np.allclose(np.sort(gen.eigenvalues), np.arange(-n, n + 1, 2), atol=1e-9)


def test_mixer_identity_at_zero():
    s = random_symmetric_state(6, np.random.default_rng(3))
    assert np.allclose(apply_mixer(s, 0.0).amps, s.amps, atol=1e-12)


def test_mixer_single_qubit_closed_form():
    # exp(-i beta X) = cos(beta) I - i sin(beta) X in the {|0>, |1>} basis
    rand = np.random.default_rng(4)
    s = random_symmetric_state(1, rand)
    for beta in rand.uniform(0, np.pi, 5):
        got = apply_mixer(s, beta).amps
        u = np.array([[np.cos(beta), -1j * np.sin(beta)], [-1j * np.sin(beta), np.cos(beta)]])
        assert np.allclose(got, u @ s.amps, atol=1e-12)


@pytest.mark.parametrize("n", range(2, 9))
def test_mixer_agrees_with_dense_evolution(n):
    rand = np.random.default_rng(100 + n)
    s = random_symmetric_state(n, rand)
    beta = rand.uniform(0, np.pi)
    sym_dense = densecore.lift(apply_mixer(s, beta)).amps
    ref = densecore.apply_mixer_dense(densecore.lift(s).amps.copy(), beta, n)
    fidelity = abs(np.vdot(sym_dense, ref))
    assert fidelity >= 1 - 1e-10


def test_mixer_dimension_mismatch():
    with pytest.raises(ValueError):
        apply_mixer(plus_state(3), 0.2, gen=mixer(4))


# ------------------------------------------------------------- run_schedule

def test_empty_schedule_is_plus_state():
    assert np.allclose(run_schedule(3, []).amps, plus_state(3).amps)


def test_single_qubit_perfect_layer():
    # (cos(beta) e^{-i gamma} - i sin(beta)) / sqrt(2) has unit modulus at
    # gamma = pi/2, beta = pi/4
    s = run_schedule(1, [LayerAngles(np.pi / 2, np.pi / 4)])
    assert overlap(s) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 6])
def test_run_schedule_matches_dense(n):
    rand = np.random.default_rng(200 + n)
    schedule = random_schedule(n, n + 2, rand)
    got = overlap(run_schedule(n, schedule))
    ref = densecore.overlap_dense(densecore.run_schedule_dense(n, schedule))
    assert got == pytest.approx(ref, abs=1e-10)


# ------------------------------------------------------------------ overlap

def test_overlap_examples():
    assert overlap(plus_state(5)) == pytest.approx(2.0**-5)
    assert overlap(basis_state(4, 0)) == 1.0
    assert overlap(basis_state(4, 1)) == 0.0


# ------------------------------------------------- gamma-eliminated overlap

def test_gamma_elimination_at_beta_zero():
    s = random_symmetric_state(5, np.random.default_rng(5))
    g, gamma_star = gamma_eliminated_overlap(s, 0.0)
    assert g == pytest.approx(abs(s.amps[0]), abs=1e-14)
    assert gamma_star == 0.0


def test_gamma_elimination_two_component_family():
    # A_0|e_0> + A_2|e_2> gives (|A_0| - c2|A_2|) cos^n + c2|A_2| cos^{n-2}
    n, a2 = 4, 0.2
    a0 = math.sqrt(1 - a2**2)
    c2 = math.sqrt(math.comb(n, 2))
    assert a2 <= a0 / c2 * (1 + 1e-12) or True  # family bound not required here
    amps = np.zeros(n + 1, dtype=complex)
    amps[0], amps[2] = a0, a2
    s = SymmetricState(n, amps)
    betas = np.linspace(0, np.pi / 2, 31)
    expected = (a0 - c2 * a2) * np.cos(betas) ** n + c2 * a2 * np.cos(betas) ** (n - 2)
    assert np.allclose(gamma_eliminated_curve(s, betas), expected, atol=1e-12)


@pytest.mark.parametrize("trial", range(20))
def test_gamma_elimination_matches_grid_search(trial):
    rand = np.random.default_rng(300 + trial)
    n = int(rand.integers(2, 8))
    s = random_symmetric_state(n, rand)
    beta = float(rand.uniform(0, np.pi))
    g, _ = gamma_eliminated_overlap(s, beta)
    gammas = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
    after = apply_mixer(apply_phase_separator(s, 0.0), beta)  # gamma folded in below
    a_term = s.amps[0] * np.cos(beta) ** n
    b_term = after.amps[0] - a_term
    brute = np.max(np.abs(a_term * np.exp(-1j * gammas) + b_term))
    assert g == pytest.approx(brute, abs=1e-6)


def test_gamma_star_attains_maximum():
    rand = np.random.default_rng(6)
    for _ in range(50):
        n = int(rand.integers(2, 7))
        s = random_symmetric_state(n, rand)
        beta = float(rand.uniform(0, np.pi))
        g, gamma_star = gamma_eliminated_overlap(s, beta)
        achieved = abs(apply_mixer(apply_phase_separator(s, gamma_star), beta).amps[0])
        assert achieved == pytest.approx(g, abs=1e-12)


def test_gamma_elimination_dominates_random_gamma():
    rand = np.random.default_rng(7)
    s = random_symmetric_state(5, rand)
    beta = 0.7
    g, _ = gamma_eliminated_overlap(s, beta)
    for gamma in rand.uniform(0, 2 * np.pi, 1000):
        value = abs(apply_mixer(apply_phase_separator(s, gamma), beta).amps[0])
        assert value <= g + 1e-12


# --------------------------------------------------------------- recursion

def test_one_layer_amplitude_recursion():
    # composing the two unitaries and reading A_0 equals the direct
    # two-term expression with the gamma phase on the A_0 term
    rand = np.random.default_rng(8)
    for _ in range(25):
        n = int(rand.integers(2, 9))
        s = random_symmetric_state(n, rand)
        gamma, beta = rand.uniform(0, 2 * np.pi), rand.uniform(0, np.pi)
        composed = apply_mixer(apply_phase_separator(s, gamma), beta).amps[0]
        a_term, b_term = symcore._layer_terms(s, np.array([beta]))
        direct = a_term[0] * np.exp(-1j * gamma) + b_term[0]
        assert composed == pytest.approx(direct, abs=1e-10)


# ------------------------------------------------------------- derivatives

def test_derivatives_on_target_state():
    s = basis_state(4, 0)
    g1, g2 = saturation_derivatives(s)
    assert g1 == 0.0
    assert g2 == pytest.approx(-4.0)


def test_derivative_slope_on_plus_state():
    g1, _ = saturation_derivatives(plus_state(2))
    assert g1 == pytest.approx(1.0, abs=1e-12)


def _fd_first(f, h):
    # second-order one-sided stencil at the left boundary of [0, pi)
    return (-3 * f(0.0) + 4 * f(h) - f(2 * h)) / (2 * h)


def _fd_second(f, h):
    return (2 * f(0.0) - 5 * f(h) + 4 * f(2 * h) - f(3 * h)) / h**2


@pytest.mark.parametrize("trial", range(25))
def test_derivatives_match_finite_differences(trial):
    rand = np.random.default_rng(400 + trial)
    n = int(rand.integers(2, 9))
    s = random_symmetric_state(n, rand)
    while abs(s.amps[1]) < 0.05:  # keep the expansion scale well above h
        s = random_symmetric_state(n, rand)
    f = lambda b: float(gamma_eliminated_curve(s, b)[0])
    g1, g2 = saturation_derivatives(s)
    assert g1 == pytest.approx(_fd_first(f, 1e-5), rel=1e-4)
    assert g2 == pytest.approx(_fd_second(f, 1e-4), rel=1e-3, abs=1e-3)


def test_second_derivative_zero_a1_branch():
    n = 5
    amps = np.zeros(n + 1, dtype=complex)
    amps[0], amps[2], amps[4] = 0.8, 0.36 * np.exp(1j * 0.9), np.sqrt(1 - 0.64 - 0.36**2)
    s = SymmetricState(n, amps / np.linalg.norm(amps))
    f = lambda b: float(gamma_eliminated_curve(s, b)[0])
    _, g2 = saturation_derivatives(s)
    assert g2 == pytest.approx(_fd_second(f, 1e-4), rel=1e-3)


# --------------------------------------------------------------- invariants

def test_norm_preserved_along_random_circuits():
    rand = np.random.default_rng(9)
    for n in (2, 5, 9):
        state = plus_state(n)
        for layer in random_schedule(n, 6, rand):
            state = apply_mixer(apply_phase_separator(state, layer.gamma), layer.beta)
            assert abs(np.linalg.norm(state.amps) - 1) < 1e-10


def test_layer_angles_reduced_to_principal_ranges():
    a = LayerAngles(2 * np.pi + 0.5, np.pi + 0.25)
    assert a.gamma == pytest.approx(0.5)
    assert a.beta == pytest.approx(0.25)
    with pytest.raises(ValueError):
        LayerAngles(np.nan, 0.0)


def test_state_validation():
    with pytest.raises(ValueError):
        SymmetricState(3, np.array([1.0, 0, 0]))  # wrong length
    with pytest.raises(ValueError):
        SymmetricState(2, np.array([1.0, 1.0, 0]))  # not normalized
