"""Exact QAOA simulation restricted to the permutation-symmetric subspace.

The target state is fixed to the all-zeros computational basis state.  Because
the mixer Hamiltonian (a sum of single-qubit X operators) commutes with every
qubit permutation and both the initial plus state and the target are symmetric,
the whole circuit lives in the (n+1)-dimensional span of the Dicke states
|e_0>, ..., |e_n>.  States here are the n+1 complex amplitudes A_k = <e_k|psi>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

NORM_TOL = 1e-8


def binomial_sqrt(n: int) -> np.ndarray:
    """sqrt(C(n, k)) for k = 0..n.

    Exact integer binomials up to n = 50, log-gamma beyond that so large n
    cannot overflow.
    """
    if n <= 50:
        return np.sqrt(np.array([math.comb(n, k) for k in range(n + 1)], dtype=float))
    k = np.arange(n + 1, dtype=float)
    return np.exp(0.5 * (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)))


@dataclass(frozen=True, eq=False)
class SymmetricState:
    """Normalized state in the symmetric subspace: amplitudes A_0..A_n."""

    n: int
    amps: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"qubit count must be >= 1, got {self.n}")
        amps = np.asarray(self.amps, dtype=complex).copy()
        if amps.shape != (self.n + 1,):
            raise ValueError(f"expected {self.n + 1} amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |amps| = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)


@dataclass(frozen=True)
class LayerAngles:
    """One layer's phase-separator angle gamma and mixer angle beta.

    Stored reduced to the principal ranges gamma in [0, 2*pi), beta in [0, pi).
    Reduction of beta by pi only changes the state by a global sign.
    """

    gamma: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and math.isfinite(self.beta)):
            raise ValueError(f"angles must be finite, got ({self.gamma}, {self.beta})")
        object.__setattr__(self, "gamma", float(self.gamma) % (2.0 * math.pi))
        object.__setattr__(self, "beta", float(self.beta) % math.pi)


def _as_angles(layer) -> LayerAngles:
    if isinstance(layer, LayerAngles):
        return layer
    gamma, beta = layer
    return LayerAngles(gamma, beta)


class MixerGenerator:
    """Mixer Hamiltonian, a sum of single-qubit X operators, in the Dicke basis.

    The matrix is real symmetric tridiagonal with zero diagonal and
    off-diagonal entries sqrt((k+1)(n-k)): flipping one of the n-k zeros of a
    weight-k Dicke state reaches each weight-(k+1) bitstring k+1 ways, and the
    normalization ratio supplies the square root.  Its spectrum is the integers
    -n, -n+2, ..., n.  The eigendecomposition is computed once and cached, so
    the mixer exponential is exact for every angle at O(n^2) per application.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"qubit count must be >= 1, got {n}")
        self.n = n
        k = np.arange(n)
        off = np.sqrt((k + 1.0) * (n - k))
        matrix = np.zeros((n + 1, n + 1))
        matrix[k, k + 1] = off
        matrix[k + 1, k] = off
        matrix.setflags(write=False)
        self.matrix = matrix
        eigenvalues, eigenvectors = eigh_tridiagonal(np.zeros(n + 1), off)
        eigenvalues.setflags(write=False)
        eigenvectors.setflags(write=False)
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors

    def evolve(self, amps: np.ndarray, beta: float) -> np.ndarray:
        """Apply exp(-i*beta*H) to a Dicke amplitude vector."""
        v = self.eigenvectors
        return v @ (np.exp(-1j * beta * self.eigenvalues) * (v.T @ amps))


@lru_cache(maxsize=None)
def mixer(n: int) -> MixerGenerator:
    """Cached per-n mixer generator (read-only after construction)."""
    return MixerGenerator(n)


def plus_state(n: int) -> SymmetricState:
    """|+>^n in the Dicke basis: A_k = sqrt(C(n,k) / 2^n)."""
    amps = binomial_sqrt(n) * 2.0 ** (-n / 2.0)
    return SymmetricState(n, amps.astype(complex))


def apply_phase_separator(state: SymmetricState, gamma: float) -> SymmetricState:
    """Phase the target component: A_0 -> exp(-i*gamma) * A_0."""
    amps = state.amps.copy()
    amps[0] *= np.exp(-1j * gamma)
    return SymmetricState(state.n, amps)


def apply_mixer(state: SymmetricState, beta: float, gen: MixerGenerator | None = None) -> SymmetricState:
    """Apply the mixer unitary exp(-i*beta*H) via the cached eigendecomposition."""
    if gen is None:
        gen = mixer(state.n)
    if gen.n != state.n:
        raise ValueError(f"mixer built for n={gen.n}, state has n={state.n}")
    return SymmetricState(state.n, gen.evolve(state.amps, beta))


def run_schedule(n: int, schedule) -> SymmetricState:
    """Run the full circuit: alternate phase separator and mixer from |+>^n."""
    gen = mixer(n)
    amps = plus_state(n).amps.copy()
    for layer in schedule:
        angles = _as_angles(layer)
        amps[0] *= np.exp(-1j * angles.gamma)
        amps = gen.evolve(amps, angles.beta)
    return SymmetricState(n, amps)


def overlap(state: SymmetricState) -> float:
    """Squared overlap with the target: |A_0|^2."""
    return float(abs(state.amps[0]) ** 2)


def _layer_terms(state: SymmetricState, betas: np.ndarray):
    """Target amplitude of one extra layer, split by gamma dependence.

    <0|mixer(beta) phase(gamma)|psi> = A * exp(-i*gamma) + B(beta) with
    A = A_0 cos^n(beta) and
    B = sum_{k>=1} cos^{n-k}(beta) (-i sin(beta))^k A_k sqrt(C(n,k)).
    The polynomial form stays finite at beta = pi/2 where the tangent form of
    the same expression has a removable singularity.
    """
    n = state.n
    cb = np.cos(betas)
    sb = np.sin(betas)
    coeff = state.amps[1:] * binomial_sqrt(n)[1:]
    ks = np.arange(1, n + 1)[:, None]
    b_sum = np.sum(cb[None, :] ** (n - ks) * (-1j * sb[None, :]) ** ks * coeff[:, None], axis=0)
    return state.amps[0] * cb**n, b_sum


def gamma_eliminated_curve(state: SymmetricState, betas) -> np.ndarray:
    """max over gamma of |<0|mixer(beta) phase(gamma)|psi>| for each beta.

    For complex A and B, max_gamma |A exp(-i*gamma) + B| = |A| + |B|.
    """
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    a_term, b_term = _layer_terms(state, betas)
    return np.abs(a_term) + np.abs(b_term)


def gamma_eliminated_overlap(state: SymmetricState, beta: float) -> tuple[float, float]:
    """Best achievable target amplitude of one extra layer at fixed beta.

    Returns (g, gamma_star): g is the maximum over gamma of the target
    amplitude modulus, and gamma_star attains it by aligning the phases of the
    two terms.  When either term vanishes every gamma ties and 0 is returned.
    """
    a_term, b_term = _layer_terms(state, np.array([float(beta)]))
    a, b = complex(a_term[0]), complex(b_term[0])
    g = abs(a) + abs(b)
    if abs(a) == 0.0 or abs(b) == 0.0:
        return g, 0.0
    gamma_star = (np.angle(a) - np.angle(b)) % (2.0 * math.pi)
    return g, float(gamma_star)


def saturation_derivatives(state: SymmetricState) -> tuple[float, float]:
    """One-sided derivatives of the gamma-eliminated curve g at beta = 0.

    Writing c2 = sqrt(C(n,2)), the curve expands for small beta > 0 as

        g(beta) = |A_0| (1 - n beta^2 / 2) + |B(beta)|,
        B(beta) = -i sqrt(n) A_1 beta - c2 A_2 beta^2 + O(beta^3),

    which gives g'(0+) = sqrt(n) |A_1| and

        g''(0+) = -n |A_0| + 2 c2 * Im(conj(A_1) A_2) / |A_1|   if A_1 != 0,
        g''(0+) = -n |A_0| + 2 c2 |A_2|                         if A_1 == 0.

    The modulus |B| makes the curvature discontinuous in the state at A_1 = 0;
    both branches are the exact limits of finite differences taken from inside
    the domain.
    """
    n = state.n
    a0, a1, a2 = abs(state.amps[0]), abs(state.amps[1]), state.amps[2] if n >= 2 else 0.0
    c2 = binomial_sqrt(n)[2] if n >= 2 else 0.0
    g1 = math.sqrt(n) * a1
    if a1 > 0.0:
        cross = float(np.imag(np.conj(state.amps[1]) * a2))
        g2 = -n * a0 + 2.0 * c2 * cross / a1
    else:
        g2 = -n * a0 + 2.0 * c2 * abs(a2)
    return g1, g2


def random_symmetric_state(n: int, rng: np.random.Generator) -> SymmetricState:
    """Haar-like random state: iid complex Gaussian amplitudes, normalized."""
    amps = rng.normal(size=n + 1) + 1j * rng.normal(size=n + 1)
    return SymmetricState(n, amps / np.linalg.norm(amps))
