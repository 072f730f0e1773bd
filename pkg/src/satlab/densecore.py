"""Full 2^n statevector simulator.

Serves two roles: an independent correctness oracle for the Dicke-basis
simulator, and the only representation that can host symmetry-breaking
coherent noise.  Basis index convention is little-endian: qubit 0 is the
least-significant bit of the basis index.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .symcore import SymmetricState, _as_angles, binomial_sqrt

MAX_DENSE_QUBITS = 24


class ResourceCapError(RuntimeError):
    """Raised when a requested dense simulation exceeds the memory budget."""


def _check_cap(n: int):
    if n > MAX_DENSE_QUBITS:
        raise ResourceCapError(
            f"dense simulation capped at n <= {MAX_DENSE_QUBITS}, got n = {n}"
        )


@dataclass(frozen=True, eq=False)
class DenseState:
    """Normalized 2^n-amplitude state vector."""

    n: int
    amps: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"qubit count must be >= 1, got {self.n}")
        _check_cap(self.n)
        amps = np.asarray(self.amps, dtype=complex).copy()
        if amps.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes, got shape {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"state not normalized: |amps| = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)


@dataclass(frozen=True)
class NoiseConfig:
    """Coherent noise channel settings.

    With probability p_noise, independently per qubit after each noise slot,
    the qubit receives S(phi) = diag(1, exp(i*phi)) with phi drawn fresh from
    N(0, phase_stddev^2).  granularity chooses what counts as one slot:
    "layer" places a slot after each of the two layer unitaries, while
    "single_qubit" places one after the phase separator and after every
    individual X rotation inside the mixer.  kind="bitflip" swaps S(phi) for a
    deterministic X flip and exists only as a contrast experiment.
    """

    p_noise: float
    phase_stddev: float = 1.0
    seed: int = 0
    granularity: str = "layer"
    kind: str = "phase"

    def __post_init__(self):
        if not 0.0 <= self.p_noise <= 1.0:
            raise ValueError(f"p_noise must be in [0, 1], got {self.p_noise}")
        if self.phase_stddev < 0.0:
            raise ValueError(f"phase_stddev must be >= 0, got {self.phase_stddev}")
        if self.granularity not in ("layer", "single_qubit"):
            raise ValueError(f"unknown granularity {self.granularity!r}")
        if self.kind not in ("phase", "bitflip"):
            raise ValueError(f"unknown noise kind {self.kind!r}")


@lru_cache(maxsize=None)
def hamming_weights(n: int) -> np.ndarray:
    """Hamming weight of every basis index 0..2^n-1."""
    idx = np.arange(1 << n, dtype=np.int64)
    w = np.zeros(1 << n, dtype=np.int64)
    for q in range(n):
        w += (idx >> q) & 1
    w.setflags(write=False)
    return w


def plus_state_dense(n: int) -> np.ndarray:
    _check_cap(n)
    return np.full(1 << n, 2.0 ** (-n / 2.0), dtype=complex)


def lift(state: SymmetricState) -> DenseState:
    """Embed a symmetric state: amp(b) = A_{weight(b)} / sqrt(C(n, weight(b)))."""
    n = state.n
    _check_cap(n)
    w = hamming_weights(n)
    amps = (state.amps / binomial_sqrt(n))[w]
    return DenseState(n, amps)


def project_symmetric(state: DenseState) -> tuple[SymmetricState, float]:
    """Project onto the symmetric subspace.

    Returns the renormalized symmetric component and the norm of the part
    outside the subspace.  A fully asymmetric input has no symmetric component
    to normalize and is rejected.
    """
    n = state.n
    w = hamming_weights(n)
    sums = np.bincount(w, weights=state.amps.real, minlength=n + 1) + 1j * np.bincount(
        w, weights=state.amps.imag, minlength=n + 1
    )
    comps = sums / binomial_sqrt(n)
    sym_norm = np.linalg.norm(comps)
    if sym_norm < 1e-12:
        raise ValueError("input has no symmetric component (residual norm 1)")
    # norm of the out-of-subspace component, computed directly so that exact
    # lifts report ~1e-16 instead of the sqrt(1 - s^2) cancellation floor
    sym_dense = (comps / binomial_sqrt(n))[w]
    residual = float(np.linalg.norm(state.amps - sym_dense))
    return SymmetricState(n, comps / sym_norm), residual


def overlap_dense(state: DenseState) -> float:
    """Squared overlap with the all-zeros target: |amp(0)|^2."""
    return float(abs(state.amps[0]) ** 2)


def apply_phase_separator_dense(amps: np.ndarray, gamma: float) -> np.ndarray:
    out = amps.copy()
    out[0] *= np.exp(-1j * gamma)
    return out


def apply_x_rotation(amps: np.ndarray, beta: float, qubit: int, n: int) -> np.ndarray:
    """Apply exp(-i*beta*X) = cos(beta) I - i sin(beta) X on one qubit."""
    view = amps.reshape(1 << (n - 1 - qubit), 2, 1 << qubit)
    lo, hi = view[:, 0, :], view[:, 1, :]
    c, s = np.cos(beta), -1j * np.sin(beta)
    out = np.empty_like(view)
    out[:, 0, :] = c * lo + s * hi
    out[:, 1, :] = s * lo + c * hi
    return out.reshape(amps.shape)


def apply_mixer_dense(amps: np.ndarray, beta: float, n: int) -> np.ndarray:
    """Apply exp(-i*beta*H) as the product of n single-qubit X rotations."""
    for q in range(n):
        amps = apply_x_rotation(amps, beta, q, n)
    return amps


def sample_noise_slot(n: int, noise: NoiseConfig, rng: np.random.Generator):
    """Draw one slot's noise events: (qubit indices, phases or None).

    Per qubit in ascending order a uniform decides whether the qubit is hit;
    one normal phase is then drawn per hit qubit.  The fixed draw order makes
    the stream reproducible.
    """
    hits = np.flatnonzero(rng.random(n) < noise.p_noise)
    if noise.kind == "bitflip":
        return hits, None
    return hits, rng.normal(0.0, noise.phase_stddev, size=hits.size)


def apply_noise_events(amps: np.ndarray, n: int, events) -> np.ndarray:
    """Apply one slot's events: S(phi) = diag(1, e^{i phi}) or an X flip."""
    qubits, phis = events
    if len(qubits) == 0:
        return amps
    amps = amps.copy()
    if phis is None:
        for q in qubits:
            view = amps.reshape(1 << (n - 1 - q), 2, 1 << q)
            view[:, [0, 1], :] = view[:, [1, 0], :]
    else:
        idx = np.arange(amps.size)
        for q, phi in zip(qubits, phis):
            amps *= np.where((idx >> q) & 1, np.exp(1j * phi), 1.0)
    return amps


def noise_slots_per_layer(n: int, noise: NoiseConfig | None) -> int:
    if noise is None:
        return 0
    return 2 if noise.granularity == "layer" else 1 + n


def sample_layer_noise(n: int, noise: NoiseConfig, rng: np.random.Generator) -> list:
    """Sample all of one layer's noise slots, in application order."""
    return [sample_noise_slot(n, noise, rng) for _ in range(noise_slots_per_layer(n, noise))]


def apply_layer_dense(
    amps: np.ndarray, n: int, gamma: float, beta: float, slots=None
) -> np.ndarray:
    """One circuit layer with optional pre-sampled noise events.

    Layer granularity supplies 2 slots (after the phase separator and after
    the whole mixer); single-qubit granularity supplies 1 + n slots, one after
    the phase separator and one after each X rotation.
    """
    amps = apply_phase_separator_dense(amps, gamma)
    if slots is None:
        return apply_mixer_dense(amps, beta, n)
    if len(slots) == 2:
        amps = apply_noise_events(amps, n, slots[0])
        amps = apply_mixer_dense(amps, beta, n)
        return apply_noise_events(amps, n, slots[1])
    amps = apply_noise_events(amps, n, slots[0])
    for q in range(n):
        amps = apply_x_rotation(amps, beta, q, n)
        amps = apply_noise_events(amps, n, slots[1 + q])
    return amps


def run_schedule_dense(
    n: int,
    schedule,
    noise: NoiseConfig | None = None,
    rng: np.random.Generator | None = None,
) -> DenseState:
    """Run the full circuit from |+>^n with optional coherent noise.

    Noise events are drawn from rng in a fixed order, so identical
    (schedule, noise, rng state) give bit-identical output.
    """
    _check_cap(n)
    if noise is not None and rng is None:
        rng = np.random.default_rng(noise.seed)
    amps = plus_state_dense(n)
    for layer in schedule:
        angles = _as_angles(layer)
        slots = None if noise is None else sample_layer_noise(n, noise, rng)
        amps = apply_layer_dense(amps, n, angles.gamma, angles.beta, slots)
    return DenseState(n, amps)
