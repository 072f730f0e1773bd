"""Trainers maximizing the target overlap: greedy layerwise, global, cutoff, noisy.

The layerwise family exploits the closed-form gamma elimination, so each
layer's inner optimization is one-dimensional over the mixer angle.  The noisy
trainer cannot (noise breaks permutation symmetry) and searches both angles.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from . import densecore, symcore
from .densecore import NoiseConfig
from .symcore import LayerAngles, SymmetricState

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizerSettings:
    beta_grid_points: int = 2048
    refine_tolerance: float = 1e-10
    global_restarts: int = 32
    global_max_iterations: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.beta_grid_points < 2:
            raise ValueError("beta_grid_points must be >= 2")
        if self.refine_tolerance <= 0:
            raise ValueError("refine_tolerance must be positive")
        if self.global_restarts < 1 or self.global_max_iterations < 1:
            raise ValueError("global optimizer settings must be positive")


@dataclass(frozen=True)
class LayerRecord:
    depth: int
    angles: LayerAngles
    overlap: float
    amplitude: float
    wall_time: float
    evaluations: int


@dataclass
class TrainingTrace:
    n: int
    records: list[LayerRecord] = field(default_factory=list)
    status: str = "depth_limit"

    @property
    def depth(self) -> int:
        return len(self.records)

    def overlaps(self) -> np.ndarray:
        return np.array([r.overlap for r in self.records])

    def betas(self) -> np.ndarray:
        return np.array([r.angles.beta for r in self.records])

    def gammas(self) -> np.ndarray:
        return np.array([r.angles.gamma for r in self.records])

    def schedule(self) -> list[LayerAngles]:
        return [r.angles for r in self.records]

    def improvements(self) -> np.ndarray:
        """Overlap gain of each layer, the first measured from |+>^n."""
        ovs = self.overlaps()
        return np.diff(np.concatenate([[2.0 ** (-self.n)], ovs]))


def _finish_status(trace: TrainingTrace) -> str:
    if trace.depth and trace.records[-1].overlap >= 1.0 - 1e-9:
        return "overlap_one"
    if trace.depth >= 2 and trace.improvements()[-1] <= 1e-8:
        return "saturated"
    return "depth_limit"


def golden_section_max(f, lo: float, hi: float, tol: float) -> tuple[float, float, int]:
    """Golden-section maximization on [lo, hi]; returns (x, f(x), evaluations)."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
        evals += 1
    x = (a + b) / 2.0
    return x, f(x), evals + 1


def _best_beta(state: SymmetricState, settings: OptimizerSettings) -> tuple[float, float, int]:
    """Maximize the gamma-eliminated amplitude over beta in [0, pi).

    Dense grid, golden-section refinement in the winning cell, then a mirror
    candidate near pi - beta (exactly degenerate for real amplitude vectors)
    and the beta = 0 snap.  Ties resolve toward the smaller beta.
    """
    m = settings.beta_grid_points
    grid = np.linspace(0.0, math.pi, m, endpoint=False)
    vals = symcore.gamma_eliminated_curve(state, grid)
    i = int(np.argmax(vals))
    cell = math.pi / m

    def f(b: float) -> float:
        return float(symcore.gamma_eliminated_curve(state, b)[0])

    evals = m
    best_b, best_g, e = golden_section_max(
        f, max(grid[i] - cell, 0.0), min(grid[i] + cell, math.pi), settings.refine_tolerance
    )
    evals += e
    if i > 0:
        center = math.pi - grid[i]
        mb, mg, e = golden_section_max(
            f, max(center - cell, 0.0), min(center + cell, math.pi), settings.refine_tolerance
        )
        evals += e
        if mg >= best_g - 1e-12 and mb < best_b:
            best_b, best_g = mb, mg
    g0 = f(0.0)
    evals += 1
    if g0 >= best_g:
        return 0.0, g0, evals
    return best_b, best_g, evals


def _layerwise_step(state: SymmetricState, settings: OptimizerSettings):
    """One greedy layer: best beta, aligned gamma, successor state."""
    beta, g, evals = _best_beta(state, settings)
    _, gamma = symcore.gamma_eliminated_overlap(state, beta)
    nxt = symcore.apply_mixer(symcore.apply_phase_separator(state, gamma), beta)
    return LayerAngles(gamma, beta), g, nxt, evals + 1


def train_layerwise(n: int, max_depth: int, settings: OptimizerSettings | None = None) -> TrainingTrace:
    """Greedy layerwise training: optimize one layer at a time, freeze the rest."""
    if n < 1 or max_depth < 1:
        raise ValueError("n and max_depth must be >= 1")
    settings = settings or OptimizerSettings()
    state = symcore.plus_state(n)
    trace = TrainingTrace(n)
    for depth in range(1, max_depth + 1):
        t0 = time.perf_counter()
        angles, g, state, evals = _layerwise_step(state, settings)
        trace.records.append(
            LayerRecord(depth, angles, symcore.overlap(state), g, time.perf_counter() - t0, evals)
        )
    trace.status = _finish_status(trace)
    return trace


def train_cutoff(
    n: int,
    max_depth: int,
    fraction: float,
    settings: OptimizerSettings | None = None,
    rng: np.random.Generator | None = None,
) -> TrainingTrace:
    """Layerwise training limited to a fraction of each layer's maximal gain.

    Per layer the target overlap is O_prev + fraction * (O_max - O_prev);
    angles achieving it are found by root bisection on either side of the
    maximizing beta, one side chosen uniformly at random.  fraction = 1 takes
    the same code path as train_layerwise and never draws from rng.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    settings = settings or OptimizerSettings()
    if rng is None:
        rng = np.random.default_rng(settings.seed)
    state = symcore.plus_state(n)
    trace = TrainingTrace(n)
    for depth in range(1, max_depth + 1):
        t0 = time.perf_counter()
        if fraction >= 1.0:
            angles, g, state, evals = _layerwise_step(state, settings)
        else:
            beta_star, g_star, evals = _best_beta(state, settings)
            o_prev = symcore.overlap(state)
            o_max = g_star**2
            if beta_star == 0.0 or o_max - o_prev <= 1e-14:
                beta = beta_star
            else:
                o_t = o_prev + fraction * (o_max - o_prev)

                def shortfall(b: float) -> float:
                    return float(symcore.gamma_eliminated_curve(state, b)[0]) ** 2 - o_t

                roots = []
                if shortfall(0.0) <= 0.0:
                    roots.append(brentq(shortfall, 0.0, beta_star, xtol=1e-13))
                step = (math.pi - beta_star) / 512.0
                prev = beta_star
                for j in range(1, 513):
                    x = beta_star + j * step
                    if shortfall(x) <= 0.0:
                        roots.append(brentq(shortfall, prev, x, xtol=1e-13))
                        break
                    prev = x
                evals += 1050
                beta = float(roots[rng.integers(len(roots))]) if roots else beta_star
            g, gamma = symcore.gamma_eliminated_overlap(state, beta)
            angles = LayerAngles(gamma, beta)
            state = symcore.apply_mixer(symcore.apply_phase_separator(state, gamma), beta)
            evals += 1
        trace.records.append(
            LayerRecord(depth, angles, symcore.overlap(state), g, time.perf_counter() - t0, evals)
        )
    trace.status = _finish_status(trace)
    return trace


def _schedule_to_params(schedule) -> np.ndarray:
    out = []
    for layer in schedule:
        angles = symcore._as_angles(layer)
        out.extend([angles.gamma, angles.beta])
    return np.array(out)


def train_global(
    n: int,
    depth: int,
    settings: OptimizerSettings | None = None,
    seed_schedules=(),
) -> TrainingTrace:
    """Multistart simplex search over all 2p angles at once.

    Restart initial points are uniform in the principal ranges, seeded from
    settings.seed; extra starting schedules (e.g. a greedy solution) can be
    supplied.  The result is the best schedule found, never claimed to be the
    global optimum.  The per-depth overlap profile of the winner is recorded;
    total objective evaluations are carried on the final record.
    """
    if n < 1 or depth < 1:
        raise ValueError("n and depth must be >= 1")
    settings = settings or OptimizerSettings()
    gen = symcore.mixer(n)
    plus = symcore.plus_state(n).amps
    evals = [0]

    def neg_overlap(params: np.ndarray) -> float:
        evals[0] += 1
        amps = plus.copy()
        for i in range(depth):
            amps[0] *= np.exp(-1j * params[2 * i])
            amps = gen.evolve(amps, params[2 * i + 1])
        return -float(abs(amps[0]) ** 2)

    inits = [_schedule_to_params(s) for s in seed_schedules]
    for r in range(settings.global_restarts):
        rng = np.random.default_rng(np.random.SeedSequence((settings.seed, r)))
        gammas = rng.uniform(0.0, 2.0 * math.pi, depth)
        betas = rng.uniform(0.0, math.pi, depth)
        inits.append(np.column_stack([gammas, betas]).ravel())

    best_fun, best_x = math.inf, inits[0]
    for x0 in inits:
        res = minimize(
            neg_overlap,
            x0,
            method="Nelder-Mead",
            options={
                "maxiter": settings.global_max_iterations,
                "maxfev": 2 * settings.global_max_iterations,
                "xatol": 1e-10,
                "fatol": 1e-12,
            },
        )
        if res.fun < best_fun:
            best_fun, best_x = float(res.fun), np.asarray(res.x)

    trace = TrainingTrace(n)
    state = symcore.plus_state(n)
    for c in range(depth):
        angles = LayerAngles(best_x[2 * c], best_x[2 * c + 1])
        state = symcore.apply_mixer(symcore.apply_phase_separator(state, angles.gamma), angles.beta)
        amp = abs(state.amps[0])
        trace.records.append(
            LayerRecord(c + 1, angles, float(amp**2), float(amp), 0.0, 0)
        )
    last = trace.records[-1]
    trace.records[-1] = LayerRecord(
        last.depth, last.angles, last.overlap, last.amplitude, last.wall_time, evals[0]
    )
    trace.status = _finish_status(trace)
    return trace


def _pattern_search(objective, x0, steps, tol: float, max_evals: int = 4000):
    """Deterministic compass search maximizing objective(gamma, beta)."""
    x = np.array(x0, dtype=float)
    fx = objective(x[0], x[1])
    evals = 1
    step = np.array(steps, dtype=float)
    while step.max() > tol and evals < max_evals:
        improved = False
        for dim in (0, 1):
            for sign in (1.0, -1.0):
                cand = x.copy()
                cand[dim] += sign * step[dim]
                fc = objective(cand[0], cand[1])
                evals += 1
                if fc > fx + 1e-15:
                    x, fx = cand, fc
                    improved = True
        if not improved:
            step *= 0.5
    return x, fx, evals


def train_layerwise_noisy(
    n: int,
    max_depth: int,
    noise: NoiseConfig,
    settings: OptimizerSettings | None = None,
    rng: np.random.Generator | None = None,
) -> TrainingTrace:
    """Greedy layerwise training with frozen coherent noise per layer.

    When a layer is appended its noise events are sampled once and frozen, so
    the layer is optimized against a fixed systematic error; earlier layers
    keep their own frozen noise.  The objective is the dense-simulator target
    overlap, searched over both angles by coarse grid plus compass pattern
    search, seeded with the gamma-eliminated suggestion computed from the
    symmetric projection of the current state (exact when noise is absent).
    """
    if n < 1 or max_depth < 1:
        raise ValueError("n and max_depth must be >= 1")
    densecore._check_cap(n)
    settings = settings or OptimizerSettings()
    if rng is None:
        rng = np.random.default_rng(noise.seed)

    prefix = densecore.plus_state_dense(n)
    trace = TrainingTrace(n)
    for depth in range(1, max_depth + 1):
        t0 = time.perf_counter()
        slots = densecore.sample_layer_noise(n, noise, rng)
        evals = [0]

        def objective(gamma: float, beta: float) -> float:
            evals[0] += 1
            out = densecore.apply_layer_dense(prefix, n, gamma, beta, slots)
            return float(abs(out[0]) ** 2)

        candidates = []
        sym_state, _residual = densecore.project_symmetric(densecore.DenseState(n, prefix))
        beta_s, _, e = _best_beta(sym_state, settings)
        evals[0] += e
        _, gamma_s = symcore.gamma_eliminated_overlap(sym_state, beta_s)
        candidates.append((objective(gamma_s, beta_s), (gamma_s, beta_s)))

        best_grid = (-1.0, (0.0, 0.0))
        for gamma in np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False):
            for beta in np.linspace(0.0, math.pi, 12, endpoint=False):
                val = objective(gamma, beta)
                if val > best_grid[0]:
                    best_grid = (val, (float(gamma), float(beta)))
        candidates.append(best_grid)

        x0 = max(candidates, key=lambda c: c[0])[1]
        x, fx, _ = _pattern_search(objective, x0, steps=(0.35, 0.25), tol=1e-7)
        baseline = objective(0.0, 0.0)
        if baseline >= fx:
            x, fx = np.zeros(2), baseline

        angles = LayerAngles(float(x[0]), float(x[1]))
        prefix = densecore.apply_layer_dense(prefix, n, angles.gamma, angles.beta, slots)
        trace.records.append(
            LayerRecord(
                depth,
                angles,
                float(abs(prefix[0]) ** 2),
                float(abs(prefix[0])),
                time.perf_counter() - t0,
                evals[0],
            )
        )
    trace.status = _finish_status(trace)
    return trace
