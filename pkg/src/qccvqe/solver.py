"""Iterative qubit-coupled-cluster solver with Hamiltonian dressing.

Each iteration screens candidate generators by the exact energy gradient at
zero amplitude (one representative per flip-index group), optimizes the
selected amplitudes over the circuit energy, then absorbs the rotations
into the Hamiltonian by conjugation so the next iteration restarts from the
fixed reference state. A log-linear fit of successive energy differences
extrapolates the converged energy from a finite trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.optimize

from .pauli import (
    DEFAULT_PRUNE,
    PauliString,
    QubitHamiltonian,
    dress_sequence,
    partition_by_flip_index,
)
from .simulator import (
    Statevector,
    apply_pauli_rotation,
    apply_rotation_sequence,
    bitstring_label,
    expectation,
)

__all__ = [
    "GRAD_EPS",
    "QccConfig",
    "CandidateGenerator",
    "IterationRecord",
    "QccTrace",
    "ExtrapolationResult",
    "ExtrapolationError",
    "flip_representative",
    "screen_generators",
    "optimize_amplitudes",
    "qcc_run",
    "total_energy",
    "extrapolate",
    "optimize_uccsd",
]

# Gradient magnitudes below this are treated as exact zeros when ranking
# candidate generators.
GRAD_EPS = 1e-12

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class QccConfig:
    """Knobs for one solver run; defaults suit the shipped fixtures."""

    generators_per_iteration: int = 1
    max_iterations: int = 50
    energy_tolerance: float = 1e-6
    prune_threshold: float = DEFAULT_PRUNE
    amplitude_bound: float = math.pi
    grid_points: int = 48
    tau_tolerance: float = 1e-10
    simplex_restarts: int = 1
    simplex_maxiter: int = 2000
    seed: int = 7

    def __post_init__(self) -> None:
        if self.generators_per_iteration < 1:
            raise ValueError("generators_per_iteration must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.energy_tolerance <= 0:
            raise ValueError("energy_tolerance must be positive")
        if self.prune_threshold < 0:
            raise ValueError("prune_threshold must be non-negative")
        if not 0 < self.amplitude_bound <= math.pi:
            raise ValueError("amplitude_bound must be in (0, pi]")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "QccConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(
                f"unknown config keys {sorted(unknown)}; valid keys: {sorted(known)}"
            )
        return cls(**dict(data))


@dataclass(frozen=True)
class CandidateGenerator:
    """One flip-index group's representative, scored by |dE/dtau| at 0."""

    flip_set: frozenset[int]
    representative: PauliString
    gradient_magnitude: float


def flip_representative(flip_set: Iterable[int], n_qubits: int) -> PauliString:
    """Canonical odd-Y-count member of a flip group: Y at min, X elsewhere."""
    positions = sorted(flip_set)
    if not positions:
        raise ValueError("flip set must be non-empty")
    x_mask = 0
    for q in positions:
        x_mask |= 1 << q
    return PauliString(n_qubits, x_mask, 1 << positions[0])


def _basis_index_of(ref: Statevector) -> int:
    index = ref.basis_state_index
    if index is None:
        raise ValueError("reference must be a computational-basis state")
    return index


def screen_generators(
    h: QubitHamiltonian, ref: Statevector
) -> list[CandidateGenerator]:
    """Rank flip-index groups by exact zero-amplitude energy gradient.

    For a basis reference |b> and representative R of flip set F, only the
    Hamiltonian terms sharing F contribute to dE/dtau at tau = 0: each
    product P_k R is diagonal, so the gradient reduces to a signed sum of
    coefficients. Groups with zero gradient are dropped; the rest are
    sorted by descending magnitude, ties broken by canonical string order.
    """
    if h.n_qubits != ref.n_qubits:
        raise ValueError(f"qubit-count mismatch: {h.n_qubits} vs {ref.n_qubits}")
    b = _basis_index_of(ref)
    candidates: list[CandidateGenerator] = []
    for flip_set, members in partition_by_flip_index(h).items():
        if not flip_set:
            continue
        rep = flip_representative(flip_set, h.n_qubits)
        grad = 0.0
        for p, c in members:
            # P_k R has empty flip index; i^k phase and Z-parity sign give
            # Im<b|P_k R|b> exactly.
            z = p.z_mask ^ rep.z_mask
            k = (
                (p.x_mask & p.z_mask).bit_count()
                + (rep.x_mask & rep.z_mask).bit_count()
                + 2 * (p.z_mask & rep.x_mask).bit_count()
                + 2 * (b & z).bit_count()
            ) % 4
            if k % 2:
                grad += c if k == 1 else -c
        if abs(grad) > GRAD_EPS:
            candidates.append(CandidateGenerator(flip_set, rep, abs(grad)))
    candidates.sort(key=lambda c: (-c.gradient_magnitude, c.representative.key()))
    return candidates


def _circuit_energy(
    h: QubitHamiltonian,
    ref: Statevector,
    generators: Sequence[PauliString],
    taus: Sequence[float],
) -> float:
    state = apply_rotation_sequence(ref, list(zip(generators, taus)))
    return expectation(state, h)


def _golden_section(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Minimize a unimodal function on [lo, hi] to +-tol in the argument."""
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    mid = 0.5 * (a + b)
    return mid, f(mid)


def _wrap_angle(tau: float, bound: float) -> float:
    wrapped = math.remainder(tau, 2.0 * math.pi)
    return min(max(wrapped, -bound), bound)


def optimize_amplitudes(
    h: QubitHamiltonian,
    ref: Statevector,
    generators: Sequence[PauliString],
    cfg: QccConfig | None = None,
    seed: int | None = None,
) -> tuple[float, list[float]]:
    """Minimize the circuit energy over the generator amplitudes.

    One generator: a coarse grid over [-bound, bound] brackets the minimum
    of the (trigonometric, hence smooth) energy curve, then golden-section
    refines to tau_tolerance. Several generators: bounded Nelder-Mead
    started at zero plus one seed-determined random restart. The zero
    point is always evaluated, so the result never exceeds the input
    energy.
    """
    if not generators:
        raise ValueError("no generators to optimize")
    cfg = cfg or QccConfig()
    if seed is None:
        seed = cfg.seed
    bound = cfg.amplitude_bound
    e_zero = _circuit_energy(h, ref, generators, [0.0] * len(generators))

    if len(generators) == 1:
        gen = generators[0]

        def f(tau: float) -> float:
            return _circuit_energy(h, ref, [gen], [tau])

        grid = np.linspace(-bound, bound, cfg.grid_points, endpoint=False)
        values = [f(t) for t in grid]
        best = int(np.argmin(values))
        step = 2.0 * bound / cfg.grid_points
        tau_star, e_star = _golden_section(
            f, grid[best] - step, grid[best] + step, cfg.tau_tolerance
        )
        tau_star = _wrap_angle(tau_star, bound)
        e_star = f(tau_star)
        if e_star < e_zero:
            return e_star, [tau_star]
        return e_zero, [0.0]

    n = len(generators)

    def fun(taus: np.ndarray) -> float:
        return _circuit_energy(h, ref, generators, taus)

    rng = np.random.default_rng(seed)
    starts = [np.zeros(n)]
    for _ in range(cfg.simplex_restarts):
        starts.append(rng.uniform(-bound, bound, size=n))
    best_e, best_taus = e_zero, [0.0] * n
    for x0 in starts:
        result = scipy.optimize.minimize(
            fun,
            x0,
            method="Nelder-Mead",
            bounds=[(-bound, bound)] * n,
            options={
                "maxiter": cfg.simplex_maxiter * n,
                "xatol": 1e-10,
                "fatol": 1e-14,
            },
        )
        if result.fun < best_e:
            best_e = float(result.fun)
            best_taus = [float(t) for t in result.x]
    return best_e, best_taus


@dataclass(frozen=True)
class IterationRecord:
    """One solver iteration: chosen rotations and the post-iteration state."""

    generators: tuple[tuple[PauliString, float], ...]
    energy: float
    term_count: int
    gradients: tuple[float, ...]


@dataclass(frozen=True)
class QccTrace:
    """Full account of a solver run, serializable for plotting and replay."""

    n_qubits: int
    reference: str
    iterations: tuple[IterationRecord, ...]
    initial_energy: float
    final_energy: float
    converged: bool
    e_inactive: float = 0.0
    e_nuclear: float = 0.0

    @property
    def energies(self) -> list[float]:
        """Active-space energy after 0, 1, ... iterations."""
        return [self.initial_energy] + [it.energy for it in self.iterations]

    @property
    def parameters_used(self) -> int:
        return sum(len(it.generators) for it in self.iterations)

    @property
    def all_generators(self) -> list[tuple[PauliString, float]]:
        """Concatenated (generator, amplitude) pairs in dressing order."""
        return [pair for it in self.iterations for pair in it.generators]

    def to_json_dict(self) -> dict:
        return {
            "schema": "qcc-trace/1",
            "n_qubits": self.n_qubits,
            "reference": self.reference,
            "initial_energy": self.initial_energy,
            "final_energy": self.final_energy,
            "converged": self.converged,
            "e_inactive": self.e_inactive,
            "e_nuclear": self.e_nuclear,
            "parameters_used": self.parameters_used,
            "iterations": [
                {
                    "generators": [
                        {"pauli": p.to_label(), "tau": tau}
                        for p, tau in it.generators
                    ],
                    "energy": it.energy,
                    "term_count": it.term_count,
                    "gradients": list(it.gradients),
                }
                for it in self.iterations
            ],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "QccTrace":
        iterations = tuple(
            IterationRecord(
                generators=tuple(
                    (PauliString.from_label(g["pauli"]), float(g["tau"]))
                    for g in it["generators"]
                ),
                energy=float(it["energy"]),
                term_count=int(it["term_count"]),
                gradients=tuple(float(g) for g in it.get("gradients", ())),
            )
            for it in data["iterations"]
        )
        return cls(
            n_qubits=int(data["n_qubits"]),
            reference=str(data["reference"]),
            iterations=iterations,
            initial_energy=float(data["initial_energy"]),
            final_energy=float(data["final_energy"]),
            converged=bool(data["converged"]),
            e_inactive=float(data.get("e_inactive", 0.0)),
            e_nuclear=float(data.get("e_nuclear", 0.0)),
        )


def qcc_run(
    h0: QubitHamiltonian,
    ref: Statevector,
    cfg: QccConfig | None = None,
    e_inactive: float = 0.0,
    e_nuclear: float = 0.0,
) -> QccTrace:
    """Run the screen / optimize / dress loop from a basis-state reference.

    Each iteration screens flip groups, optimizes amplitudes for the top
    generators, and folds the rotations into the Hamiltonian. An iteration
    whose optimized energy drop falls below the tolerance is discarded and
    the run reports converged, so recorded iterations all gained at least
    the tolerance. Exhausting the iteration budget or finding no flip group
    with a nonzero gradient also stops the loop. The recorded energy of
    each iteration is <ref|H_dressed|ref>.
    """
    cfg = cfg or QccConfig()
    b = _basis_index_of(ref)
    reference_label = bitstring_label(b, h0.n_qubits)
    h = h0
    e_prev = expectation(ref, h)
    initial_energy = e_prev
    records: list[IterationRecord] = []
    converged = False
    for i in range(1, cfg.max_iterations + 1):
        candidates = screen_generators(h, ref)
        if not candidates:
            converged = True
            break
        top = candidates[: cfg.generators_per_iteration]
        generators = [c.representative for c in top]
        e_opt, taus = optimize_amplitudes(h, ref, generators, cfg, seed=cfg.seed + i)
        if e_prev - e_opt < cfg.energy_tolerance:
            converged = True
            break
        pairs = tuple(zip(generators, taus))
        h = dress_sequence(h, pairs, prune=cfg.prune_threshold)
        energy = expectation(ref, h)
        records.append(
            IterationRecord(
                generators=pairs,
                energy=energy,
                term_count=len(h),
                gradients=tuple(c.gradient_magnitude for c in top),
            )
        )
        e_prev = energy
    final_energy = records[-1].energy if records else initial_energy
    return QccTrace(
        n_qubits=h0.n_qubits,
        reference=reference_label,
        iterations=tuple(records),
        initial_energy=initial_energy,
        final_energy=final_energy,
        converged=converged,
        e_inactive=e_inactive,
        e_nuclear=e_nuclear,
    )


def total_energy(trace: QccTrace) -> float:
    """Active energy plus the inactive and nuclear offsets."""
    return trace.final_energy + trace.e_inactive + trace.e_nuclear


class ExtrapolationError(ValueError):
    """Raised when a trace cannot support the log-linear difference fit."""

    def __init__(self, message: str, violations: Sequence[int] = ()):
        self.violations = tuple(violations)
        if violations:
            message = f"{message} (iterations {list(violations)})"
        super().__init__(message)


@dataclass(frozen=True)
class ExtrapolationResult:
    """Log-linear fit of energy differences and the implied converged energy."""

    a: float
    b: float
    e0_estimate: float
    iter_at_threshold: dict[float, int]
    fit_window: tuple[int, int]
    residual: float


def extrapolate(
    trace: QccTrace | Sequence[float],
    discard: int = 5,
    window: int = 35,
    thresholds: Sequence[float] = (1.6e-3, 1.6e-4),
) -> ExtrapolationResult:
    """Fit log10(E^(i-1) - E^(i)) = a*i + c over a window of iterations.

    The model E^(i) = E_0 + 10^(a*i + b) makes successive differences decay
    as 10^(a*i + c) with c = b + log10(10^(-a) - 1); fitting the straight
    line recovers a and c, the intercept relation recovers b, and E_0
    follows from the last windowed energy minus its fitted excess. The
    first `discard` differences are excluded from the fit.
    """
    energies = trace.energies if isinstance(trace, QccTrace) else list(trace)
    if window < 3:
        raise ExtrapolationError(f"window must cover at least 3 iterations, got {window}")
    if discard < 0:
        raise ExtrapolationError(f"discard must be non-negative, got {discard}")
    needed = discard + window
    have = len(energies) - 1
    if have < needed:
        raise ExtrapolationError(
            f"trace has {have} iterations but discard={discard} window={window} "
            f"needs {needed}"
        )
    first = discard + 1
    last = discard + window
    iters = np.arange(first, last + 1, dtype=float)
    diffs = np.array(
        [energies[i - 1] - energies[i] for i in range(first, last + 1)]
    )
    bad = [int(i) for i, d in zip(iters, diffs) if d <= 0.0]
    if bad:
        raise ExtrapolationError(
            "energy differences must be strictly positive in the fit window", bad
        )
    y = np.log10(diffs)
    a, c = np.polyfit(iters, y, 1)
    if a >= 0.0:
        raise ExtrapolationError(f"fitted slope {a:.3g} is not decaying")
    residual = float(np.sqrt(np.mean((y - (a * iters + c)) ** 2)))
    b = c - math.log10(10.0 ** (-a) - 1.0)
    e0 = energies[last] - 10.0 ** (a * last + b)
    crossings = {
        float(t): int(math.ceil((math.log10(t) - c) / a)) for t in thresholds
    }
    return ExtrapolationResult(
        a=float(a),
        b=float(b),
        e0_estimate=float(e0),
        iter_at_threshold=crossings,
        fit_window=(discard, window),
        residual=residual,
    )


def optimize_uccsd(
    h: QubitHamiltonian,
    ref: Statevector,
    generator_terms: Sequence[Sequence[tuple[PauliString, float]]],
    cfg: QccConfig | None = None,
) -> tuple[float, list[float]]:
    """Variationally optimize single-Trotter-step excitation amplitudes.

    Amplitude t_k multiplies every Pauli term of its generator: the circuit
    applies exp(-i theta P / 2) with theta = -2 * t_k * c for each (P, c),
    amplitudes in list order. Minimized with bounded Nelder-Mead from zero
    plus one random restart; the zero point is always evaluated.
    """
    if not generator_terms:
        raise ValueError("no generators to optimize")
    cfg = cfg or QccConfig()
    bound = cfg.amplitude_bound

    def build(taus: np.ndarray) -> Statevector:
        state = ref
        for t, terms in zip(taus, generator_terms):
            for p, c in terms:
                state = apply_pauli_rotation(state, p, -2.0 * t * c)
        return state

    def fun(taus: np.ndarray) -> float:
        return expectation(build(taus), h)

    n = len(generator_terms)
    e_zero = fun(np.zeros(n))
    rng = np.random.default_rng(cfg.seed)
    starts = [np.zeros(n)]
    for _ in range(cfg.simplex_restarts):
        starts.append(rng.uniform(-0.1, 0.1, size=n))
    best_e, best_taus = e_zero, [0.0] * n
    for x0 in starts:
        result = scipy.optimize.minimize(
            fun,
            x0,
            method="Nelder-Mead",
            bounds=[(-bound, bound)] * n,
            options={"maxiter": cfg.simplex_maxiter * n, "xatol": 1e-8, "fatol": 1e-12},
        )
        if result.fun < best_e:
            best_e = float(result.fun)
            best_taus = [float(t) for t in result.x]
    return best_e, best_taus
