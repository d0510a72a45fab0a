"""Simulated adiabatic measurement of the quantum metric.

A ramp moves the Hamiltonian along a straight line in parameter space,
x(t) = start + v t d, for a fixed duration T, under

    H'(t) = H(x(t)) + λ H_cd(t),   H_cd = (i/2) Σ_n [∂_t P_n, P_n],

where P_n are the band projectors.  λ = 1 is exact transitionless driving.
For short ramps (gap × T ≪ 1) the leakage out of the initial band is, to
leading order,

    n_ex ≈ (λ − 1)² v² T² ⟨u|∂_d P_⊥ ∂_d P_⊥|u⟩,

so summing over the two frame vectors gives (λ − 1)² T² G_dd v², with G the
trace metric.  The factor (λ − 1)² acts as the amplifier gain; the overall
constant is calibrated once against the direct metric at a reference point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FitFailure, StepTooCoarse
from .invariants import InvariantReport, qt_metric_route
from .geometry import HYPERSPHERICAL_LABELS, CARTESIAN_LABELS, quantum_geometry
from .model import (
    HyperPoint,
    ModelSpec,
    build_hamiltonian,
    hamiltonian_derivatives,
    hyperspherical_jacobian,
    hyperspherical_to_cartesian,
)
from .spectral import BANDS, DEFAULT_TOL, band_columns, diagonalize, oriented_frames

__all__ = [
    "RampSchedule",
    "EvolutionResult",
    "MetricEstimate",
    "ReadoutNoise",
    "counterdiabatic_term",
    "propagate",
    "digitize",
    "calibrate",
    "extract_metric",
    "extract_metric_tensor",
    "direct_trace_metric",
    "protocol_qt",
    "householder_rotation",
    "DEFAULT_VELOCITIES",
]

DEFAULT_VELOCITIES = (0.5, 0.75, 1.0, 1.25)
DEFAULT_DURATION = 0.1
MAX_STEPS = 2**16


def householder_rotation(vector) -> np.ndarray:
    """Real orthogonal reflection I − 2vvᵀ/|v|², a convenient fixed frame change R."""
    v = np.asarray(vector, dtype=float)
    return np.eye(len(v)) - 2 * np.outer(v, v) / (v @ v)


@dataclass(frozen=True)
class RampSchedule:
    """Straight-line ramp x(t) = start + velocity · t · direction for 0 ≤ t ≤ duration.

    With ``coords="hyperspherical"`` points and directions have five entries
    (Ω, γ, θ, φ, Λ); with ``coords="cartesian"`` four momentum entries.
    """

    start: tuple
    direction: tuple
    velocity: float
    duration: float
    gain: float = 0.0
    steps: int = 64
    band: int = 1
    initial: int = 0
    coords: str = "hyperspherical"
    rotation: np.ndarray | None = field(default=None, compare=False)
    max_gain: float = 100.0

    def __post_init__(self):
        size = 5 if self.coords == "hyperspherical" else 4
        if self.coords not in ("hyperspherical", "cartesian"):
            raise ConfigError("coords must be 'hyperspherical' or 'cartesian'")
        start = tuple(float(x) for x in self.start)
        direction = tuple(float(x) for x in self.direction)
        if self.coords == "hyperspherical" and len(start) == 4:
            start = start + (0.0,)
        if self.coords == "hyperspherical" and len(direction) == 4:
            direction = direction + (0.0,)
        if len(start) != size or len(direction) != size:
            raise ConfigError(f"start and direction need {size} components for {self.coords} ramps")
        values = start + direction + (self.velocity, self.duration, self.gain)
        if not np.all(np.isfinite(values)):
            raise ConfigError("ramp parameters must be finite")
        if self.velocity <= 0 or self.duration <= 0:
            raise ConfigError("velocity and duration must be positive")
        if not any(direction):
            raise ConfigError("ramp direction must be non-zero")
        if not 0 <= self.gain <= self.max_gain:
            raise ConfigError(f"gain must lie in [0, {self.max_gain}]")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ConfigError("steps must be a positive integer")
        if self.band not in BANDS or self.initial not in (0, 1):
            raise ConfigError("band must be -1, 0 or 1 and initial must be 0 or 1")
        if self.rotation is not None:
            r = np.asarray(self.rotation)
            if r.shape != (6, 6) or np.abs(r.conj().T @ r - np.eye(6)).max() > 1e-10:
                raise ConfigError("rotation must be a 6x6 unitary")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def path_length(self) -> float:
        return self.velocity * self.duration

    def point(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)[..., None]
        return np.asarray(self.start) + self.velocity * t * np.asarray(self.direction)


@dataclass(frozen=True)
class EvolutionResult:
    state: np.ndarray
    populations: np.ndarray
    excitation: float
    fidelity: float
    steps: int
    norm_error: float


@dataclass(frozen=True)
class MetricEstimate:
    pair: tuple
    value: float
    residual: float
    velocities: tuple
    slopes: dict


@dataclass(frozen=True)
class ReadoutNoise:
    """Symmetric assignment error ``floor`` plus optional Gaussian jitter on each measured n_ex.

    A measured excitation is floor + (1 − 2·floor)·n_true (+ jitter), so the
    floor sets the apparent excitation density when nothing leaks.
    """

    floor: float = 0.0
    jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.floor < 0.5 or self.jitter < 0:
            raise ConfigError("noise floor must lie in [0, 0.5) and jitter must be non-negative")

    def apply(self, n, rng=None) -> np.ndarray:
        n = self.floor + (1 - 2 * self.floor) * np.asarray(n, dtype=float)
        if self.jitter:
            rng = rng if rng is not None else np.random.default_rng(self.seed)
            n = n + self.jitter * rng.standard_normal(n.shape)
        return n


# --------------------------------------------------------------------------- Hamiltonian along a path


def _momentum_and_rate(spec, x, d, coords):
    """Momentum at points x and ∂H along directions d (both batched)."""
    if coords == "cartesian":
        k = x
        dk = d
    else:
        k = hyperspherical_to_cartesian(x)
        jac = hyperspherical_jacobian(x[..., :4])
        dk = np.einsum("...ij,...j->...i", jac, d[..., :4])
        dk[..., 3] += d[..., 4]
    dh = np.einsum("...i,...iab->...ab", dk, hamiltonian_derivatives(spec, k))
    return build_hamiltonian(spec, k), dh


def _cd_from_spectrum(energies, vectors, rate):
    """(i/2) Σ_n [∂_t P_n, P_n] from an eigendecomposition and ∂_t H; shape (..., 6, 6)."""
    m = np.einsum("...ia,...ij,...jb->...ab", vectors, rate, vectors)
    label = np.repeat(np.arange(3), 2)
    different = label[:, None] != label[None, :]
    diff = energies[..., None, :] - energies[..., :, None]
    safe = np.where(different, diff, 1.0)
    coupling = np.where(different, m / safe, 0.0)
    return 1j * np.einsum("...ia,...ab,...jb->...ij", vectors, coupling, vectors)


def counterdiabatic_term(spec: ModelSpec, point, tangent, coords: str = "cartesian",
                         tol: float = DEFAULT_TOL) -> np.ndarray:
    """H_cd at ``point`` for a path with velocity vector ``tangent`` (∂_t x)."""
    x = np.asarray(point, dtype=float)
    d = np.asarray(tangent, dtype=float)
    if coords == "hyperspherical":
        x = np.concatenate([x, np.zeros(5 - x.shape[-1])]) if x.shape[-1] == 4 else x
        d = np.concatenate([d, np.zeros(5 - d.shape[-1])]) if d.shape[-1] == 4 else d
    h, rate = _momentum_and_rate(spec, x, d, coords)
    energies, vectors = diagonalize(h, tol)
    return _cd_from_spectrum(energies, vectors, rate)


# --------------------------------------------------------------------------- evolution


def _rotation(schedule):
    return np.eye(6) if schedule.rotation is None else np.asarray(schedule.rotation)


def _step_unitaries(spec, starts, dirs, velocity, duration, gain, steps, coords, rotation, tol):
    """Midpoint Trotter factors, shape (B, steps, 6, 6)."""
    dt = duration / steps
    t = (np.arange(steps) + 0.5)[None, :] * dt[:, None]
    x = starts[:, None, :] + (velocity[:, None] * t)[..., None] * dirs[:, None, :]
    rate_dirs = np.broadcast_to((velocity[:, None] * dirs)[:, None, :], x.shape)
    h, rate = _momentum_and_rate(spec, x, rate_dirs.copy(), coords)
    energies, vectors = diagonalize(h, tol)
    total = h + gain[:, None, None, None] * _cd_from_spectrum(energies, vectors, rate)
    total = rotation @ total @ rotation.conj().T
    w, v = np.linalg.eigh(total)
    phases = np.exp(-1j * w * dt[:, None, None])
    return np.einsum("...ia,...a,...ja->...ij", v, phases, v.conj())


def _initial_and_final(spec, starts, ends, band, initial, coords, rotation, tol):
    def frames(x):
        k = x if coords == "cartesian" else hyperspherical_to_cartesian(x)
        h = build_hamiltonian(spec, k)
        _, vectors = diagonalize(h, tol)
        return vectors, h

    v0, h0 = frames(starts)
    psi = oriented_frames(h0, v0, band)[np.arange(len(starts)), :, initial]
    v1, _ = frames(ends)
    projectors = np.stack([v1[..., :, band_columns(n)] @ np.swapaxes(v1[..., :, band_columns(n)], -1, -2)
                           for n in BANDS], axis=1)
    psi = np.einsum("ij,bj->bi", rotation, psi.astype(complex))
    projectors = rotation @ projectors @ rotation.conj().T
    return psi, projectors


def _evolve_batch(spec, starts, dirs, velocity, duration, gain, steps, band, initial, coords, rotation, tol):
    """Evolve B trajectories; returns (states, populations, norm errors)."""
    starts = np.asarray(starts, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    b = len(starts)
    velocity = np.broadcast_to(np.asarray(velocity, dtype=float), (b,))
    duration = np.broadcast_to(np.asarray(duration, dtype=float), (b,))
    gain = np.broadcast_to(np.asarray(gain, dtype=float), (b,))
    initial = np.broadcast_to(np.asarray(initial), (b,))
    ends = starts + (velocity * duration)[:, None] * dirs
    psi, projectors = _initial_and_final(spec, starts, ends, band, initial, coords, rotation, tol)
    unitaries = _step_unitaries(spec, starts, dirs, velocity, duration, gain, steps, coords, rotation, tol)
    norm_error = np.zeros(b)
    for j in range(steps):
        psi = np.einsum("bij,bj->bi", unitaries[:, j], psi)
        norm_error = np.maximum(norm_error, np.abs(np.linalg.norm(psi, axis=-1) - 1))
    populations = np.einsum("bi,bnij,bj->bn", psi.conj(), projectors, psi).real
    return psi, populations, norm_error


def _excitation(populations, band):
    return np.clip(1.0 - populations[:, band + 1], 0.0, 1.0)


def _phase_floor(spec, starts, dirs, velocity, duration, gain, coords, tol, samples=33):
    """Smallest step count with Δt · (spectral width of H') <= 0.5 at sampled path points.

    Without it a grossly coarse start (Δt far beyond the inverse gap) can pass
    the N vs 2N comparison with two equally wrong answers.
    """
    starts = np.asarray(starts, dtype=float)
    dirs = np.asarray(dirs, dtype=float)
    b = len(starts)
    velocity = np.broadcast_to(np.asarray(velocity, dtype=float), (b,))
    duration = np.broadcast_to(np.asarray(duration, dtype=float), (b,))
    gain = np.broadcast_to(np.asarray(gain, dtype=float), (b,))
    t = np.linspace(0.0, 1.0, samples)[None, :] * duration[:, None]
    x = starts[:, None, :] + (velocity[:, None] * t)[..., None] * dirs[:, None, :]
    rate_dirs = np.broadcast_to((velocity[:, None] * dirs)[:, None, :], x.shape).copy()
    h, rate = _momentum_and_rate(spec, x, rate_dirs, coords)
    energies, vectors = diagonalize(h, tol)
    total = h + gain[:, None, None, None] * _cd_from_spectrum(energies, vectors, rate)
    w = np.linalg.eigvalsh(total)
    width = (w[..., -1] - w[..., 0]).max(axis=-1)
    return int(np.ceil((duration * width / 0.5).max()))


def _converged_batch(spec, starts, dirs, velocity, duration, gain, steps, band, initial, coords, rotation, tol,
                     refinements: int = 2):
    """Run at ``steps`` and 2·``steps``; accept if n_ex moves by < 1% (refining up to twice).

    ``steps`` is first raised to the phase-resolution floor of the path.
    """
    steps = max(steps, _phase_floor(spec, starts, dirs, velocity, duration, gain, coords, tol))
    if steps > MAX_STEPS:
        raise StepTooCoarse(f"resolving the fastest phase needs {steps} Trotter steps (limit {MAX_STEPS})")
    current = _evolve_batch(spec, starts, dirs, velocity, duration, gain, steps, band, initial, coords, rotation, tol)
    for level in range(refinements + 1):
        finer = _evolve_batch(spec, starts, dirs, velocity, duration, gain, 2 * steps, band, initial, coords,
                              rotation, tol)
        n0, n1 = _excitation(current[1], band), _excitation(finer[1], band)
        if np.all(np.abs(n0 - n1) <= 0.01 * n1 + 1e-9):
            return current, steps
        if level == refinements:
            break
        current, steps = finer, 2 * steps
    raise StepTooCoarse(f"n_ex still changes by {np.abs(n0 - n1).max():.3e} at {steps} Trotter steps")


def propagate(spec: ModelSpec, schedule: RampSchedule, tol: float = DEFAULT_TOL) -> EvolutionResult:
    """Evolve a frame vector of ``schedule.band`` along the ramp and read out band populations."""
    (psi, pops, norm), steps = _converged_batch(
        spec, [schedule.start], [schedule.direction], schedule.velocity, schedule.duration, schedule.gain,
        schedule.steps, schedule.band, schedule.initial, schedule.coords, _rotation(schedule), tol,
    )
    n_ex = float(_excitation(pops, schedule.band)[0])
    return EvolutionResult(psi[0], pops[0], n_ex, 1.0 - n_ex, steps, float(norm[0]))


def digitize(spec: ModelSpec, schedule: RampSchedule, tol: float = DEFAULT_TOL) -> list[np.ndarray]:
    """Ordered Trotter factors exp(−i R H'(t_j) R⁻¹ Δt) at the step midpoints t_j."""
    u = _step_unitaries(
        spec, np.asarray([schedule.start]), np.asarray([schedule.direction]), np.array([schedule.velocity]),
        np.array([schedule.duration]), np.array([schedule.gain]), schedule.steps, schedule.coords,
        _rotation(schedule), tol,
    )
    return list(u[0])


# --------------------------------------------------------------------------- metric extraction


def _axis_index(label, coords):
    labels = HYPERSPHERICAL_LABELS if coords == "hyperspherical" else CARTESIAN_LABELS
    if isinstance(label, (int, np.integer)):
        if not 0 <= label < len(labels):
            raise ConfigError(f"axis index {label} out of range")
        return int(label)
    if label not in labels:
        raise ConfigError(f"unknown axis {label!r}; expected one of {labels}")
    return labels.index(label)


def direct_trace_metric(spec: ModelSpec, point, band: int, coords: str = "hyperspherical",
                        tol: float = DEFAULT_TOL) -> np.ndarray:
    """Trace metric G from the geometry module; (Ω, γ, θ, φ) or momentum axes."""
    x = np.asarray(point, dtype=float)
    if coords == "hyperspherical":
        g, _ = quantum_geometry(spec, hyperspherical_to_cartesian(x), band, tol, hyperspherical_jacobian(x[..., :4]))
    else:
        g, _ = quantum_geometry(spec, x, band, tol)
    return np.trace(g, axis1=-2, axis2=-1)


def _leakage_slopes(spec, bases, directions, velocities, duration, gain, steps, band, coords, rotation,
                    noise, rng, tol):
    """Fitted slopes C in Σ_a n_ex = a + C v², shape (points, directions), and the worst fit residual."""
    bases = np.atleast_2d(np.asarray(bases, dtype=float))
    directions = np.asarray(directions, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    n_pt, n_dir, n_vel = len(bases), len(directions), len(velocities)
    shape = (n_pt, n_dir, n_vel, 2)
    base = np.broadcast_to(bases[:, None, None, None, :], shape + bases.shape[-1:]).reshape(-1, bases.shape[-1])
    dirs = np.broadcast_to(directions[None, :, None, None, :], shape + bases.shape[-1:]).reshape(base.shape)
    vel = np.broadcast_to(velocities[None, None, :, None], shape).ravel()
    init = np.broadcast_to(np.arange(2), shape).ravel()
    starts = base - 0.5 * (vel * duration)[:, None] * dirs
    (_, pops, _), _ = _converged_batch(spec, starts, dirs, vel, duration, gain, steps, band, init, coords,
                                       rotation, tol)
    n_ex = _excitation(pops, band)
    if noise is not None:
        n_ex = noise.apply(n_ex, rng)
    if np.any(n_ex > 0.1 + (noise.floor if noise is not None else 0.0)):
        raise FitFailure("excitation outside the perturbative window (n_ex > 0.1); lower the velocities or gain")
    n_ex = n_ex.reshape(shape).sum(axis=-1)
    design = np.stack([np.ones(n_vel), velocities**2], axis=1)
    coef, *_ = np.linalg.lstsq(design, n_ex.reshape(-1, n_vel).T, rcond=None)
    fit = (design @ coef).T.reshape(n_ex.shape)
    signal = np.ptp(n_ex, axis=-1)
    signal = np.where(signal > 0, signal, 1.0)
    worst = float((np.abs(fit - n_ex).max(axis=-1) / signal).max())
    return coef[1].reshape(n_pt, n_dir), worst


def _pair_directions(axes, size):
    eye = np.eye(size)
    pairs = [(a, b) for i, a in enumerate(axes) for b in axes[i + 1:]]
    return [eye[a] for a in axes] + [eye[a] + eye[b] for a, b in pairs], pairs


def calibrate(spec: ModelSpec, reference=HyperPoint(1.0, np.pi / 4, 0.0, 0.0, 0.0), axis="gamma", band: int = 1,
              velocities=DEFAULT_VELOCITIES, duration: float = DEFAULT_DURATION, gain: float = 0.5,
              steps: int = 16, coords: str = "hyperspherical", rotation=None, tol: float = DEFAULT_TOL) -> float:
    """Constant C with (fitted v² slope) = C · G, from a single reference direction."""
    i = _axis_index(axis, coords)
    size = 5 if coords == "hyperspherical" else 4
    direction = np.zeros(size)
    direction[i] = 1.0
    ref = np.asarray(reference, dtype=float)
    rot = np.eye(6) if rotation is None else np.asarray(rotation)
    slopes, residual = _leakage_slopes(spec, ref, [direction], velocities, duration, gain, steps, band, coords,
                                       rot, None, None, tol)
    if residual > 0.1:
        raise FitFailure(f"v² fit residual {residual:.1%} at the calibration point")
    return float(slopes[0, 0] / direct_trace_metric(spec, ref, band, coords, tol)[i, i])


def extract_metric(spec: ModelSpec, base, pair, constant: float, velocities=DEFAULT_VELOCITIES,
                   duration: float = DEFAULT_DURATION, gain: float = 0.5, band: int = 1, steps: int = 16,
                   coords: str = "hyperspherical", rotation=None, noise: ReadoutNoise | None = None,
                   tol: float = DEFAULT_TOL) -> MetricEstimate:
    """Trace-metric component G_{μν} from leakage ramps along μ, ν and μ + ν.

    The off-diagonal part follows from G(e_μ + e_ν) = G_μμ + G_νν + 2G_μν.
    ``constant`` comes from :func:`calibrate` with the same ramp settings.
    """
    if constant <= 0:
        raise ConfigError("calibration constant must be positive")
    velocities = tuple(float(v) for v in velocities)
    if len(velocities) < 3 or min(velocities) <= 0:
        raise ConfigError("need at least three positive velocities")
    mu, nu = (_axis_index(p, coords) for p in pair)
    size = 5 if coords == "hyperspherical" else 4
    eye = np.eye(size)
    if mu == nu:
        directions = [eye[mu]]
    else:
        directions = [eye[mu], eye[nu], eye[mu] + eye[nu]]
    rot = np.eye(6) if rotation is None else np.asarray(rotation)
    rng = np.random.default_rng(noise.seed) if noise is not None else None
    slopes, residual = _leakage_slopes(spec, base, directions, velocities, duration, gain, steps, band, coords,
                                       rot, noise, rng, tol)
    if residual > 0.1:
        raise FitFailure(f"v² fit residual {residual:.1%} exceeds 10%")
    diag = slopes[0] / constant
    value = diag[0] if mu == nu else 0.5 * (diag[2] - diag[0] - diag[1])
    labels = HYPERSPHERICAL_LABELS if coords == "hyperspherical" else CARTESIAN_LABELS
    names = [labels[mu]] if mu == nu else [labels[mu], labels[nu], f"{labels[mu]}+{labels[nu]}"]
    return MetricEstimate((labels[mu], labels[nu]), float(value), residual, velocities,
                          dict(zip(names, (float(s) for s in slopes[0]))))


def extract_metric_tensor(spec: ModelSpec, points, constant: float, axes=("gamma", "theta", "phi"),
                          velocities=DEFAULT_VELOCITIES, duration: float = DEFAULT_DURATION, gain: float = 0.5,
                          band: int = 1, steps: int = 16, coords: str = "hyperspherical", rotation=None,
                          noise: ReadoutNoise | None = None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Full trace metric over ``axes`` at many points at once, shape ``points.shape[:-1] + (d, d)``."""
    if constant <= 0:
        raise ConfigError("calibration constant must be positive")
    points = np.asarray(points, dtype=float)
    size = 5 if coords == "hyperspherical" else 4
    idx = [_axis_index(a, coords) for a in axes]
    directions, pairs = _pair_directions(idx, size)
    rot = np.eye(6) if rotation is None else np.asarray(rotation)
    rng = np.random.default_rng(noise.seed) if noise is not None else None
    flat = points.reshape(-1, points.shape[-1])
    slopes, residual = _leakage_slopes(spec, flat, directions, velocities, duration, gain, steps, band, coords,
                                       rot, noise, rng, tol)
    if residual > 0.1:
        raise FitFailure(f"v² fit residual {residual:.1%} exceeds 10%")
    values = slopes / constant
    d = len(idx)
    metric = np.zeros((len(flat), d, d))
    for i in range(d):
        metric[:, i, i] = values[:, i]
    for n, (a, b) in enumerate(pairs):
        i, j = idx.index(a), idx.index(b)
        metric[:, i, j] = metric[:, j, i] = 0.5 * (values[:, d + n] - values[:, i] - values[:, j])
    return metric.reshape(points.shape[:-1] + (d, d))


def protocol_qt(spec: ModelSpec, omega: float = 1.0, offset: float = 0.0, band: int = 1, resolution: int = 16,
                noise: ReadoutNoise | None = None, constant: float | None = None, **ramp) -> InvariantReport:
    """Metric-route Q_T with every metric component measured by simulated leakage ramps.

    ``ramp`` takes the keyword arguments shared by :func:`calibrate` and
    :func:`extract_metric_tensor` (velocities, duration, gain, steps, rotation).
    The calibration is noiseless; ``noise`` only degrades the measurements.
    """
    if constant is None:
        constant = calibrate(spec, band=band, **ramp)

    def provider(points):
        return extract_metric_tensor(spec, points, constant, band=band, noise=noise, **ramp)

    report = qt_metric_route(spec, omega, offset, band, resolution, metric_provider=provider)
    report.name = "Q_T (protocol)"
    report.details.update({"calibration": constant, "noise_floor": noise.floor if noise else 0.0})
    return report
