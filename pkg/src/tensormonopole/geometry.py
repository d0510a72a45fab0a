"""Non-Abelian quantum geometry of the twofold band subspaces.

Two independent routes to the SO(2) curvature are provided:

* :func:`quantum_geometry` / :func:`qgt_sum_over_states` use perturbation
  theory with analytic ∂H, so no eigenvector is ever differentiated;
* :func:`qgt_plaquette` transports a frame around a small loop and reads the
  curvature off the holonomy angle.

In a real frame (u1, u2) the quantum geometric tensor is

    Q^{ab}_{μν} = Σ_{m∉n} ⟨u_a|∂_μH|m⟩⟨m|∂_νH|u_b⟩ / ((E_a − E_m)(E_b − E_m)),

whose μν-symmetric part is the metric g^{ab}_{μν} and whose μν-antisymmetric
part is the curvature F^{ab}_{μν}.  For SO(2) only f = F^{12} survives, and
the trace metric is G = tr_ab g.

The three-form
--------------
For a rank-2 real band the abelian structure group makes df = 0, so the
exterior derivative of f cannot carry the tensor-monopole charge.  The
source is instead the degree density of the chiral map carried by each
dispersive band: its components X (S = -1 sector) and Y (S = +1 sector)
define the gauge-invariant 4×2 matrix Y X⁻¹, whose orthonormalized columns
ŷ_1, ŷ_2 are unit vectors in ℝ⁴.  Then

    h_{μνλ} = ½ Σ_a det[ŷ_a, ∂_μŷ_a, ∂_νŷ_a, ∂_λŷ_a],
    H^ρ = (1/3!) ε^{ρμνλ} h_{μνλ},

which equals k/k⁴ for the continuum model at δ = 0, so the flux of H through
a three-sphere divided by 2π² is the degree of the chiral map.  The flat band
lies entirely in the S = +1 sector, so its X block vanishes and H = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import ConfigError, DegeneracyCollision
from .model import (
    HyperPoint,
    ModelSpec,
    build_hamiltonian,
    hamiltonian_derivatives,
    hyperspherical_jacobian,
    hyperspherical_to_cartesian,
)
from .spectral import BANDS, DEFAULT_TOL, BandFrame, band_columns, diagonalize, eigensystem, oriented_frames, transport_loop

__all__ = [
    "CARTESIAN_LABELS",
    "HYPERSPHERICAL_LABELS",
    "GeometrySample",
    "ThreeFormSample",
    "quantum_geometry",
    "qgt_sum_over_states",
    "qgt_plaquette",
    "chiral_unit_vectors",
    "tensor_source",
    "tensor_three_form",
    "default_step",
]

CARTESIAN_LABELS = ("kx", "ky", "kz", "kw")
HYPERSPHERICAL_LABELS = ("omega", "gamma", "theta", "phi")


def _axis(label, coords: str) -> int:
    labels = CARTESIAN_LABELS if coords == "cartesian" else HYPERSPHERICAL_LABELS
    if isinstance(label, (int, np.integer)):
        if not 0 <= label < 4:
            raise ConfigError(f"axis index {label} out of range")
        return int(label)
    aliases = {"x": "kx", "y": "ky", "z": "kz", "w": "kw", "Ω": "omega", "γ": "gamma", "θ": "theta", "φ": "phi"}
    name = aliases.get(label, label)
    if name not in labels:
        raise ConfigError(f"unknown {coords} axis {label!r}; expected one of {labels}")
    return labels.index(name)


def _geometry_from_spectrum(energies, vectors, dh, band):
    """Q^{ab}_{μν} from an eigendecomposition; ``dh`` has shape (..., d, 6, 6)."""
    cols = band_columns(band)
    others = [i for i in range(6) if i not in range(cols.start, cols.stop)]
    frame = vectors[..., :, cols]
    rest = vectors[..., :, others]
    # Matrix elements ⟨u_a|∂H|m⟩, shape (..., d, 2, 4)
    elements = np.einsum("...ia,...dij,...jm->...dam", frame, dh, rest)
    denom = energies[..., cols, None] - energies[..., None, others]
    weighted = elements / denom[..., None, :, :]
    return np.einsum("...uam,...vbm->...uvab", weighted, weighted)


def quantum_geometry(spec: ModelSpec, k, band: int, tol: float = DEFAULT_TOL, jacobian=None):
    """Batched metric and curvature at momenta ``k`` (shape ``(..., 4)``).

    Returns ``(g, f)`` with ``g`` of shape ``(..., d, d, 2, 2)`` and ``f`` of
    shape ``(..., d, d)`` in the oriented real gauge.  If ``jacobian`` (shape
    ``(..., 4, d)``, ∂k/∂x) is given the tensors refer to the coordinates x.
    """
    k = np.asarray(k, dtype=float)
    h = build_hamiltonian(spec, k)
    energies, vectors = diagonalize(h, tol, bands=(band,))
    vectors = vectors.copy()
    vectors[..., :, band_columns(band)] = oriented_frames(h, vectors, band)
    dh = hamiltonian_derivatives(spec, k)
    if jacobian is not None:
        dh = np.einsum("...kij,...kx->...xij", dh, np.asarray(jacobian, dtype=float))
    q = _geometry_from_spectrum(energies, vectors, dh, band)
    g = 0.5 * (q + np.swapaxes(q, -3, -4))
    f = q[..., 0, 1] - np.swapaxes(q, -3, -4)[..., 0, 1]
    return g, f


@dataclass(frozen=True)
class GeometrySample:
    anchor: tuple
    band: int
    mu: int
    nu: int
    coords: str
    metric: np.ndarray
    curvature: float

    @property
    def trace_metric(self) -> float:
        return float(np.trace(self.metric))


def qgt_sum_over_states(spec: ModelSpec, point, band: int, mu, nu, coords: str = "cartesian",
                        tol: float = DEFAULT_TOL) -> GeometrySample:
    """Metric block g_{μν}^{ab} and curvature scalar f_{μν} at one point.

    ``point`` is a momentum for ``coords="cartesian"`` and a :class:`HyperPoint`
    (or array (Ω, γ, θ, φ[, Λ])) for ``coords="hyperspherical"``.
    """
    if coords not in ("cartesian", "hyperspherical"):
        raise ConfigError(f"coords must be 'cartesian' or 'hyperspherical', got {coords!r}")
    i, j = _axis(mu, coords), _axis(nu, coords)
    p = np.asarray(point, dtype=float)
    if coords == "cartesian":
        k, jac = p, None
    else:
        k, jac = hyperspherical_to_cartesian(p), hyperspherical_jacobian(p)
    g, f = quantum_geometry(spec, k, band, tol, jac)
    return GeometrySample(tuple(p.tolist()), band, i, j, coords, g[i, j], float(f[i, j]))


def qgt_plaquette(spec: ModelSpec, corners, band: int, tol: float = DEFAULT_TOL, min_det: float = 0.1) -> float:
    """Curvature from the holonomy of a closed loop of momenta.

    ``corners`` has shape ``(m, 4)`` and is traversed in order.  The loop
    must be planar; f is the holonomy angle divided by the enclosed area,
    with the loop orientation defining the sign (counter-clockwise from the
    first edge towards the last corner is positive).
    """
    corners = np.asarray(corners, dtype=float)
    if corners.ndim != 2 or corners.shape[1] != 4 or len(corners) < 3:
        raise ConfigError("corners must be an (m >= 3, 4) array of momenta")
    area = _planar_area(corners)
    if area < 1e-14:
        return 0.0
    frames = [eigensystem(build_hamiltonian(spec, c), tol)[band + 1] for c in corners]
    w = transport_loop(frames, min_det)
    angle = np.arctan2(w[1, 0], w[0, 0])
    return float(angle / area)


def _planar_area(corners):
    """Area of a planar polygon in ℝ⁴ measured in the basis (e1, e2) of its first edge and last corner."""
    origin = corners[0]
    e1 = corners[1] - origin
    n1 = np.linalg.norm(e1)
    if n1 == 0:
        return 0.0
    e1 = e1 / n1
    ref = corners[-1] - origin
    e2 = ref - (ref @ e1) * e1
    n2 = np.linalg.norm(e2)
    if n2 < 1e-14 * max(1.0, np.linalg.norm(ref)):
        return 0.0
    e2 = e2 / n2
    xy = np.stack([(corners - origin) @ e1, (corners - origin) @ e2], axis=1)
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def chiral_unit_vectors(spec: ModelSpec, k, band: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormalized columns of Y X⁻¹ for a dispersive band, shape ``(..., 4, 2)``."""
    if band == 0:
        raise ConfigError("the flat band has no S = -1 component; its three-form vanishes identically")
    k = np.asarray(k, dtype=float)
    h = build_hamiltonian(spec, k)
    _, vectors = diagonalize(h, tol, bands=(band,))
    frame = vectors[..., :, band_columns(band)]
    x, y = frame[..., :2, :], frame[..., 2:, :]
    ratio = y @ np.linalg.inv(x)
    u, _, vt = np.linalg.svd(ratio, full_matrices=False)
    return u @ vt


def _source_from_vectors(yhat, dyhat):
    """H^ρ from unit vectors (..., 4, 2) and their derivatives (..., 4[μ], 4, 2)."""
    h = {}
    for triple in combinations(range(4), 3):
        mu, nu, la = triple
        total = 0.0
        for a in range(2):
            m = np.stack([yhat[..., a], dyhat[..., mu, :, a], dyhat[..., nu, :, a], dyhat[..., la, :, a]], axis=-1)
            total = total + np.linalg.det(m)
        h[triple] = 0.5 * total
    source = np.stack([h[(1, 2, 3)], -h[(0, 2, 3)], h[(0, 1, 3)], -h[(0, 1, 2)]], axis=-1)
    return h, source


def default_step(spec: ModelSpec, k, tol: float = DEFAULT_TOL) -> np.ndarray:
    """10⁻³ times the local gap between the flat band and the dispersive bands."""
    e, _ = diagonalize(build_hamiltonian(spec, np.asarray(k, dtype=float)), tol)
    return 1e-3 * np.minimum(e[..., 2] - e[..., 1], e[..., 4] - e[..., 3])


def _central_differences(spec, k, band, step, tol):
    k = np.asarray(k, dtype=float)
    step = np.asarray(step, dtype=float)[..., None]
    yhat = chiral_unit_vectors(spec, k, band, tol)
    derivs = []
    for mu in range(4):
        e = np.zeros(4)
        e[mu] = 1.0
        plus = chiral_unit_vectors(spec, k + step * e, band, tol)
        minus = chiral_unit_vectors(spec, k - step * e, band, tol)
        derivs.append((plus - minus) / (2 * step[..., None]))
    return yhat, np.stack(derivs, axis=-3)


def tensor_source(spec: ModelSpec, k, band: int, step=None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Batched source vector H^ρ at momenta ``k`` (shape ``(..., 4)``)."""
    k = np.asarray(k, dtype=float)
    if band == 0:
        diagonalize(build_hamiltonian(spec, k), tol, bands=(0,))
        return np.zeros(k.shape)
    if step is None:
        step = default_step(spec, k, tol)
    yhat, dyhat = _central_differences(spec, k, band, step, tol)
    return _source_from_vectors(yhat, dyhat)[1]


@dataclass(frozen=True)
class ThreeFormSample:
    anchor: tuple
    band: int
    step: float
    components: dict
    source: np.ndarray

    def h(self, mu: int, nu: int, la: int) -> float:
        """h_{μνλ} for any index order (totally antisymmetric)."""
        idx = (mu, nu, la)
        if len(set(idx)) < 3:
            return 0.0
        order = np.argsort(idx)
        parity = np.linalg.det(np.eye(3)[order])
        return float(parity * self.components[tuple(sorted(idx))])


def tensor_three_form(spec: ModelSpec, point, band: int, step: float | None = None,
                      tol: float = DEFAULT_TOL) -> ThreeFormSample:
    """Three-form components and source vector at one momentum."""
    k = np.asarray(point, dtype=float)
    if band not in BANDS:
        raise ConfigError(f"band must be one of {BANDS}")
    if step is None:
        step = float(default_step(spec, k, tol))
    if band == 0:
        for sign in (-2, -1, 0, 1, 2):
            diagonalize(build_hamiltonian(spec, k + sign * step), tol, bands=(0,))
        zeros = {t: 0.0 for t in combinations(range(4), 3)}
        return ThreeFormSample(tuple(k.tolist()), band, step, zeros, np.zeros(4))
    yhat, dyhat = _central_differences(spec, k, band, step, tol)
    comps, source = _source_from_vectors(yhat, dyhat)
    return ThreeFormSample(tuple(k.tolist()), band, step, {t: float(v) for t, v in comps.items()}, source)
