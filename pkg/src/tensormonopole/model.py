"""Six-band tensor-monopole Hamiltonians, parametrizations and symmetry operators.

The continuum model is

    H(k) = kx λ2⊗σ2 + ky λ1⊗σ0 + kz λ4⊗σ3 + kw λ4⊗σ1 + δ λ4⊗σ0,

with λ the Gell-Mann matrices (orbital index, outer) and σ the Pauli matrices
(inner index).  Every term is real, so H is real symmetric.  The tight-binding
family replaces the five coefficients by lattice functions.

All functions broadcast over leading axes: a momentum argument of shape
``(..., 4)`` gives Hamiltonians of shape ``(..., 6, 6)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError

__all__ = [
    "Family",
    "ModelSpec",
    "Momentum4",
    "HyperPoint",
    "SymmetryReport",
    "gell_mann",
    "pauli",
    "GENERATORS",
    "CHIRAL",
    "COMPLEX_STRUCTURE",
    "MIRROR",
    "HIGGS",
    "coefficients",
    "coefficient_jacobian",
    "build_hamiltonian",
    "hamiltonian_derivatives",
    "wrap_momentum",
    "hyperspherical_to_cartesian",
    "hyperspherical_jacobian",
    "certify_symmetries",
]


class Family(str, enum.Enum):
    CONTINUUM_4D = "continuum4d"
    CONTINUUM_3D = "continuum3d"
    TIGHT_BINDING = "tight-binding"


@dataclass(frozen=True)
class ModelSpec:
    """Which Hamiltonian to build.

    ``delta`` is the strength of the symmetry preserving perturbation
    δ λ4⊗σ0 and ``offset`` the bias Λ (only used by the tight-binding
    family; for the continuum families Λ enters through the hyperspherical
    parametrization instead).
    """

    family: Family = Family.CONTINUUM_4D
    delta: float = 0.0
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        for name in ("delta", "offset"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ConfigError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def dimension(self) -> int:
        return 3 if self.family is Family.CONTINUUM_3D else 4


class Momentum4(NamedTuple):
    kx: float
    ky: float
    kz: float
    kw: float

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.kx**2 + self.ky**2 + self.kz**2 + self.kw**2))


class HyperPoint(NamedTuple):
    """A point (Ω, γ, θ, φ) on the hypersphere of radius Ω centred at kw = Λ."""

    radius: float
    gamma: float
    theta: float
    phi: float
    offset: float = 0.0


def gell_mann(i: int) -> np.ndarray:
    """Gell-Mann matrix λ_i in the standard ordering (only i ∈ {1, 2, 4} are used here)."""
    m = np.zeros((3, 3), dtype=complex)
    if i == 1:
        m[0, 1] = m[1, 0] = 1
    elif i == 2:
        m[0, 1], m[1, 0] = -1j, 1j
    elif i == 4:
        m[0, 2] = m[2, 0] = 1
    else:
        raise ConfigError(f"unsupported Gell-Mann index {i}; expected one of 1, 2, 4")
    return m


def pauli(i: int) -> np.ndarray:
    if i == 0:
        return np.eye(2, dtype=complex)
    if i == 1:
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if i == 2:
        return np.array([[0, -1j], [1j, 0]])
    if i == 3:
        return np.array([[1, 0], [0, -1]], dtype=complex)
    raise ConfigError(f"unsupported Pauli index {i}")


def _real(m: np.ndarray) -> np.ndarray:
    assert np.abs(m.imag).max() == 0.0
    return np.ascontiguousarray(m.real)


# Generators multiplying (kx, ky, kz, kw, δ).  All five are real.
GENERATORS = np.stack(
    [
        _real(np.kron(gell_mann(2), pauli(2))),
        _real(np.kron(gell_mann(1), pauli(0))),
        _real(np.kron(gell_mann(4), pauli(3))),
        _real(np.kron(gell_mann(4), pauli(1))),
        _real(np.kron(gell_mann(4), pauli(0))),
    ]
)

#: Chiral operator S = diag(-1, 1, 1) ⊗ σ0.  The first two basis states span S = -1.
CHIRAL = np.kron(np.diag([-1.0, 1.0, 1.0]), np.eye(2))

#: Real J with J² = -1 commuting with every δ = 0 Hamiltonian.  On each twofold
#: band it acts as a quarter turn; in a frame oriented along it, its sewing matrix is -iσ2.
COMPLEX_STRUCTURE = -np.kron(np.diag([1.0, 1.0, -1.0]), np.array([[0.0, 1.0], [-1.0, 0.0]]))

#: Real Γ with Γ² = -1 and Γ H(kx, ky, kz, kw) Γ⁻¹ = H(kx, ky, -kz, -kw) for the
#: continuum families (δ term included).  On the kz = kw = 0 plane it commutes with H.
MIRROR = np.kron(np.eye(3), np.array([[0.0, -1.0], [1.0, 0.0]]))

#: Higgs field in the degenerate subspace, in an oriented real frame.
HIGGS = pauli(2)


def wrap_momentum(k) -> np.ndarray:
    """Map momenta to the first Brillouin zone [-π, π)."""
    k = np.asarray(k, dtype=float)
    return (k + np.pi) % (2 * np.pi) - np.pi


def _check_momentum(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    if k.shape[-1] != 4:
        raise ConfigError(f"momentum must have 4 components, got shape {k.shape}")
    if not np.all(np.isfinite(k)):
        raise ConfigError("momentum must be finite")
    return k


def coefficients(spec: ModelSpec, k) -> np.ndarray:
    """Coefficients d(k) of the five generators, shape ``(..., 5)``."""
    k = _check_momentum(k)
    d = np.empty(k.shape[:-1] + (5,))
    if spec.family is Family.TIGHT_BINDING:
        k = wrap_momentum(k)
        d[..., :3] = np.sin(k[..., :3])
        d[..., 3] = spec.offset + 3.0 - np.cos(k).sum(axis=-1)
    else:
        d[..., :4] = k
        if spec.family is Family.CONTINUUM_3D:
            d[..., 3] = 0.0
    d[..., 4] = spec.delta
    return d


def coefficient_jacobian(spec: ModelSpec, k) -> np.ndarray:
    """∂d_i/∂k_μ, shape ``(..., 5, 4)``."""
    k = _check_momentum(k)
    jac = np.zeros(k.shape[:-1] + (5, 4))
    if spec.family is Family.TIGHT_BINDING:
        k = wrap_momentum(k)
        for mu in range(3):
            jac[..., mu, mu] = np.cos(k[..., mu])
        jac[..., 3, :] = np.sin(k)
    else:
        for mu in range(4):
            jac[..., mu, mu] = 1.0
        if spec.family is Family.CONTINUUM_3D:
            jac[..., 3, 3] = 0.0
    return jac


def build_hamiltonian(spec: ModelSpec, k) -> np.ndarray:
    """Real symmetric 6×6 Hamiltonian at momentum ``k`` (broadcasts over leading axes)."""
    return np.einsum("...i,iab->...ab", coefficients(spec, k), GENERATORS)


def hamiltonian_derivatives(spec: ModelSpec, k) -> np.ndarray:
    """Analytic ∂H/∂k_μ, shape ``(..., 4, 6, 6)``."""
    return np.einsum("...im,iab->...mab", coefficient_jacobian(spec, k), GENERATORS)


def hyperspherical_to_cartesian(p) -> np.ndarray:
    """Momentum of a hyperspherical point.

    ``p`` is a :class:`HyperPoint` or an array whose last axis holds
    (Ω, γ, θ, φ) or (Ω, γ, θ, φ, Λ).
    """
    p = np.asarray(p, dtype=float)
    radius, gamma, theta, phi = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    offset = p[..., 4] if p.shape[-1] > 4 else 0.0
    cg, sg = np.cos(gamma), np.sin(gamma)
    return np.stack(
        [
            -radius * cg * np.sin(theta),
            radius * cg * np.cos(theta),
            radius * sg * np.cos(phi),
            -radius * sg * np.sin(phi) + offset,
        ],
        axis=-1,
    )


def hyperspherical_jacobian(p) -> np.ndarray:
    """∂k/∂(Ω, γ, θ, φ), shape ``(..., 4, 4)`` (momentum index first)."""
    p = np.asarray(p, dtype=float)
    radius, gamma, theta, phi = p[..., 0], p[..., 1], p[..., 2], p[..., 3]
    cg, sg = np.cos(gamma), np.sin(gamma)
    ct, st = np.cos(theta), np.sin(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    zero = np.zeros_like(radius * gamma)
    rows = [
        [-cg * st, radius * sg * st, -radius * cg * ct, zero],
        [cg * ct, -radius * sg * ct, -radius * cg * st, zero],
        [sg * cp, radius * cg * cp, zero, -radius * sg * sp],
        [-sg * sp, -radius * cg * sp, zero, -radius * sg * cp],
    ]
    return np.stack([np.stack(np.broadcast_arrays(*r), axis=-1) for r in rows], axis=-2)


@dataclass(frozen=True)
class SymmetryReport:
    family: Family
    samples: int
    reality: float
    pt_residual: float
    chiral_residual: float
    hermiticity: float
    mirror_residual: float | None
    real_higgs_square: float

    @property
    def passed(self) -> bool:
        tol = 1e-12
        values = [self.reality, self.pt_residual, self.chiral_residual, self.hermiticity]
        if self.mirror_residual is not None:
            values.append(self.mirror_residual)
        return max(values) <= tol and self.real_higgs_square <= tol


def certify_symmetries(spec: ModelSpec, samples: int = 1000, seed: int = 0, scale: float = 2.0) -> SymmetryReport:
    """Residuals of [PT, H] (PT = K), {S, H} and hermiticity on random momenta.

    For the continuum families the mirror relation Γ H(k) Γ⁻¹ = H(kx, ky, -kz, -kw)
    is also checked.  ``real_higgs_square`` is |(-iΦ)² + 1|: Φ = σ2 itself squares to +1, its real
    form -iσ2 (the quarter turn it encodes on a real frame) squares to -1.
    """
    rng = np.random.default_rng(seed)
    if spec.family is Family.TIGHT_BINDING:
        k = rng.uniform(-np.pi, np.pi, size=(samples, 4))
    else:
        k = rng.normal(scale=scale, size=(samples, 4))
    h = build_hamiltonian(spec, k).astype(complex)
    pt = np.abs(h.conj() - h).max()
    chiral = np.abs(CHIRAL @ h + h @ CHIRAL).max()
    herm = np.abs(h - np.swapaxes(h.conj(), -1, -2)).max()
    mirror = None
    if spec.family is not Family.TIGHT_BINDING:
        k_mirror = k * np.array([1.0, 1.0, -1.0, -1.0])
        mirrored = MIRROR @ h @ MIRROR.T
        mirror = float(np.abs(mirrored - build_hamiltonian(spec, k_mirror)).max())
    phi = -1j * HIGGS
    return SymmetryReport(
        family=spec.family,
        samples=samples,
        reality=float(np.abs(h.imag).max()),
        pt_residual=float(pt),
        chiral_residual=float(chiral),
        hermiticity=float(herm),
        mirror_residual=mirror,
        real_higgs_square=float(np.abs(phi @ phi + np.eye(2)).max()),
    )
