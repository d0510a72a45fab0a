"""Band subspaces, real orthonormal frames and their orientation.

The six bands come in three pairs n = -1, 0, +1 (ordered by energy).  For
δ = 0 each pair is exactly degenerate; for δ ≠ 0 the dispersive pairs split
(E = n√(k⊥² + (k∥ ± δ)²)) but stay separated from each other away from the
nodal ring, so a pair is always treated as one rank-2 real subspace.

Orientation
-----------
Curvature scalars f = F¹² are pseudo-scalars: they flip sign with the
orientation of the frame.  Every model here is chiral (S = diag(-1, 1, 1)⊗σ0
anticommutes with H), which gives a canonical, continuous orientation of
each subspace wherever it is gapped:

* dispersive pairs have a non-degenerate projection onto the S = -1 sector,
  so the frame is oriented by the sign of that 2×2 block;
* the flat pair lies in ker q ⊂ S = +1 sector (q is the off-diagonal chiral
  block of H), and the frame (z1, z2) is oriented by sign det[q; z1; z2].

The overall sign is pinned so that the flat band has χ₁ = -1 inside the
nodal ring.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import polar

from .errors import DegeneracyCollision, FrameBreakdown, NotRealizable

__all__ = [
    "BANDS",
    "DEFAULT_TOL",
    "BandFrame",
    "band_columns",
    "diagonalize",
    "orientation_signs",
    "oriented_frames",
    "eigensystem",
    "realize_frame",
    "overlap",
    "smooth_transport",
    "transport_loop",
    "sewing_phi",
]

BANDS = (-1, 0, 1)
DEFAULT_TOL = 1e-9

# Global orientation pin (see module docstring).
_ORIENTATION_PIN = -1.0


@dataclass(frozen=True)
class BandFrame:
    band: int
    energies: np.ndarray
    frame: np.ndarray
    anchor: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.band not in BANDS:
            raise ValueError(f"band index must be one of {BANDS}, got {self.band}")

    @property
    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.T


def band_columns(band: int) -> slice:
    if band not in BANDS:
        raise ValueError(f"band index must be one of {BANDS}, got {band}")
    start = 2 * (band + 1)
    return slice(start, start + 2)


def diagonalize(h: np.ndarray, tol: float = DEFAULT_TOL, bands=BANDS):
    """Batched eigen-decomposition with a check that the requested pairs are isolated.

    Returns ``(energies, vectors)`` with shapes ``(..., 6)`` and ``(..., 6, 6)``.
    Raises :class:`DegeneracyCollision` if any requested pair is closer than
    ``10 * tol`` to a neighbouring pair.
    """
    energies, vectors = np.linalg.eigh(h)
    gaps = []
    if -1 in bands or 0 in bands:
        gaps.append(energies[..., 2] - energies[..., 1])
    if 0 in bands or 1 in bands:
        gaps.append(energies[..., 4] - energies[..., 3])
    if gaps:
        smallest = np.min(np.stack(gaps), axis=0)
        bad = smallest < 10 * tol
        if np.any(bad):
            where = np.argwhere(np.atleast_1d(bad))
            raise DegeneracyCollision(
                f"{int(bad.sum())} point(s) with inter-band gap below {10 * tol:g}"
                f" (smallest gap {float(np.min(smallest)):.3e}, first at index {where[0].tolist()})"
            )
    return energies, vectors


def orientation_signs(h: np.ndarray, frames: np.ndarray, band: int) -> np.ndarray:
    """Sign (±1) that makes ``frames`` positively oriented; shape ``frames.shape[:-2]``."""
    if band == 0:
        q = h[..., :2, 2:]
        z = np.swapaxes(frames[..., 2:, :], -1, -2)
        det = np.linalg.det(np.concatenate([q, z], axis=-2))
    else:
        det = np.linalg.det(frames[..., :2, :])
    sign = np.where(det >= 0, 1.0, -1.0)
    return _ORIENTATION_PIN * sign


def oriented_frames(h: np.ndarray, vectors: np.ndarray, band: int) -> np.ndarray:
    """Columns of ``vectors`` belonging to ``band``, second column negated where needed."""
    frames = vectors[..., :, band_columns(band)].copy()
    sign = orientation_signs(h, frames, band)
    frames[..., :, 1] *= sign[..., None]
    return frames


def eigensystem(h: np.ndarray, tol: float = DEFAULT_TOL, anchor=None) -> tuple[BandFrame, BandFrame, BandFrame]:
    """The three twofold subspaces of a single real symmetric Hamiltonian, sorted by n."""
    h = np.asarray(h)
    if h.shape != (6, 6):
        raise ValueError(f"expected a 6x6 matrix, got {h.shape}")
    if np.abs(h - h.T).max() > 1e-12 * max(1.0, np.abs(h).max()) or np.iscomplexobj(h) and np.abs(h.imag).max() > 0:
        raise ValueError("Hamiltonian must be real symmetric")
    h = np.real(h)
    energies, vectors = diagonalize(h, tol)
    out = []
    for band in BANDS:
        cols = band_columns(band)
        out.append(BandFrame(band, energies[cols].copy(), oriented_frames(h, vectors, band), anchor))
    return tuple(out)


def realize_frame(frame: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Real orthonormal basis of the span of a complex 6×2 frame.

    The span must be invariant under complex conjugation; the real and
    imaginary parts of the columns then span the same real plane.
    """
    frame = np.asarray(frame)
    stacked = np.concatenate([frame.real, frame.imag], axis=1)
    u, s, _ = np.linalg.svd(stacked)
    if s[2] > tol * max(s[0], 1.0):
        raise NotRealizable(f"subspace is not conjugation invariant (third singular value {s[2]:.3e})")
    real = u[:, :2]
    projector = frame @ frame.conj().T
    if np.abs(projector - real @ real.T).max() > 1e-10:
        raise NotRealizable("realized frame does not reproduce the projector")
    return real


def overlap(a: BandFrame | np.ndarray, b: BandFrame | np.ndarray) -> np.ndarray:
    """2×2 overlap aᵀb between two frames."""
    fa = a.frame if isinstance(a, BandFrame) else np.asarray(a)
    fb = b.frame if isinstance(b, BandFrame) else np.asarray(b)
    return fa.T @ fb


def smooth_transport(reference: BandFrame, target: BandFrame, min_det: float = 0.1) -> BandFrame:
    """Rotate ``target`` within its subspace so its overlap with ``reference`` is symmetric positive definite."""
    if reference.band != target.band:
        raise ValueError("cannot transport between different bands")
    o = overlap(reference, target)
    if abs(np.linalg.det(o)) <= min_det:
        raise FrameBreakdown(f"overlap determinant {np.linalg.det(o):.3f} too small; refine the mesh")
    w, _ = polar(o)
    return BandFrame(target.band, target.energies, target.frame @ w.T, target.anchor)


def transport_loop(frames: list[BandFrame], min_det: float = 0.1) -> np.ndarray:
    """Holonomy of a closed chain of frames: the rotation taking the start frame to its transported image.

    Returns the 2×2 orthogonal matrix W with transported_start = start @ W.
    """
    current = frames[0]
    for nxt in frames[1:]:
        current = smooth_transport(current, nxt, min_det)
    current = smooth_transport(current, frames[0], min_det)
    return frames[0].frame.T @ current.frame


def sewing_phi(frame: BandFrame, reference: BandFrame, min_det: float = 0.1) -> np.ndarray:
    """Higgs field Φ in the orientation of ``frame``: +σ2 if it agrees with ``reference``, -σ2 otherwise."""
    det = np.linalg.det(overlap(reference, frame))
    if abs(det) <= min_det:
        raise FrameBreakdown(f"overlap determinant {det:.3f} too small to compare orientations")
    sigma2 = np.array([[0, -1j], [1j, 0]])
    return np.sign(det) * sigma2
