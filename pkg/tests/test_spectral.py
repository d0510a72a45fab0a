import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensormonopole.errors import DegeneracyCollision, FrameBreakdown, NotRealizable
from tensormonopole.model import Family, ModelSpec, build_hamiltonian
from tensormonopole.spectral import (
    BandFrame,
    eigensystem,
    overlap,
    realize_frame,
    sewing_phi,
    smooth_transport,
    transport_loop,
)

from conftest import random_shell

SIGMA2 = np.array([[0, -1j], [1j, 0]])


def rotation(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def test_energies_at_unit_kz(spec0):
    frames = eigensystem(build_hamiltonian(spec0, [0, 0, 1, 0]))
    assert [f.band for f in frames] == [-1, 0, 1]
    for f, e in zip(frames, (-1, 0, 1)):
        np.testing.assert_allclose(f.energies, [e, e], atol=1e-14)


def test_origin_collides(spec0):
    with pytest.raises(DegeneracyCollision):
        eigensystem(build_hamiltonian(spec0, [0, 0, 0, 0]))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.floats(-2, 2))
def test_frames_orthonormal_and_eigen(seed, delta):
    rng = np.random.default_rng(seed)
    spec = ModelSpec(Family.CONTINUUM_4D, delta)
    k = random_shell(rng, 1, 0.5, 2.0)[0]
    h = build_hamiltonian(spec, k)
    try:
        frames = eigensystem(h)
    except DegeneracyCollision:
        return
    for f in frames:
        assert np.abs(f.frame.T @ f.frame - np.eye(2)).max() <= 1e-12
        assert np.abs(h @ f.frame - f.frame @ np.diag(f.energies)).max() <= 1e-10
        assert f.frame.dtype == float


def test_projector_gauge_independent(spec1, rng):
    """Two diagonalizations of differently rotated (but equal) matrices give the same projectors."""
    k = np.array([0.3, 0.5, 0.2, 0.9])
    h = build_hamiltonian(spec1, k)
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    a = eigensystem(h)
    b = eigensystem(q.T @ (q @ h @ q.T) @ q)
    for fa, fb in zip(a, b):
        np.testing.assert_allclose(fa.projector, fb.projector, atol=1e-10)


def test_orientation_is_continuous_along_a_path(spec1):
    """The canonical orientation needs no transport: neighbours overlap with det close to +1."""
    t = np.linspace(0, 2 * np.pi, 200)
    path = np.stack([np.cos(t), np.sin(t), 0.3 + 0 * t, 0.2 + 0 * t], axis=-1) * 1.5
    for band in (-1, 0, 1):
        frames = [eigensystem(build_hamiltonian(spec1, k))[band + 1] for k in path]
        dets = [np.linalg.det(overlap(a, b)) for a, b in zip(frames, frames[1:])]
        assert min(dets) > 0.9


def test_realize_real_frame_keeps_projector(spec0):
    f = eigensystem(build_hamiltonian(spec0, [0.3, 0.1, 1, 0]))[2].frame
    r = realize_frame(f.astype(complex))
    np.testing.assert_allclose(r @ r.T, f @ f.T, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi), st.integers(0, 10**6))
def test_realize_complex_rotated_frame(alpha, beta, seed):
    """A PT-symmetric subspace given by a complex basis (phase and U(2) mixing) is realized."""
    rng = np.random.default_rng(seed)
    spec = ModelSpec(Family.CONTINUUM_4D, 0.0)
    f = eigensystem(build_hamiltonian(spec, random_shell(rng, 1)[0]))[0].frame
    u = np.array([[np.cos(beta), 1j * np.sin(beta)], [1j * np.sin(beta), np.cos(beta)]])
    complex_frame = np.exp(1j * alpha) * f @ u
    r = realize_frame(complex_frame)
    assert np.isrealobj(r)
    np.testing.assert_allclose(r @ r.T, f @ f.T, atol=1e-12)


def test_realize_rejects_complex_subspace():
    v = np.zeros((6, 2), dtype=complex)
    v[0, 0] = 1
    v[1, 0] = 1j
    v[:, 0] /= np.linalg.norm(v[:, 0])
    v[2, 1] = 1
    with pytest.raises(NotRealizable):
        realize_frame(v)


def test_transport_identity_and_rotation(spec1):
    ref = eigensystem(build_hamiltonian(spec1, [0.2, 0.4, 0.3, 0.1]))[1]
    same = smooth_transport(ref, ref)
    np.testing.assert_allclose(same.frame, ref.frame, atol=1e-14)
    for r in (rotation(0.7), rotation(2.5) @ np.diag([1, -1])):
        rotated = BandFrame(ref.band, ref.energies, ref.frame @ r)
        np.testing.assert_allclose(smooth_transport(ref, rotated).frame, ref.frame, atol=1e-12)


def test_transport_makes_overlap_spd(spec1):
    a = eigensystem(build_hamiltonian(spec1, [0.2, 0.4, 0.3, 0.1]))[2]
    b = eigensystem(build_hamiltonian(spec1, [0.25, 0.38, 0.32, 0.1]))[2]
    t = smooth_transport(a, b)
    o = overlap(a, t)
    np.testing.assert_allclose(o, o.T, atol=1e-12)
    assert np.all(np.linalg.eigvalsh(o) > 0)
    np.testing.assert_allclose(t.projector, b.projector, atol=1e-12)
    again = smooth_transport(a, t)
    np.testing.assert_allclose(again.frame, t.frame, atol=1e-12)


def test_transport_breakdown(spec0):
    """Frames spanning orthogonal planes cannot be aligned."""
    frames = eigensystem(build_hamiltonian(spec0, [0.3, 0.2, 1, 0]))
    ref = frames[2]
    foreign = BandFrame(ref.band, ref.energies, frames[0].frame)
    with pytest.raises(FrameBreakdown):
        smooth_transport(ref, foreign)
    with pytest.raises(FrameBreakdown):
        sewing_phi(foreign, ref)


def test_loop_holonomy_is_a_rotation(spec1):
    """Orientation consistency: the holonomy around a small contractible loop has det +1."""
    center = np.array([0.6, 0.2, 0.4, 0.3])
    t = np.linspace(0, 2 * np.pi, 40, endpoint=False)
    loop = center + 0.2 * np.stack([np.cos(t), np.sin(t), 0 * t, 0 * t], axis=-1)
    for band in (-1, 0, 1):
        frames = [eigensystem(build_hamiltonian(spec1, k))[band + 1] for k in loop]
        w = transport_loop(frames)
        assert np.isclose(np.linalg.det(w), 1.0)
        np.testing.assert_allclose(w.T @ w, np.eye(2), atol=1e-12)


def test_sewing_phi(spec1):
    ref = eigensystem(build_hamiltonian(spec1, [0.2, 0.4, 0.3, 0.1]))[1]
    np.testing.assert_array_equal(sewing_phi(ref, ref), SIGMA2)
    swapped = BandFrame(ref.band, ref.energies, ref.frame[:, ::-1])
    np.testing.assert_array_equal(sewing_phi(swapped, ref), -SIGMA2)
    f = 0.37
    curvature = np.array([[0, f], [-f, 0]])
    assert np.isclose(np.trace(sewing_phi(ref, ref) @ curvature), 2j * f)


def test_band_frame_rejects_bad_band():
    with pytest.raises(ValueError):
        BandFrame(2, np.zeros(2), np.zeros((6, 2)))
