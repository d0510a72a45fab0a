import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensormonopole.errors import ConfigError, DegeneracyCollision
from tensormonopole.geometry import (
    HYPERSPHERICAL_LABELS,
    qgt_plaquette,
    qgt_sum_over_states,
    quantum_geometry,
    tensor_source,
    tensor_three_form,
)
from tensormonopole.model import Family, HyperPoint, ModelSpec, hyperspherical_jacobian, hyperspherical_to_cartesian

from conftest import random_shell


def square(center, mu, nu, a):
    e_mu, e_nu = np.eye(4)[mu] * a / 2, np.eye(4)[nu] * a / 2
    c = np.asarray(center, dtype=float)
    return [c - e_mu - e_nu, c + e_mu - e_nu, c + e_mu + e_nu, c - e_mu + e_nu]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([-1, 0, 1]), st.floats(-1.5, 1.5))
def test_tensor_symmetries(seed, band, delta):
    rng = np.random.default_rng(seed)
    spec = ModelSpec(Family.CONTINUUM_4D, delta)
    k = random_shell(rng, 1)[0]
    try:
        g, f = quantum_geometry(spec, k, band)
    except DegeneracyCollision:
        return
    assert np.array_equal(f, -f.T)
    np.testing.assert_allclose(g, np.transpose(g, (1, 0, 3, 2)), atol=1e-12)
    trace = np.trace(g, axis1=-2, axis2=-1)
    assert np.array_equal(trace, trace.T)
    assert np.all(np.diagonal(np.diagonal(g, axis1=0, axis2=1)) >= -1e-12)


def test_sample_fields(spec0):
    s = qgt_sum_over_states(spec0, [0.3, 0.5, 0.2, 0.7], 1, "x", "y")
    t = qgt_sum_over_states(spec0, [0.3, 0.5, 0.2, 0.7], 1, "y", "x")
    assert s.curvature == -t.curvature
    assert np.isclose(s.trace_metric, t.trace_metric)
    with pytest.raises(ConfigError):
        qgt_sum_over_states(spec0, [0.3, 0.5, 0.2, 0.7], 1, "x", "q")
    with pytest.raises(ConfigError):
        qgt_sum_over_states(spec0, [0.3, 0.5, 0.2, 0.7], 1, 0, 1, coords="polar")


def test_flat_band_cross_route_at_unit_kx(spec0):
    f = qgt_sum_over_states(spec0, [1, 0, 0, 0], 0, "kx", "ky").curvature
    assert abs(f - qgt_plaquette(spec0, square([1, 0, 0, 0], 0, 1, 1e-3), 0)) <= 1e-6


@pytest.mark.parametrize("band", [-1, 0, 1])
def test_scale_invariance(spec0, band):
    k = np.array([0.3, -0.4, 0.5, 0.6])
    g1, f1 = quantum_geometry(spec0, k, band)
    g2, f2 = quantum_geometry(spec0, 2 * k, band)
    np.testing.assert_allclose(g2, g1 / 4, atol=1e-12)
    np.testing.assert_allclose(f2, f1 / 4, atol=1e-12)


def test_metric_spectrum_at_delta_zero(spec0, rng):
    """|k|² G has eigenvalues (0, ½, 1, 1) on dispersive bands and (0, 0, 2, 2) on the flat band."""
    for k in random_shell(rng, 5):
        r2 = k @ k
        for band, expected in ((1, [0, 0.5, 1, 1]), (-1, [0, 0.5, 1, 1]), (0, [0, 0, 2, 2])):
            g, _ = quantum_geometry(spec0, k, band)
            ev = np.linalg.eigvalsh(np.trace(g, axis1=-2, axis2=-1) * r2)
            np.testing.assert_allclose(ev, expected, atol=1e-10)


def test_hyperspherical_chain_rule(spec1):
    p = HyperPoint(1.2, 0.5, 1.0, 2.0, 0.3)
    s = qgt_sum_over_states(spec1, p, 0, "gamma", "phi", coords="hyperspherical")
    k = hyperspherical_to_cartesian(p)
    jac = hyperspherical_jacobian(np.asarray(p)[:4])
    g, f = quantum_geometry(spec1, k, 0)
    i, j = HYPERSPHERICAL_LABELS.index("gamma"), HYPERSPHERICAL_LABELS.index("phi")
    assert np.isclose(s.curvature, jac[:, i] @ f @ jac[:, j])
    np.testing.assert_allclose(s.metric, np.einsum("m,mnab,n->ab", jac[:, i], g, jac[:, j]), atol=1e-12)


def test_metric_positive_on_three_sphere(spec0, rng):
    n = 200
    pts = np.stack([np.ones(n), rng.uniform(0, np.pi / 2, n), rng.uniform(0, 2 * np.pi, n),
                    rng.uniform(0, 2 * np.pi, n)], axis=-1)
    jac = hyperspherical_jacobian(pts)[..., 1:]
    for band in (-1, 0, 1):
        g, _ = quantum_geometry(spec0, hyperspherical_to_cartesian(pts), band, jacobian=jac)
        ev = np.linalg.eigvalsh(np.trace(g, axis1=-2, axis2=-1))
        assert ev.min() >= -1e-10


def test_degenerate_plaquette_is_zero(spec1):
    c = np.array([0.3, 0.2, 0.5, 0.1])
    assert qgt_plaquette(spec1, [c, c, c, c], 0) == 0.0
    assert qgt_plaquette(spec1, [c, c + [1e-3, 0, 0, 0], c + [2e-3, 0, 0, 0]], 0) == 0.0


def test_plaquette_second_order(spec1):
    c = np.array([0.4, 0.3, 0.5, 0.2])
    exact = quantum_geometry(spec1, c, 0)[1][0, 1]
    errors = [abs(qgt_plaquette(spec1, square(c, 0, 1, a), 0) - exact) for a in (0.08, 0.04)]
    assert 3.0 < errors[0] / errors[1] < 5.0


def test_plaquette_orientation_reversal(spec1):
    c = np.array([0.4, 0.3, 0.5, 0.2])
    loop = square(c, 0, 2, 1e-2)
    assert np.isclose(qgt_plaquette(spec1, loop, 1), -qgt_plaquette(spec1, loop[::-1], 1), rtol=1e-10)


def test_pointwise_band_sum_at_delta_zero(spec0, rng):
    """At δ = 0 the flat-band curvature is -2× the dispersive one once the exterior plane sign is applied."""
    for k in random_shell(rng, 10):
        f = [quantum_geometry(spec0, k, b)[1] for b in (-1, 0, 1)]
        np.testing.assert_allclose(-f[0] + f[1] - f[2], 0, atol=1e-10)


# ------------------------------------------------------------------ three-form


def test_source_unit_kx(spec0):
    s = tensor_three_form(spec0, [1, 0, 0, 0], 1)
    np.testing.assert_allclose(s.source, [1, 0, 0, 0], atol=1e-5)


def test_source_radius_two(spec0):
    s = tensor_three_form(spec0, [0, 2, 0, 0], -1)
    assert np.isclose(np.linalg.norm(s.source), 1 / 8, rtol=1e-5)


def test_flat_band_source_vanishes(spec0, rng):
    for k in random_shell(rng, 5):
        assert np.array_equal(tensor_three_form(spec0, k, 0).source, np.zeros(4))
    assert np.array_equal(tensor_source(spec0, random_shell(rng, 7), 0), np.zeros((7, 4)))


def test_three_form_antisymmetry(spec0):
    s = tensor_three_form(spec0, [0.3, 0.6, -0.2, 0.9], 1)
    for idx in [(0, 1, 2), (1, 2, 3), (0, 2, 3)]:
        a, b, c = idx
        assert s.h(a, b, c) == -s.h(b, a, c) == s.h(b, c, a) == -s.h(c, b, a)
    assert s.h(0, 0, 1) == 0.0


def test_three_form_richardson(spec0):
    k = np.array([0.3, 0.6, -0.2, 0.9])
    exact = k / (k @ k) ** 2
    errs = [np.abs(tensor_three_form(spec0, k, 1, step=h).source - exact).max() for h in (0.04, 0.02)]
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_batched_source_matches_single(spec1, rng):
    k = random_shell(rng, 6)
    batch = tensor_source(spec1, k, 1, step=1e-4)
    for kk, row in zip(k, batch):
        np.testing.assert_allclose(tensor_three_form(spec1, kk, 1, step=1e-4).source, row, rtol=1e-9, atol=1e-12)


def test_source_near_node_collides(spec0):
    with pytest.raises(DegeneracyCollision):
        tensor_source(spec0, np.zeros((1, 4)), 1)
