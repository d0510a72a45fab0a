import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from tensormonopole.errors import ConfigError, DegeneracyCollision, MeshTooCoarse, TailTooFat
from tensormonopole.invariants import (
    dipole_planes,
    dipole_sphere,
    euler_plane,
    euler_polar_route,
    gauss_panels,
    graded_breaks,
    hypersphere_mesh,
    nodal_ring_invariant,
    periodic_nodes,
    qt_cartesian,
    qt_metric_route,
    tb_node_scan,
)
from tensormonopole.model import Family, ModelSpec, coefficients

TB = ModelSpec(Family.TIGHT_BINDING, 0.0)
D3 = ModelSpec(Family.CONTINUUM_3D, 0.0)


# ------------------------------------------------------------------ quadrature helpers


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 15), st.floats(-2, 2), st.floats(0.1, 3))
def test_gauss_panels_exact_for_polynomials(degree, a, width):
    breaks = np.linspace(a, a + width, 4)
    x, w = gauss_panels(breaks, 8)
    exact = ((a + width) ** (degree + 1) - a ** (degree + 1)) / (degree + 1)
    assert np.isclose(np.sum(w * x**degree), exact, rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("m", range(0, 7))
def test_periodic_nodes_exact_for_harmonics(m):
    x, w = periodic_nodes(16)
    assert np.isclose(np.sum(w * np.cos(m * x)), 2 * np.pi if m == 0 else 0.0, atol=1e-12)
    assert np.isclose(w.sum(), 2 * np.pi)


def test_graded_breaks_shape():
    b = graded_breaks(12.0, 0.1)
    assert b[0] == 0 and np.isclose(b[-1], 12.0)
    assert np.all(np.diff(b) > 0)
    assert np.isclose(b[1], 0.1)


@pytest.mark.parametrize("radius", [0.5, 1.0, 3.0])
def test_hypersphere_measure(radius):
    mesh = hypersphere_mesh(radius, (0, 0, 0, 0), 16, 16, 16)
    assert np.isclose(mesh.measure, 2 * np.pi**2 * radius**3, rtol=1e-12)


# ------------------------------------------------------------------ Q_T


@pytest.mark.parametrize("radius,center", [(0.7, (0, 0, 0, 0)), (1.3, (0.2, -0.1, 0.3, 0.1)), (0.5, (0, 0, 0, 0.3))])
def test_qt_invariant_under_deformation(spec0, radius, center):
    assert abs(qt_cartesian(spec0, radius, center, resolution=24).value - 1) < 0.01


def test_qt_orientation_and_band(spec0):
    out = qt_cartesian(spec0, resolution=24)
    assert np.isclose(qt_cartesian(spec0, resolution=24, orientation=-1).value, -out.value)
    assert abs(qt_cartesian(spec0, band=-1, resolution=24).value - out.value) < 0.01
    assert qt_cartesian(spec0, band=0, resolution=24).value == 0.0


def test_qt_surface_not_enclosing(spec0):
    assert abs(qt_cartesian(spec0, 1.0, (0, 0, 0, 2.5), resolution=24).value) < 0.01


def test_qt_mesh_budget(spec0):
    with pytest.raises(MeshTooCoarse):
        qt_cartesian(spec0, 1.0, (0.9, 0, 0, 0), resolution=12)


def test_qt_config_errors(spec0):
    with pytest.raises(ConfigError):
        qt_cartesian(spec0, radius=-1)
    with pytest.raises(ConfigError):
        qt_cartesian(spec0, band=2)
    with pytest.raises(ConfigError):
        qt_cartesian(spec0, resolution=3)


def test_metric_route_report(spec0):
    r = qt_metric_route(spec0, offset=0.3, resolution=32)
    assert abs(r.value - 1) < 0.01
    d = r.to_dict()
    assert "wall_time" not in d and d["name"] == "Q_T (metric)"
    assert "wall_time" in r.to_dict(include_time=True)


def test_metric_route_is_radius_independent(spec0):
    for omega in (0.5, 2.0):
        assert abs(qt_metric_route(spec0, omega=omega, resolution=32).value - 1) < 0.01


def test_metric_route_provider_is_used(spec0):
    """Doubling the metric multiplies √det G by 2^{3/2}."""
    from tensormonopole.geometry import quantum_geometry
    from tensormonopole.model import hyperspherical_jacobian, hyperspherical_to_cartesian

    def provider(pts):
        jac = hyperspherical_jacobian(pts[..., :4])[..., :, 1:]
        g, _ = quantum_geometry(spec0, hyperspherical_to_cartesian(pts), 1, jacobian=jac)
        return 2 * np.trace(g, axis1=-2, axis2=-1)

    r = qt_metric_route(spec0, resolution=32, metric_provider=provider)
    assert np.isclose(r.value, 2**1.5, rtol=1e-3)


# ------------------------------------------------------------------ planes


def test_plane_through_ring_rejected(spec1):
    with pytest.raises(DegeneracyCollision):
        euler_plane(spec1, 1.0)
    with pytest.raises(DegeneracyCollision):
        euler_polar_route(spec1, -1.0, 4.0)


def test_plane_reversal(spec1):
    a = euler_plane(spec1, 0.5, 0)
    b = euler_plane(spec1, 0.5, 0, orientation=-1)
    assert np.isclose(a.value, -b.value)


@pytest.mark.parametrize("kpar", [0.5, 2.0])
def test_continuous_convention_dispersive_half(spec1, kpar):
    """Under the continuous orientation the dispersive bands carry +1/2 on both sides of the ring."""
    for band in (-1, 1):
        assert abs(euler_plane(spec1, kpar, band, convention="continuous").value - 0.5) < 0.01


def test_mirror_plane_symmetric(spec1):
    assert np.isclose(euler_plane(spec1, 0.5, 0).value, euler_plane(spec1, -0.5, 0).value, atol=1e-6)


def test_small_extent_has_fat_tail(spec1):
    with pytest.raises(TailTooFat):
        euler_plane(spec1, 0.5, 0, extent=2.0)
    with pytest.raises(TailTooFat):
        euler_plane(spec1, 0.5, 0, extent=0.5)


def test_order_validation(spec1):
    for bad in (1, 2.5):
        with pytest.raises(ConfigError):
            euler_plane(spec1, 0.5, 0, order=bad)
    with pytest.raises(ConfigError):
        euler_plane(spec1, 0.5, 0, convention="sideways")


def test_nodal_ring_needs_delta(spec0):
    with pytest.raises(ConfigError):
        nodal_ring_invariant(spec0)


@pytest.mark.parametrize("delta", [0.5, 2.0])
def test_nodal_ring_scales_with_delta(delta):
    r = nodal_ring_invariant(ModelSpec(Family.CONTINUUM_4D, delta), extent=12 * delta)
    assert abs(r.value - 2) < 0.05


def test_planar_sum_rule_off_ring(spec1):
    """Integrated sum rule on a plane where the pointwise band sum does not vanish."""
    total = sum(euler_plane(spec1, 0.5, b).value for b in (-1, 0, 1))
    assert abs(total) < 0.02


# ------------------------------------------------------------------ 3D reduction


def test_dipole_family_checks(spec0):
    with pytest.raises(ConfigError):
        dipole_sphere(spec0)
    with pytest.raises(ConfigError):
        dipole_planes(spec0, 1.0)
    with pytest.raises(ConfigError):
        dipole_sphere(D3, hemisphere="left")


def test_dipole_hemispheres_cancel():
    up = dipole_sphere(D3, hemisphere="upper", resolution=32).value
    down = dipole_sphere(D3, hemisphere="lower", resolution=32).value
    assert np.isclose(up, -down, atol=1e-6)
    assert abs(up - 1) < 0.02


def test_dipole_sphere_radius_independent():
    for r in (0.3, 3.0):
        assert abs(dipole_sphere(D3, radius=r, hemisphere="upper", resolution=32).value - 1) < 0.02


def test_separated_dipole_opposite_charges():
    spec = ModelSpec(Family.CONTINUUM_3D, 1.0)
    top = dipole_sphere(spec, (0, 0, 1), 0.5, resolution=32).value
    bottom = dipole_sphere(spec, (0, 0, -1), 0.5, resolution=32).value
    assert abs(top - 2) < 0.05 and abs(bottom + 2) < 0.05
    assert abs(dipole_sphere(spec, (0, 0, 0), 2.5, resolution=48).value) < 0.05


# ------------------------------------------------------------------ tight-binding


def _node_oracle(lam):
    """kw roots of the Λ-dependent coefficient along kx = ky = kz = 0 (bracketing root finder)."""
    spec = ModelSpec(Family.TIGHT_BINDING, 0.0, lam)

    def d3(kw):
        return coefficients(spec, np.array([0.0, 0.0, 0.0, kw]))[3]

    root = brentq(d3, 0.0, np.pi) if d3(0.0) * d3(np.pi) < 0 else 0.0
    return sorted({round(root, 12), round(-root, 12)})


@pytest.mark.parametrize("lam", [0.0, 0.3, 0.5, 0.9])
def test_tb_nodes_match_oracle(lam):
    scan = tb_node_scan(TB, [lam])[0]
    assert len(scan.nodes) == 2
    kws = sorted(n[1] for n in scan.nodes)
    np.testing.assert_allclose(kws, _node_oracle(lam), atol=1e-3)
    assert all(abs(n[0]) < 1e-3 for n in scan.nodes)


def test_tb_nodes_merge_and_gap_out():
    merged, gapped = tb_node_scan(TB, [1.0, 1.2])
    assert len(merged.nodes) == 1 and abs(merged.nodes[0][1]) < 1e-3
    assert gapped.nodes == [] and gapped.min_gap > 0.1


def test_tb_scan_rejects_other_families(spec0):
    with pytest.raises(ConfigError):
        tb_node_scan(spec0, [0.0])
    with pytest.raises(ConfigError):
        tb_node_scan(TB, [np.nan])


def test_tb_node_charges_cancel():
    spec = ModelSpec(Family.TIGHT_BINDING, 0.0, 0.5)
    kw = np.arccos(0.5)
    plus = qt_cartesian(spec, 0.3, (0, 0, 0, kw), resolution=24).value
    minus = qt_cartesian(spec, 0.3, (0, 0, 0, -kw), resolution=24).value
    assert abs(abs(plus) - 1) < 0.01 and abs(plus + minus) < 0.01
