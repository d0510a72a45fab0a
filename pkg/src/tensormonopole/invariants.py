"""Topological invariants evaluated by explicit quadrature.

Every routine returns an :class:`InvariantReport` whose ``error`` field is the
difference between the value on the requested mesh and on a mesh with half
the resolution along each axis.

Quadrature rules: Gauss–Legendre panels on bounded non-periodic axes,
trapezoid on periodic angular axes.  Planar Euler integrals run over all of
ℝ²; the curvature decays algebraically and the part outside the finite mesh
is added from a power-law fit to the outer 20% of the domain.

Orientation of dispersive bands on planes
-----------------------------------------
The canonical chiral orientation (see :mod:`tensormonopole.spectral`) is
continuous in momentum, and with it the flat-band Euler numbers are -1
inside and +1 outside the nodal ring.  For the dispersive bands it gives
+½ on both sides, so the sum rule Σ_n χ₁ⁿ = 0 only holds inside.  The
``"plane-center"`` convention instead orients the dispersive frame of each
plane relative to its value at the plane centre k⊥ = 0, using the sign of
det(orbital-3 block)·det(orbital-1 block) there.  That sign equals
sign(δ² − k∥²), so it flips the dispersive bands outside the ring and
restores the sum rule on every plane.  The flat band is unaffected.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigError, DegeneracyCollision, MeshTooCoarse, NonRotationalSymmetry, TailTooFat
from .geometry import quantum_geometry, tensor_source
from .model import Family, ModelSpec, build_hamiltonian, hyperspherical_jacobian, hyperspherical_to_cartesian
from .spectral import BANDS, DEFAULT_TOL, band_columns, diagonalize, oriented_frames

__all__ = [
    "SurfaceMesh",
    "InvariantReport",
    "NodeScan",
    "gauss_panels",
    "periodic_nodes",
    "graded_breaks",
    "hypersphere_mesh",
    "qt_cartesian",
    "qt_metric_route",
    "plane_orientation",
    "euler_plane",
    "euler_polar_route",
    "nodal_ring_invariant",
    "dipole_sphere",
    "dipole_planes",
    "tb_node_scan",
]

MESH_BUDGET = 0.05
TAIL_BUDGET = 0.05


# --------------------------------------------------------------------------- meshes


def gauss_panels(breaks, order: int):
    """Composite Gauss–Legendre nodes and weights over consecutive ``breaks``."""
    x, w = np.polynomial.legendre.leggauss(order)
    breaks = np.asarray(breaks, dtype=float)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * w
    return nodes.ravel(), weights.ravel()


def periodic_nodes(n: int, start: float = 0.0):
    """Trapezoid nodes and weights on [start, start + 2π)."""
    nodes = start + 2 * np.pi * (np.arange(n) + 0.5) / n
    return nodes, np.full(n, 2 * np.pi / n)


def graded_breaks(extent: float, scale: float, ratio: float = 1.6) -> np.ndarray:
    """Panel breakpoints on [0, extent], geometric from ``scale`` near 0."""
    breaks = [0.0]
    width = scale
    while breaks[-1] + width < extent:
        breaks.append(breaks[-1] + width)
        width *= ratio
    if extent - breaks[-1] < 0.3 * width / ratio and len(breaks) > 1:
        breaks[-1] = extent
    else:
        breaks.append(extent)
    return np.array(breaks)


@dataclass(frozen=True)
class SurfaceMesh:
    kind: str
    resolution: tuple
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    center: tuple = (0.0, 0.0, 0.0, 0.0)
    radius: float | None = None
    extent: float | None = None
    labels: tuple = ()

    @property
    def measure(self) -> float:
        return float(self.weights.sum())

    def describe(self) -> dict:
        return {
            "kind": self.kind,
            "resolution": list(self.resolution),
            "center": list(self.center),
            "radius": self.radius,
            "extent": self.extent,
            "labels": list(self.labels),
        }


@dataclass
class InvariantReport:
    name: str
    value: float
    band: int
    mesh: dict
    error: float
    wall_time: float | None = None
    details: dict = field(default_factory=dict)

    def to_dict(self, include_time: bool = False) -> dict:
        out = asdict(self)
        if not include_time:
            out.pop("wall_time")
        return out


def _check_band(band):
    if band not in BANDS:
        raise ConfigError(f"band must be one of {BANDS}, got {band!r}")


def _check_order(order):
    if not isinstance(order, (int, np.integer)) or order < 2:
        raise ConfigError(f"quadrature order must be an integer >= 2, got {order!r}")
    return int(order)


def _check_resolution(n, minimum=8):
    if int(n) != n or n < minimum:
        raise ConfigError(f"resolution must be an integer >= {minimum}, got {n!r}")
    return int(n)


def hypersphere_mesh(radius: float, center, n_gamma: int, n_theta: int, n_phi: int) -> SurfaceMesh:
    """Product mesh on S³ with the measure Ω³ sinγ cosγ dγ dθ dφ."""
    gamma, wg = gauss_panels([0.0, np.pi / 4, np.pi / 2], max(1, n_gamma // 2))
    theta, wt = periodic_nodes(n_theta)
    phi, wp = periodic_nodes(n_phi)
    grid = np.stack(np.meshgrid(gamma, theta, phi, indexing="ij"), axis=-1)
    params = np.concatenate([np.full(grid.shape[:-1] + (1,), radius), grid], axis=-1)
    dv = radius**3 * np.sin(gamma) * np.cos(gamma)
    weights = (wg * dv)[:, None, None] * wt[None, :, None] * wp[None, None, :]
    center = tuple(float(c) for c in center)
    return SurfaceMesh("S3", (n_gamma, n_theta, n_phi), params, weights, center, radius, None, ("gamma", "theta", "phi"))


# --------------------------------------------------------------------------- Q_T


def _qt_flux(spec, radius, center, band, n, step, orientation):
    mesh = hypersphere_mesh(radius, center, n, n, n)
    k = hyperspherical_to_cartesian(mesh.points) + np.asarray(mesh.center)
    source = tensor_source(spec, k, band, step)
    normal = (k - np.asarray(mesh.center)) / radius
    flux = np.einsum("...i,...i->...", source, normal)
    return orientation * float(np.sum(flux * mesh.weights)) / (2 * np.pi**2), mesh


def qt_cartesian(spec: ModelSpec, radius: float = 1.0, center=(0.0, 0.0, 0.0, 0.0), band: int = 1,
                 resolution: int = 48, step=None, orientation: int = 1) -> InvariantReport:
    """Q_T = (1/2π²) ∮ H·dS over the three-sphere of ``radius`` around ``center``.

    ``orientation`` = -1 uses the inward normal.
    """
    _check_band(band)
    n = _check_resolution(resolution)
    if radius <= 0:
        raise ConfigError("radius must be positive")
    start = time.perf_counter()
    value, mesh = _qt_flux(spec, radius, center, band, n, step, orientation)
    coarse, _ = _qt_flux(spec, radius, center, band, max(4, n // 2), step, orientation)
    error = abs(value - coarse)
    if error > MESH_BUDGET:
        raise MeshTooCoarse(f"Q_T changed by {error:.3g} between resolutions {n} and {n // 2}")
    return InvariantReport("Q_T", value, band, mesh.describe(), error, time.perf_counter() - start)


def _metric_integrand(spec, omega, offset, band, gamma, phi, theta, tol):
    pts = np.stack(np.broadcast_arrays(omega, gamma, theta, phi, offset), axis=-1)
    k = hyperspherical_to_cartesian(pts)
    jac = hyperspherical_jacobian(pts[..., :4])[..., :, 1:]
    g, _ = quantum_geometry(spec, k, band, tol, jac)
    metric = np.trace(g, axis1=-2, axis2=-1)
    det = np.linalg.det(metric)
    volume = np.sqrt(np.clip(2 * det, 0.0, None))
    return volume, metric, k


def qt_metric_route(spec: ModelSpec, omega: float = 1.0, offset: float = 0.0, band: int = 1,
                    resolution: int = 64, theta_samples=(0.0, 2.1, 4.2), metric_provider=None,
                    tol: float = DEFAULT_TOL) -> InvariantReport:
    """Q_T = (1/π) ∫ dγ dφ s·√(2 det G) on the hypersphere of radius Ω at kw-offset Λ.

    G is the 3×3 trace metric in (γ, θ, φ).  The metric alone fixes only
    |H|; the sign s is that of the outward source flux at each point, which
    is what lets a sphere that does not enclose the node integrate to zero.
    ``metric_provider(points) -> G`` replaces the direct metric (used for
    protocol-extracted metrics); ``points`` has last axis (Ω, γ, θ, φ, Λ).
    """
    _check_band(band)
    n = _check_resolution(resolution)
    if omega <= 0:
        raise ConfigError("omega must be positive")
    start = time.perf_counter()

    def integrate(n):
        gamma, wg = gauss_panels(np.linspace(0, np.pi / 2, 5), max(1, n // 4))
        phi, wp = periodic_nodes(n)
        gg, pp = np.meshgrid(gamma, phi, indexing="ij")
        volumes = []
        for theta in theta_samples:
            vol, _, k = _metric_integrand(spec, omega, offset, band, gg, pp, theta, tol)
            volumes.append(vol)
        volumes = np.array(volumes)
        spread = np.abs(volumes - volumes[0]).max()
        if spread > 1e-6 * max(1.0, np.abs(volumes).max()):
            raise NonRotationalSymmetry(f"metric-route integrand varies with θ by {spread:.3e}")
        vol = volumes[0]
        if metric_provider is not None:
            pts = np.stack(np.broadcast_arrays(omega, gg, theta_samples[0], pp, offset), axis=-1)
            metric = np.asarray(metric_provider(pts))
            vol = np.sqrt(np.clip(2 * np.linalg.det(metric), 0.0, None))
        if band == 0:
            sign = np.ones_like(vol)
        else:
            center = np.array([0.0, 0.0, 0.0, offset])
            source = tensor_source(spec, k, band, tol=tol)
            sign = np.sign(np.einsum("...i,...i->...", source, k - center))
        return float(np.sum(sign * vol * wg[:, None] * wp[None, :])) / np.pi

    value = integrate(n)
    error = abs(value - integrate(max(8, n // 2)))
    if error > MESH_BUDGET:
        raise MeshTooCoarse(f"metric-route Q_T changed by {error:.3g} under mesh halving")
    mesh = {"kind": "S3 (gamma, phi)", "resolution": [n, n], "radius": omega, "offset": offset,
            "theta_samples": list(theta_samples)}
    return InvariantReport("Q_T (metric)", value, band, mesh, error, time.perf_counter() - start)


# --------------------------------------------------------------------------- planar Euler numbers


def plane_orientation(spec: ModelSpec, plane_center, band: int, tol: float = DEFAULT_TOL) -> float:
    """Sign relating the continuous chiral orientation to the plane-centre orientation."""
    if band == 0:
        return 1.0
    k = np.asarray(plane_center, dtype=float)
    h = build_hamiltonian(spec, k)
    energies, vectors = diagonalize(h, tol, bands=(band,))
    frame = oriented_frames(h, vectors, band)
    det_outer = np.linalg.det(frame[4:6, :])
    det_inner = np.linalg.det(frame[0:2, :])
    if abs(det_outer) < 1e-8 or abs(det_inner) < 1e-8:
        raise DegeneracyCollision("plane centre does not fix an orientation for this band")
    return float(np.sign(det_outer * det_inner))


def _plane_curvature(spec, x, y, plane, band, tol):
    k = np.stack(np.broadcast_arrays(x, y, plane[0], plane[1]), axis=-1)
    _, f = quantum_geometry(spec, k, band, tol)
    return f[..., 0, 1]


def _fit_power_tail(radii, values):
    """Fit |f| ≈ c ρ^{-p}; returns (signed c, p)."""
    mask = np.abs(values) > 0
    if mask.sum() < 3:
        return 0.0, np.inf
    slope, intercept = np.polyfit(np.log(radii[mask]), np.log(np.abs(values[mask])), 1)
    sign = np.sign(np.mean(values[mask]))
    return float(sign * np.exp(intercept)), float(-slope)


def _radial_tail(spec, plane, band, extent, tol, polar: bool):
    """Contribution beyond the mesh from a power-law fit on the outer 20%."""
    radii = np.linspace(0.8 * extent, extent, 9)
    angles = periodic_nodes(8)[0]
    rr, aa = np.meshgrid(radii, angles, indexing="ij")
    f = _plane_curvature(spec, -rr * np.sin(aa), rr * np.cos(aa), plane, band, tol).mean(axis=1)
    c, p = _fit_power_tail(radii, f)
    if c == 0.0:
        return 0.0, {"c": 0.0, "p": None}
    if p <= 2.0:
        raise TailTooFat(f"curvature decays as ρ^-{p:.2f}; the plane integral does not converge")
    if polar:
        tail = c * extent ** (2 - p) / (p - 2)
    else:
        theta = periodic_nodes(256)[0]
        edge = extent / np.maximum(np.abs(np.cos(theta)), np.abs(np.sin(theta)))
        tail = c / (2 * np.pi * (p - 2)) * np.mean(edge ** (2 - p)) * 2 * np.pi
    return float(tail), {"c": c, "p": p}


def _plane_point(spec: ModelSpec, kpar: float, tol: float = DEFAULT_TOL):
    """(kz, kw) of the plane; the nodal ring can only cross it at k⊥ = 0, so that point must be gapped."""
    if spec.family is Family.TIGHT_BINDING:
        raise ConfigError("planar Euler numbers are defined for the continuum families only")
    plane = (float(kpar), 0.0)
    try:
        diagonalize(build_hamiltonian(spec, np.array((0.0, 0.0) + plane)), tol)
    except DegeneracyCollision as exc:
        raise DegeneracyCollision(f"the plane k∥ = {kpar} meets a band node at k⊥ = 0") from exc
    return plane


def _inner_scale(spec, kpar):
    gap = abs(abs(kpar) - abs(spec.delta))
    return max(min(0.25, gap / 4), 1e-3)


def euler_plane(spec: ModelSpec, kpar: float, band: int = 0, extent: float = 12.0, order: int = 8,
                convention: str = "plane-center", orientation: int = 1, tol: float = DEFAULT_TOL) -> InvariantReport:
    """χ₁ = (1/2π) ∫ dkx dky f_xy on the plane (kz, kw) = (k∥, 0).

    ``order`` is the Gauss–Legendre order per panel; the error estimate uses
    order/2 on the same panels.  ``orientation`` = -1 reverses the plane.
    """
    _check_band(band)
    order = _check_order(order)
    if convention not in ("plane-center", "continuous"):
        raise ConfigError("convention must be 'plane-center' or 'continuous'")
    if extent <= 0:
        raise ConfigError("extent must be positive")
    plane = _plane_point(spec, kpar, tol)
    start = time.perf_counter()
    half = graded_breaks(extent, _inner_scale(spec, kpar))
    breaks = np.concatenate([-half[:0:-1], half])
    sign = orientation
    if convention == "plane-center":
        sign *= plane_orientation(spec, (0.0, 0.0) + plane, band, tol)

    def integrate(order):
        x, w = gauss_panels(breaks, order)
        xx, yy = np.meshgrid(x, x, indexing="ij")
        f = _plane_curvature(spec, xx, yy, plane, band, tol)
        return float(np.einsum("ij,i,j->", f, w, w)) / (2 * np.pi)

    tail, fit = _radial_tail(spec, plane, band, extent, tol, polar=False)
    if abs(tail) > TAIL_BUDGET:
        raise TailTooFat(f"tail contribution {tail:.3g} exceeds {TAIL_BUDGET}; increase the extent")
    value = integrate(order) + tail
    coarse = integrate(max(1, order // 2)) + tail
    error = abs(value - coarse)
    if error > MESH_BUDGET:
        raise MeshTooCoarse(f"χ₁ changed by {error:.3g} under order halving")
    mesh = {"kind": "plane", "panels": len(breaks) - 1, "order": order, "extent": extent,
            "plane": {"kz": plane[0], "kw": plane[1]}, "convention": convention}
    return InvariantReport("chi1", sign * value, band, mesh, error, time.perf_counter() - start,
                           {"tail": sign * tail, "tail_fit": fit, "kpar": kpar})


def euler_polar_route(spec: ModelSpec, kpar: float, omega_max: float, band: int = 0, order: int = 8,
                      n_theta: int = 16, convention: str = "plane-center", tol: float = DEFAULT_TOL) -> InvariantReport:
    """χ₁ on the disk of radius Ω̄_max in polar coordinates, plus the fitted tail.

    Uses kx = -Ω̄ sinθ, ky = Ω̄ cosθ and the curvature f_{Ω̄θ} obtained by the
    chain rule; the prefactor 1/2π matches :func:`euler_plane`.
    """
    _check_band(band)
    n_theta = _check_resolution(n_theta)
    order = _check_order(order)
    if omega_max <= 0:
        raise ConfigError("omega_max must be positive")
    plane = _plane_point(spec, kpar, tol)
    start = time.perf_counter()
    sign = 1.0
    if convention == "plane-center":
        sign = plane_orientation(spec, (0.0, 0.0) + plane, band, tol)
    breaks = graded_breaks(omega_max, _inner_scale(spec, kpar))

    def integrate(order, n_theta):
        r, wr = gauss_panels(breaks, order)
        theta, wt = periodic_nodes(n_theta)
        rr, tt = np.meshgrid(r, theta, indexing="ij")
        st, ct = np.sin(tt), np.cos(tt)
        k = np.stack(np.broadcast_arrays(-rr * st, rr * ct, plane[0], plane[1]), axis=-1)
        zero = np.zeros_like(rr)
        jac = np.stack([np.stack([-st, -rr * ct], -1), np.stack([ct, -rr * st], -1),
                        np.stack([zero, zero], -1), np.stack([zero, zero], -1)], axis=-2)
        _, f = quantum_geometry(spec, k, band, tol, jac)
        return float(np.einsum("ij,i,j->", f[..., 0, 1], wr, wt)) / (2 * np.pi)

    tail, fit = _radial_tail(spec, plane, band, omega_max, tol, polar=True)
    if abs(tail) > TAIL_BUDGET:
        raise TailTooFat(f"tail contribution {tail:.3g} exceeds {TAIL_BUDGET}; increase omega_max")
    value = integrate(order, n_theta) + tail
    coarse = integrate(max(1, order // 2), max(4, n_theta // 2)) + tail
    error = abs(value - coarse)
    if error > MESH_BUDGET:
        raise MeshTooCoarse(f"polar χ₁ changed by {error:.3g} under mesh halving")
    mesh = {"kind": "polar disk", "panels": len(breaks) - 1, "order": order, "n_theta": n_theta,
            "radius": omega_max, "plane": {"kz": plane[0], "kw": plane[1]}, "convention": convention}
    return InvariantReport("chi1 (polar)", sign * value, band, mesh, error, time.perf_counter() - start,
                           {"tail": sign * tail, "tail_fit": fit, "kpar": kpar})


def nodal_ring_invariant(spec: ModelSpec, band: int = 0, **kwargs) -> InvariantReport:
    """ν_T = χ₁(k∥ = 2|δ|) − χ₁(k∥ = |δ|/2)."""
    if spec.delta == 0:
        raise ConfigError("the nodal ring needs delta != 0")
    start = time.perf_counter()
    d = abs(spec.delta)
    outside = euler_plane(spec, 2 * d, band, **kwargs)
    inside = euler_plane(spec, d / 2, band, **kwargs)
    return InvariantReport(
        "nu_T", outside.value - inside.value, band,
        {"outside": outside.mesh, "inside": inside.mesh}, outside.error + inside.error,
        time.perf_counter() - start, {"chi_outside": outside.value, "chi_inside": inside.value},
    )


# --------------------------------------------------------------------------- 3D descendants


def _sphere_flux(spec, center, radius, band, n_polar, n_azimuth, hemisphere, tol):
    limits = {"full": (0.0, np.pi), "upper": (0.0, np.pi / 2), "lower": (np.pi / 2, np.pi)}[hemisphere]
    polar_breaks = np.linspace(limits[0], limits[1], 5)
    vt, wv = gauss_panels(polar_breaks, max(1, n_polar // 4))
    ph, wp = periodic_nodes(n_azimuth)
    vv, pp = np.meshgrid(vt, ph, indexing="ij")
    normal = np.stack([np.sin(vv) * np.cos(pp), np.sin(vv) * np.sin(pp), np.cos(vv)], axis=-1)
    k3 = np.asarray(center, dtype=float) + radius * normal
    k = np.concatenate([k3, np.zeros(k3.shape[:-1] + (1,))], axis=-1)
    _, f = quantum_geometry(spec, k, band, tol)
    field_ = np.stack([f[..., 1, 2], f[..., 2, 0], f[..., 0, 1]], axis=-1)
    flux = np.einsum("...i,...i->...", field_, normal) * radius**2 * np.sin(vv)
    return float(np.einsum("ij,i,j->", flux, wv, wp)) / (2 * np.pi)


def dipole_sphere(spec: ModelSpec, center=(0.0, 0.0, 0.0), radius: float = 1.0, band: int = 0,
                  hemisphere: str = "full", resolution: int = 48, tol: float = DEFAULT_TOL) -> InvariantReport:
    """Outward flux of the Euler curvature vector F = (f_yz, f_zx, f_xy) through a sphere, over 2π."""
    _check_band(band)
    n = _check_resolution(resolution)
    if spec.family is not Family.CONTINUUM_3D:
        raise ConfigError("dipole integrals use the three-dimensional reduction (family continuum3d)")
    if hemisphere not in ("full", "upper", "lower"):
        raise ConfigError("hemisphere must be 'full', 'upper' (kz > 0) or 'lower' (kz < 0)")
    if len(center) != 3 or radius <= 0:
        raise ConfigError("center must have three components and radius must be positive")
    start = time.perf_counter()
    value = _sphere_flux(spec, center, radius, band, n, n, hemisphere, tol)
    error = abs(value - _sphere_flux(spec, center, radius, band, n // 2, n // 2, hemisphere, tol))
    if error > MESH_BUDGET:
        raise MeshTooCoarse(f"sphere flux changed by {error:.3g} under mesh halving")
    mesh = {"kind": "S2" if hemisphere == "full" else f"S2 {hemisphere} half", "resolution": [n, n],
            "center": list(center), "radius": radius}
    return InvariantReport("chi1 (sphere)", value, band, mesh, error, time.perf_counter() - start)


def dipole_planes(spec: ModelSpec, kz: float, band: int = 0, **kwargs) -> InvariantReport:
    """Euler integral on the plane kz = const of the three-dimensional reduction."""
    if spec.family is not Family.CONTINUUM_3D:
        raise ConfigError("dipole planes use the three-dimensional reduction (family continuum3d)")
    report = euler_plane(spec, kz, band, **kwargs)
    report.name = "chi1 (dipole plane)"
    return report


# --------------------------------------------------------------------------- tight-binding node scan


@dataclass(frozen=True)
class NodeScan:
    offset: float
    nodes: list
    min_gap: float


def _tb_gap(spec, kz, kw):
    k = np.stack(np.broadcast_arrays(0.0, 0.0, kz, kw), axis=-1)
    e = np.linalg.eigvalsh(build_hamiltonian(spec, k))
    return np.minimum(e[..., 2] - e[..., 1], e[..., 4] - e[..., 3])


def tb_node_scan(spec: ModelSpec, offsets, grid: int = 121, node_gap: float = 1e-6) -> list[NodeScan]:
    """Gap minima between the flat and dispersive bands on the (kz, kw) slice at kx = ky = 0."""
    if spec.family is not Family.TIGHT_BINDING:
        raise ConfigError("tb_node_scan needs the tight-binding family")
    grid = _check_resolution(grid)
    axis = -np.pi + 2 * np.pi * np.arange(grid) / grid
    kz, kw = np.meshgrid(axis, axis, indexing="ij")
    results = []
    for lam in offsets:
        lam = float(lam)
        if not np.isfinite(lam):
            raise ConfigError("offsets must be finite")
        local = ModelSpec(spec.family, spec.delta, lam)
        gap = _tb_gap(local, kz, kw)
        neighbours = [np.roll(np.roll(gap, i, 0), j, 1) for i in (-1, 0, 1) for j in (-1, 0, 1) if (i, j) != (0, 0)]
        is_min = np.all([gap <= nb for nb in neighbours], axis=0)
        nodes, best = [], float(gap.min())
        for i, j in zip(*np.nonzero(is_min)):
            res = minimize(lambda p: float(_tb_gap(local, p[0], p[1])), x0=[kz[i, j], kw[i, j]],
                           method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 4000})
            best = min(best, float(res.fun))
            if res.fun < node_gap:
                point = (float((res.x[0] + np.pi) % (2 * np.pi) - np.pi), float((res.x[1] + np.pi) % (2 * np.pi) - np.pi))
                if not any(np.hypot(point[0] - p[0], point[1] - p[1]) < 1e-4 for p in nodes):
                    nodes.append(point)
        results.append(NodeScan(lam, sorted(nodes), best))
    return results
