"""The δ perturbation inflates the point node into a ring; planar Euler numbers jump across it."""

from tensormonopole import Family, ModelSpec
from tensormonopole.invariants import euler_plane, euler_polar_route, nodal_ring_invariant

spec = ModelSpec(Family.CONTINUUM_4D, 1.0)
print(" k∥/δ   χ₁(-1)   χ₁(0)    χ₁(+1)   sum")
for kpar in (0.0, 0.5, 0.8, 1.2, 1.5, 2.0):
    chi = [euler_plane(spec, kpar, band).value for band in (-1, 0, 1)]
    print(f" {kpar:4.1f}  " + "  ".join(f"{c:+.4f}" for c in chi) + f"  {sum(chi):+.1e}")

polar = euler_polar_route(spec, 0.5, 6.0).value
print(f"\npolar route at k∥ = 0.5: χ₁(0) = {polar:+.4f}")
print(f"ring invariant ν_T = {nodal_ring_invariant(spec).value:.4f}")
