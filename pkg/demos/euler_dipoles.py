"""Three-dimensional reduction (kw = 0): a flat-band Euler dipole that splits when δ ≠ 0."""

from tensormonopole import Family, ModelSpec
from tensormonopole.invariants import dipole_planes, dipole_sphere

coincident = ModelSpec(Family.CONTINUUM_3D, 0.0)
print("δ = 0, unit sphere around the origin")
for part in ("full", "upper", "lower"):
    print(f"  {part:5s}: χ₁ = {dipole_sphere(coincident, hemisphere=part).value:+.4f}")

split = ModelSpec(Family.CONTINUUM_3D, 1.0)
print("\nδ = 1, spheres of radius 0.5 around kz = ±1")
for kz in (1.0, -1.0):
    print(f"  kz = {kz:+.0f}: χ₁ = {dipole_sphere(split, (0, 0, kz), 0.5).value:+.4f}")
print("\nplanes between and beyond the split monopoles")
for kz in (0.0, 2.0):
    print(f"  kz = {kz:.0f}: χ₁ = {dipole_planes(split, kz).value:+.4f}")
