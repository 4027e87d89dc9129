"""Dehn invariants of the cube, the regular tetrahedron and the octahedron."""

import math

from flexlab import measures as me
from flexlab.io import bundled, load_polyhedron

for name in ("cube.yaml", "tetrahedron.yaml", "octahedron.yaml"):
    pf = load_polyhedron(bundled(name))
    inv = me.dehn(pf.polyhedron, pf.exact_lengths)
    print(name)
    if inv.is_trivial():
        print("  trivial: every coefficient is a rational multiple of pi")
        continue
    for d, alpha in inv.reduced.items():
        print(f"  sqrt({d}) (x) {me.describe_angle(alpha)} = {alpha:.15g}")

# the regular tetrahedron is not scissors congruent to a cube
print(f"\n6*arccos(1/3) / pi = {6 * math.acos(1 / 3) / math.pi:.15g}")
