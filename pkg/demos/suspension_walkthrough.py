"""Build the hexagonal suspension on y^2 = x(x - 51)(x - 100) and look at it.

    python demos/suspension_walkthrough.py
"""

import numpy as np

from flexlab import suspension as su
from flexlab.geometry import edge_lengths, rigidity
from flexlab.io import bundled, load_suspension_spec
from flexlab.quadfield import format_quad

spec = load_suspension_spec(bundled("hexagonal_suspension.yaml"))
model = su.build(spec)

print("basepoints")
for name, P in spec.basepoints.items():
    print(f"  {name} = {P}")

# each row contributes four points on one parabola y = a x^2 + b x + c
for j in su.J:
    q = model.parabolas[j]
    print(f"j={j}: r={model.r[j]}, r'={model.rp[j]}, a={q.a}, s={model.s[j]:+d}, sigma={model.sigma[j]:+d}")

print("\nexact edge lengths")
for e, q in sorted(model.exact_lengths.items()):
    print(f"  {e[0]}-{e[1]}: {format_quad(q)}")

# the lengths do not move while x runs over (51, 100)
exact = {e: float(q) for e, q in model.exact_lengths.items()}
worst = 0.0
for x in np.linspace(51.5, 99.5, 50):
    got = edge_lengths(su.vertices_at(model, x)).values
    worst = max(worst, max(abs(got[e] - v) / v for e, v in exact.items()))
print(f"\nmax relative length drift over 50 samples: {worst:.2e}")

# near x = 51 the whole surface collapses onto a plane
for h in (1.0, 1e-2, 1e-4, 1e-6):
    pts = su.vertex_array(model, 51 + h)
    c = pts - pts.mean(axis=0)
    dev = np.max(np.abs(c @ np.linalg.svd(c)[2][-1]))
    print(f"x = 51 + {h:g}: distance from best plane {dev:.2e}")

L = su.link_quadrangle(model, 5)
print("\ncosines of the link quadrangle at p5")
for key, cos in L.cosines.items():
    print(f"  angle {key[0]} p5 {key[1]}: {format_quad(cos)}")

rep = rigidity(su.vertices_at(model, 75.0))
print(f"\ninfinitesimal flexes at x = 75 (beyond rigid motions): {rep.nontrivial_flex_dim}")
