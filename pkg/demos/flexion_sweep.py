"""Sweep the flexion, track the Dehn coefficients and write a CSV.

    python demos/flexion_sweep.py [out.csv]
"""

import sys

from flexlab import measures as me
from flexlab import suspension as su
from flexlab.io import bundled, load_suspension_spec

model = su.build(load_suspension_spec(bundled("hexagonal_suspension.yaml")))
report = me.dehn_sweep(su.flexion_path(model), samples=100)

for d, dev in report.max_deviation.items():
    print(f"alpha_sqrt{d:<4d} start {report.alphas[d][0]: .12f}  max deviation {dev:.1e}")
print("volume range:", report.volume.min(), report.volume.max())

# individual angles do move, only the combinations above stay put
phi5 = report.angle_column(("N", "p5"))
print(f"phi5 goes from {phi5[0]:.6f} to {phi5[-1]:.6f}")
print("verdict:", me.sweep_verdict(report))

if len(sys.argv) > 1:
    with open(sys.argv[1], "w", newline="") as fh:
        fh.write(me.sweep_csv(report))
    print("wrote", sys.argv[1])
