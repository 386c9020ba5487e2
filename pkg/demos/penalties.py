"""
The eight penalty functions and their concave parts
====================================================

Each penalty splits as ``kappa * |t|`` minus a convex remainder.  The
script tabulates ``kappa`` and the plateau value of the bounded kinds, then
draws every curve into one SVG.
"""

import numpy as np

from ncvpath import PenaltySpec, kappa, penalty_value
from ncvpath.io import default_penalty_specs, plot_penalties

from _common import OUT

t = np.linspace(0.0, 6.0, 7)
print(f"{'kind':8s} {'kappa':>8s}  values at t = 0..6")
for spec in default_penalty_specs(lam=1.0, tau=3.0, gamma=0.5):
    vals = " ".join(f"{v:6.3f}" for v in penalty_value(spec, t))
    print(f"{spec.kind:8s} {kappa(spec):8.3f}  {vals}")

# scad, mcp and tlp are flat past tau * lam: large effects are not shrunk
scad = PenaltySpec("scad", 1.0, 3.7)
print("scad plateau", penalty_value(scad, np.array([10.0]))[0], "=", (3.7 + 1) / 2)

svg = plot_penalties()
(OUT / "penalties.svg").write_text(svg)
print("wrote", OUT / "penalties.svg")
