"""
Sweeping phi: an abrupt jump for cn, a smoother one for cosine
==============================================================

Writes a CSV and an SVG to the working directory (or $RECLOOP_OUTPUT_DIR).
Scaled down from the desk preset so it finishes in a few minutes.
"""

import os

from recloop import WorldConfig
from recloop.plotting import render_plots
from recloop.sweep import SweepSpec, phi_grid, run_sweep, threshold

out = os.environ.get("RECLOOP_OUTPUT_DIR", ".")
base = WorldConfig(n_users=200, n_items=100, n_genres=10, k=7, updates_per_user=3000)

spec = SweepSpec(base, grid={"similarity": ["cn", "cosine"], "phi": phi_grid(0.1)}, instances=2,
                 output=os.path.join(out, "phase_transition.csv"))
result = run_sweep(spec)

for sim in ("cn", "cosine"):
    rows = [r for r in result.means() if r["similarity"] == sim]
    print(sim, " ".join(f"{r['phi']:.1f}:{r['omega']:.2f}" for r in rows))
    print("   first phi with omega > 0.9:", threshold([r["phi"] for r in rows], [r["omega"] for r in rows]))

print(render_plots(spec.output, "omega-phi", os.path.join(out, "phase_transition.svg")))
