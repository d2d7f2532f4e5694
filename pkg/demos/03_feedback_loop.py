"""
The feedback loop at two selection rates
========================================

Each event picks a random user.  With probability phi the user finds an
item of their own genre unaided; otherwise they take the top
recommendation.  Either way one old item is dropped.

omega is the share of recommendations (second half of the run) that
match the user's taste.
"""

from recloop import WorldConfig, run

base = WorldConfig(n_users=300, n_items=100, n_genres=10, k=7, updates_per_user=4000)

for phi in (0.2, 0.9):
    rep = run(base.replace(phi=phi), with_auc=False)
    print(f"phi={phi}: omega = {rep.omega:.3f}  ({rep.rec_events} recommendations measured)")

# at phi=0.2 omega sits near 1/G = 0.1, as if recommending at random;
# at phi=0.9 the recommender only ever proposes matching items
