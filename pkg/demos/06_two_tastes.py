"""
Users with two tastes
=====================

Every user has two genres and picks from the first with probability f1.
omega1 is the share of recommendations from the first genre.  A fair
recommender would give omega1 = f1; the loop favours the majority taste.
"""

from recloop import WorldConfig, run

base = WorldConfig(n_users=300, n_items=100, n_genres=10, k=7, phi=0.95, mode="two_taste",
                   updates_per_user=4000)

for f1 in (0.2, 0.5, 0.8):
    rep = run(base.replace(f1=f1), with_auc=False)
    print(f"f1={f1}: omega1={rep.omega1:.3f}  omega={rep.omega:.3f}")
