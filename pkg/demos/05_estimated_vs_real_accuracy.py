"""
Measured accuracy can be wrong
==============================

auc_real asks whether un-collected items of the user's genre outrank
other candidates.  auc_est is what an operator can measure: hide one
collected item per user and check whether it ranks high.

At low phi the recommender is good at predicting what users will pick
up (mostly its own suggestions), while poor at predicting what they
actually like.
"""

from recloop import WorldConfig, run

base = WorldConfig(n_users=300, n_items=100, n_genres=10, k=7, updates_per_user=4000)

for phi in (0.1, 0.95):
    rep = run(base.replace(phi=phi))
    print(f"phi={phi}: auc_real={rep.auc_real:.3f}  auc_est={rep.auc_est:.3f}")
