"""
Replaying a ratings file
========================

Users start from their own rated movies, minus one they liked (rating 3
or more).  Deliberate selection draws from liked movies only.

Uses MovieLens-100K when $RECLOOP_MOVIELENS points at its u.data,
otherwise the small synthetic file shipped with the tests.
"""

import os

from recloop import WorldConfig, parse_ratings, run

here = os.path.dirname(os.path.abspath(__file__))
path = os.environ.get("RECLOOP_MOVIELENS") or os.path.join(here, "..", "tests", "data", "ratings_small.data")

table = parse_ratings(path)
print(f"{table.n_users} users, {table.n_items} items, {int(table.eligible.sum())} eligible")

base = WorldConfig(mode="replay", ratings_path=path, updates_per_user=200)
for phi in (0.2, 0.5, 0.8, 1.0):
    rep = run(base.replace(phi=phi), table)
    print(f"phi={phi}: omega={rep.omega:.3f}  auc_real={rep.auc_real:.3f}  auc_est={rep.auc_est:.3f}"
          f"  skipped selections={rep.skipped_events}")
