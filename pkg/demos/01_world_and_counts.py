"""
A synthetic world and its co-occurrence counts
==============================================

Users and items share G genres.  Each user starts with k random items.
The state keeps item degrees and pairwise co-occurrence counts up to date
as items come and go.
"""

import numpy as np

from recloop import SELECTION, WorldConfig, make_rng, new_synthetic, verify_against_oracle

cfg = WorldConfig(n_users=8, n_items=12, n_genres=3, k=3)
state, tastes = new_synthetic(cfg, make_rng(master_seed=1, instance_index=0))

print("item genres :", tastes.item_genre)
print("user tastes :", tastes.user_tastes[:, 0])
for u in range(cfg.n_users):
    print(f"user {u} holds", sorted(state.collection(u).tolist()))

# C[a, b] = number of users holding both a and b
print(state.cooccurrence)

# add an item to user 0, then drop one of the old ones
free = int(np.flatnonzero(~state.held[0])[0])
state.add_item(0, free, SELECTION)
state.remove_item(0, int(state.collection(0)[0]))
print("user 0 now holds", sorted(state.collection(0).tolist()))

# the incremental counts still agree with a rebuild from scratch
print("counts consistent:", verify_against_oracle(state))
