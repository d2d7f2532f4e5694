"""
Similarity, scores and the top recommendation
=============================================

Two item similarities: the raw number of common users (cn), and the
same count divided by the geometric mean of the item degrees (cosine).
A user's score for an item sums its similarity to everything they hold.
"""

import numpy as np

from recloop import BipartiteState, RecommenderConfig, recommend, score_vector, similarity

# 5 users over 6 items
state = BipartiteState.from_collections(6, [[0, 1], [0, 1, 2], [1, 2], [3, 4], [4, 5]])

cn = RecommenderConfig("cn")
cos = RecommenderConfig("cosine")
print("s(0,1): cn =", similarity(state, 0, 1, cn), " cosine =", round(similarity(state, 0, 1, cos), 3))

# user 0 holds items 0 and 1, so only items 2..5 are candidates
user = 0
print("cn scores for items 2..5    :", score_vector(state, user, cn)[2:])
print("cosine scores for items 2..5:", score_vector(state, user, cos)[2:].round(3))

# item 2 wins; ties are broken at random, so pass a generator
rng = np.random.default_rng(0)
print("recommended:", recommend(state, user, cn, rng))
