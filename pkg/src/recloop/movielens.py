"""MovieLens-style ratings and the empirical replay set-up.

Input is the ``u.data`` layout of MovieLens-100K: one rating per line,
``user<TAB>item<TAB>rating<TAB>timestamp``.  The data set itself is not
shipped; see the README for where to get it.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field

import numpy as np

from .world import INITIAL, BipartiteState

log = logging.getLogger(__name__)

CORRECT_RATING = 3


@dataclass
class RatingsTable:
    """Ratings with dense user/item indices.

    ``user_ids[u]`` and ``item_ids[a]`` give the external ids of dense
    indices ``u`` and ``a``; dense ids follow the sorted external ids.
    """

    user_ids: np.ndarray
    item_ids: np.ndarray
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray
    duplicates: int = 0
    rejected: list = field(default_factory=list)

    @property
    def n_users(self) -> int:
        return len(self.user_ids)

    @property
    def n_items(self) -> int:
        return len(self.item_ids)

    @functools.cached_property
    def rated(self) -> list[np.ndarray]:
        """Per-user sorted array of rated item indices."""
        return self._group(np.ones(len(self.users), dtype=bool))

    @functools.cached_property
    def correct(self) -> list[np.ndarray]:
        """Per-user sorted array of items rated 3 or more."""
        return self._group(self.ratings >= CORRECT_RATING)

    def _group(self, mask):
        out = [[] for _ in range(self.n_users)]
        for u, a in zip(self.users[mask], self.items[mask]):
            out[u].append(a)
        return [np.array(sorted(x), dtype=np.int32) for x in out]

    @property
    def eligible(self) -> np.ndarray:
        return np.array([len(q) >= 2 for q in self.correct], dtype=bool)

    def triples(self):
        """External ``(user, item, rating)`` triples in dense-user, dense-item order."""
        order = np.lexsort((self.items, self.users))
        return [(self.user_ids[self.users[i]], self.item_ids[self.items[i]], int(self.ratings[i]))
                for i in order]


def parse_ratings(path, strict: bool = False) -> RatingsTable:
    """Read a tab-separated ratings file.

    Malformed lines are skipped and listed in ``table.rejected`` as
    ``(line_number, reason)`` (or raise at once with ``strict=True``).
    A repeated (user, item) pair keeps its last rating.
    """
    rows = {}
    rejected = []
    duplicates = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.rstrip("\r\n").split("\t")
            reason = None
            if len(parts) != 4:
                reason = f"expected 4 tab-separated fields, got {len(parts)}"
            else:
                try:
                    user, item, rating, _ = (int(p) for p in parts)
                except ValueError:
                    reason = "non-integer field"
                else:
                    if not 1 <= rating <= 5:
                        reason = f"rating {rating} outside 1..5"
            if reason is not None:
                if strict:
                    raise ValueError(f"{path}:{lineno}: {reason}")
                rejected.append((lineno, reason))
                continue
            if (user, item) in rows:
                duplicates += 1
            rows[(user, item)] = rating
    if rejected:
        log.warning("%s: rejected %d malformed line(s), first at line %d",
                    path, len(rejected), rejected[0][0])
    if duplicates:
        log.warning("%s: %d duplicate (user, item) pair(s); kept the last rating", path, duplicates)
    if not rows:
        raise ValueError(f"{path}: no valid rating rows")

    keys = np.array(list(rows.keys()), dtype=np.int64)
    user_ids, users = np.unique(keys[:, 0], return_inverse=True)
    item_ids, items = np.unique(keys[:, 1], return_inverse=True)
    ratings = np.array(list(rows.values()), dtype=np.int8)
    return RatingsTable(user_ids, item_ids, users.astype(np.int32), items.astype(np.int32),
                        ratings, duplicates, rejected)


@functools.lru_cache(maxsize=4)
def load_ratings(path) -> RatingsTable:
    return parse_ratings(path)


def init_replay(table: RatingsTable, rng: np.random.Generator, recommender=None,
                exclude_ineligible_edges: bool = False):
    """Initial replay state and target sets.

    A user is eligible when at least two of their ratings are >= 3.  An
    eligible user with ``k_i`` rated movies starts with ``k_i - 1`` of them:
    ``rng.permutation`` of the sorted rated set is drawn until its last
    entry (the movie left out) is a correct one, and the first ``k_i - 1``
    entries are kept.  Ineligible users keep their whole rated set (or
    nothing with ``exclude_ineligible_edges``) and are never activated.
    """
    from .dynamics import FALLBACK_SKIP, Targets

    bias = None
    if recommender is not None and recommender.bias_scope == "everywhere":
        bias = recommender.bias
    eligible = table.eligible
    state = BipartiteState(table.n_users, table.n_items, bias)
    collections = []
    for u in range(table.n_users):
        rated, correct = table.rated[u], table.correct[u]
        if eligible[u]:
            while True:
                perm = rng.permutation(rated)
                if np.isin(perm[-1], correct):
                    break
            collections.append(perm[:-1])
        elif exclude_ineligible_edges:
            collections.append(np.zeros(0, np.int32))
        else:
            collections.append(rated)
    for u, coll in enumerate(collections):
        d = len(coll)
        state.items[u, :d] = coll
        state.degree[u] = d
        state.held[u, coll] = True
        state.provenance[u, :d] = INITIAL
    state.recount()
    targets = Targets.from_sets(table.correct, table.n_items, np.arange(table.n_users),
                                np.full(table.n_users, -1), np.flatnonzero(eligible),
                                FALLBACK_SKIP)
    return state, targets
