"""Bipartite user-item state with incrementally maintained co-occurrence counts.

The state is a bag of numpy arrays so the numba kernels in
:mod:`recloop.dynamics` can mutate it in place.  Every edge carries a
provenance flag (initial, selection, recommendation).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numba
import numpy as np

INITIAL = 0
SELECTION = 1
RECOMMENDATION = 2

PROVENANCE_NAMES = {INITIAL: "initial", SELECTION: "selection", RECOMMENDATION: "recommendation"}


@numba.njit(cache=True)
def _add_edge(items, degree, prov, held, item_degree, cooc, u, a, p):
    d = degree[u]
    for j in range(d):
        b = items[u, j]
        cooc[a, b] += 1
        cooc[b, a] += 1
    items[u, d] = a
    prov[u, d] = p
    degree[u] = d + 1
    held[u, a] = True
    item_degree[a] += 1


@numba.njit(cache=True)
def _remove_slot(items, degree, prov, held, item_degree, cooc, u, slot):
    # the last slot is moved into the vacated one
    d = degree[u]
    a = items[u, slot]
    for j in range(d):
        if j != slot:
            b = items[u, j]
            cooc[a, b] -= 1
            cooc[b, a] -= 1
    last = d - 1
    items[u, slot] = items[u, last]
    prov[u, slot] = prov[u, last]
    items[u, last] = 0
    prov[u, last] = 0
    degree[u] = last
    held[u, a] = False
    item_degree[a] -= 1
    return a


@numba.njit(cache=True)
def _weighted_update(items, degree, prov, wcooc, wdeg, u, a, wa, bias, sign, skip_slot):
    """Add (sign=+1) or remove (sign=-1) the weighted contribution of edge (u, a)."""
    for j in range(degree[u]):
        if j == skip_slot:
            continue
        b = items[u, j]
        wb = bias if prov[u, j] == SELECTION else 1.0
        wcooc[a, b] += sign * wa * wb
        wcooc[b, a] += sign * wa * wb
    wdeg[a] += sign * wa


class BipartiteState:
    """User-item adjacency plus item co-occurrence counts and item degrees.

    Collections live in a padded ``(n_users, n_items)`` array; user ``u``
    holds ``items[u, :degree[u]]``.  ``cooccurrence[a, b]`` is the number of
    users holding both ``a`` and ``b`` (the diagonal stays zero).

    If ``selection_weight`` is given, weighted counts
    ``sum_i w_ia w_ib`` and ``sum_i w_ia`` are tracked too, with
    ``w = selection_weight`` for edges acquired by deliberate selection and
    1 otherwise.
    """

    def __init__(self, n_users: int, n_items: int, selection_weight: float | None = None):
        if n_users < 1 or n_items < 1:
            raise ValueError("need at least one user and one item")
        self.n_users = n_users
        self.n_items = n_items
        self.items = np.zeros((n_users, n_items), dtype=np.int32)
        self.degree = np.zeros(n_users, dtype=np.int32)
        self.provenance = np.zeros((n_users, n_items), dtype=np.int8)
        self.held = np.zeros((n_users, n_items), dtype=np.bool_)
        self.item_degree = np.zeros(n_items, dtype=np.int64)
        self.cooccurrence = np.zeros((n_items, n_items), dtype=np.int32)
        self.selection_weight = selection_weight
        if selection_weight is None:
            self.weighted_cooccurrence = np.zeros((0, 0))
            self.weighted_degree = np.zeros(0)
        else:
            self.weighted_cooccurrence = np.zeros((n_items, n_items))
            self.weighted_degree = np.zeros(n_items)

    @classmethod
    def from_collections(cls, n_items, collections, provenance=None, selection_weight=None):
        """Build a state from per-user item lists, computing counts from scratch."""
        state = cls(len(collections), n_items, selection_weight)
        for u, coll in enumerate(collections):
            coll = np.asarray(coll, dtype=np.int32)
            if len(np.unique(coll)) != len(coll):
                raise ValueError(f"user {u} holds a duplicate item")
            d = len(coll)
            state.items[u, :d] = coll
            state.degree[u] = d
            state.held[u, coll] = True
            if provenance is not None:
                state.provenance[u, :d] = provenance[u]
        state.recount()
        return state

    @property
    def tracks_weights(self) -> bool:
        return self.selection_weight is not None

    def collection(self, u: int) -> np.ndarray:
        return self.items[u, : self.degree[u]]

    def edge_provenance(self, u: int) -> np.ndarray:
        return self.provenance[u, : self.degree[u]]

    def edge_weights(self, bias: float) -> np.ndarray:
        """Dense ``(n_users, n_items)`` adjacency with selection edges weighted by ``bias``."""
        w = np.zeros((self.n_users, self.n_items))
        for u in range(self.n_users):
            d = self.degree[u]
            w[u, self.items[u, :d]] = np.where(self.provenance[u, :d] == SELECTION, bias, 1.0)
        return w

    def recount(self):
        """Recompute every derived count from the collections (brute force)."""
        cooc, deg = brute_force_counts(self)
        self.cooccurrence[:] = cooc
        self.item_degree[:] = deg
        if self.tracks_weights:
            wcooc, wdeg = brute_force_weighted_counts(self, self.selection_weight)
            self.weighted_cooccurrence[:] = wcooc
            self.weighted_degree[:] = wdeg

    def add_item(self, user: int, item: int, prov: int):
        if self.held[user, item]:
            raise ValueError(f"user {user} already holds item {item}")
        if prov not in PROVENANCE_NAMES:
            raise ValueError(f"unknown provenance {prov!r}")
        if self.tracks_weights:
            wa = self.selection_weight if prov == SELECTION else 1.0
            _weighted_update(self.items, self.degree, self.provenance, self.weighted_cooccurrence,
                             self.weighted_degree, user, item, wa, self.selection_weight, 1.0, -1)
        _add_edge(self.items, self.degree, self.provenance, self.held, self.item_degree,
                  self.cooccurrence, user, item, prov)

    def remove_item(self, user: int, item: int):
        if not self.held[user, item]:
            raise ValueError(f"user {user} does not hold item {item}")
        slot = int(np.flatnonzero(self.collection(user) == item)[0])
        if self.tracks_weights:
            wa = self.selection_weight if self.provenance[user, slot] == SELECTION else 1.0
            _weighted_update(self.items, self.degree, self.provenance, self.weighted_cooccurrence,
                             self.weighted_degree, user, item, wa, self.selection_weight, -1.0, slot)
        _remove_slot(self.items, self.degree, self.provenance, self.held, self.item_degree,
                     self.cooccurrence, user, slot)

    def copy(self) -> BipartiteState:
        new = BipartiteState.__new__(BipartiteState)
        new.__dict__.update({k: (v.copy() if isinstance(v, np.ndarray) else v)
                             for k, v in self.__dict__.items()})
        return new

    def equals(self, other: BipartiteState) -> bool:
        """Bit-level equality of collections, provenance and counts."""
        if (self.n_users, self.n_items) != (other.n_users, other.n_items):
            return False
        names = ["items", "degree", "provenance", "held", "item_degree", "cooccurrence",
                 "weighted_cooccurrence", "weighted_degree"]
        return all(np.array_equal(getattr(self, n), getattr(other, n)) for n in names)

    def write_snapshot(self, path):
        """Write the edge list as CSV ``user_id,item_id,provenance``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["user_id", "item_id", "provenance"])
            for u in range(self.n_users):
                for j in range(self.degree[u]):
                    w.writerow([u, int(self.items[u, j]), PROVENANCE_NAMES[int(self.provenance[u, j])]])


def read_snapshot(path, n_items=None, selection_weight=None) -> BipartiteState:
    """Inverse of :meth:`BipartiteState.write_snapshot` (user ids must be dense)."""
    codes = {v: k for k, v in PROVENANCE_NAMES.items()}
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append((int(rec["user_id"]), int(rec["item_id"]), codes[rec["provenance"]]))
    n_users = max(r[0] for r in rows) + 1 if rows else 0
    if n_items is None:
        n_items = max(r[1] for r in rows) + 1
    colls = [[] for _ in range(n_users)]
    provs = [[] for _ in range(n_users)]
    for u, a, p in rows:
        colls[u].append(a)
        provs[u].append(p)
    return BipartiteState.from_collections(n_items, colls, provs, selection_weight)


def adjacency(state: BipartiteState) -> np.ndarray:
    return state.held.astype(np.int64)


def brute_force_counts(state: BipartiteState):
    """Co-occurrence ``A^T A`` (zero diagonal) and item degrees from the binary adjacency."""
    a = adjacency(state)
    cooc = a.T @ a
    deg = np.diag(cooc).copy()
    np.fill_diagonal(cooc, 0)
    return cooc, deg


def brute_force_weighted_counts(state: BipartiteState, bias: float):
    w = state.edge_weights(bias)
    wcooc = w.T @ w
    np.fill_diagonal(wcooc, 0.0)
    return wcooc, w.sum(axis=0)


def verify_against_oracle(state: BipartiteState) -> bool:
    """True iff the maintained counts equal a fresh recomputation from the collections."""
    for u in range(state.n_users):
        coll = state.collection(u)
        if state.held[u].sum() != len(coll) or not state.held[u, coll].all():
            return False
    cooc, deg = brute_force_counts(state)
    ok = np.array_equal(cooc, state.cooccurrence) and np.array_equal(deg, state.item_degree)
    if ok and state.tracks_weights:
        wcooc, wdeg = brute_force_weighted_counts(state, state.selection_weight)
        ok = np.allclose(wcooc, state.weighted_cooccurrence, rtol=0, atol=1e-9) and \
            np.allclose(wdeg, state.weighted_degree, rtol=0, atol=1e-9)
    return bool(ok)


@dataclass
class TasteMap:
    """User tastes and item genres.

    ``user_tastes`` has shape ``(n_users, 2)``; the second column is -1 for
    single-taste users.  Column 0 is "taste 1".
    """

    user_tastes: np.ndarray
    item_genre: np.ndarray
    n_genres: int

    @property
    def two_taste(self) -> bool:
        return bool((self.user_tastes[:, 1] >= 0).any())

    def matches(self, user: int, item: int) -> bool:
        g = self.item_genre[item]
        return bool(g == self.user_tastes[user, 0] or g == self.user_tastes[user, 1])

    def genre_items(self, g: int) -> np.ndarray:
        return np.flatnonzero(self.item_genre == g)


def partition(n: int, groups: int) -> np.ndarray:
    """Assign ids ``0..n-1`` to ``groups`` contiguous blocks whose sizes differ by at most one."""
    return (np.arange(n, dtype=np.int64) * groups // n).astype(np.int32)


def new_synthetic(config, rng: np.random.Generator):
    """Initial state and taste map for a synthetic world.

    Draw order on ``rng``: taste pairs (two-taste mode only), then one
    ``(n_users, n_items)`` block of uniforms whose row-wise argsort gives
    every user's initial collection.
    """
    n, m, g, k = config.n_users, config.n_items, config.n_genres, config.k
    if n < 1:
        raise ValueError("n_users must be >= 1")
    if g < 1 or g > m:
        raise ValueError(f"need 1 <= G <= M, got G={g}, M={m}")
    if k >= m:
        raise ValueError(f"need k < M, got k={k}, M={m}")
    if k < 1:
        raise ValueError("k must be >= 1")

    item_genre = partition(m, g)
    tastes = np.full((n, 2), -1, dtype=np.int32)
    if config.mode == "two_taste":
        if g < 2:
            raise ValueError("two-taste mode needs G >= 2")
        tastes[:] = np.argsort(rng.random((n, g)), axis=1)[:, :2]
    else:
        tastes[:, 0] = partition(n, g)
    taste_map = TasteMap(tastes, item_genre, g)

    keys = rng.random((n, m))
    if config.init == "taste_matched":
        # own-taste items sort first; the rest fill in if the taste is too small
        own = (item_genre[None, :] == tastes[:, :1]) | (item_genre[None, :] == tastes[:, 1:])
        keys = keys - own
    elif config.init != "uniform":
        raise ValueError(f"unknown init {config.init!r}")
    initial = np.argsort(keys, axis=1)[:, :k]

    bias = config.recommender.bias if config.recommender.bias_scope == "everywhere" else None
    state = BipartiteState(n, m, bias)
    for u in range(n):
        for a in initial[u]:
            state.add_item(u, int(a), INITIAL)
    return state, taste_map
